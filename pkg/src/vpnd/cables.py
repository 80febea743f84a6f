"""Cable types: a concave cost function as the lower envelope of lines.

A cable ``(sigma, delta)`` costs ``sigma + delta * x`` per unit edge cost when
it carries ``x`` units. Every linear piece of a concave ``f`` is one cable;
``prune_cables`` then keeps a geometrically spaced subset of fixed costs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .instance import ConcaveCost, InstanceFormatError, _rat, _tokens, format_rational


@dataclass(frozen=True)
class CableType:
    sigma: Fraction
    delta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "sigma", Fraction(self.sigma))
        object.__setattr__(self, "delta", Fraction(self.delta))
        if self.sigma < 0 or self.delta < 0:
            raise ValueError("cable costs must be nonnegative")

    def cost(self, x: Fraction) -> Fraction:
        return self.sigma + self.delta * x


@dataclass(frozen=True)
class CableList:
    """Cables with strictly increasing sigma and strictly decreasing delta."""

    cables: tuple[CableType, ...]

    def __post_init__(self):
        cables = tuple(c if isinstance(c, CableType) else CableType(*c) for c in self.cables)
        if not cables:
            raise ValueError("cable list is empty")
        for a, b in zip(cables, cables[1:]):
            if not (a.sigma < b.sigma and a.delta > b.delta):
                raise ValueError("cables must have increasing sigma and decreasing delta")
        object.__setattr__(self, "cables", cables)

    def __len__(self):
        return len(self.cables)

    def __iter__(self):
        return iter(self.cables)

    def __getitem__(self, i):
        return self.cables[i]

    def envelope(self, x: Fraction | int) -> Fraction:
        x = Fraction(x)
        return min(c.cost(x) for c in self.cables)

    def best_cable(self, x: Fraction | int) -> int:
        """Index of the cheapest cable at load ``x`` (lowest index on ties)."""
        x = Fraction(x)
        costs = [c.cost(x) for c in self.cables]
        return costs.index(min(costs))


def segments_to_cables(f: ConcaveCost) -> CableList:
    return CableList(tuple(CableType(y0 - slope * x0, slope) for x0, y0, slope in f.segments))


def prune_cables(cables: CableList, ratio: Fraction | int = 2) -> CableList:
    """Drop cables whose fixed cost is within ``ratio`` of a kept costlier one.

    Scans from the largest sigma down. The last cable is always kept; a cable
    is dropped when the nearest kept cable to its right has
    ``sigma < ratio * sigma_dropped``. That kept cable is then cheaper per unit
    and at most ``ratio`` times dearer in fixed cost, which yields
    ``envelope <= pruned envelope <= ratio * envelope`` everywhere.
    """
    ratio = Fraction(ratio)
    if ratio <= 1:
        raise ValueError("pruning ratio must exceed 1")
    kept = [cables[-1]]
    for c in reversed(cables.cables[:-1]):
        if kept[-1].sigma < ratio * c.sigma:
            continue
        kept.append(c)
    return CableList(tuple(reversed(kept)))


def serialize_cables(cables: CableList) -> str:
    return "".join(
        f"cable {format_rational(c.sigma)} {format_rational(c.delta)}\n" for c in cables
    )


def parse_cables(text: str) -> CableList:
    out = []
    for lineno, parts in _tokens(text):
        if parts[0] != "cable" or len(parts) != 3:
            raise InstanceFormatError(lineno, "expected 'cable SIGMA DELTA'")
        out.append(CableType(_rat(lineno, parts[1]), _rat(lineno, parts[2])))
    try:
        return CableList(tuple(out))
    except ValueError as exc:
        raise InstanceFormatError(0, str(exc)) from None
