"""Dyadic cubes with exact integer arithmetic.

A cube at level k with integer corner (m1, ..., mn) is the half-open box

    prod_i [ mi * 2^-k, (mi + 1) * 2^-k ),

so the side length is 2^-k and the volume 2^(-n*k).  Negative levels give
cubes larger than the unit cube.  Ancestry, containment and equality are
decided purely on the integer data (arithmetic shifts floor correctly for
negative corners); floating point enters only when locating real points or
reporting geometry.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence


class CubeRelation(Enum):
    """Outcome of comparing two dyadic cubes of equal dimension."""

    DISJOINT = "disjoint"
    EQUAL = "equal"
    Q1_INSIDE_Q2 = "q1_inside_q2"
    Q2_INSIDE_Q1 = "q2_inside_q1"


@dataclass(frozen=True)
class DyadicCube:
    level: int
    corner: tuple[int, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.level, int):
            raise TypeError("level must be an integer")
        corner = tuple(int(c) for c in self.corner)
        if not corner:
            raise ValueError("corner needs at least one coordinate")
        object.__setattr__(self, "corner", corner)

    # -- geometry ---------------------------------------------------------

    @property
    def dimension(self) -> int:
        return len(self.corner)

    @property
    def side(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def volume(self) -> float:
        return 2.0 ** (-self.dimension * self.level)

    def volume_units(self, scale_level: int) -> int:
        """Exact volume counted in cells of the finer `scale_level`.

        Returns 2^(n*(scale_level - level)) as a Python int, which lets
        callers compare sums of volumes with zero tolerance.
        """
        if scale_level < self.level:
            raise ValueError("scale_level must be at least the cube level")
        return 1 << (self.dimension * (scale_level - self.level))

    def lower(self) -> tuple[float, ...]:
        s = self.side
        return tuple(c * s for c in self.corner)

    def upper(self) -> tuple[float, ...]:
        s = self.side
        return tuple((c + 1) * s for c in self.corner)

    def center(self) -> tuple[float, ...]:
        s = self.side
        return tuple((c + 0.5) * s for c in self.corner)

    # -- tree structure ---------------------------------------------------

    def parent(self) -> "DyadicCube":
        # >> floors toward -inf, so negative corners work unchanged
        return DyadicCube(self.level - 1, tuple(c >> 1 for c in self.corner))

    def children(self) -> list["DyadicCube"]:
        """The 2^n subcubes of the next level, in row-major bit order."""
        lvl = self.level + 1
        out = []
        for bits in itertools.product((0, 1), repeat=self.dimension):
            out.append(DyadicCube(lvl, tuple(2 * c + b for c, b in zip(self.corner, bits))))
        return out

    def ancestor_at(self, level: int) -> "DyadicCube":
        shift = self.level - level
        if shift < 0:
            raise ValueError("ancestor level must not exceed the cube level")
        return DyadicCube(level, tuple(c >> shift for c in self.corner))

    def contains(self, other: "DyadicCube") -> bool:
        """Set containment other subset-of self (equality counts)."""
        if other.dimension != self.dimension:
            raise ValueError("dimension mismatch")
        if other.level < self.level:
            return False
        return other.ancestor_at(self.level) == self

    def contains_point(self, point: Sequence[float]) -> bool:
        if len(point) != self.dimension:
            raise ValueError("dimension mismatch")
        scale = 2.0 ** self.level
        return all(math.floor(x * scale) == c for x, c in zip(point, self.corner))

    # -- serialization ----------------------------------------------------

    def token(self) -> str:
        """Compact text form "level:c1,c2,...", e.g. "3:5,2"."""
        return f"{self.level}:{','.join(str(c) for c in self.corner)}"

    @classmethod
    def from_token(cls, text: str) -> "DyadicCube":
        try:
            lvl_part, corner_part = text.split(":")
            return cls(int(lvl_part), tuple(int(c) for c in corner_part.split(",")))
        except (ValueError, AttributeError) as exc:
            raise ValueError(f"malformed cube token {text!r}") from exc

    def __repr__(self) -> str:
        return f"DyadicCube(level={self.level}, corner={self.corner})"


def relation(q1: DyadicCube, q2: DyadicCube) -> CubeRelation:
    """Classify the pair: equal, nested either way, or disjoint.

    Dyadic structure leaves no other possibility, so the trichotomy is
    decided entirely by shifting the deeper corner up to the coarser level.
    """
    if q1.dimension != q2.dimension:
        raise ValueError("cubes of different dimension cannot be compared")
    if q1.level == q2.level:
        return CubeRelation.EQUAL if q1.corner == q2.corner else CubeRelation.DISJOINT
    if q1.level > q2.level:
        if q1.ancestor_at(q2.level) == q2:
            return CubeRelation.Q1_INSIDE_Q2
        return CubeRelation.DISJOINT
    if q2.ancestor_at(q1.level) == q1:
        return CubeRelation.Q2_INSIDE_Q1
    return CubeRelation.DISJOINT


def cube_at(point: Sequence[float], level: int) -> DyadicCube:
    """The unique level-`level` cube containing `point`.

    Corner coordinates are floor(x * 2^level); the half-open convention
    means boundary points belong to the cube on their right.
    """
    if not len(point):
        raise ValueError("point needs at least one coordinate")
    scale = 2.0 ** level
    return DyadicCube(level, tuple(math.floor(x * scale) for x in point))


def descendants(root: DyadicCube, relative_depth: int) -> Iterable[DyadicCube]:
    """All subcubes exactly `relative_depth` levels below `root`."""
    if relative_depth < 0:
        raise ValueError("relative_depth must be nonnegative")
    side = 1 << relative_depth
    lvl = root.level + relative_depth
    base = tuple(c * side for c in root.corner)
    for offs in itertools.product(range(side), repeat=root.dimension):
        yield DyadicCube(lvl, tuple(b + o for b, o in zip(base, offs)))
