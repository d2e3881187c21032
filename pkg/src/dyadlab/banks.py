"""Deterministic test-function banks.

Randomness comes from an explicit 64-bit linear congruential generator so a
seed pins every bank bit-for-bit across runs and platforms.  Random cell
values are quantized to the lattice 2^-19 Z; sums of a few thousand such
values stay exact in double precision, which keeps block averages reproducible
no matter how they are grouped.
"""

from __future__ import annotations

import numpy as np

from .cubes import DyadicCube
from .grid import GridFunction

BANK_KINDS = ("indicators", "random_cells", "haar_like")

_LCG_MUL = 6364136223846793005
_LCG_INC = 1442695040888963407
_MASK64 = (1 << 64) - 1


class Lcg:
    """Knuth MMIX multiplier, output = top 32 bits of the state."""

    def __init__(self, seed: int):
        self.state = (seed ^ 0x9E3779B97F4A7C15) & _MASK64
        self.u32()  # discard one step so nearby seeds separate

    def u32(self) -> int:
        self.state = (self.state * _LCG_MUL + _LCG_INC) & _MASK64
        return self.state >> 32

    def uniform(self) -> float:
        """In [0, 1), granularity 2^-32."""
        return self.u32() / 4294967296.0

    def below(self, n: int) -> int:
        """In [0, n), by rejection so there is no modulo bias."""
        if n <= 0:
            raise ValueError("need a positive bound")
        limit = (4294967296 // n) * n
        while True:
            u = self.u32()
            if u < limit:
                return u % n

    def quantized_unit(self) -> float:
        """In [-1, 1), on the lattice 2^-19 Z (exactly representable)."""
        return ((self.u32() >> 12) - (1 << 19)) / float(1 << 19)


def _random_cube(rng: Lcg, root: DyadicCube, depth: int) -> DyadicCube:
    d = rng.below(depth + 1)
    side = 1 << d
    corner = tuple(c * side + rng.below(side) for c in root.corner)
    return DyadicCube(root.level + d, corner)


def build_bank(kind: str, count: int, seed: int,
               root: DyadicCube, depth: int) -> list[GridFunction]:
    """`count` grid functions of the requested kind on the (root, depth) grid.

    indicators    indicator of a random subcube, all scales equally likely
    random_cells  iid lattice-quantized cell values in [-1, 1)
    haar_like     random subcube Q split in half along a random axis, +1/-1
    """
    if kind not in BANK_KINDS:
        raise ValueError(f"unknown bank kind {kind!r}")
    if count <= 0:
        raise ValueError("need a positive count")
    rng = Lcg(seed)
    n = root.dimension
    bank: list[GridFunction] = []
    for _ in range(count):
        if kind == "indicators":
            bank.append(GridFunction.indicator(root, depth, _random_cube(rng, root, depth)))
        elif kind == "random_cells":
            vals = np.array([rng.quantized_unit() for _ in range(1 << (n * depth))])
            bank.append(GridFunction(root, depth, vals))
        else:
            if depth < 1:
                raise ValueError("haar_like needs depth >= 1")
            q = _random_cube(rng, root, depth - 1)  # room for one split
            axis = rng.below(n)
            base = GridFunction.indicator(root, depth, q)
            block = np.zeros(base.shaped_values.shape)
            sl = list(base.cube_slice(q))
            width = sl[axis].stop - sl[axis].start
            lo = list(sl)
            lo[axis] = slice(sl[axis].start, sl[axis].start + width // 2)
            hi = list(sl)
            hi[axis] = slice(sl[axis].start + width // 2, sl[axis].stop)
            block[tuple(lo)] = 1.0
            block[tuple(hi)] = -1.0
            bank.append(GridFunction(root, depth, block.ravel()))
    return bank
