"""Piecewise-constant functions on a uniformly refined dyadic cube.

A `GridFunction` carries one value per cell of the 2^(n*depth) uniform
subdivision of a root cube, stored in row-major (C) order.  Per-level block
sums are precomputed once, so the exact average over any dyadic subcube of
admissible depth is an O(1) lookup.  Values below cell resolution are
undefined by design: nothing here ever subdivides a cell.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .cubes import DyadicCube


class DomainError(ValueError):
    """A cube fell outside the root, below resolution, or grids mismatch."""


def coarsen_sum(arr: np.ndarray) -> np.ndarray:
    """Halve every axis, summing over 2-blocks."""
    for ax in range(arr.ndim):
        shape = arr.shape
        arr = arr.reshape(shape[:ax] + (shape[ax] // 2, 2) + shape[ax + 1:]).sum(axis=ax + 1)
    return arr


def upsample(arr: np.ndarray, factor: int) -> np.ndarray:
    """Repeat each entry `factor` times along every axis."""
    for ax in range(arr.ndim):
        arr = np.repeat(arr, factor, axis=ax)
    return arr


class GridFunction:
    """Cell values plus a pyramid of exact per-level block sums."""

    def __init__(self, root: DyadicCube, depth: int, values) -> None:
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        n = root.dimension
        side = 1 << depth
        vals = np.asarray(values, dtype=np.float64)
        if vals.size != side ** n:
            raise ValueError(f"expected {side ** n} cell values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("cell values must be finite")
        self._root = root
        self._depth = depth
        self._vals = vals.reshape((side,) * n).copy()
        self._vals.setflags(write=False)
        # sums[d] holds the value sums over the 2^(n*d) level-(root+d) blocks
        sums = [self._vals]
        for _ in range(depth):
            sums.append(coarsen_sum(sums[-1]))
        sums.reverse()
        for s in sums:
            s.setflags(write=False)
        self._sums = sums

    # -- construction -----------------------------------------------------

    @classmethod
    def constant(cls, root: DyadicCube, depth: int, value: float) -> "GridFunction":
        n = root.dimension
        return cls(root, depth, np.full((1 << depth) ** n, float(value)))

    @classmethod
    def from_sampler(cls, root: DyadicCube, depth: int,
                     sampler: Callable[[tuple[float, ...]], float]) -> "GridFunction":
        """Evaluate `sampler` at every cell center."""
        n = root.dimension
        side = 1 << depth
        cell_side = 2.0 ** (-(root.level + depth))
        base = tuple(c * side for c in root.corner)
        vals = np.empty((side,) * n, dtype=np.float64)
        for idx in np.ndindex(*vals.shape):
            point = tuple((b + i + 0.5) * cell_side for b, i in zip(base, idx))
            vals[idx] = sampler(point)
        return cls(root, depth, vals.ravel())

    @classmethod
    def indicator(cls, root: DyadicCube, depth: int, cube: DyadicCube) -> "GridFunction":
        """Characteristic function of a dyadic subcube."""
        f = cls.constant(root, depth, 0.0)
        vals = f._vals.copy()
        vals[f.cube_slice(cube)] = 1.0
        return cls(root, depth, vals.ravel())

    # -- basic accessors ----------------------------------------------------

    @property
    def root(self) -> DyadicCube:
        return self._root

    @property
    def depth(self) -> int:
        return self._depth

    @property
    def dimension(self) -> int:
        return self._root.dimension

    @property
    def cell_level(self) -> int:
        return self._root.level + self._depth

    @property
    def cell_volume(self) -> float:
        return 2.0 ** (-self.dimension * self.cell_level)

    @property
    def n_cells(self) -> int:
        return self._vals.size

    @property
    def values(self) -> np.ndarray:
        """Read-only flat view, row-major over cells."""
        return self._vals.reshape(-1)

    @property
    def shaped_values(self) -> np.ndarray:
        return self._vals

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self._vals)))

    def cell_centers(self) -> np.ndarray:
        """Array of shape (n_cells, n) with cell centers in flat order."""
        n = self.dimension
        side = 1 << self._depth
        cell_side = 2.0 ** (-self.cell_level)
        axes = [(self._root.corner[a] * side + np.arange(side) + 0.5) * cell_side
                for a in range(n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    # -- cube lookups -------------------------------------------------------

    def _cube_offsets(self, cube: DyadicCube) -> tuple[int, tuple[int, ...]]:
        """Relative depth and per-axis block offsets of `cube` inside the root."""
        if cube.dimension != self.dimension:
            raise DomainError("cube dimension does not match the grid")
        d = cube.level - self._root.level
        if d < 0 or d > self._depth:
            raise DomainError("cube level outside the resolved range")
        offs = tuple(c - (r << d) for c, r in zip(cube.corner, self._root.corner))
        if any(o < 0 or o >= (1 << d) for o in offs):
            raise DomainError("cube lies outside the root")
        return d, offs

    def cube_slice(self, cube: DyadicCube) -> tuple[slice, ...]:
        """Index window of the cube's cells in the shaped value array."""
        d, offs = self._cube_offsets(cube)
        w = 1 << (self._depth - d)
        return tuple(slice(o * w, (o + 1) * w) for o in offs)

    def average(self, cube: DyadicCube) -> float:
        """Exact mean of the cell values over `cube` (O(1) via block sums)."""
        d, offs = self._cube_offsets(cube)
        block = self._sums[d][offs]
        return float(block) / (1 << (self.dimension * (self._depth - d)))

    def integral_over(self, cube: DyadicCube) -> float:
        d, offs = self._cube_offsets(cube)
        return float(self._sums[d][offs]) * self.cell_volume

    def integral(self) -> float:
        return float(self._sums[0].ravel()[0]) * self.cell_volume

    def level_sum_array(self, rel_depth: int) -> np.ndarray:
        """Value sums over all blocks `rel_depth` levels below the root."""
        if rel_depth < 0 or rel_depth > self._depth:
            raise DomainError("no aggregate at this depth")
        return self._sums[rel_depth]

    def level_average_array(self, rel_depth: int) -> np.ndarray:
        count = 1 << (self.dimension * (self._depth - rel_depth))
        return self.level_sum_array(rel_depth) / count

    def level_integral_array(self, rel_depth: int) -> np.ndarray:
        return self.level_sum_array(rel_depth) * self.cell_volume

    # -- arithmetic ---------------------------------------------------------

    def _check_compatible(self, other: "GridFunction") -> None:
        if self._root != other._root or self._depth != other._depth:
            raise DomainError("grid functions live on different grids")

    def replace_values(self, values) -> "GridFunction":
        return GridFunction(self._root, self._depth, np.asarray(values).ravel())

    def abs(self) -> "GridFunction":
        return self.replace_values(np.abs(self._vals))

    def scale(self, c: float) -> "GridFunction":
        return self.replace_values(self._vals * float(c))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_compatible(other)
        return self.replace_values(self._vals + other._vals)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check_compatible(other)
        return self.replace_values(self._vals - other._vals)

    def __mul__(self, other: "GridFunction") -> "GridFunction":
        self._check_compatible(other)
        return self.replace_values(self._vals * other._vals)

    def __neg__(self) -> "GridFunction":
        return self.scale(-1.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridFunction):
            return NotImplemented
        return (self._root == other._root and self._depth == other._depth
                and np.array_equal(self._vals, other._vals))

    def __repr__(self) -> str:
        return (f"GridFunction(root={self._root.token()!r}, depth={self._depth}, "
                f"cells={self.n_cells})")


def write_function_csv(f: GridFunction, csv_path: str | Path,
                       header_path: str | Path | None = None) -> None:
    """Dump cells as "cell_index,value" rows plus a JSON sidecar header."""
    csv_path = Path(csv_path)
    if header_path is None:
        header_path = csv_path.with_suffix(".json")
    lines = ["cell_index,value"]
    lines.extend(f"{i},{float(v)!r}" for i, v in enumerate(f.values))
    csv_path.write_text("\n".join(lines) + "\n")
    header = {"dimension": f.dimension, "root": f.root.token(), "depth": f.depth}
    Path(header_path).write_text(json.dumps(header, indent=2) + "\n")


def read_function_csv(csv_path: str | Path,
                      header_path: str | Path | None = None) -> GridFunction:
    csv_path = Path(csv_path)
    if header_path is None:
        header_path = csv_path.with_suffix(".json")
    header = json.loads(Path(header_path).read_text())
    root = DyadicCube.from_token(header["root"])
    depth = int(header["depth"])
    if int(header["dimension"]) != root.dimension:
        raise ValueError("header dimension contradicts the root token")
    rows = csv_path.read_text().strip().splitlines()
    if rows[0] != "cell_index,value":
        raise ValueError("unexpected CSV header")
    values = np.empty(len(rows) - 1, dtype=np.float64)
    for row in rows[1:]:
        idx_text, val_text = row.split(",")
        values[int(idx_text)] = float(val_text)
    return GridFunction(root, depth, values)
