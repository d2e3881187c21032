"""Slow, transparent reference implementations.

Each function here recomputes a quantity from the raw cell values with plain
loops and no shared pyramid, so the fast paths elsewhere can be checked
against an independent answer.  Nothing in this module is meant to be quick.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .cubes import DyadicCube, descendants
from .epsilon import EpsilonCollection
from .grid import GridFunction


def average_direct(f: GridFunction, cube: DyadicCube) -> float:
    """Mean of the raw cell values inside the cube, no pyramid."""
    block = f.shaped_values[f.cube_slice(cube)]
    return float(block.sum() / block.size)


def maximal_bruteforce(f: GridFunction, eps: EpsilonCollection | None = None) -> GridFunction:
    """Per cell, walk every ancestor up to the root and take the best
    (weighted) average of |f|.  Quadratic-ish and proud of it."""
    g = np.abs(f.shaped_values)
    out = np.zeros_like(g)
    root = f.root
    for d in range(f.depth + 1):
        lvl = root.level + d
        side = 1 << d
        base = tuple(c * side for c in root.corner)
        for idx in itertools.product(range(side), repeat=f.dimension):
            q = DyadicCube(lvl, tuple(b + i for b, i in zip(base, idx)))
            block = g[f.cube_slice(q)]
            a = float(block.sum() / block.size)
            if eps is not None:
                a *= eps.value(q)
            sl = f.cube_slice(q)
            out[sl] = np.maximum(out[sl], a)
    return f.replace_values(out.ravel())


def superlevel_cells(f: GridFunction, eps: EpsilonCollection, lam: float) -> np.ndarray:
    """Boolean mask of cells covered by some cube with eps * avg|f| > lam."""
    g = np.abs(f.shaped_values)
    mask = np.zeros(g.shape, dtype=bool)
    root = f.root
    for d in range(1, f.depth + 1):
        lvl = root.level + d
        side = 1 << d
        base = tuple(c * side for c in root.corner)
        for idx in itertools.product(range(side), repeat=f.dimension):
            q = DyadicCube(lvl, tuple(b + i for b, i in zip(base, idx)))
            block = g[f.cube_slice(q)]
            if eps.value(q) * float(block.sum() / block.size) > lam:
                mask[f.cube_slice(q)] = True
    return mask


def haar_multiplier_direct(f: GridFunction, eps: EpsilonCollection,
                           mode: str = "full_support") -> GridFunction:
    """Cube-by-cube weighted Haar sum, building each bump explicitly."""
    from .operators import haar_coefficient, haar_function

    out = np.zeros(f.shaped_values.shape)
    for d in range(1, f.depth + 1):
        for q in descendants(f.root, d):
            c = haar_coefficient(f, q, mode)
            h = haar_function(q, f.root, f.depth)
            out += eps.value(q) * c * h.shaped_values
    return f.replace_values(out.ravel())


def sparse_operator_direct(f: GridFunction, cubes, eps: EpsilonCollection) -> GridFunction:
    out = np.zeros(f.shaped_values.shape)
    for q in cubes:
        out[f.cube_slice(q)] += eps.value(q) * average_direct(f, q)
    return f.replace_values(out.ravel())


def cz_audit(f: GridFunction, eps: EpsilonCollection, lam: float,
             select_lam: float | None = None) -> dict:
    """Decompose at `select_lam` (default `lam`) and audit against `lam`.

    Checks, with no floating slack on the set comparisons:
      union_exact  cells covered by the cubes == brute-force superlevel cells
      disjoint     per-cube cell counts add up to the union size
      bounds_ok    lam < eps * avg <= 2^n lam at relative tolerance 1e-12
    Passing select_lam != lam is the harness self-test: it must break the
    audit, proving the checks can fail.
    """
    from .operators import cz_decompose

    result = cz_decompose(f, eps, lam if select_lam is None else select_lam)
    mask = np.zeros(f.shaped_values.shape, dtype=bool)
    covered = 0
    for q in result.cubes:
        sl = f.cube_slice(q)
        mask[sl] = True
        covered += int(np.prod([s.stop - s.start for s in sl]))
    expected = superlevel_cells(f, eps, lam)
    union_exact = bool(np.array_equal(mask, expected))
    disjoint = covered == int(mask.sum())
    upper = (1 << f.dimension) * lam
    worst = 0.0
    for wa in result.weighted_averages():
        low_miss = (lam - wa) / lam  # positive iff the floor is violated
        high_miss = (wa - upper) / upper
        worst = max(worst, low_miss, high_miss)
    return {"union_exact": union_exact, "disjoint": disjoint,
            "bounds_ok": worst <= 1e-12, "count": len(result.cubes),
            "worst_bound_excess": worst}


def modular_direct(f: GridFunction, p) -> float:
    """sum |f|^p(center) |cell| with a python loop over cells."""
    total = 0.0
    centers = f.cell_centers()
    vals = f.values
    for i in range(vals.size):
        v = abs(float(vals[i]))
        if v > 0.0:
            total += v ** p.evaluate(tuple(centers[i])) * f.cell_volume
    return total


def classical_norm_constant(c: float, volume: float, p: float) -> float:
    """Norm of the constant c on a domain of given volume when p is constant:
    |c| * volume^(1/p)."""
    if p <= 1.0 or not math.isfinite(p):
        raise ValueError("need a finite exponent above 1")
    return abs(c) * volume ** (1.0 / p)
