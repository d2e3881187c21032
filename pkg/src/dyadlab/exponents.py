"""Variable exponent functions, modulars, Luxemburg norms, and regularity checks.

An exponent function p assigns each point a value in (1, inf).  On a grid it
is represented by its values at cell centers, so the modular of a grid
function f is the exact sum

    rho(f) = sum_cells |f(cell)|^p(center) * |cell|

and the Luxemburg norm is the unique lambda with rho(f / lambda) = 1,
located by bisection.  The condition checkers quantify how much p oscillates
over a family of dyadic cubes, with or without a per-cube weight.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .cubes import DyadicCube, cube_at
from .grid import DomainError, GridFunction, upsample

LN2 = math.log(2.0)


def conjugate_value(p: float) -> float:
    """Holder conjugate p' with 1/p + 1/p' = 1."""
    if not 1.0 < p < math.inf:
        raise ValueError("conjugation needs 1 < p < inf")
    return p / (p - 1.0)


def _as_point(x) -> tuple[float, ...]:
    if isinstance(x, (int, float, np.floating)):
        return (float(x),)
    return tuple(float(c) for c in x)


class ExponentFunction:
    """Base interface; concrete exponents override the evaluation hooks."""

    def evaluate(self, x) -> float:
        raise NotImplementedError

    def p_range(self, cube: DyadicCube) -> tuple[float, float]:
        """(essential inf, essential sup) of p over the cube."""
        raise NotImplementedError

    def bounds(self) -> tuple[float, float]:
        """Global (p_minus, p_plus) over the exponent's domain."""
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError

    def cell_values(self, root: DyadicCube, depth: int) -> np.ndarray:
        """Exponent per grid cell (flat, row-major); default samples centers."""
        probe = GridFunction.constant(root, depth, 0.0)
        centers = probe.cell_centers()
        return np.array([self.evaluate(tuple(pt)) for pt in centers])

    def conjugate(self) -> "ExponentFunction":
        return ConjugateExponent(self)


class ConstantExponent(ExponentFunction):
    def __init__(self, p: float) -> None:
        p = float(p)
        if not 1.0 < p < math.inf:
            raise ValueError("exponent must satisfy 1 < p < inf")
        self.p = p

    def evaluate(self, x) -> float:
        return self.p

    def p_range(self, cube: DyadicCube) -> tuple[float, float]:
        return (self.p, self.p)

    def bounds(self) -> tuple[float, float]:
        return (self.p, self.p)

    def cell_values(self, root: DyadicCube, depth: int) -> np.ndarray:
        return np.full((1 << depth) ** root.dimension, self.p)

    def conjugate(self) -> "ExponentFunction":
        return ConstantExponent(conjugate_value(self.p))

    def descriptor(self) -> dict:
        return {"kind": "constant", "p": self.p}


class LogRampExponent(ExponentFunction):
    """One-dimensional ramp from 2 to 3 driven by a logarithmic power.

        p(x) = 2                       x <= 0
        p(x) = 2 + log2(2/x)^(-a)      0 < x < 1
        p(x) = 3                       x >= 1

    Continuous and nondecreasing for 0 < a < 1, with all of its oscillation
    squeezed against the origin.  Config kind: "section5".
    """

    def __init__(self, a: float) -> None:
        a = float(a)
        if not 0.0 < a < 1.0:
            raise ValueError("ramp power must satisfy 0 < a < 1")
        self.a = a

    def evaluate(self, x) -> float:
        pt = _as_point(x)
        if len(pt) != 1:
            raise ValueError("this exponent is one-dimensional")
        v = pt[0]
        if v <= 0.0:
            return 2.0
        if v >= 1.0:
            return 3.0
        return 2.0 + math.log2(2.0 / v) ** (-self.a)

    def evaluate_array(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        inner = np.clip(xs, 1e-300, 1.0)
        with np.errstate(divide="ignore"):
            ramp = 2.0 + np.log2(2.0 / inner) ** (-self.a)
        return np.where(xs <= 0.0, 2.0, np.where(xs >= 1.0, 3.0, ramp))

    def p_range(self, cube: DyadicCube) -> tuple[float, float]:
        # monotone and continuous, so the ends of [l, r) give inf and sup
        if cube.dimension != 1:
            raise ValueError("this exponent is one-dimensional")
        return (self.evaluate(cube.lower()[0]), self.evaluate(cube.upper()[0]))

    def bounds(self) -> tuple[float, float]:
        return (2.0, 3.0)

    def cell_values(self, root: DyadicCube, depth: int) -> np.ndarray:
        if root.dimension != 1:
            raise ValueError("this exponent is one-dimensional")
        probe = GridFunction.constant(root, depth, 0.0)
        return self.evaluate_array(probe.cell_centers()[:, 0])

    def descriptor(self) -> dict:
        return {"kind": "section5", "a": self.a}


class GridSampledExponent(ExponentFunction):
    """Exponent given cell-by-cell on its own grid."""

    def __init__(self, values: GridFunction) -> None:
        if float(np.min(values.values)) <= 1.0:
            raise ValueError("sampled exponents must stay strictly above 1")
        self.grid = values

    def evaluate(self, x) -> float:
        cell = cube_at(_as_point(x), self.grid.cell_level)
        return self.grid.average(cell)  # single cell, so this is its value

    def p_range(self, cube: DyadicCube) -> tuple[float, float]:
        window = self.grid.shaped_values[self.grid.cube_slice(cube)]
        return (float(np.min(window)), float(np.max(window)))

    def bounds(self) -> tuple[float, float]:
        return (float(np.min(self.grid.values)), float(np.max(self.grid.values)))

    def cell_values(self, root: DyadicCube, depth: int) -> np.ndarray:
        if root != self.grid.root:
            raise DomainError("exponent grid is anchored at a different root")
        if depth < self.grid.depth:
            raise DomainError("exponent grid is finer than the requested grid")
        return upsample(self.grid.shaped_values, 1 << (depth - self.grid.depth)).ravel()

    def descriptor(self) -> dict:
        return {"kind": "piecewise_grid", "root": self.grid.root.token(),
                "depth": self.grid.depth, "values": [float(v) for v in self.grid.values]}


class TableExponent(ExponentFunction):
    """One-dimensional exponent sampled at scattered points.

    Evaluation snaps to the nearest sample; range queries over a cube see
    exactly the samples inside it and refuse cubes that contain none.
    """

    def __init__(self, points: Iterable[tuple[float, float]]) -> None:
        pts = sorted((float(x), float(p)) for x, p in points)
        if not pts:
            raise ValueError("need at least one sample")
        if any(not 1.0 < p < math.inf for _, p in pts):
            raise ValueError("exponent samples must satisfy 1 < p < inf")
        self.xs = np.array([x for x, _ in pts])
        self.ps = np.array([p for _, p in pts])

    def evaluate(self, x) -> float:
        pt = _as_point(x)
        if len(pt) != 1:
            raise ValueError("table exponents are one-dimensional")
        i = int(np.searchsorted(self.xs, pt[0]))
        best, dist = None, math.inf
        for j in (i - 1, i):
            if 0 <= j < self.xs.size and abs(self.xs[j] - pt[0]) < dist:
                best, dist = j, abs(self.xs[j] - pt[0])
        return float(self.ps[best])

    def p_range(self, cube: DyadicCube) -> tuple[float, float]:
        if cube.dimension != 1:
            raise ValueError("table exponents are one-dimensional")
        lo_i = int(np.searchsorted(self.xs, cube.lower()[0], side="left"))
        hi_i = int(np.searchsorted(self.xs, cube.upper()[0], side="left"))
        if lo_i == hi_i:
            raise DomainError("cube holds no exponent samples")
        window = self.ps[lo_i:hi_i]
        return (float(np.min(window)), float(np.max(window)))

    def bounds(self) -> tuple[float, float]:
        return (float(np.min(self.ps)), float(np.max(self.ps)))

    def cell_values(self, root: DyadicCube, depth: int) -> np.ndarray:
        if root.dimension != 1:
            raise ValueError("table exponents are one-dimensional")
        probe = GridFunction.constant(root, depth, 0.0)
        centers = probe.cell_centers()[:, 0]
        idx = np.clip(np.searchsorted(self.xs, centers), 0, self.xs.size - 1)
        left = np.clip(idx - 1, 0, self.xs.size - 1)
        pick_left = np.abs(self.xs[left] - centers) < np.abs(self.xs[idx] - centers)
        return np.where(pick_left, self.ps[left], self.ps[idx])

    def descriptor(self) -> dict:
        return {"kind": "table",
                "points": [[float(x), float(p)] for x, p in zip(self.xs, self.ps)]}


class ConjugateExponent(ExponentFunction):
    """Pointwise Holder conjugate of another exponent."""

    def __init__(self, base: ExponentFunction) -> None:
        self.base = base

    def evaluate(self, x) -> float:
        return conjugate_value(self.base.evaluate(x))

    def p_range(self, cube: DyadicCube) -> tuple[float, float]:
        pm, pp = self.base.p_range(cube)
        return (conjugate_value(pp), conjugate_value(pm))

    def bounds(self) -> tuple[float, float]:
        pm, pp = self.base.bounds()
        return (conjugate_value(pp), conjugate_value(pm))

    def cell_values(self, root: DyadicCube, depth: int) -> np.ndarray:
        base = self.base.cell_values(root, depth)
        return base / (base - 1.0)

    def conjugate(self) -> ExponentFunction:
        return self.base

    def descriptor(self) -> dict:
        return {"kind": "conjugate", "base": self.base.descriptor()}


def exponent_from_descriptor(d: dict) -> ExponentFunction:
    """Build an exponent from its JSON form; raises ValueError on bad input."""
    if not isinstance(d, dict) or "kind" not in d:
        raise ValueError("exponent descriptor needs a 'kind'")
    kind = d["kind"]
    if kind == "constant":
        return ConstantExponent(d["p"])
    if kind == "section5":
        return LogRampExponent(d["a"])
    if kind == "piecewise_grid":
        root = DyadicCube.from_token(d["root"])
        return GridSampledExponent(GridFunction(root, int(d["depth"]), d["values"]))
    if kind == "table":
        return TableExponent(tuple((x, p) for x, p in d["points"]))
    if kind == "conjugate":
        return exponent_from_descriptor(d["base"]).conjugate()
    raise ValueError(f"unknown exponent kind {kind!r}")


# -- modular and norm -------------------------------------------------------


def modular(f: GridFunction, p: ExponentFunction) -> float:
    """rho(f) = sum |f|^p * |cell| over the grid cells."""
    pc = p.cell_values(f.root, f.depth)
    return float(np.sum(np.abs(f.values) ** pc) * f.cell_volume)


def luxemburg_norm(f: GridFunction, p: ExponentFunction, tol: float = 1e-10) -> float:
    """inf { lam > 0 : rho(f / lam) <= 1 }, by bisection.

    The modular is continuous and strictly decreasing in lam wherever it is
    positive, so the infimum is the root of rho(f / lam) = 1.  The bracket
    starts at lam_hi = max(1, sup|f|) * |Q0|^(1/p_minus) and is widened
    geometrically if the initial guesses do not straddle the root.
    """
    vals = np.abs(f.values)
    sup = float(np.max(vals))
    if sup == 0.0:
        return 0.0
    pc = p.cell_values(f.root, f.depth)
    cellvol = f.cell_volume
    p_minus = p.bounds()[0]

    def rho(lam: float) -> float:
        return float(np.sum((vals / lam) ** pc) * cellvol)

    hi = max(1.0, sup) * f.root.volume ** (1.0 / p_minus)
    for _ in range(200):
        if rho(hi) <= 1.0:
            break
        hi *= 2.0
    else:
        raise ArithmeticError("could not bracket the norm from above")
    lo = hi * 2.0 ** -60
    for _ in range(200):
        if rho(lo) >= 1.0:
            break
        hi = lo
        lo = hi * 2.0 ** -60
        if lo == 0.0:
            return hi
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if rho(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- condition checkers -----------------------------------------------------


@dataclass(frozen=True)
class ConditionRecord:
    cube: DyadicCube
    p_minus: float
    p_plus: float
    eps: float
    value: float


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    records: tuple[ConditionRecord, ...]
    supremum: float
    witness: DyadicCube | None

    @classmethod
    def build(cls, condition: str, records: Sequence[ConditionRecord]) -> "ConditionReport":
        records = tuple(records)
        if not records:
            return cls(condition, records, -math.inf, None)
        best = max(records, key=lambda r: r.value)
        return cls(condition, records, best.value, best.cube)

    def rows(self) -> list[list]:
        return [[r.cube.token(), r.p_minus, r.p_plus, r.eps, r.value] for r in self.records]


def check_diening(p: ExponentFunction, cubes: Sequence[DyadicCube]) -> ConditionReport:
    """Per-cube values |Q|^(p_minus(Q) - p_plus(Q)); bounded means tame oscillation."""
    records = []
    for q in cubes:
        pm, pp = p.p_range(q)
        value = math.exp((pm - pp) * (-q.dimension * q.level) * LN2)
        records.append(ConditionRecord(q, pm, pp, 1.0, value))
    return ConditionReport.build("diening", records)


def check_eps_diening(p: ExponentFunction, eps, cubes: Sequence[DyadicCube]) -> ConditionReport:
    """Weighted variant: (|Q| / eps_Q)^(p_minus(Q) - p_plus(Q)) per cube."""
    records = []
    for q in cubes:
        pm, pp = p.p_range(q)
        eq = eps.value(q)
        log_ratio = -q.dimension * q.level * LN2 - math.log(eq)
        value = math.exp((pm - pp) * log_ratio)
        records.append(ConditionRecord(q, pm, pp, eq, value))
    return ConditionReport.build("eps_diening", records)


def check_eps_diening_pointwise(p: ExponentFunction, eps, cubes: Sequence[DyadicCube],
                                samples_per_cube: int = 256) -> ConditionReport:
    """Sampled form (|Q| / eps_Q)^(p_minus(Q) - p(x)), maximized over x in Q.

    Converges to the p_plus form from below as the sample grid refines.
    Samples sit on a uniform tensor grid of cell-center style offsets.
    """
    if samples_per_cube < 1:
        raise ValueError("need at least one sample per cube")
    records = []
    for q in cubes:
        n = q.dimension
        m = max(1, round(samples_per_cube ** (1.0 / n)))
        pm, _ = p.p_range(q)
        eq = eps.value(q)
        log_ratio = -n * q.level * LN2 - math.log(eq)
        side = q.side
        lower = q.lower()
        best_val, best_p = -math.inf, math.nan
        for idx in np.ndindex(*(m,) * n):
            x = tuple(lo + (i + 0.5) * side / m for lo, i in zip(lower, idx))
            px = p.evaluate(x)
            value = math.exp((pm - px) * log_ratio)
            if value > best_val:
                best_val, best_p = value, px
        records.append(ConditionRecord(q, pm, best_p, eq, best_val))
    return ConditionReport.build("eps_diening_pointwise", records)


def check_lh_infty(p: ExponentFunction, sample_points: Sequence,
                   p_inf: float | None = None) -> tuple[float, float]:
    """Fit of the decay |p(x) - p_inf| <= C / log(e + |x|) over sample points.

    When p_inf is not supplied it is estimated as the median of p over the
    tenth of the samples with the largest |x|.  Returns (C_inf, p_inf).
    """
    pts = [_as_point(x) for x in sample_points]
    if not pts:
        raise ValueError("need sample points")
    mags = [math.sqrt(sum(c * c for c in x)) for x in pts]
    values = [p.evaluate(x) for x in pts]
    if p_inf is None:
        order = sorted(range(len(pts)), key=lambda i: mags[i], reverse=True)
        top = order[:max(1, math.ceil(len(pts) / 10))]
        p_inf = statistics.median(values[i] for i in top)
    c_inf = max(abs(v - p_inf) * math.log(math.e + m) for v, m in zip(values, mags))
    return (c_inf, p_inf)


# -- pairings ---------------------------------------------------------------


def holder_pairing(f: GridFunction, g: GridFunction, p: ExponentFunction,
                   tol: float = 1e-10) -> tuple[float, float]:
    """(integral of |f g|, 2 * ||f||_p * ||g||_p') for the duality estimate."""
    pairing = (f * g).abs().integral()
    bound = 2.0 * luxemburg_norm(f, p, tol) * luxemburg_norm(g, p.conjugate(), tol)
    return (pairing, bound)


def associate_norm_lower_bound(f: GridFunction, p: ExponentFunction,
                               bank: Sequence[GridFunction], tol: float = 1e-10) -> float:
    """max over the bank of integral(f g) with each g scaled into the dual ball."""
    if not bank:
        raise ValueError("need a nonempty bank")
    pconj = p.conjugate()
    best = -math.inf
    for g in bank:
        ng = luxemburg_norm(g, pconj, tol)
        if ng == 0.0:
            continue
        if ng > 1.0:
            g = g.scale(1.0 / ng)
        best = max(best, (f * g).integral())
    if best == -math.inf:
        raise ValueError("bank contained only zero functions")
    return best
