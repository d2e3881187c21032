"""Weighted dyadic operators on grid functions.

Everything here acts on a `GridFunction` over a root cube Q0 and only ever
looks at dyadic subcubes of Q0 down to cell resolution: maximal functions,
stopping-time decompositions, Haar expansions weighted cube-by-cube, and
sparse averaging operators with their scale truncations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .cubes import DyadicCube
from .epsilon import EpsilonCollection, decay_profile
from .exponents import ExponentFunction, luxemburg_norm
from .grid import DomainError, GridFunction, coarsen_sum, upsample


class NotLocalizableError(ValueError):
    """The threshold does not exceed the weighted root average."""


class NonfiniteInputError(ValueError):
    """A threshold or weight was NaN or infinite."""


def eps_level_arrays(eps: EpsilonCollection, root: DyadicCube, depth: int) -> list[np.ndarray]:
    """Weight of every subcube, one array per relative level 0..depth."""
    n = root.dimension
    out = []
    for d in range(depth + 1):
        side = 1 << d
        base = tuple(c * side for c in root.corner)
        arr = np.empty((side,) * n, dtype=np.float64)
        lvl = root.level + d
        for idx in np.ndindex(*arr.shape):
            arr[idx] = eps.value(DyadicCube(lvl, tuple(b + i for b, i in zip(base, idx))))
        out.append(arr)
    return out


# -- maximal functions --------------------------------------------------------


def dyadic_maximal(f: GridFunction) -> GridFunction:
    """Cell-wise max of the |f| averages over all ancestors inside the root."""
    g = f.abs()
    run = g.level_average_array(0)
    for d in range(1, f.depth + 1):
        run = np.maximum(upsample(run, 2), g.level_average_array(d))
    return f.replace_values(run.ravel())


def eps_maximal(f: GridFunction, eps: EpsilonCollection) -> GridFunction:
    """Weighted variant: each ancestor average is scaled by its cube weight."""
    g = f.abs()
    weights = eps_level_arrays(eps, f.root, f.depth)
    run = weights[0] * g.level_average_array(0)
    for d in range(1, f.depth + 1):
        run = np.maximum(upsample(run, 2), weights[d] * g.level_average_array(d))
    return f.replace_values(run.ravel())


# -- stopping-time decomposition ----------------------------------------------


@dataclass(frozen=True)
class CZResult:
    """Maximal cubes where the weighted average first exceeds the threshold."""

    lam: float
    cubes: tuple[DyadicCube, ...]
    eps_values: tuple[float, ...]
    averages: tuple[float, ...]

    def weighted_averages(self) -> tuple[float, ...]:
        return tuple(e * a for e, a in zip(self.eps_values, self.averages))

    def bounds_ok(self, dimension: int, rel_tol: float = 1e-12) -> bool:
        """lam < eps*avg <= 2^n * lam on every selected cube."""
        upper = (1 << dimension) * self.lam
        for wa in self.weighted_averages():
            if not (wa > self.lam and wa <= upper * (1.0 + rel_tol)):
                return False
        return True


def cz_decompose(f: GridFunction, eps: EpsilonCollection, lam: float) -> CZResult:
    """Select the maximal subcubes with eps_Q * avg_Q |f| > lam.

    Requires lam to beat the weighted root average, otherwise no selection
    can be made below the root and the call raises `NotLocalizableError`.
    Disjointness is automatic: descent stops at the first crossing.
    """
    if not math.isfinite(lam):
        raise NonfiniteInputError("threshold must be finite")
    g = f.abs()
    root = f.root
    if not eps.value(root) * g.average(root) < lam:
        raise NotLocalizableError("threshold does not exceed the weighted root average")
    cell_level = f.cell_level
    cubes: list[DyadicCube] = []
    eps_vals: list[float] = []
    avgs: list[float] = []

    def scan(q: DyadicCube) -> None:
        for child in q.children():
            e = eps.value(child)
            a = g.average(child)
            if e * a > lam:
                cubes.append(child)
                eps_vals.append(e)
                avgs.append(a)
            elif child.level < cell_level:
                scan(child)

    if root.level < cell_level:
        scan(root)
    return CZResult(lam, tuple(cubes), tuple(eps_vals), tuple(avgs))


# -- Haar system ---------------------------------------------------------------


HAAR_MODES = ("full_support", "literal_Q")


def haar_function(q: DyadicCube, root: DyadicCube, depth: int) -> GridFunction:
    """The mean-zero bump |Q|^(-1/2) (chi_Q - 2^-n chi_parent(Q)).

    Constant on q and on the rest of the parent, zero outside the parent; its
    square integrates to 1 - 2^-n.  The parent must sit inside the root and q
    must be at cell resolution or coarser.
    """
    n = q.dimension
    parent = q.parent()
    if not root.contains(parent):
        raise DomainError("the parent cube escapes the root")
    if q.level > root.level + depth:
        raise DomainError("cube below cell resolution")
    scale = 2.0 ** (0.5 * n * q.level)  # |Q|^(-1/2)
    probe = GridFunction.constant(root, depth, 0.0)
    vals = np.zeros(probe.shaped_values.shape)
    vals[probe.cube_slice(parent)] = -scale / (1 << n)
    vals[probe.cube_slice(q)] = scale * (1.0 - 1.0 / (1 << n))
    return GridFunction(root, depth, vals.ravel())


def haar_coefficient(f: GridFunction, q: DyadicCube, mode: str = "full_support") -> float:
    """Pairing of f with the bump at q.

    "full_support" integrates f * h_q over the whole parent; "literal_Q"
    integrates over q only, dropping the sibling part of the bump.
    """
    if mode not in HAAR_MODES:
        raise ValueError(f"unknown mode {mode!r}")
    n = q.dimension
    scale = 2.0 ** (0.5 * n * q.level)
    i_q = f.integral_over(q)
    if mode == "literal_Q":
        return scale * (1.0 - 1.0 / (1 << n)) * i_q
    return scale * (i_q - f.integral_over(q.parent()) / (1 << n))


def haar_multiplier(f: GridFunction, eps: EpsilonCollection,
                    mode: str = "full_support") -> GridFunction:
    """Sum of eps_Q <f, h_Q> h_Q over all subcubes whose parent fits the root.

    The root itself is excluded (its parent escapes the domain) and the sum
    stops at cell resolution.  Computed level by level with block sums, so
    the cost is O(cells * depth) rather than a loop over every cube.
    """
    if mode not in HAAR_MODES:
        raise ValueError(f"unknown mode {mode!r}")
    n = f.dimension
    depth = f.depth
    shrink = 1.0 / (1 << n)
    weights = eps_level_arrays(eps, f.root, depth)
    out = np.zeros(f.shaped_values.shape)
    i_prev = f.level_integral_array(0)
    for d in range(1, depth + 1):
        i_d = f.level_integral_array(d)
        scale = 2.0 ** (0.5 * n * (f.root.level + d))
        if mode == "full_support":
            coef = scale * (i_d - shrink * upsample(i_prev, 2))
        else:
            coef = scale * (1.0 - shrink) * i_d
        weighted = weights[d] * coef
        group = upsample(coarsen_sum(weighted), 2)
        contrib = scale * (weighted - shrink * group)
        out += upsample(contrib, 1 << (depth - d))
        i_prev = i_d
    return f.replace_values(out.ravel())


# -- sparse collections --------------------------------------------------------


@dataclass(frozen=True)
class SparseCollection:
    root: DyadicCube
    cubes: tuple[DyadicCube, ...]

    def __post_init__(self) -> None:
        for q in self.cubes:
            if not self.root.contains(q):
                raise ValueError("collection member escapes the root")

    def tokens(self) -> list[str]:
        return [q.token() for q in self.cubes]


def corner_chain(root: DyadicCube, depth: int) -> SparseCollection:
    """Nested chain descending toward the root's lower corner, one cube per level.

    A chain is sparse with packing ratio 2^-n; it is the canonical example of
    maximal nesting for the packing audit.
    """
    cubes = [root]
    for _ in range(depth):
        cubes.append(cubes[-1].children()[0])
    return SparseCollection(root, tuple(cubes))


def scale_ladder(root: DyadicCube, depth: int) -> SparseCollection:
    """One cube per level 1..depth, pairwise disjoint.

    At each level the ladder takes the sibling of the corner chain cube, so
    the cubes are nested in nothing but the root.  Disjointness makes the
    family trivially sparse and decouples the scales: an averaging operator
    over the ladder acts on each rung independently, which is what a probe
    of per-scale behavior wants.
    """
    if depth < 1:
        raise ValueError("the ladder needs depth >= 1")
    cubes = []
    cur = root
    for _ in range(depth):
        kids = cur.children()
        cubes.append(kids[1])  # sibling along the last axis
        cur = kids[0]
    return SparseCollection(root, tuple(cubes))


def build_sparse_stopping(f: GridFunction, ratio: float | None = None) -> SparseCollection:
    """Stopping-time family: descend from each member to the maximal subcubes
    whose |f| average jumps past `ratio` times the member's own average.

    The default ratio 2^(n+1) guarantees the packing bound: children of Q
    carry total mass at most |Q| avg_Q, so their total volume is below
    |Q| / ratio <= |Q| / 2.
    """
    n = f.dimension
    if ratio is None:
        ratio = float(1 << (n + 1))
    if ratio < (1 << (n + 1)):
        raise ValueError("ratio below 2^(n+1) loses the packing bound")
    g = f.abs()
    if g.sup_norm() == 0.0:
        raise ValueError("the zero function has no stopping family")
    cell_level = f.cell_level
    members: list[DyadicCube] = [f.root]

    def scan(q: DyadicCube, base_avg: float) -> None:
        for child in q.children():
            a = g.average(child)
            if a > ratio * base_avg:
                members.append(child)
                if child.level < cell_level:
                    scan(child, a)
            elif child.level < cell_level:
                scan(child, base_avg)

    if f.root.level < cell_level:
        scan(f.root, g.average(f.root))
    return SparseCollection(f.root, tuple(members))


def _strict_ancestor_in(tokens: dict[str, DyadicCube], q: DyadicCube,
                        min_level: int) -> DyadicCube | None:
    anc = q.parent()
    while anc.level >= min_level:
        hit = tokens.get(anc.token())
        if hit is not None:
            return hit
        anc = anc.parent()
    return None


def verify_sparse(collection: SparseCollection) -> tuple[bool, float]:
    """Exact packing audit of a collection.

    For each member Q the maximal strict members inside it must cover at most
    half of |Q| (equivalently the leftover part E_Q keeps |Q| <= 2 |E_Q|),
    and the leftover parts must be pairwise disjoint.  Volumes are compared
    as integers scaled to the deepest member level, so the verdict carries no
    floating point slack.  Returns (ok, worst packing fraction).
    """
    cubes = collection.cubes
    if not cubes:
        return (True, 0.0)
    deepest = max(q.level for q in cubes)
    min_level = min(q.level for q in cubes)
    tokens = {q.token(): q for q in cubes}
    children: dict[str, list[DyadicCube]] = {t: [] for t in tokens}
    for q in cubes:
        anc = _strict_ancestor_in(tokens, q, min_level)
        if anc is not None:
            children[anc.token()].append(q)

    ok = True
    worst = 0.0
    for q in cubes:
        q_units = q.volume_units(deepest)
        covered = sum(p.volume_units(deepest) for p in children[q.token()])
        worst = max(worst, covered / q_units)
        if 2 * covered > q_units:
            ok = False

    # leftover disjointness, audited cell by cell when the grid is small
    root = collection.root
    span = deepest - root.level
    if (1 << (root.dimension * span)) <= (1 << 20):
        shape = ((1 << span),) * root.dimension
        acc = np.zeros(shape, dtype=np.int64)

        def block(q: DyadicCube) -> tuple[slice, ...]:
            d = q.level - root.level
            w = 1 << (span - d)
            offs = tuple(c - (r << d) for c, r in zip(q.corner, root.corner))
            return tuple(slice(o * w, (o + 1) * w) for o in offs)

        for q in cubes:
            mask = np.zeros(shape, dtype=np.int64)
            mask[block(q)] = 1
            for p in children[q.token()]:
                mask[block(p)] = 0
            acc += mask
        if int(acc.max(initial=0)) > 1:
            ok = False
    return (ok, worst)


def _sparse_apply(f: GridFunction, cubes: Iterable[DyadicCube],
                  eps: EpsilonCollection) -> GridFunction:
    out = np.zeros(f.shaped_values.shape)
    for q in cubes:
        out[f.cube_slice(q)] += eps.value(q) * f.average(q)
    return f.replace_values(out.ravel())


def sparse_operator(f: GridFunction, collection: SparseCollection,
                    eps: EpsilonCollection) -> GridFunction:
    """Sum over the collection of eps_Q times the f average, spread over Q."""
    if collection.root != f.root:
        raise DomainError("collection anchored at a different root")
    return _sparse_apply(f, collection.cubes, eps)


def truncated_sparse(f: GridFunction, collection: SparseCollection,
                     eps: EpsilonCollection, n_scales: int) -> GridFunction:
    """Same sum restricted to cubes with side in [2^-N, 2^N] (unit scale)."""
    if collection.root != f.root:
        raise DomainError("collection anchored at a different root")
    if n_scales < 0:
        raise ValueError("the scale window must be nonnegative")
    kept = [q for q in collection.cubes if -n_scales <= q.level <= n_scales]
    return _sparse_apply(f, kept, eps)


# -- derived diagnostics ---------------------------------------------------------


def domination_ratio(f: GridFunction, eps: EpsilonCollection,
                     mode: str = "full_support", ratio: float | None = None) -> float:
    """sup over supp f of |multiplier output| / sparse envelope.

    The envelope is the sparse operator of |f| over the stopping family of f.
    Cells where the envelope vanishes while the numerator does not produce
    math.inf, which flags a domination failure.
    """
    collection = build_sparse_stopping(f, ratio)
    numer = np.abs(haar_multiplier(f, eps, mode).values)
    denom = sparse_operator(f.abs(), collection, eps).values
    support = f.values != 0.0
    numer, denom = numer[support], denom[support]
    out = 0.0
    for t, d in zip(numer, denom):
        if d == 0.0:
            if t != 0.0:
                return math.inf
        else:
            out = max(out, t / d)
    return out


def opnorm_estimate(op: Callable[[GridFunction], GridFunction], p: ExponentFunction,
                    bank: Sequence[GridFunction], tol: float = 1e-10) -> float:
    """Largest norm ratio ||op f|| / ||f|| over the nonzero bank functions."""
    best = -math.inf
    for f in bank:
        nf = luxemburg_norm(f, p, tol)
        if nf == 0.0:
            continue
        best = max(best, luxemburg_norm(op(f), p, tol) / nf)
    if best == -math.inf:
        raise ValueError("bank contained only zero functions")
    return best


def compactness_probe(eps: EpsilonCollection, p: ExponentFunction,
                      bank: Sequence[GridFunction],
                      n_values: Sequence[int] | None = None,
                      collection: SparseCollection | None = None,
                      tol: float = 1e-10) -> list[tuple[int, float]]:
    """Tail norms e_N of the sparse operator beyond the scale window N.

    e_N is the largest ratio ||(S - S_N)|f||| / ||f|| over the bank, where S
    runs over the probe collection (by default the scale ladder, which holds
    one cube at every scale with disjoint supports).  Applying the tail to
    |f| makes the excluded terms pointwise nonnegative, so e_N cannot
    increase as the window widens.  A weight family whose decay profile does
    not shrink is reported, since its tail has no reason to vanish.
    """
    if not bank:
        raise ValueError("need a nonempty bank")
    root, depth = bank[0].root, bank[0].depth
    for f in bank:
        if f.root != root or f.depth != depth:
            raise DomainError("bank functions live on different grids")
    if collection is None:
        collection = scale_ladder(root, depth)
    profile = decay_profile(eps, root, max(1, depth))
    if profile[-1] > 0.5 * profile[0]:
        warnings.warn("weight collection shows no decay across scales",
                      RuntimeWarning, stacklevel=2)
    if n_values is None:
        n_values = range(depth + 1)
    pairs: list[tuple[float, GridFunction]] = []
    for f in bank:
        nf = luxemburg_norm(f, p, tol)
        if nf > 0.0:
            pairs.append((nf, f.abs()))
    if not pairs:
        raise ValueError("bank contained only zero functions")
    out = []
    for n_sc in n_values:
        worst = 0.0
        for nf, g in pairs:
            tail = sparse_operator(g, collection, eps) - truncated_sparse(g, collection, eps, n_sc)
            worst = max(worst, luxemburg_norm(tail, p, tol) / nf)
        out.append((int(n_sc), worst))
    return out
