import math

import numpy as np
import pytest

from dyadlab.banks import Lcg, build_bank
from dyadlab.cubes import DyadicCube, descendants
from dyadlab.epsilon import (ConstantEpsilon, LevelRuleEpsilon,
                             OriginDecayEpsilon)
from dyadlab.exponents import ConstantExponent, LogRampExponent
from dyadlab.grid import GridFunction
from dyadlab.operators import (CZResult, NonfiniteInputError,
                               NotLocalizableError, SparseCollection,
                               build_sparse_stopping, compactness_probe,
                               corner_chain, cz_decompose, domination_ratio,
                               dyadic_maximal, eps_level_arrays, eps_maximal,
                               haar_coefficient, haar_function,
                               haar_multiplier, opnorm_estimate, scale_ladder,
                               sparse_operator, truncated_sparse,
                               verify_sparse)
from dyadlab.reference import (haar_multiplier_direct, maximal_bruteforce,
                               sparse_operator_direct, superlevel_cells)

ROOT1 = DyadicCube(0, (0,))
ROOT2 = DyadicCube(0, (0, 0))


def random_function(root, depth, seed):
    rng = Lcg(seed)
    n_cells = (2 ** depth) ** root.dimension
    return GridFunction(root, depth, [rng.quantized_unit() for _ in range(n_cells)])


# -- weight tables ------------------------------------------------------------


def test_eps_level_arrays():
    eps = LevelRuleEpsilon("sqrt_side")
    tables = eps_level_arrays(eps, ROOT2, 3)
    assert len(tables) == 4
    for d, arr in enumerate(tables):
        assert arr.shape == (2 ** d,) * 2
        assert np.all(arr == 2.0 ** (-0.5 * d))
    off = eps_level_arrays(OriginDecayEpsilon(1.2, 0.5), ROOT1, 2)[2]
    assert off[0] == pytest.approx(0.3428356293368332, rel=1e-13)
    assert off[2] == pytest.approx(1.2, rel=1e-14)


# -- maximal operators ---------------------------------------------------------


def test_maximal_constant():
    f = GridFunction.constant(ROOT1, 4, -3.0)
    assert np.all(dyadic_maximal(f).values == 3.0)
    assert np.all(eps_maximal(f, ConstantEpsilon(0.5)).values == 1.5)


def test_maximal_matches_bruteforce():
    cases = [(ROOT1, 6), (ROOT2, 3), (DyadicCube(1, (-2,)), 5)]
    for i, (root, depth) in enumerate(cases):
        f = random_function(root, depth, 100 + i)
        got = dyadic_maximal(f)
        want = maximal_bruteforce(f)
        assert np.max(np.abs(got.values - want.values)) <= 1e-13
        eps = LevelRuleEpsilon("sqrt_side")
        gote = eps_maximal(f, eps)
        wante = maximal_bruteforce(f, eps)
        assert np.max(np.abs(gote.values - wante.values)) <= 1e-13


def test_maximal_dominates_function():
    f = random_function(ROOT1, 6, 7)
    m = dyadic_maximal(f)
    assert np.all(m.values >= np.abs(f.values) - 1e-15)
    assert np.all(m.values <= f.abs().sup_norm() + 1e-15)


def test_eps_maximal_envelope():
    # M_eps <= sup(eps) * M everywhere, cube by cube it is a restriction
    for seed in range(5):
        f = random_function(ROOT1, 6, 30 + seed)
        eps = OriginDecayEpsilon(1.2, 0.5)
        me = eps_maximal(f, eps)
        md = dyadic_maximal(f)
        assert np.all(me.values <= eps.sup_bound * md.values + 1e-15)


def test_maximal_monotone_in_weights():
    # pointwise: smaller weights can only shrink the weighted maximal function
    small = LevelRuleEpsilon("sqrt_side")  # <= 1 on levels >= 0
    unit = ConstantEpsilon(1.0)
    for seed in (45, 46):
        f = random_function(ROOT1, 6, seed)
        lo = eps_maximal(f, small)
        hi = eps_maximal(f, unit)
        assert np.all(lo.values <= hi.values + 1e-15)


def test_maximal_scale_equivariance():
    f = random_function(ROOT1, 5, 44)
    a = dyadic_maximal(f.scale(4.0))
    b = dyadic_maximal(f)
    assert np.allclose(a.values, 4.0 * b.values, rtol=0, atol=1e-14)


# -- stopping-time decomposition ----------------------------------------------


def test_cz_tiny_frozen_case():
    # spike of height 8 on [0, 1/8): root average 1, first crossing at [0, 1/2)
    f = GridFunction(ROOT1, 3, [8.0] + [0.0] * 7)
    res = cz_decompose(f, ConstantEpsilon(1.0), 1.5)
    assert [q.token() for q in res.cubes] == ["1:0"]
    assert res.averages == (2.0,)
    assert res.weighted_averages() == (2.0,)
    assert res.bounds_ok(1)


def test_cz_selection_is_disjoint_and_maximal():
    eps = LevelRuleEpsilon("sqrt_side")
    for seed in range(8):
        f = random_function(ROOT1, 7, 200 + seed)
        m = eps_maximal(f, eps)
        lam = 0.6 * m.sup_norm()
        try:
            res = cz_decompose(f, eps, lam)
        except NotLocalizableError:
            continue
        toks = [q.token() for q in res.cubes]
        assert len(set(toks)) == len(toks)
        for i, a in enumerate(res.cubes):
            for b in res.cubes[i + 1:]:
                assert not a.contains(b) and not b.contains(a)
        assert res.bounds_ok(1)
        # maximality: one level up the weighted average is already below lam
        g = f.abs()
        for q in res.cubes:
            parent = q.parent()
            if parent.level >= f.root.level:
                assert eps.value(parent) * g.average(parent) <= lam


def test_cz_union_is_superlevel_set():
    eps = ConstantEpsilon(1.0)
    for seed, (root, depth) in enumerate([(ROOT1, 7), (ROOT2, 4)]):
        f = random_function(root, depth, 300 + seed)
        base = eps.value(root) * f.abs().average(root)
        peak = eps_maximal(f, eps).sup_norm()
        if not base < peak:
            continue
        lam = 0.5 * (base + peak)
        res = cz_decompose(f, eps, lam)
        mask = np.zeros(f.n_cells, dtype=bool)
        probe = GridFunction.constant(root, depth, 0.0)
        shaped = np.zeros(probe.shaped_values.shape, dtype=bool)
        for q in res.cubes:
            shaped[probe.cube_slice(q)] = True
        mask = shaped.ravel()
        want = superlevel_cells(f, eps, lam).ravel()
        assert np.array_equal(mask, want)


def test_cz_not_localizable():
    f = GridFunction.constant(ROOT1, 3, 1.0)
    with pytest.raises(NotLocalizableError):
        cz_decompose(f, ConstantEpsilon(1.0), 0.5)  # below the root average
    with pytest.raises(NotLocalizableError):
        cz_decompose(f, ConstantEpsilon(1.0), 1.0)  # equal is still not above
    with pytest.raises(NonfiniteInputError):
        cz_decompose(f, ConstantEpsilon(1.0), math.inf)


def test_cz_weighted_bounds_need_domination():
    # with dominated weights the two-sided bound holds with constant 2^n
    eps = OriginDecayEpsilon(1.2, 0.5)
    f = random_function(ROOT1, 7, 17)
    g = f.abs()
    base = eps.value(ROOT1) * g.average(ROOT1)
    lam = 1.7 * base
    assert eps_maximal(f, eps).sup_norm() > lam
    res = cz_decompose(f, eps, lam)
    assert len(res.cubes) > 0
    assert res.bounds_ok(1)


# -- Haar system ---------------------------------------------------------------


def test_haar_function_shape():
    q = DyadicCube(2, (1,))
    h = haar_function(q, ROOT1, 4)
    assert abs(h.integral()) < 1e-15
    # square integrates to 1 - 2^-n
    assert (h * h).integral() == pytest.approx(0.5, rel=1e-13)
    assert h.average(q) == pytest.approx(2.0 * (1 - 0.5), rel=1e-13)
    # zero outside the parent
    assert h.integral_over(DyadicCube(1, (1,))) == 0.0

    h2 = haar_function(DyadicCube(1, (0, 1)), ROOT2, 3)
    assert abs(h2.integral()) < 1e-15
    assert (h2 * h2).integral() == pytest.approx(0.75, rel=1e-13)


def test_haar_function_domain_checks():
    from dyadlab.grid import DomainError
    with pytest.raises(DomainError):
        haar_function(ROOT1, ROOT1, 3)  # the root's own parent escapes
    with pytest.raises(DomainError):
        haar_function(DyadicCube(5, (0,)), ROOT1, 3)  # below cell resolution


def test_haar_coefficient_modes():
    f = random_function(ROOT1, 5, 53)
    q = DyadicCube(3, (2,))
    full = haar_coefficient(f, q, "full_support")
    lit = haar_coefficient(f, q, "literal_Q")
    scale = 2.0 ** (0.5 * q.level)
    want_full = scale * (f.integral_over(q) - 0.5 * f.integral_over(q.parent()))
    want_lit = scale * 0.5 * f.integral_over(q)
    assert full == pytest.approx(want_full, rel=1e-13)
    assert lit == pytest.approx(want_lit, rel=1e-13)
    # both modes agree when the sibling integral vanishes
    g = GridFunction.indicator(ROOT1, 5, q)
    assert haar_coefficient(g, q, "full_support") == pytest.approx(
        haar_coefficient(g, q, "literal_Q"), rel=1e-13)
    with pytest.raises(ValueError):
        haar_coefficient(f, q, "both")


def test_haar_multiplier_matches_direct():
    eps = LevelRuleEpsilon("sqrt_side")
    cases = [(ROOT1, 6), (ROOT2, 3), (DyadicCube(1, (-2, 1)), 3)]
    for i, (root, depth) in enumerate(cases):
        f = random_function(root, depth, 400 + i)
        for mode in ("full_support", "literal_Q"):
            fast = haar_multiplier(f, eps, mode)
            slow = haar_multiplier_direct(f, eps, mode)
            assert np.max(np.abs(fast.values - slow.values)) <= 1e-12


def test_haar_multiplier_unit_weight_reconstructs():
    # with eps = 1 the full-support sum telescopes to f minus its mean
    for root, depth, seed in [(ROOT1, 8, 5), (ROOT2, 4, 6)]:
        f = random_function(root, depth, seed)
        tf = haar_multiplier(f, ConstantEpsilon(1.0), "full_support")
        want = f.values - f.average(root)
        assert np.max(np.abs(tf.values - want)) <= 1e-12


def test_haar_multiplier_linearity():
    eps = OriginDecayEpsilon(1.2, 0.5)
    f = random_function(ROOT1, 6, 61)
    g = random_function(ROOT1, 6, 62)
    lhs = haar_multiplier(f + g, eps)
    rhs = haar_multiplier(f, eps) + haar_multiplier(g, eps)
    assert np.max(np.abs(lhs.values - rhs.values)) <= 1e-12


# -- sparse collections ---------------------------------------------------------


def test_corner_chain_structure():
    col = corner_chain(ROOT2, 3)
    assert len(col.cubes) == 4
    for a, b in zip(col.cubes, col.cubes[1:]):
        assert a.contains(b)
        assert b.level == a.level + 1
    ok, frac = verify_sparse(col)
    assert ok
    assert frac == pytest.approx(0.25)  # 2 * |child| / |Q| in 2-d


def test_scale_ladder_structure():
    col = scale_ladder(ROOT1, 5)
    assert len(col.cubes) == 5
    assert [q.level for q in col.cubes] == [1, 2, 3, 4, 5]
    for i, a in enumerate(col.cubes):
        for b in col.cubes[i + 1:]:
            assert not a.contains(b) and not b.contains(a)
    ok, frac = verify_sparse(col)
    assert ok
    assert frac == 0.0  # nothing nests, nothing is charged
    with pytest.raises(ValueError):
        scale_ladder(ROOT1, 0)


def test_scale_ladder_matches_chain_siblings():
    chain = corner_chain(ROOT1, 4).cubes
    ladder = scale_ladder(ROOT1, 4).cubes
    for rung, link in zip(ladder, chain[1:]):
        assert rung.parent() == link.parent()
        assert rung != link


def test_sparse_collection_containment():
    with pytest.raises(ValueError):
        SparseCollection(ROOT1, (DyadicCube(1, (2,)),))


def test_build_sparse_stopping():
    for seed, (root, depth) in enumerate([(ROOT1, 7), (ROOT2, 4)]):
        f = random_function(root, depth, 500 + seed)
        col = build_sparse_stopping(f)
        assert col.cubes[0] == root
        ok, frac = verify_sparse(col)
        assert ok
        assert frac <= 0.5 + 1e-12
    with pytest.raises(ValueError):
        build_sparse_stopping(GridFunction.constant(ROOT1, 3, 0.0))
    f = random_function(ROOT1, 4, 1)
    with pytest.raises(ValueError):
        build_sparse_stopping(f, ratio=2.0)  # below the packing threshold


def test_verify_sparse_catches_overpacking():
    # the root plus all four children: packing fraction 1 breaches the half rule
    cubes = (ROOT2,) + tuple(ROOT2.children())
    ok, frac = verify_sparse(SparseCollection(ROOT2, cubes))
    assert not ok
    assert frac == 1.0
    # three of four children is still too much, two are fine
    ok3, frac3 = verify_sparse(SparseCollection(ROOT2, (ROOT2,) + tuple(ROOT2.children()[:3])))
    assert not ok3 and frac3 == 0.75
    ok2, frac2 = verify_sparse(SparseCollection(ROOT2, (ROOT2,) + tuple(ROOT2.children()[:2])))
    assert ok2 and frac2 == 0.5


def test_sparse_operator_matches_direct():
    eps = LevelRuleEpsilon("sqrt_side")
    for seed, (root, depth) in enumerate([(ROOT1, 6), (ROOT2, 3)]):
        f = random_function(root, depth, 600 + seed)
        col = build_sparse_stopping(f)
        fast = sparse_operator(f, col, eps)
        slow = sparse_operator_direct(f, col.cubes, eps)
        assert np.max(np.abs(fast.values - slow.values)) <= 1e-13


def test_truncated_sparse_window():
    eps = ConstantEpsilon(1.0)
    f = random_function(ROOT1, 6, 71)
    col = scale_ladder(ROOT1, 6)
    full = sparse_operator(f, col, eps)
    wide = truncated_sparse(f, col, eps, 6)
    assert np.array_equal(full.values, wide.values)
    # N = 0 keeps only the level-0-to-0 window, the ladder starts at level 1
    empty = truncated_sparse(f, col, eps, 0)
    assert np.all(empty.values == 0.0)
    mid = truncated_sparse(f, col, eps, 3)
    kept = [q for q in col.cubes if abs(q.level) <= 3]
    want = sparse_operator_direct(f, kept, eps)
    assert np.max(np.abs(mid.values - want.values)) <= 1e-13
    # the tail is exactly the direct sum over the excluded cubes
    tail = full - mid
    excluded = [q for q in col.cubes if abs(q.level) > 3]
    want_tail = sparse_operator_direct(f, excluded, eps)
    assert np.max(np.abs(tail.values - want_tail.values)) <= 1e-13


def test_truncated_sparse_root_only_window():
    eps = ConstantEpsilon(1.0)
    f = random_function(ROOT1, 3, 73)
    col = corner_chain(ROOT1, 3)
    got = truncated_sparse(f, col, eps, 0)
    want = np.full(f.n_cells, f.average(ROOT1))
    assert np.max(np.abs(got.values - want)) <= 1e-15


def test_sparse_operator_linearity():
    eps = LevelRuleEpsilon("sqrt_side")
    col = corner_chain(ROOT1, 5)
    f = random_function(ROOT1, 5, 74)
    g = random_function(ROOT1, 5, 75)
    both = sparse_operator(f + g, col, eps)
    apart = sparse_operator(f, col, eps) + sparse_operator(g, col, eps)
    assert np.max(np.abs(both.values - apart.values)) <= 1e-11


def test_domination_ratio_finite_and_scale_invariant():
    eps = LevelRuleEpsilon("sqrt_side")
    for seed in (81, 82):
        f = random_function(ROOT1, 6, seed)
        r1 = domination_ratio(f, eps)
        assert math.isfinite(r1)
        assert r1 > 0.0
        r2 = domination_ratio(f.scale(2.0), eps)
        assert r2 == pytest.approx(r1, rel=1e-12)


def test_opnorm_estimate():
    p = ConstantExponent(2.0)
    bank = build_bank("random_cells", 12, 42, ROOT1, 5)
    ident = opnorm_estimate(lambda f: f, p, bank)
    assert ident == pytest.approx(1.0, rel=1e-9)
    # the plain maximal operator exceeds 1 on indicators and stays finite
    mnorm = opnorm_estimate(dyadic_maximal, p, bank)
    assert 1.0 - 1e-9 <= mnorm < 50.0
    with pytest.raises(ValueError):
        opnorm_estimate(lambda f: f, p, [GridFunction.constant(ROOT1, 3, 0.0)])


def test_opnorm_maximal_square_exponent_bound():
    # classical L^2 bound for the dyadic maximal operator: ratio at most p' = 2
    p = ConstantExponent(2.0)
    bank = build_bank("indicators", 20, 3, ROOT1, 6)
    mnorm = opnorm_estimate(dyadic_maximal, p, bank)
    assert 1.0 < mnorm <= 2.0 + 1e-9


def test_domination_ratio_constant_function_vanishes():
    # T of a constant is zero under full support, the envelope is positive
    f = GridFunction.constant(ROOT1, 4, 1.0)
    assert domination_ratio(f, ConstantEpsilon(1.0)) == 0.0


# -- compactness probe ----------------------------------------------------------


def rung_bank(root, depth):
    return [GridFunction.indicator(root, depth, q)
            for q in scale_ladder(root, depth).cubes]


def test_compactness_probe_decaying_weights():
    p = LogRampExponent(0.5)
    eps = LevelRuleEpsilon("sqrt_side")
    bank = rung_bank(ROOT1, 8)
    pairs = compactness_probe(eps, p, bank)
    ns = [n for n, _ in pairs]
    es = [e for _, e in pairs]
    assert ns == list(range(9))
    assert all(a >= b - 1e-15 for a, b in zip(es, es[1:]))
    # rung indicators see exactly the ladder weight at the first kept scale
    for n, e in pairs[:-1]:
        assert e == pytest.approx(2.0 ** (-0.5 * (n + 1)), rel=1e-9)
    assert es[-1] == 0.0


def test_compactness_probe_flat_weights_stall():
    p = LogRampExponent(0.5)
    bank = rung_bank(ROOT1, 6)
    with pytest.warns(RuntimeWarning):
        pairs = compactness_probe(ConstantEpsilon(1.0), p, bank,
                                  n_values=range(6))
    es = [e for _, e in pairs]
    assert es[0] > 0.0
    for e in es:
        assert e == pytest.approx(es[0], rel=1e-12)  # no decay at any window


def test_compactness_probe_rejects_mixed_grids():
    from dyadlab.grid import DomainError
    p = ConstantExponent(2.0)
    bank = [GridFunction.constant(ROOT1, 3, 1.0), GridFunction.constant(ROOT1, 4, 1.0)]
    with pytest.raises(DomainError):
        compactness_probe(ConstantEpsilon(1.0), p, bank)


def test_nonfinite_input_rejected():
    f = random_function(ROOT1, 4, 91)
    with pytest.raises(NonfiniteInputError):
        cz_decompose(f, ConstantEpsilon(1.0), math.nan)
