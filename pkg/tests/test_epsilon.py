import math

import pytest

from dyadlab.cubes import DyadicCube, descendants
from dyadlab.epsilon import (ConstantEpsilon, EpsilonCollection,
                             LevelRuleEpsilon, OriginDecayEpsilon,
                             PowerEpsilon, TableEpsilon, decay_profile,
                             epsilon_from_descriptor, validate_domination)

ROOT = DyadicCube(0, (0,))


def chain_and_buddies(n_max):
    cubes = [DyadicCube(k, (0,)) for k in range(n_max + 1)]
    cubes += [DyadicCube(k + 1, (1,)) for k in range(n_max)]
    return cubes


def test_constant_epsilon():
    eps = ConstantEpsilon(1.7)
    assert eps.value(ROOT) == 1.7
    assert eps.value(DyadicCube(9, (-100, 3))) == 1.7
    assert eps.level_max(ROOT, 5) == 1.7
    assert eps.sup_bound == 1.7
    with pytest.raises(ValueError):
        ConstantEpsilon(0.0)
    with pytest.raises(ValueError):
        ConstantEpsilon(-1.0)


def test_level_rule_sqrt_side():
    eps = LevelRuleEpsilon("sqrt_side")
    for k in range(0, 10):
        q = DyadicCube(k, (0,))
        assert eps.value(q) == pytest.approx(q.side ** 0.5, rel=1e-15)
    # level is all that matters
    assert eps.value(DyadicCube(3, (5,))) == eps.value(DyadicCube(3, (0, 0, 0)))
    assert eps.level_max(ROOT, 4) == pytest.approx(2.0 ** -2, rel=1e-15)


def test_level_rule_side():
    eps = LevelRuleEpsilon("side")
    assert eps.value(DyadicCube(3, (1,))) == pytest.approx(2.0 ** -3, rel=1e-15)
    assert eps.value(ROOT) == 1.0


def test_level_rule_callable_and_errors():
    eps = LevelRuleEpsilon(lambda k: 1.0 / (1 + max(k, 0)))
    assert eps.value(DyadicCube(3, (0,))) == 0.25
    with pytest.raises(ValueError):
        eps.descriptor()  # no serial form for callables
    with pytest.raises(ValueError):
        LevelRuleEpsilon("no_such_rule")
    bad = LevelRuleEpsilon(lambda k: -1.0 if k > 2 else 1.0)
    with pytest.raises(ValueError):
        bad.value(DyadicCube(3, (0,)))


def test_origin_decay_frozen_values():
    eps = OriginDecayEpsilon(1.2, 0.5)
    # on the origin chain Q_n the raw rule 2^(-n) C^((n+1)^a) applies
    assert eps.value(DyadicCube(0, (0,))) == pytest.approx(1.2, rel=1e-14)
    assert eps.value(DyadicCube(1, (0,))) == pytest.approx(0.6470669176575519, rel=1e-13)
    assert eps.value(DyadicCube(2, (0,))) == pytest.approx(0.3428356293368332, rel=1e-13)
    assert eps.value(DyadicCube(3, (0,))) == pytest.approx(0.18, rel=1e-13)
    for n in range(20):
        want = 2.0 ** -n * 1.2 ** ((n + 1) ** 0.5)
        assert eps.value(DyadicCube(n, (0,))) == pytest.approx(want, rel=1e-12)
    # the buddy cube next to Q_n carries the same weight as Q_(n-1)
    assert eps.value(DyadicCube(1, (1,))) == pytest.approx(1.2, rel=1e-14)
    assert eps.value(DyadicCube(2, (1,))) == pytest.approx(0.6470669176575519, rel=1e-13)
    assert eps.value(DyadicCube(3, (1,))) == pytest.approx(0.3428356293368332, rel=1e-13)
    # off the chain the weight stays at the cap
    for tok in ("2:2", "2:3", "3:7", "5:19"):
        assert eps.value(DyadicCube.from_token(tok)) == pytest.approx(1.2, rel=1e-14)
    assert eps.sup_bound == pytest.approx(1.2)


def test_origin_decay_validation():
    with pytest.raises(ValueError):
        OriginDecayEpsilon(0.9, 0.5)  # needs C >= 1
    with pytest.raises(ValueError):
        OriginDecayEpsilon(1.2, 1.0)
    with pytest.raises(ValueError):
        OriginDecayEpsilon(1.2, 0.0)


def test_power_epsilon():
    base = LevelRuleEpsilon("side")
    eps = PowerEpsilon(base, 0.5)
    q = DyadicCube(4, (3,))
    assert eps.value(q) == pytest.approx(base.value(q) ** 0.5, rel=1e-15)
    alt = base.power(0.5)
    assert alt.value(q) == pytest.approx(eps.value(q), rel=1e-15)
    assert eps.level_max(ROOT, 4) == pytest.approx(base.level_max(ROOT, 4) ** 0.5, rel=1e-15)


def test_power_composition():
    # (v^a)^b agrees with v^(ab) on a spread of cubes
    base = OriginDecayEpsilon(1.3, 0.4)
    twice = base.power(0.5).power(0.6)
    once = base.power(0.3)
    for q in chain_and_buddies(12) + [DyadicCube(4, (9,)), DyadicCube(7, (100,))]:
        assert abs(twice.value(q) - once.value(q)) <= 1e-12 * once.value(q)
    ident = base.power(1.0)
    assert ident.value(DyadicCube(5, (0,))) == base.value(DyadicCube(5, (0,)))


def test_sup_bound_over_random_cubes():
    from dyadlab.banks import Lcg
    rng = Lcg(2049)
    families = [ConstantEpsilon(1.7), LevelRuleEpsilon("sqrt_side"),
                OriginDecayEpsilon(1.2, 0.5),
                PowerEpsilon(OriginDecayEpsilon(1.2, 0.5), 0.5)]
    for _ in range(10000):
        level = rng.below(16)
        q = DyadicCube(level, (rng.below(1 << level) if level else 0,))
        for eps in families:
            assert eps.value(q) <= eps.sup_bound + 1e-15


def test_section5_unit_cap():
    eps = OriginDecayEpsilon(1.0, 0.5)
    assert eps.value(ROOT) == 1.0
    assert eps.sup_bound == 1.0
    # with C = 1 the chain is a clean 2^-n staircase
    assert eps.value(DyadicCube(4, (0,))) == pytest.approx(2.0 ** -4, rel=1e-14)


def test_table_epsilon_overrides():
    fallback = ConstantEpsilon(1.0)
    eps = TableEpsilon({"1:0": 0.5, "2:3": 0.25}, fallback)
    assert eps.value(DyadicCube(1, (0,))) == 0.5
    assert eps.value(DyadicCube(2, (3,))) == 0.25
    assert eps.value(DyadicCube(1, (1,))) == 1.0


def test_descriptor_round_trip():
    samples = [
        ConstantEpsilon(0.8),
        LevelRuleEpsilon("sqrt_side"),
        LevelRuleEpsilon("side", anchor_level=2),
        OriginDecayEpsilon(1.2, 0.5),
        TableEpsilon({"1:0": 0.5}, ConstantEpsilon(1.0)),
        PowerEpsilon(LevelRuleEpsilon("side"), 0.25),
    ]
    probes = [ROOT, DyadicCube(1, (0,)), DyadicCube(3, (5,)), DyadicCube(2, (1,))]
    for eps in samples:
        back = epsilon_from_descriptor(eps.descriptor())
        for q in probes:
            assert back.value(q) == pytest.approx(eps.value(q), rel=1e-15)
    assert OriginDecayEpsilon(1.2, 0.5).descriptor() == {
        "kind": "section5", "C": 1.2, "a": 0.5}
    with pytest.raises(ValueError):
        epsilon_from_descriptor({"kind": "mystery"})


def test_domination_all_kinds():
    family = []
    for d in range(5):
        family.extend(descendants(ROOT, d))
    for eps in (ConstantEpsilon(1.0), LevelRuleEpsilon("sqrt_side"),
                OriginDecayEpsilon(1.2, 0.5),
                PowerEpsilon(LevelRuleEpsilon("side"), 0.5)):
        ok, pair = validate_domination(eps, family)
        assert ok, f"{eps.descriptor()} violated at {pair}"


def test_domination_exhaustive_deep_chain():
    # fine check along the decaying corridor where the rule actually varies
    eps = OriginDecayEpsilon(1.3, 0.4)
    family = chain_and_buddies(14)
    family += [DyadicCube(k, (2,)) for k in range(2, 14)]
    ok, pair = validate_domination(eps, family)
    assert ok, pair


def test_domination_exhaustive_unit_interval():
    # every cube of levels 0..14 inside [0,1): the min-repair leaves no gap
    eps = OriginDecayEpsilon(1.2, 0.5)
    family = []
    for d in range(15):
        family.extend(descendants(ROOT, d))
    assert len(family) == (1 << 15) - 1
    ok, pair = validate_domination(eps, family)
    assert ok, pair


def test_domination_rejects_growing_level_rule():
    grower = LevelRuleEpsilon(lambda k: float(k + 1))
    family = [DyadicCube(k, (0,)) for k in range(4)]
    ok, pair = validate_domination(grower, family)
    assert not ok
    child, parent = pair
    assert parent.contains(child)
    assert grower.value(child) > grower.value(parent)


def test_domination_catches_violations():
    bad = TableEpsilon({"1:0": 2.0}, ConstantEpsilon(1.0))  # child above parent
    ok, pair = validate_domination(bad, [ROOT, DyadicCube(1, (0,))])
    assert not ok
    child, parent = pair
    assert child.token() == "1:0"
    assert parent.token() == "0:0"
    # the ancestor need not be the direct parent
    bad2 = TableEpsilon({"3:0": 5.0}, ConstantEpsilon(1.0))
    ok2, pair2 = validate_domination(bad2, [ROOT, DyadicCube(3, (0,))])
    assert not ok2
    assert pair2[0].token() == "3:0"


def test_level_max_agrees_with_scan():
    # generic fallback must equal an explicit pass over the level
    eps = OriginDecayEpsilon(1.2, 0.5)
    for d in range(1, 7):
        direct = max(eps.value(q) for q in descendants(ROOT, d))
        assert eps.level_max(ROOT, d) == pytest.approx(direct, rel=1e-14)


def test_decay_profile_shapes():
    flat = decay_profile(ConstantEpsilon(1.0), ROOT, 6)
    assert flat == [1.0] * 7
    slope = decay_profile(LevelRuleEpsilon("sqrt_side"), ROOT, 6)
    assert len(slope) == 7
    assert all(a >= b for a, b in zip(slope, slope[1:]))
    assert slope[0] == pytest.approx(2.0 ** -0.5, rel=1e-14)
    assert slope[-1] == pytest.approx(2.0 ** -3.5, rel=1e-14)
    # origin decay caps at C on every level because off-chain cubes stay there
    cap = decay_profile(OriginDecayEpsilon(1.2, 0.5), ROOT, 5)
    assert cap == pytest.approx([1.2] * 6, rel=1e-14)


def test_power_preserves_domination():
    eps = OriginDecayEpsilon(1.2, 0.5).power(0.5)
    family = chain_and_buddies(8)
    ok, _ = validate_domination(eps, family)
    assert ok
    assert eps.value(DyadicCube(3, (0,))) == pytest.approx(0.18 ** 0.5, rel=1e-12)
    assert eps.value(DyadicCube(2, (0,))) == pytest.approx(0.5855216728156467, rel=1e-12)
    with pytest.raises(ValueError):
        OriginDecayEpsilon(1.2, 0.5).power(2.0)
    with pytest.raises(ValueError):
        OriginDecayEpsilon(1.2, 0.5).power(0.0)
