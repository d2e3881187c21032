"""Per-cube weight collections for the weighted operators.

A collection assigns every dyadic cube a value eps_Q in (0, sup_bound].  The
structural requirement is domination: P inside Q forces eps_P <= eps_Q, so
weights can only shrink when cubes shrink.  Rules that are not monotone by
construction are repaired by taking the minimum over the ancestor chain.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

from .cubes import DyadicCube, descendants

_ENUMERATION_CAP = 1 << 16


class EpsilonCollection:
    """Base class: subclasses define value(); sup_bound is a cached sup.

    sup_bound is taken over cubes at or below the collection's anchor level
    (experiments anchor at a bounded root cube, which is what keeps
    level-driven rules bounded).
    """

    sup_bound: float = math.nan

    def value(self, q: DyadicCube) -> float:
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError

    def power(self, alpha: float) -> "EpsilonCollection":
        """The collection q -> value(q)^alpha for 0 < alpha <= 1."""
        return PowerEpsilon(self, alpha)

    def level_max(self, root: DyadicCube, rel_depth: int) -> float:
        """max of value over the subcubes of `root` exactly `rel_depth` down."""
        if rel_depth < 0:
            raise ValueError("rel_depth must be nonnegative")
        count = 1 << (root.dimension * rel_depth)
        if count > _ENUMERATION_CAP:
            raise ValueError("level too deep to enumerate; rule lacks a closed form")
        return max(self.value(q) for q in descendants(root, rel_depth))


class ConstantEpsilon(EpsilonCollection):
    def __init__(self, c: float) -> None:
        c = float(c)
        if not c > 0.0:
            raise ValueError("weight must be positive")
        self.c = c
        self.sup_bound = c

    def value(self, q: DyadicCube) -> float:
        return self.c

    def level_max(self, root: DyadicCube, rel_depth: int) -> float:
        return self.c

    def descriptor(self) -> dict:
        return {"kind": "constant", "c": self.c}


_NAMED_LEVEL_RULES: dict[str, Callable[[int], float]] = {
    # side length of a level-k cube is 2^-k
    "sqrt_side": lambda k: 2.0 ** (-0.5 * k),
    "side": lambda k: 2.0 ** (-k),
}


class LevelRuleEpsilon(EpsilonCollection):
    """Weight depending on the level only, eps_Q = rule(level(Q)).

    Rules are expected to be nonincreasing in depth; feed the collection to
    `validate_domination` to certify that on a concrete family.
    """

    def __init__(self, rule: Callable[[int], float] | str, anchor_level: int = 0) -> None:
        if isinstance(rule, str):
            if rule not in _NAMED_LEVEL_RULES:
                raise ValueError(f"unknown level rule {rule!r}")
            self.name: str | None = rule
            self._rule = _NAMED_LEVEL_RULES[rule]
        else:
            self.name = None
            self._rule = rule
        self.anchor_level = int(anchor_level)
        self.sup_bound = max(self._rule(k) for k in
                             range(self.anchor_level, self.anchor_level + 65))

    def value(self, q: DyadicCube) -> float:
        v = float(self._rule(q.level))
        if not v > 0.0:
            raise ValueError("level rule produced a nonpositive weight")
        return v

    def level_max(self, root: DyadicCube, rel_depth: int) -> float:
        return float(self._rule(root.level + rel_depth))

    def descriptor(self) -> dict:
        if self.name is None:
            raise ValueError("callable level rules have no serial form")
        return {"kind": "level_rule", "base": self.name, "anchor_level": self.anchor_level}


class OriginDecayEpsilon(EpsilonCollection):
    """Weights collapsing geometrically along the origin chain (1-d).

    The cubes Q_n = [0, 2^-n) carry the base value 2^-n * C^((n+1)^a); each
    right half Q'_n = [2^-n-1, 2^-n) inherits the value of Q_n; everything
    else starts at C.  The served value is the minimum of the base values
    along the ancestor chain, which restores domination where the raw
    assignment would break it (descendants of a right half would otherwise
    jump back up to C).  Config kind: "section5" with C >= 1 and 0 < a < 1.
    """

    def __init__(self, C: float, a: float) -> None:
        C, a = float(C), float(a)
        if not C >= 1.0:
            raise ValueError("the plateau constant must satisfy C >= 1")
        if not 0.0 < a < 1.0:
            raise ValueError("the decay power must satisfy 0 < a < 1")
        self.C = C
        self.a = a
        self.sup_bound = C

    def _base(self, q: DyadicCube) -> float:
        if q.level >= 0 and q.corner == (0,):
            n = q.level
            return 2.0 ** (-n) * self.C ** ((n + 1) ** self.a)
        if q.level >= 1 and q.corner == (1,):
            n = q.level - 1
            return 2.0 ** (-n) * self.C ** ((n + 1) ** self.a)
        return self.C

    def value(self, q: DyadicCube) -> float:
        if q.dimension != 1:
            raise ValueError("this collection is one-dimensional")
        best = self.C  # every ancestor above level 0 starts at C
        cur = q
        while cur.level >= 0:
            best = min(best, self._base(cur))
            cur = cur.parent()
        return best

    def descriptor(self) -> dict:
        return {"kind": "section5", "C": self.C, "a": self.a}


class TableEpsilon(EpsilonCollection):
    """Explicit per-cube values with a fallback rule for everything else."""

    def __init__(self, values: dict[str, float], fallback: EpsilonCollection) -> None:
        self.values = {token: float(v) for token, v in values.items()}
        if any(not v > 0.0 for v in self.values.values()):
            raise ValueError("table weights must be positive")
        self.fallback = fallback
        table_sup = max(self.values.values()) if self.values else 0.0
        self.sup_bound = max(table_sup, fallback.sup_bound)

    def value(self, q: DyadicCube) -> float:
        hit = self.values.get(q.token())
        return hit if hit is not None else self.fallback.value(q)

    def descriptor(self) -> dict:
        return {"kind": "table", "values": dict(self.values),
                "fallback": self.fallback.descriptor()}


class PowerEpsilon(EpsilonCollection):
    """Pointwise power of another collection; alpha in (0, 1] keeps domination."""

    def __init__(self, base: EpsilonCollection, alpha: float) -> None:
        alpha = float(alpha)
        if not 0.0 < alpha <= 1.0:
            raise ValueError("power must satisfy 0 < alpha <= 1")
        # collapse nested powers so repeated attenuation composes exactly
        if isinstance(base, PowerEpsilon):
            alpha = alpha * base.alpha
            base = base.base
        self.base = base
        self.alpha = alpha
        self.sup_bound = base.sup_bound ** alpha

    def value(self, q: DyadicCube) -> float:
        return self.base.value(q) ** self.alpha

    def level_max(self, root: DyadicCube, rel_depth: int) -> float:
        return self.base.level_max(root, rel_depth) ** self.alpha

    def descriptor(self) -> dict:
        return {"kind": "power", "base": self.base.descriptor(), "alpha": self.alpha}


def epsilon_from_descriptor(d: dict) -> EpsilonCollection:
    if not isinstance(d, dict) or "kind" not in d:
        raise ValueError("weight descriptor needs a 'kind'")
    kind = d["kind"]
    if kind == "constant":
        return ConstantEpsilon(d["c"])
    if kind == "level_rule":
        return LevelRuleEpsilon(d["base"], int(d.get("anchor_level", 0)))
    if kind == "section5":
        return OriginDecayEpsilon(d["C"], d["a"])
    if kind == "table":
        return TableEpsilon(dict(d["values"]), epsilon_from_descriptor(d["fallback"]))
    if kind == "power":
        return PowerEpsilon(epsilon_from_descriptor(d["base"]), d["alpha"])
    raise ValueError(f"unknown weight kind {kind!r}")


def validate_domination(eps: EpsilonCollection, cubes: Sequence[DyadicCube]):
    """Check eps_P <= eps_Q for every nested pair in the family.

    Returns (True, None) or (False, (P, Q)) with the first violating pair.
    When a cube's parent is also in the family only that edge is checked,
    which is enough by transitivity; otherwise the whole ancestor chain
    within the family is inspected.
    """
    by_token = {q.token(): q for q in cubes}
    memo: dict[str, float] = {}

    def val(q: DyadicCube) -> float:
        t = q.token()
        if t not in memo:
            memo[t] = eps.value(q)
        return memo[t]

    min_level = min(q.level for q in cubes) if cubes else 0
    for q in cubes:
        vq = val(q)
        parent = q.parent()
        if parent.token() in by_token:
            if vq > val(parent):
                return (False, (q, parent))
            continue
        anc = parent
        while anc.level >= min_level:
            hit = by_token.get(anc.token())
            if hit is not None and vq > val(hit):
                return (False, (q, hit))
            anc = anc.parent()
    return (True, None)


def decay_profile(eps: EpsilonCollection, root: DyadicCube, n_max: int) -> list[float]:
    """s_N = max weight among subcubes of `root` smaller than 2^-N of its side.

    Levels are probed down to n_max + 1 below the root; for collections with
    the domination property the first probed level already attains the sup,
    so the finite window is exact.  The sequence is nonincreasing in N by
    construction.  Entries cover N = 0 .. n_max.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    level_maxes = [eps.level_max(root, d) for d in range(1, n_max + 2)]
    out = []
    running = -math.inf
    for d_max in reversed(level_maxes):
        running = max(running, d_max)
        out.append(running)
    out.reverse()
    return out
