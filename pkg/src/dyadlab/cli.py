"""Batch experiment driver.

Subcommands run self-contained experiments from a JSON config and write CSV
tables (plus rendered PNG figures unless --no-plots) into the output
directory.  The CSVs are the canonical product: rerunning a command with the
same config reproduces them byte for byte.  Exit codes: 0 all asserted checks
pass, 1 an asserted check failed, 2 the config is invalid.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from . import reference
from .banks import BANK_KINDS, build_bank
from .cubes import DyadicCube, descendants
from .epsilon import EpsilonCollection, epsilon_from_descriptor
from .exponents import (ConstantExponent, ExponentFunction, check_diening,
                        check_eps_diening, check_eps_diening_pointwise,
                        check_lh_infty, exponent_from_descriptor, luxemburg_norm)
from .grid import GridFunction, write_function_csv
from .operators import (HAAR_MODES, build_sparse_stopping, compactness_probe,
                        corner_chain, cz_decompose, domination_ratio,
                        dyadic_maximal, eps_level_arrays, eps_maximal,
                        haar_coefficient, haar_multiplier, scale_ladder,
                        sparse_operator, verify_sparse)


class ConfigError(ValueError):
    """Config file or flag combination the driver refuses to run."""


_DEFAULTS_1D = {
    "dimension": 1,
    "root": "0:0",
    "depth": 8,
    "exponent": {"kind": "section5", "a": 0.5},
    "epsilon": {"kind": "section5", "C": 1.2, "a": 0.5},
    "bank": {"kind": "random_cells", "count": 24, "seed": 42},
    "tolerances": {"norm_tol": 1e-10, "slack": 1e-9},
    "cubes": {"family": "origin_chain", "n_max": 40},
    "haar_mode": "full_support",
}

_DEFAULTS_ND = {
    "root": None,  # filled from the dimension
    "depth": 4,
    "exponent": {"kind": "constant", "p": 2.5},
    "epsilon": {"kind": "level_rule", "base": "sqrt_side"},
    "bank": {"kind": "random_cells", "count": 24, "seed": 42},
    "tolerances": {"norm_tol": 1e-10, "slack": 1e-9},
    "cubes": {"family": "descendants", "k_max": 3},
    "haar_mode": "full_support",
}

_ONE_DIMENSIONAL_KINDS = ("section5", "table")


@dataclass
class ExperimentConfig:
    dimension: int
    root: DyadicCube
    depth: int
    exponent: ExponentFunction
    epsilon: EpsilonCollection
    bank_spec: dict
    tolerances: dict
    cubes_spec: dict
    haar_mode: str
    out_dir: str

    def bank(self, depth: int | None = None) -> list[GridFunction]:
        return build_bank(self.bank_spec["kind"], self.bank_spec["count"],
                          self.bank_spec["seed"], self.root, depth or self.depth)


def load_config(args) -> ExperimentConfig:
    raw: dict = {}
    if args.config is not None:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")

    dim = args.dim if args.dim is not None else int(raw.get("dimension", 1))
    if dim < 1:
        raise ConfigError("dimension must be at least 1")
    merged = dict(_DEFAULTS_1D) if dim == 1 else dict(_DEFAULTS_ND, dimension=dim)
    if merged["root"] is None:
        merged["root"] = "0:" + ",".join(["0"] * dim)
    merged.update(raw)
    merged["dimension"] = dim

    if args.depth is not None:
        merged["depth"] = args.depth
    if args.seed is not None:
        merged["bank"] = dict(merged["bank"], seed=args.seed)

    try:
        root = DyadicCube.from_token(str(merged["root"]))
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad root token: {exc}") from exc
    if root.dimension != dim:
        raise ConfigError(f"root token has dimension {root.dimension}, expected {dim}")

    depth = int(merged["depth"])
    if depth < 1:
        raise ConfigError("depth must be at least 1")
    if dim * depth > 24:
        raise ConfigError("grid too large: dimension * depth must stay <= 24")

    for key, kinds in (("exponent", _ONE_DIMENSIONAL_KINDS),
                       ("epsilon", ("section5",))):
        desc = merged[key]
        if dim > 1 and isinstance(desc, dict) and desc.get("kind") in kinds:
            raise ConfigError(f"{key} kind {desc.get('kind')!r} is one-dimensional")
    try:
        exponent = exponent_from_descriptor(merged["exponent"])
        epsilon = epsilon_from_descriptor(merged["epsilon"])
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad descriptor: {exc}") from exc

    # partial dicts in the config overlay the defaults key by key
    bank_spec = dict(_DEFAULTS_1D["bank"])
    if not isinstance(merged["bank"], dict):
        raise ConfigError("bank spec must be a JSON object")
    bank_spec.update(merged["bank"])
    if bank_spec.get("kind") not in BANK_KINDS:
        raise ConfigError(f"unknown bank kind {bank_spec.get('kind')!r}")
    if int(bank_spec.get("count", 0)) < 1:
        raise ConfigError("bank count must be at least 1")
    bank_spec["count"] = int(bank_spec["count"])
    bank_spec["seed"] = int(bank_spec["seed"])

    mode = merged.get("haar_mode", "full_support")
    if getattr(args, "mode", None):
        mode = args.mode
    if mode not in HAAR_MODES:
        raise ConfigError(f"unknown multiplier mode {mode!r}")

    for key in ("tolerances", "cubes"):
        if not isinstance(merged.get(key, {}), dict):
            raise ConfigError(f"{key} must be a JSON object")
    tolerances = dict(_DEFAULTS_1D["tolerances"])
    tolerances.update(merged.get("tolerances", {}))

    return ExperimentConfig(dim, root, depth, exponent, epsilon, bank_spec,
                            tolerances, dict(merged["cubes"]), mode, args.out)


# -- deterministic csv -----------------------------------------------------------


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return v


def write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(c) for c in row])


def _out(cfg: ExperimentConfig, name: str) -> str:
    return os.path.join(cfg.out_dir, name)


def _first_active(bank: list[GridFunction]) -> GridFunction:
    for f in bank:
        if f.sup_norm() > 0.0:
            return f
    raise ConfigError("bank contains only zero functions")


# -- check-conditions -------------------------------------------------------------


def condition_family(cfg: ExperimentConfig) -> list[tuple[str, DyadicCube]]:
    spec = cfg.cubes_spec
    family = spec.get("family", "origin_chain" if cfg.dimension == 1 else "descendants")
    if family == "origin_chain":
        if cfg.dimension != 1:
            raise ConfigError("the origin chain family is one-dimensional")
        n_max = int(spec.get("n_max", 40))
        if n_max < 0:
            raise ConfigError("n_max must be nonnegative")
        out = [("chain", DyadicCube(n, (0,))) for n in range(n_max + 1)]
        out += [("buddy", DyadicCube(n + 1, (1,))) for n in range(n_max + 1)]
        return out
    if family == "descendants":
        k_max = int(spec.get("k_max", min(3, cfg.depth)))
        if not 0 <= k_max <= cfg.depth:
            raise ConfigError("k_max must lie in [0, depth]")
        out = []
        for d in range(k_max + 1):
            out.extend(("grid", q) for q in descendants(cfg.root, d))
        return out
    raise ConfigError(f"unknown cube family {family!r}")


def cmd_check_conditions(cfg: ExperimentConfig, args) -> int:
    labeled = condition_family(cfg)
    cubes = [q for _, q in labeled]
    reports = [
        check_diening(cfg.exponent, cubes),
        check_eps_diening(cfg.exponent, cfg.epsilon, cubes),
        check_eps_diening_pointwise(cfg.exponent, cfg.epsilon, cubes),
        check_eps_diening(cfg.exponent.conjugate(), cfg.epsilon, cubes),
    ]
    names = ["diening", "eps_diening", "eps_diening_pointwise", "eps_diening_conjugate"]

    rows = []
    for name, report in zip(names, reports):
        for (label, q), rec in zip(labeled, report.records):
            rows.append([name, label, q.token(), q.level,
                         rec.p_minus, rec.p_plus, rec.eps, rec.value])
    write_csv(_out(cfg, "conditions.csv"),
              ["condition", "family", "cube", "level",
               "p_minus", "p_plus", "eps", "value"], rows)

    horizon = int(cfg.cubes_spec.get("n_max", 40))
    points = []
    for j in range(horizon + 1):
        for sign in (1.0, -1.0):
            points.append((sign * 2.0 ** j,) + (0.0,) * (cfg.dimension - 1))
    c_inf, p_inf = check_lh_infty(cfg.exponent, points)

    summary = [[name, rep.supremum, rep.witness.token() if rep.witness else "", ""]
               for name, rep in zip(names, reports)]
    summary.append(["lh_infty", c_inf, "", p_inf])
    write_csv(_out(cfg, "conditions_summary.csv"),
              ["condition", "supremum", "witness", "p_inf"], summary)

    if not args.no_plots:
        from . import plots
        plots.plot_condition_report([(r[0], r[3], r[7]) for r in rows],
                                    _out(cfg, "conditions.png"))
    return 0


# -- oracle-suite -----------------------------------------------------------------


def _rel_dev(got: np.ndarray, want: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(want))), 1.0)
    return float(np.max(np.abs(got - want))) / scale


def _cz_lambdas(f: GridFunction, eps: EpsilonCollection) -> list[float]:
    """Thresholds strictly between the weighted root average and the peak."""
    g = f.abs()
    weights = eps_level_arrays(eps, f.root, f.depth)
    w_root = float(weights[0].ravel()[0]) * g.average(f.root)
    peak = max(float(np.max(weights[d] * g.level_average_array(d)))
               for d in range(1, f.depth + 1))
    if not peak > w_root:
        return []
    return [w_root + t * (peak - w_root) for t in (0.25, 0.5, 0.8)]


def run_oracle_suite(cfg: ExperimentConfig, inject_fault: bool = False):
    """All brute-force comparisons; returns (rows, all_ok)."""
    bank = cfg.bank()
    eps = cfg.epsilon
    rows = []

    dev = max(_rel_dev(dyadic_maximal(f).values,
                       reference.maximal_bruteforce(f).values) for f in bank)
    rows.append(["maximal_dyadic_oracle", len(bank), dev, 1e-13, dev <= 1e-13])

    dev = max(_rel_dev(eps_maximal(f, eps).values,
                       reference.maximal_bruteforce(f, eps).values) for f in bank)
    rows.append(["maximal_eps_oracle", len(bank), dev, 1e-13, dev <= 1e-13])

    excess = 0.0
    for f in bank:
        gap = eps_maximal(f, eps).values - eps.sup_bound * dyadic_maximal(f).values
        excess = max(excess, float(np.max(gap)))
    rows.append(["maximal_eps_envelope", len(bank), max(excess, 0.0), 0.0, excess <= 0.0])

    # spike probes guarantee threshold instances and deeply nested stopping
    # families even when the configured bank is flat
    spikes = [GridFunction.indicator(cfg.root, cfg.depth, q)
              for q in scale_ladder(cfg.root, cfg.depth).cubes]
    spikes.append(GridFunction.indicator(
        cfg.root, cfg.depth, corner_chain(cfg.root, cfg.depth).cubes[-1]))

    cz_runs, cz_bad, cz_worst = 0, 0, 0.0
    for f in bank + spikes:
        for lam in _cz_lambdas(f, eps):
            if inject_fault:
                # selection threshold relaxed to half of the audited one
                audit = reference.cz_audit(f, eps, 2.0 * lam, select_lam=lam)
            else:
                audit = reference.cz_audit(f, eps, lam)
            cz_runs += 1
            cz_worst = max(cz_worst, audit["worst_bound_excess"])
            if not (audit["union_exact"] and audit["disjoint"] and audit["bounds_ok"]):
                cz_bad += 1
    # fault mode reports honestly: the broken selection must fail the audit
    label = "cz_oracle_fault_injected" if inject_fault else "cz_oracle"
    rows.append([label, cz_runs, cz_worst, 1e-12, cz_bad == 0 and cz_runs > 0])

    packs, worst_pack, pack_ok = 0, 0.0, True
    for f in bank + spikes:
        if f.sup_norm() == 0.0:
            continue
        good, frac = verify_sparse(build_sparse_stopping(f))
        packs += 1
        worst_pack = max(worst_pack, frac)
        pack_ok = pack_ok and good
    rows.append(["sparse_packing", packs, worst_pack, 0.5, pack_ok])

    norm_dev = 0.0
    for p_val in (1.5, 2.0, 3.0):
        pc = ConstantExponent(p_val)
        for c in (0.7, 1.0, 3.25):
            f = GridFunction.constant(cfg.root, cfg.depth, c)
            want = reference.classical_norm_constant(c, cfg.root.volume, p_val)
            got = luxemburg_norm(f, pc, cfg.tolerances["norm_tol"])
            norm_dev = max(norm_dev, abs(got - want) / want)
    rows.append(["norm_constant_closed_form", 9, norm_dev, 1e-8, norm_dev <= 1e-8])

    hn = min(4, len(bank))
    dev = max(_rel_dev(haar_multiplier(f, eps, cfg.haar_mode).values,
                       reference.haar_multiplier_direct(f, eps, cfg.haar_mode).values)
              for f in bank[:hn])
    rows.append(["haar_direct_oracle", hn, dev, 1e-12, dev <= 1e-12])

    all_ok = all(r[4] for r in rows)
    return rows, all_ok


def cmd_oracle_suite(cfg: ExperimentConfig, args) -> int:
    rows, all_ok = run_oracle_suite(cfg, inject_fault=args.inject_fault)
    write_csv(_out(cfg, "oracle_suite.csv"),
              ["check", "instances", "max_deviation", "tolerance", "passed"], rows)
    for check, instances, devv, tol, ok in rows:
        print(f"{'PASS' if ok else 'FAIL'} {check} ({instances} instances, "
              f"max deviation {devv:.3e})")
    if not args.no_plots:
        from . import plots
        plots.plot_norm_bars([[i, max(r[2], 1e-18)] for i, r in enumerate(rows)],
                             _out(cfg, "oracle_suite.png"))
    return 0 if all_ok else 1


# -- opnorm -----------------------------------------------------------------------


def _operator_for(cfg: ExperimentConfig, name: str):
    if name == "md":
        return lambda f: dyadic_maximal(f)
    if name == "meps":
        return lambda f: eps_maximal(f, cfg.epsilon)
    if name == "teps":
        return lambda f: haar_multiplier(f, cfg.epsilon, cfg.haar_mode)
    if name == "seps":
        return lambda f: sparse_operator(f, build_sparse_stopping(f), cfg.epsilon)
    raise ConfigError(f"unknown operator {name!r}")


def cmd_opnorm(cfg: ExperimentConfig, args) -> int:
    op = _operator_for(cfg, args.operator)
    tol = cfg.tolerances["norm_tol"]
    sweep = sorted({max(1, cfg.depth - 2), cfg.depth, cfg.depth + 2})
    sweep = [d for d in sweep if cfg.dimension * d <= 24]

    rows, summary = [], []
    for d in sweep:
        bank = cfg.bank(depth=d)
        best = 0.0
        for i, f in enumerate(bank):
            nf = luxemburg_norm(f, cfg.exponent, tol)
            if nf == 0.0:
                continue
            ratio = luxemburg_norm(op(f), cfg.exponent, tol) / nf
            best = max(best, ratio)
            rows.append([d, i, nf, ratio])
        summary.append([d, best])
    write_csv(_out(cfg, "opnorm.csv"), ["depth", "index", "norm_f", "ratio"], rows)
    write_csv(_out(cfg, "opnorm_summary.csv"), ["depth", "max_ratio"], summary)
    for d, best in summary:
        print(f"depth {d}: operator {args.operator} norm ratio <= {best:.6f}")

    if not args.no_plots:
        from . import plots
        plots.plot_norm_bars([[r[1], r[3]] for r in rows if r[0] == cfg.depth],
                             _out(cfg, "opnorm.png"))
    return 0


# -- compactness ------------------------------------------------------------------


def parse_n_range(text: str) -> list[int]:
    """"a:b" inclusive, or a comma list of integers."""
    try:
        if ":" in text:
            a, b = text.split(":", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(t) for t in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad N range {text!r}") from exc


def cmd_compactness(cfg: ExperimentConfig, args) -> int:
    if args.n_range is not None:
        n_values = parse_n_range(args.n_range)
    elif args.n_max is not None:
        n_values = list(range(args.n_max + 1))
    else:
        n_values = list(range(cfg.depth + 1))
    if any(n < 0 for n in n_values):
        raise ConfigError("N values must be nonnegative")

    # probe with the rung indicators: one function per scale, so e_N reads
    # off the worst per-scale response beyond the window
    ladder = scale_ladder(cfg.root, cfg.depth)
    bank = [GridFunction.indicator(cfg.root, cfg.depth, q) for q in ladder.cubes]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        series = compactness_probe(cfg.epsilon, cfg.exponent, bank,
                                   n_values=n_values, collection=ladder,
                                   tol=cfg.tolerances["norm_tol"])
    warned = any(issubclass(w.category, RuntimeWarning) for w in caught)

    write_csv(_out(cfg, "compactness.csv"), ["N", "e_N"], series)

    e0 = series[0][1]
    probed_below = [e for n, e in series if n < cfg.depth]
    stalled = (e0 > 0.0 and len(probed_below) > 0
               and all(e >= 0.99 * e0 for e in probed_below))
    verdict = "stalled" if stalled else "decaying"
    write_csv(_out(cfg, "compactness_summary.csv"),
              ["verdict", "e_first", "e_last", "decay_warning"],
              [[verdict, series[0][1], series[-1][1], warned]])
    print(f"tail norms: {verdict}"
          + (" (global weight profile does not decay)" if warned else ""))
    for n, e in series:
        print(f"  e_{n} = {e:.6e}")

    if not args.no_plots:
        from . import plots
        plots.plot_decay_curves([("e_N", n, e) for n, e in series],
                                _out(cfg, "compactness.png"), "tail norm e_N")
    return 0


# -- cz ---------------------------------------------------------------------------


def cmd_cz(cfg: ExperimentConfig, args) -> int:
    if not args.lambda_factor > 1.0:
        raise ConfigError("the threshold factor must exceed 1")
    f = _first_active(cfg.bank())
    g = f.abs()
    w_root = cfg.epsilon.value(cfg.root) * g.average(cfg.root)
    if w_root == 0.0:
        raise ConfigError("the root average vanishes; nothing to decompose")
    lam = args.lambda_factor * w_root
    result = cz_decompose(f, cfg.epsilon, lam)

    rows = [[q.token(), q.level, e, a, e * a]
            for q, e, a in zip(result.cubes, result.eps_values, result.averages)]
    write_csv(_out(cfg, "cz_cubes.csv"),
              ["cube", "level", "eps", "average", "weighted_average"], rows)
    covered = sum((1 << (cfg.dimension * (cfg.root.level + cfg.depth - q.level)))
                  for q in result.cubes)
    total = 1 << (cfg.dimension * cfg.depth)
    write_csv(_out(cfg, "cz_summary.csv"),
              ["lambda", "selected", "covered_cells", "total_cells", "bounds_ok"],
              [[lam, len(result.cubes), covered, total,
                result.bounds_ok(cfg.dimension)]])
    write_function_csv(f, _out(cfg, "cz_input.csv"))
    print(f"threshold {lam:.6e}: {len(result.cubes)} cubes, "
          f"{covered}/{total} cells covered")

    if not args.no_plots:
        from . import plots
        plots.plot_cz_cover(f, lam, result.cubes, _out(cfg, "cz.png"))
    return 0


# -- haar -------------------------------------------------------------------------


def cmd_haar(cfg: ExperimentConfig, args) -> int:
    f = _first_active(cfg.bank())
    out = haar_multiplier(f, cfg.epsilon, cfg.haar_mode)

    rows = []
    for d in range(1, cfg.depth + 1):
        coefs = [abs(haar_coefficient(f, q, cfg.haar_mode))
                 for q in descendants(cfg.root, d)]
        arr = np.array(coefs)
        rows.append([cfg.root.level + d, arr.size,
                     float(np.max(arr)), float(np.sqrt(np.sum(arr * arr)))])
    write_csv(_out(cfg, "haar_levels.csv"),
              ["level", "count", "max_abs_coef", "l2_coef"], rows)
    write_function_csv(f, _out(cfg, "haar_input.csv"))
    write_function_csv(out, _out(cfg, "haar_output.csv"))
    print(f"multiplier mode {cfg.haar_mode}: output sup {out.sup_norm():.6e}")

    if not args.no_plots:
        from . import plots
        plots.plot_function_pair(f, out, ("input", "multiplier output"),
                                 _out(cfg, "haar.png"))
    return 0


# -- sparse -----------------------------------------------------------------------


def cmd_sparse(cfg: ExperimentConfig, args) -> int:
    f = _first_active(cfg.bank())
    coll = build_sparse_stopping(f)
    ok, worst = verify_sparse(coll)
    ratio = domination_ratio(f, cfg.epsilon, cfg.haar_mode)

    g = f.abs()
    rows = [[q.token(), q.level, cfg.epsilon.value(q), g.average(q)]
            for q in coll.cubes]
    write_csv(_out(cfg, "sparse_members.csv"),
              ["cube", "level", "eps", "average"], rows)
    write_csv(_out(cfg, "sparse_summary.csv"),
              ["members", "packing_ok", "worst_packing", "domination_ratio"],
              [[len(coll.cubes), ok, worst, ratio]])
    print(f"{len(coll.cubes)} members, packing "
          f"{'ok' if ok else 'VIOLATED'} (worst fraction {worst:.4f}), "
          f"domination ratio {ratio:.6e}")

    if not args.no_plots:
        from . import plots
        plots.plot_sparse_layout(f, coll.cubes, _out(cfg, "sparse.png"))
    return 0 if ok and math.isfinite(ratio) else 1


# -- entry ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyadlab",
        description="dyadic-grid operator experiments driven by a JSON config")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", default="dyadlab_out", help="output directory")
        p.add_argument("--seed", type=int, help="override the bank seed")
        p.add_argument("--depth", type=int, help="override the grid depth")
        p.add_argument("--dim", type=int, help="override the dimension")
        p.add_argument("--no-plots", action="store_true",
                       help="skip PNG rendering, write CSVs only")

    p = sub.add_parser("check-conditions",
                       help="per-cube oscillation conditions and the decay fit")
    common(p)
    p.set_defaults(func=cmd_check_conditions)

    p = sub.add_parser("oracle-suite",
                       help="brute-force comparisons; exit 1 on any failure")
    common(p)
    p.add_argument("--inject-fault", action="store_true",
                   help="harness self-test: select at half the audited "
                        "threshold so the checks must fail")
    p.set_defaults(func=cmd_oracle_suite)

    p = sub.add_parser("opnorm", help="empirical operator norm lower bounds")
    common(p)
    p.add_argument("--operator", choices=("md", "meps", "teps", "seps"),
                   default="meps")
    p.set_defaults(func=cmd_opnorm)

    p = sub.add_parser("compactness", help="tail norms of the truncated operator")
    common(p)
    p.add_argument("--n-range", help='window sizes, "a:b" inclusive or comma list')
    p.add_argument("--n-max", type=int, help="window sizes 0..N")
    p.set_defaults(func=cmd_compactness)

    p = sub.add_parser("cz", help="threshold decomposition of one bank function")
    common(p)
    p.add_argument("--lambda-factor", type=float, default=1.5,
                   help="threshold as a multiple of the weighted root average")
    p.set_defaults(func=cmd_cz)

    p = sub.add_parser("haar", help="weighted multiplier applied to one function")
    common(p)
    p.add_argument("--mode", choices=HAAR_MODES)
    p.set_defaults(func=cmd_haar)

    p = sub.add_parser("sparse", help="stopping family, packing audit, domination")
    common(p)
    p.set_defaults(func=cmd_sparse)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        os.makedirs(cfg.out_dir, exist_ok=True)
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
