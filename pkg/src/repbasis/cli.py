"""Command-line front end.

Exit codes: 0 success, 1 runtime error, 2 usage or validation error.
Every option can also come from a JSON ``--config`` file whose keys are the
option names (``a_const`` or ``a-const``); options given on the command line
win over the file.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

from . import bounds, counting, experiments, packing
from .model import (
    BandPolicy,
    BasisSample,
    ComputationError,
    ExperimentParams,
    ParamError,
    RepBasisError,
    validate_params,
    window_of,
)
from .oracle import run_oracle_suite
from .report import to_csv, to_json
from .sampling import ProbabilityRule, probability_for, sample_basis

log = logging.getLogger("repbasis")

DEFAULT_SEED = 20261016
# options that never change a result and are kept out of embedded configs
NON_RESULT_KEYS = {"command", "config", "output", "format", "threads", "verbose"}


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with option values")
    p.add_argument("--output", "-o", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--verbose", "-v", action="store_true")


def _add_params(p, n_required=False, k_default=2):
    p.add_argument("--n", type=int, default=None, required=False)
    p.add_argument("--k", type=int, default=k_default)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--xi", type=float, default=0.1)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--a-const", dest="a_const", type=float, default=0.0)


def _add_rule(p):
    p.add_argument("--rule", choices=("thm21", "thm31", "av2", "avk", "logpower", "raw"), default=None,
                   help="inclusion-probability rule (default: raw if --p is given, else thm21 for k=2, thm31 otherwise)")
    p.add_argument("--p", type=float, default=None, help="probability for the raw rule")
    p.add_argument("--K", dest="K", type=float, default=None, help="constant of the logpower rule")


def _add_band(p):
    p.add_argument("--band", choices=("proof", "fixed"), default="proof")
    p.add_argument("--c-lo", dest="c_lo", type=float, default=None)
    p.add_argument("--c-hi", dest="c_hi", type=float, default=None)
    p.add_argument("--target-gamma", dest="target_gamma", type=float, default=1.0)
    p.add_argument("--target-lambda", dest="target_lambda", type=float, default=None)


def _add_run(p, trials_default=100):
    p.add_argument("--trials", type=int, default=trials_default)
    p.add_argument("--master-seed", dest="master_seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--threads", default=None, help='worker count or "auto" (default: $REPBASIS_THREADS or 1)')


def _add_set(p):
    p.add_argument("--set", dest="set", type=_int_list, default=None, help="explicit members, e.g. 0,1,2,3")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed when the set is sampled")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="repbasis", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    def add(name, help):
        sp = sub.add_parser(name, help=help)
        _add_common(sp)
        subs[name] = sp
        return sp

    sp = add("sample", "draw a random subset of {0..n}")
    _add_params(sp)
    _add_rule(sp)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)

    sp = add("count", "representation counts Y(j) for every j in [0, k n]")
    _add_params(sp)
    _add_rule(sp)
    _add_set(sp)
    sp.add_argument("--mode", choices=counting.MODES, default="distinct")

    sp = add("pack", "Y, Y* and W per target")
    _add_params(sp)
    _add_rule(sp)
    _add_set(sp)
    sp.add_argument("--j", type=_int_list, default=None, help="targets (default: the window)")
    sp.add_argument("--pack-cap", dest="pack_cap", type=int, default=packing.EXACT_CAP)

    sp = add("bounds", "every analytic constant for the given parameters")
    _add_params(sp)
    sp.add_argument("--cj", dest="cj", type=float, default=None, help="C(j) override")
    sp.add_argument("--target-gamma", dest="target_gamma", type=float, default=None)

    sp = add("trials", "Monte Carlo estimate of P(X = 0)")
    _add_params(sp)
    _add_rule(sp)
    _add_band(sp)
    _add_run(sp)
    sp.add_argument("--j-strategy", dest="j_strategy", choices=("auto", "all", "sample"), default="auto")
    sp.add_argument("--j", type=_int_list, default=None, help="explicit targets (overrides --j-strategy)")
    sp.add_argument("--sample-m", dest="sample_m", type=int, default=experiments.DEFAULT_SAMPLE_M)
    sp.add_argument("--with-packing", dest="with_packing", action="store_true")
    sp.add_argument("--pack-cap", dest="pack_cap", type=int, default=packing.EXACT_CAP)

    sp = add("scan-threshold", "window coverage probability along the threshold offset A")
    _add_params(sp)
    _add_run(sp)
    sp.add_argument("--a-grid", dest="a_grid", type=_float_list, default=[-4.0, 0.0, 4.0])
    sp.add_argument("--mode", choices=counting.MODES, default="distinct")

    sp = add("scan-decay", "mean overlap count W along n")
    _add_params(sp, k_default=3)
    _add_run(sp)
    sp.add_argument("--n-grid", dest="n_grid", type=_int_list, default=[1000, 10000, 100000])

    sp = add("check-median", "median-mean gap of Y* at one target")
    _add_params(sp, k_default=3)
    _add_rule(sp)
    _add_run(sp)
    sp.add_argument("--j", type=int, default=None, help="target (default: floor(k n / 2))")
    sp.add_argument("--pack-cap", dest="pack_cap", type=int, default=packing.EXACT_CAP)

    sp = add("oracle", "brute-force equivalence suite")
    sp.add_argument("--instances", type=int, default=200)
    sp.add_argument("--max-n", dest="max_n", type=int, default=30)
    sp.add_argument("--master-seed", dest="master_seed", type=int, default=0)
    return parser, subs


def _apply_config(parser, subs, argv):
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise UsageError(f"--config: cannot read {args.config}: {err}")
    if not isinstance(cfg, dict):
        raise UsageError("--config: top level must be an object")
    sp = subs[args.command]
    known = {a.dest for a in sp._actions} - {"help", "config"}
    flag_to_dest = {opt.lstrip("-").replace("-", "_"): a.dest for a in sp._actions for opt in a.option_strings}
    resolved = {}
    for key, value in cfg.items():
        norm = key.replace("-", "_")
        dest = norm if norm in known else flag_to_dest.get(norm)
        if dest is None or dest not in known:
            raise UsageError(f"--config: unknown key {key!r}")
        resolved[dest] = value
    sp.set_defaults(**resolved)
    return parser.parse_args(argv)


def _resolved_config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in NON_RESULT_KEYS}


def _params(args, need_n=True) -> ExperimentParams:
    if args.n is None:
        if need_n:
            raise ParamError("N_MISSING", "--n is required", "n")
        n = 0
    else:
        n = args.n
    params = ExperimentParams(
        n=n, k=args.k, alpha=args.alpha, eta=args.eta, eps=args.eps, xi=args.xi, lam=args.lam, a_const=args.a_const
    )
    return validate_params(params) if need_n else params


def _rule(args) -> ProbabilityRule:
    tag = args.rule or ("raw" if args.p is not None else ("thm21" if args.k == 2 else "thm31"))
    if tag == "raw":
        if args.p is None:
            raise ParamError("P_MISSING", "--p is required for the raw rule", "p")
        return ProbabilityRule.raw(args.p)
    if tag == "thm21":
        return ProbabilityRule.thm21(args.alpha, args.eta)
    if tag == "thm31":
        return ProbabilityRule.thm31(args.alpha, args.k, args.eps)
    if tag == "av2":
        return ProbabilityRule.av2(args.alpha, args.a_const)
    if tag == "avk":
        return ProbabilityRule.avk(args.alpha, args.k, args.a_const)
    if args.K is None:
        raise ParamError("K_MISSING", "--K is required for the logpower rule", "K")
    return ProbabilityRule.logpower(args.K, args.eps)


def _band(args, params) -> BandPolicy:
    lam = args.target_lambda if args.target_lambda is not None else params.lam
    if args.band == "fixed":
        if args.c_lo is None and args.c_hi is None:
            fixed = experiments.chernoff_fixed_band(params.alpha, params.eta, lam)
            return BandPolicy("fixed", fixed.c_lo, fixed.c_hi, args.target_gamma, lam)
        return BandPolicy(
            "fixed",
            0.0 if args.c_lo is None else args.c_lo,
            math.inf if args.c_hi is None else args.c_hi,
            args.target_gamma,
            lam,
        )
    return BandPolicy("proof", target_gamma=args.target_gamma, target_lambda=lam)


def _sample_or_set(args) -> tuple[BasisSample, dict]:
    if args.set is not None:
        members = sorted(set(args.set))
        if members and members[0] < 0:
            raise ParamError("BAD_MEMBERS", "members must be nonnegative", "set")
        n = args.n if args.n is not None else (members[-1] if members else 0)
        return BasisSample(n=n, members=tuple(members), p=float("nan"), rule_tag="GIVEN"), {}
    params = _params(args)
    rule = _rule(args)
    p, clamped = probability_for(rule, params.n)
    return sample_basis(params.n, p, args.seed, rule.tag), {"p": p, "clamped": clamped, "rule": rule.to_dict()}


def cmd_sample(args):
    params = _params(args)
    rule = _rule(args)
    p, clamped = probability_for(rule, params.n)
    s = sample_basis(params.n, p, args.seed, rule.tag)
    head = {"config": _resolved_config(args), "n": s.n, "p": p, "clamped": clamped, "seed": s.seed,
            "rule": rule.to_dict(), "size": len(s)}
    if args.format == "json":
        return to_json({**head, "members": list(s.members)})
    return to_csv(["member"], [{"member": m} for m in s.members], head)


def cmd_count(args):
    s, meta = _sample_or_set(args)
    if args.k == 2 and args.mode == "distinct":
        prof = counting.count_fast_k2(s)
    else:
        prof = counting.count_all(s, args.k, args.mode)
    rows = [{"j": j, "count": int(c)} for j, c in enumerate(prof.counts.tolist())]
    head = {"config": _resolved_config(args), "n": s.n, "k": args.k, "mode": args.mode, "size": len(s), **meta}
    if args.format == "json":
        return to_json({**head, "members": list(s.members), "counts": prof.counts})
    return to_csv(["j", "count"], rows, head)


def cmd_pack(args):
    s, meta = _sample_or_set(args)
    if args.j is not None:
        js = args.j
    else:
        js = list(window_of(s.n, args.k, args.alpha))
    rows = []
    for j in js:
        reps = counting.enumerate_reps(s, args.k, j)
        res = packing.pack(reps, args.pack_cap)
        rows.append({"j": j, "y": len(reps), "ystar": res.y_star, "w": res.w, "method": res.method})
    head = {"config": _resolved_config(args), "n": s.n, "k": args.k, "size": len(s), **meta}
    if args.format == "json":
        return to_json({**head, "members": list(s.members), "rows": rows})
    return to_csv(["j", "y", "ystar", "w", "method"], rows, head)


def cmd_bounds(args):
    params = _params(args, need_n=args.n is not None)
    rep = bounds.bounds_report(params, c_j=args.cj, gamma_target=args.target_gamma)
    d = rep.to_dict()
    out = {"config": _resolved_config(args), "K": d.pop("k_const"), "C_k": d.pop("c_k"), **d}
    if args.format == "csv":
        return to_csv(["key", "value"], [{"key": k, "value": v} for k, v in out.items() if k != "config"],
                      out["config"])
    return to_json(out)


def cmd_trials(args):
    params = _params(args)
    rule = _rule(args)
    band = _band(args, params)
    strategy = args.j if args.j is not None else args.j_strategy
    rep = experiments.run_trials(
        params, rule, band, args.trials, args.master_seed, j_strategy=strategy, sample_m=args.sample_m,
        with_packing=args.with_packing, pack_cap=args.pack_cap, threads=args.threads,
    )
    log.info("trials finished in %.3fs", rep.elapsed)
    head = {"config": _resolved_config(args), **rep.summary()}
    cols = ["j", "mean_y", "var_y", "median_y", "mean_ystar", "mean_w", "in_band_fraction"]
    if args.format == "json":
        return to_json({**head, "per_j": rep.rows()})
    return to_csv(cols, rep.rows(), head)


def _scan_output(args, rep, cols):
    head = {"config": _resolved_config(args), "axis": rep.axis, "meta": rep.meta, "slope": rep.slope}
    if args.format == "json":
        return to_json({**head, "points": rep.points})
    return to_csv(cols, rep.points, head)


def cmd_scan_threshold(args):
    if args.n is None:
        raise ParamError("N_MISSING", "--n is required", "n")
    rep = experiments.threshold_scan(args.alpha, args.k, args.n, args.a_grid, args.trials, args.master_seed,
                                     threads=args.threads, mode=args.mode)
    return _scan_output(args, rep, ["value", "estimate", "se", "trials", "p", "clamped", "skipped", "analytic"])


def cmd_scan_decay(args):
    rep = experiments.decay_scan(args.k, args.alpha, args.eps, args.n_grid, args.trials, args.master_seed,
                                 threads=args.threads)
    return _scan_output(args, rep, ["value", "estimate", "se", "trials", "p", "clamped", "j", "mean_y",
                                    "expected_w", "order_estimate"])


def cmd_check_median(args):
    params = _params(args)
    rule = _rule(args)
    j = args.j if args.j is not None else params.k * params.n // 2
    rec = experiments.concentration_check(params, rule, args.trials, args.master_seed, j, threads=args.threads,
                                          pack_cap=args.pack_cap)
    rec = {"config": _resolved_config(args), **rec}
    if args.format == "csv":
        return to_csv(["key", "value"], [{"key": k, "value": v} for k, v in rec.items() if k != "config"],
                      rec["config"])
    return to_json(rec)


def cmd_oracle(args):
    res = run_oracle_suite(args.instances, args.max_n, args.master_seed)
    res = {"config": _resolved_config(args), **res}
    if args.format == "csv":
        rows = [{"key": k, "value": res[k]} for k in ("instances", "max_n", "master_seed", "checked", "passed")]
        return to_csv(["key", "value"], rows, res["config"]), res["passed"]
    return to_json(res), res["passed"]


COMMANDS = {
    "sample": cmd_sample,
    "count": cmd_count,
    "pack": cmd_pack,
    "bounds": cmd_bounds,
    "trials": cmd_trials,
    "scan-threshold": cmd_scan_threshold,
    "scan-decay": cmd_scan_decay,
    "check-median": cmd_check_median,
    "oracle": cmd_oracle,
}

DEFAULT_FORMAT = {"bounds": "json", "check-median": "json", "oracle": "json"}


def run_cli(argv=None) -> int:
    parser, subs = build_parser()
    try:
        args = _apply_config(parser, subs, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as err:
        print(f"repbasis: error: {err}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.format is None:
        args.format = DEFAULT_FORMAT.get(args.command, "csv")
    try:
        text = COMMANDS[args.command](args)
    except ParamError as err:
        print(f"repbasis: invalid {err.field or 'input'}: {err}", file=sys.stderr)
        return 2
    except (ComputationError, RepBasisError) as err:
        print(f"repbasis: {err.code}: {err}", file=sys.stderr)
        return 1
    ok = True
    if isinstance(text, tuple):
        text, ok = text
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
