"""Seeded Monte Carlo harness.

Every trial ``t`` draws its sample from ``trial_seed(master_seed, t)``, so
reports depend only on the inputs, never on how trials are scheduled across
worker processes. Aggregation happens after all per-trial rows are collected
in trial order.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bounds
from .counting import _dp_counts, enumerate_reps, fast_k2_counts, rho_max
from .model import (
    BandPolicy,
    ComputationError,
    ExperimentParams,
    ParamError,
    validate_params,
    window_of,
)
from .packing import EXACT_CAP, overlap_pairs, pack
from .sampling import ProbabilityRule, probability_for, sample_indicator, trial_seed

FULL_WINDOW_N_MAX = 10**4
DEFAULT_SAMPLE_M = 32


@dataclass(frozen=True)
class ResolvedBand:
    mode: str
    lo: float
    hi: float
    details: dict = field(default_factory=dict)


@dataclass
class TrialReport:
    params: dict
    rule: dict
    p: float
    clamped: bool
    band: ResolvedBand
    trials: int
    master_seed: int
    j_strategy: str
    js: np.ndarray
    mean_y: np.ndarray
    var_y: np.ndarray
    median_y: np.ndarray
    in_band_fraction: np.ndarray
    x_zero_fraction: float
    coverage_fraction: float
    mean_ystar: np.ndarray | None = None
    mean_w: np.ndarray | None = None
    ystar_method: str | None = None
    sandwich_ok: bool | None = None
    elapsed: float = 0.0

    def summary(self) -> dict:
        return {
            "params": self.params,
            "rule": self.rule,
            "p": self.p,
            "clamped": self.clamped,
            "band": asdict(self.band),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "j_strategy": self.j_strategy,
            "inspected_j": len(self.js),
            "x_zero_fraction": self.x_zero_fraction,
            "coverage_fraction": self.coverage_fraction,
            "ystar_method": self.ystar_method,
            "sandwich_ok": self.sandwich_ok,
        }

    def rows(self) -> list[dict]:
        out = []
        for i, j in enumerate(self.js.tolist()):
            out.append(
                {
                    "j": j,
                    "mean_y": float(self.mean_y[i]),
                    "var_y": float(self.var_y[i]),
                    "median_y": int(self.median_y[i]),
                    "mean_ystar": None if self.mean_ystar is None else float(self.mean_ystar[i]),
                    "mean_w": None if self.mean_w is None else float(self.mean_w[i]),
                    "in_band_fraction": float(self.in_band_fraction[i]),
                }
            )
        return out


@dataclass
class ScanReport:
    axis: str
    points: list[dict]
    meta: dict = field(default_factory=dict)
    slope: float | None = None


def resolve_threads(threads) -> int:
    if threads in (None, "auto"):
        threads = os.environ.get("REPBASIS_THREADS", "1")
        if threads == "auto":
            return os.cpu_count() or 1
    t = int(threads)
    if t < 1:
        raise ParamError("BAD_THREADS", f"threads must be >= 1, got {threads}", "threads")
    return t


def _map_trials(fn, tasks: list, threads: int) -> list:
    """Apply ``fn`` to every task, keeping task order in the result."""
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (threads * 4))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


def lower_median(x: np.ndarray, axis: int = 0) -> np.ndarray:
    """Lower median: element (T-1)//2 of the sorted sample."""
    x = np.sort(x, axis=axis)
    return np.take(x, (x.shape[axis] - 1) // 2, axis=axis)


# --- band -----------------------------------------------------------------


def _window_capacities(n: int, k: int, window) -> tuple[int, int]:
    if k == 2:
        # rho(j) = ceil(min(j, 2n-j)/2) is unimodal with peak at n
        caps = [rho_max(n, 2, window.lo), rho_max(n, 2, window.hi), rho_max(n, 2, min(max(n, window.lo), window.hi))]
    else:
        mid = (window.lo + window.hi) // 2
        caps = [rho_max(n, k, j) for j in (window.lo, window.hi, mid)]
    return min(caps), max(caps)


def resolve_band(params: ExperimentParams, band: BandPolicy, p: float) -> ResolvedBand:
    """Turn a band policy into numeric [lo, hi] limits for one n."""
    n, k, alpha = params.n, params.k, params.alpha
    log_n = math.log(n)
    if band.mode == "fixed":
        return ResolvedBand("fixed", band.c_lo * log_n, band.c_hi * log_n, {"c_lo": band.c_lo, "c_hi": band.c_hi})
    window = window_of(n, k, alpha)
    if k == 2:
        rho_lo, rho_hi = _window_capacities(n, k, window)
        e_min, e_max = rho_lo * p**2, rho_hi * p**2
        gamma = band.target_gamma
        sup = params.eta * alpha / 2.0
        gamma_clamped = not gamma < sup
        if gamma_clamped and sup > 0:
            gamma = sup / 2.0
        sol = bounds.chernoff_solve(alpha, params.eta, band.target_lambda, gamma, e_min, e_max)
        return ResolvedBand(
            "proof",
            sol.band[0],
            sol.band[1],
            {
                "e_min": e_min,
                "e_max": e_max,
                "delta0": sol.delta0,
                "eps0": sol.eps0,
                "target_lambda": band.target_lambda,
                "target_gamma": band.target_gamma,
                "gamma_used": gamma,
                "gamma_clamped": gamma_clamped,
            },
        )
    K = bounds.theorem31_constant(alpha, k, params.eps)
    floor = bounds.capacity_constant_floor(alpha, k)
    mid = (window.lo + window.hi) // 2
    try:
        cjs = [max(floor, bounds.capacity_constant(n, k, j)) for j in (window.lo, window.hi, mid)]
        source = "capacity"
    except ComputationError:
        cjs = [floor]
        source = "floor"
    gamma_n = min(bounds.lower_window_constant(c, K, k, params.xi) for c in cjs)
    delta_n = max(bounds.upper_window_constant(c, K, k) for c in cjs)
    c_k = bounds.overlap_multiplier(k)
    return ResolvedBand(
        "proof",
        gamma_n * log_n,
        c_k * delta_n * log_n,
        {"gamma_n": gamma_n, "delta_n": delta_n, "C_k": c_k, "K": K, "c_j_source": source},
    )


def chernoff_fixed_band(alpha: float, eta: float, lam: float = 1.0, gamma: float | None = None) -> BandPolicy:
    """Fixed multipliers of log n taken from the Chernoff solution at (alpha, eta)."""
    if gamma is None:
        gamma = eta * alpha / 4.0
    sol = bounds.chernoff_solve(alpha, eta, lam, gamma)
    c_lo, c_hi = sol.multipliers(alpha, eta)
    return BandPolicy("fixed", c_lo=c_lo, c_hi=c_hi)


# --- trials ---------------------------------------------------------------


def select_js(params: ExperimentParams, strategy, master_seed: int, sample_m: int = DEFAULT_SAMPLE_M):
    """Targets inspected in each trial, and the strategy name actually used."""
    window = window_of(params.n, params.k, params.alpha)
    if not isinstance(strategy, str):
        js = np.array(sorted({int(j) for j in strategy}), dtype=np.int64)
        if len(js) == 0 or js[0] < 0 or js[-1] > params.k * params.n:
            raise ParamError("J_OUT_OF_RANGE", "explicit targets must lie in [0, k n]", "j")
        return js, "explicit"
    if strategy == "auto":
        strategy = "all" if params.k == 2 or params.n <= FULL_WINDOW_N_MAX else "sample"
    if strategy == "all":
        return np.arange(window.lo, window.hi + 1, dtype=np.int64), "all"
    if strategy == "sample":
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([master_seed, 2**32 - 1])))
        extra = rng.integers(window.lo, window.hi + 1, size=sample_m)
        fixed = [window.lo, (window.lo + window.hi) // 2, window.hi]
        return np.array(sorted(set(fixed) | set(extra.tolist())), dtype=np.int64), "sample"
    raise ParamError("BAD_J_STRATEGY", f"unknown j strategy {strategy!r}", "j_strategy")


def _trial_counts(n: int, k: int, p: float, seed: int, js: np.ndarray, full: bool):
    ind = sample_indicator(n, p, seed)
    if k == 2:
        return ind, fast_k2_counts(ind)[js]
    members = np.flatnonzero(ind)
    if full:
        return ind, _dp_counts(members, n, k, "distinct")[js]
    return ind, np.array([len(enumerate_reps(members, k, int(j), cap=10**9)) for j in js], dtype=np.int64)


def _run_trial(task):
    n, k, p, seed, js, full, with_packing, pack_cap = task
    ind, y = _trial_counts(n, k, p, seed, js, full)
    if not with_packing:
        return y, None, None, None, True
    members = np.flatnonzero(ind)
    ystar = np.zeros(len(js), dtype=np.int64)
    w = np.zeros(len(js), dtype=np.int64)
    exact = 0
    ok = True
    for i, j in enumerate(js.tolist()):
        reps = enumerate_reps(members, k, j, cap=10**9)
        res = pack(reps, pack_cap)
        ystar[i], w[i] = res.y_star, res.w
        exact += res.method == "exact"
        ok &= res.y_star <= len(reps) <= res.y_star + res.w
    return y, ystar, w, exact, ok


def run_trials(
    params: ExperimentParams,
    rule: ProbabilityRule,
    band: BandPolicy,
    trials: int,
    master_seed: int,
    j_strategy="auto",
    sample_m: int = DEFAULT_SAMPLE_M,
    with_packing: bool = False,
    pack_cap: int = EXACT_CAP,
    threads=1,
) -> TrialReport:
    """Monte Carlo estimate of P(X = 0) and per-target statistics of Y."""
    start = time.perf_counter()
    validate_params(params)
    if not isinstance(trials, int) or trials < 1:
        raise ParamError("BAD_TRIALS", f"trials must be >= 1, got {trials}", "trials")
    n, k = params.n, params.k
    p, clamped = probability_for(rule, n)
    resolved = resolve_band(params, band, p)
    js, strategy = select_js(params, j_strategy, master_seed, sample_m)
    full = strategy == "all"
    tasks = [(n, k, p, trial_seed(master_seed, t), js, full, with_packing, pack_cap) for t in range(trials)]
    results = _map_trials(_run_trial, tasks, resolve_threads(threads))
    ys = np.stack([r[0] for r in results])
    in_band = (ys >= resolved.lo) & (ys <= resolved.hi)
    report = TrialReport(
        params=asdict(params),
        rule=rule.to_dict(),
        p=p,
        clamped=clamped,
        band=resolved,
        trials=trials,
        master_seed=master_seed,
        j_strategy=strategy,
        js=js,
        mean_y=ys.mean(axis=0),
        var_y=ys.var(axis=0),
        median_y=lower_median(ys),
        in_band_fraction=in_band.mean(axis=0),
        x_zero_fraction=float(in_band.all(axis=1).mean()),
        coverage_fraction=float((ys >= 1).all(axis=1).mean()),
    )
    if with_packing:
        report.mean_ystar = np.stack([r[1] for r in results]).mean(axis=0)
        report.mean_w = np.stack([r[2] for r in results]).mean(axis=0)
        exact = sum(r[3] for r in results)
        total = trials * len(js)
        report.ystar_method = "exact" if exact == total else ("greedy" if exact == 0 else "mixed")
        report.sandwich_ok = all(r[4] for r in results)
    report.elapsed = time.perf_counter() - start
    return report


# --- scans ----------------------------------------------------------------


def _coverage_trial(task):
    n, k, p, seed, lo, hi, mode = task
    ind = sample_indicator(n, p, seed)
    if k == 2 and mode == "distinct":
        y = fast_k2_counts(ind)
    else:
        y = _dp_counts(np.flatnonzero(ind), n, k, mode)
    return bool((y[lo : hi + 1] >= 1).all())


def threshold_scan(alpha, k, n, a_grid, trials, master_seed, threads=1, mode="distinct") -> ScanReport:
    """Coverage probability of the window along the threshold offset A.

    Trial ``t`` uses the same seed at every grid point, so the sampled sets
    are nested in A (common random numbers).
    """
    validate_params(ExperimentParams(n=n, k=k, alpha=alpha))
    if trials < 1:
        raise ParamError("BAD_TRIALS", f"trials must be >= 1, got {trials}", "trials")
    window = window_of(n, k, alpha)
    threads = resolve_threads(threads)
    seeds = [trial_seed(master_seed, t) for t in range(trials)]
    points = []
    for a in a_grid:
        rule = ProbabilityRule.av2(alpha, a) if k == 2 else ProbabilityRule.avk(alpha, k, a)
        point = {"value": float(a), "analytic": bounds.av_limit_prob(a, alpha, k)}
        try:
            p, clamped = probability_for(rule, n)
        except ParamError as err:
            if err.code != "INNER_NEGATIVE":
                raise
            point.update(estimate=None, se=None, trials=0, p=None, clamped=False, skipped=True)
            points.append(point)
            continue
        tasks = [(n, k, p, s, window.lo, window.hi, mode) for s in seeds]
        hits = _map_trials(_coverage_trial, tasks, threads)
        q = sum(hits) / trials
        point.update(
            estimate=q, se=math.sqrt(q * (1 - q) / trials), trials=trials, p=p, clamped=clamped, skipped=False
        )
        points.append(point)
    meta = {"alpha": alpha, "k": k, "n": n, "trials": trials, "master_seed": master_seed, "mode": mode,
            "window": [window.lo, window.hi]}
    return ScanReport("a_const", points, meta)


def _overlap_trial(task):
    n, k, p, seed, j = task
    members = np.flatnonzero(sample_indicator(n, p, seed))
    reps = enumerate_reps(members, k, j, cap=10**9)
    return len(reps), overlap_pairs(reps)[0]


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log y against log x."""
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    return float(np.polyfit(lx, ly, 1)[0])


def decay_scan(k, alpha, eps, n_grid, trials, master_seed, threads=1) -> ScanReport:
    """Mean overlap count W at j = floor(k n / 2) along n, with the fitted log-log slope."""
    if k < 3:
        raise ParamError("K_TOO_SMALL", "decay scan needs k >= 3 (2-sums of one target never overlap)", "k")
    if trials < 1:
        raise ParamError("BAD_TRIALS", f"trials must be >= 1, got {trials}", "trials")
    threads = resolve_threads(threads)
    rule = ProbabilityRule.thm31(alpha, k, eps)
    points = []
    for n in n_grid:
        window_of(n, k, alpha)
        p, clamped = probability_for(rule, n)
        j = k * n // 2
        out = _map_trials(_overlap_trial, [(n, k, p, trial_seed(master_seed, t), j) for t in range(trials)], threads)
        w = np.array([o[1] for o in out], dtype=np.float64)
        y = np.array([o[0] for o in out], dtype=np.float64)
        try:
            expected = bounds.expected_overlap(n, k, p, j)[0]
        except ComputationError:
            expected = None
        points.append(
            {
                "value": n,
                "estimate": float(w.mean()),
                "se": float(w.std() / math.sqrt(trials)),
                "trials": trials,
                "p": p,
                "clamped": clamped,
                "j": j,
                "mean_y": float(y.mean()),
                "expected_w": expected,
                "order_estimate": bounds.overlap_order(n, k),
            }
        )
    good = [(pt["value"], pt["estimate"]) for pt in points if pt["estimate"] > 0]
    slope = loglog_slope(*zip(*good)) if len(good) >= 2 else None
    meta = {"k": k, "alpha": alpha, "eps": eps, "trials": trials, "master_seed": master_seed}
    return ScanReport("n", points, meta, slope)


# --- median-mean gap -------------------------------------------------------


def _ystar_trial(task):
    n, k, p, seed, j, pack_cap = task
    members = np.flatnonzero(sample_indicator(n, p, seed))
    reps = enumerate_reps(members, k, j, cap=10**9)
    if k == 2:
        return len(reps), len(reps), "exact"
    res = pack(reps, pack_cap, with_overlap=False)
    return res.y_star, len(reps), res.method


def concentration_check(params, rule, trials, master_seed, j, threads=1, pack_cap=EXACT_CAP) -> dict:
    """Compare |median - mean| of Y*(j) with 40 sqrt(k mean)."""
    validate_params(params)
    if trials < 1:
        raise ParamError("BAD_TRIALS", f"trials must be >= 1, got {trials}", "trials")
    p, clamped = probability_for(rule, params.n)
    tasks = [(params.n, params.k, p, trial_seed(master_seed, t), j, pack_cap) for t in range(trials)]
    out = _map_trials(_ystar_trial, tasks, resolve_threads(threads))
    ystar = np.array([o[0] for o in out], dtype=np.int64)
    methods = {o[2] for o in out}
    mean = float(ystar.mean())
    median = int(lower_median(ystar))
    gap = abs(median - mean)
    bound = 40.0 * math.sqrt(params.k * mean)
    return {
        "params": asdict(params),
        "rule": rule.to_dict(),
        "p": p,
        "clamped": clamped,
        "j": j,
        "trials": trials,
        "master_seed": master_seed,
        "emp_mean": mean,
        "emp_median": median,
        "mean_y": float(np.mean([o[1] for o in out])),
        "gap": gap,
        "bound": bound,
        "passed": gap <= bound,
        "ystar_method": methods.pop() if len(methods) == 1 else "mixed",
    }

