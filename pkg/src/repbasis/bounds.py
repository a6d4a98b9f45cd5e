"""Closed-form constants and tail bounds: Chernoff rates, Talagrand windows,
median-mean gap, threshold limits, and expected overlap counts."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .counting import enumerate_reps, rho_max
from .model import ComputationError, ExperimentParams, ParamError, validate_params, window_of
from .packing import overlap_pairs
from .sampling import ProbabilityRule, probability_for, theorem31_constant

BISECT_TOL = 1e-12
OVERLAP_N_CAP = 60


def expected_count(rho: int, p: float, k: int) -> float:
    """Finite-n expectation rho * p^k of a representation count."""
    return rho * p**k


def upper_rate(delta: float, alpha: float, eta: float) -> float:
    """(1/alpha + eta/2) * ((1+delta) log(1+delta) - delta)."""
    return (1.0 / alpha + eta / 2.0) * ((1.0 + delta) * math.log1p(delta) - delta)


def lower_rate(eps: float, alpha: float, eta: float) -> float:
    """(1 - 2 eps + 2 eps log eps) * (1 + eta alpha / 2); tends to 1 + eta alpha/2 at 0."""
    core = 1.0 if eps == 0 else 1.0 - 2.0 * eps + 2.0 * eps * math.log(eps)
    return core * (1.0 + eta * alpha / 2.0)


def bisect(fn, lo: float, hi: float, tol: float = BISECT_TOL, max_iter: int = 4000) -> float:
    """Root of a monotone ``fn`` bracketed by [lo, hi]; stops at relative width ``tol``."""
    flo = fn(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * max(abs(hi), 1e-300) or mid in (lo, hi):
            break
        fm = fn(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ChernoffSolution:
    delta0: float
    eps0: float
    band: tuple[float, float] | None = None

    def multipliers(self, alpha: float, eta: float) -> tuple[float, float]:
        """Band per unit of log n, using the asymptotic extreme means."""
        return self.eps0 * (1.0 + eta * alpha / 2.0), (1.0 + self.delta0) * (1.0 / alpha + eta / 2.0)


def solve_upper(alpha: float, eta: float, lambda_target: float) -> float:
    """delta0 with upper_rate(delta0) = lambda_target + 1."""
    goal = lambda_target + 1.0
    fn = lambda d: upper_rate(d, alpha, eta) - goal  # noqa: E731
    hi = 1.0
    while fn(hi) < 0:
        hi *= 2.0
    return bisect(fn, 0.0, hi)


def solve_lower(alpha: float, eta: float, gamma_target: float) -> float:
    """eps0 in (0, 1/e] with lower_rate(eps0) = 1 + gamma_target."""
    sup = eta * alpha / 2.0
    if not gamma_target < sup:
        raise ComputationError(
            "NO_LOWER_ROOT",
            f"gamma={gamma_target} must be below eta*alpha/2={sup} for a lower root to exist",
        )
    goal = 1.0 + gamma_target
    fn = lambda e: lower_rate(e, alpha, eta) - goal  # noqa: E731
    return bisect(fn, 0.0, math.exp(-1.0))


def chernoff_solve(alpha, eta, lambda_target, gamma_target, e_min=None, e_max=None) -> ChernoffSolution:
    """Solve both Chernoff rate equations; optionally form the band [eps0 E_min, (1+delta0) E_max]."""
    if not (lambda_target > 0 and gamma_target > 0):
        raise ParamError("BAD_TARGET", "lambda and gamma targets must be positive", "target_gamma")
    d0 = solve_upper(alpha, eta, lambda_target)
    e0 = solve_lower(alpha, eta, gamma_target)
    band = None
    if e_min is not None and e_max is not None:
        band = (e0 * e_min, (1.0 + d0) * e_max)
    return ChernoffSolution(d0, e0, band)


def capacity_constant_floor(alpha: float, k: int) -> float:
    """alpha^(k-1) / (k! (k-1)!), the smallest admissible C(j)."""
    return alpha ** (k - 1) / (math.factorial(k) * math.factorial(k - 1))


def overlap_multiplier(k: int) -> int:
    """(3k-1)^(k-1) k!."""
    return (3 * k - 1) ** (k - 1) * math.factorial(k)


@dataclass(frozen=True)
class Constants:
    K: float
    C_k: int
    gamma_j: float
    med_gap_coeff: float


def lower_window_constant(c_j: float, K: float, k: int, xi: float) -> float:
    """c_j K - sqrt(4 + 4 xi) sqrt(k c_j K)."""
    return c_j * K - math.sqrt(4.0 + 4.0 * xi) * math.sqrt(k * c_j * K)


def upper_window_constant(c_j: float, K: float, k: int) -> float:
    """m / log n for the upper Talagrand window at t = sqrt(5 log n), with median c_j K log n.

    The log n factors cancel, so the value does not depend on n.
    """
    return (math.sqrt(5.0 * k) / 2.0 + 0.5 * math.sqrt(5.0 * k + 4.0 * c_j * K)) ** 2


def constants(alpha: float, k: int, eps: float, xi: float, c_j: float) -> Constants:
    floor = capacity_constant_floor(alpha, k)
    if c_j < floor * (1 - 1e-12):
        raise ParamError("CJ_TOO_SMALL", f"c_j={c_j} is below alpha^(k-1)/(k!(k-1)!)={floor}", "c_j")
    K = theorem31_constant(alpha, k, eps)
    return Constants(
        K=K,
        C_k=overlap_multiplier(k),
        gamma_j=lower_window_constant(c_j, K, k, xi),
        med_gap_coeff=40.0 * math.sqrt(k),
    )


def talagrand_tail(med: float, t: float, k: int) -> tuple[float, float, float]:
    """Lower threshold, its probability bound, and the upper window m.

    ``m_upper`` solves ``m - t sqrt(k m) = med``. The lower bound is
    ``2 exp(-t^2/4)`` capped at 1.
    """
    if not (med > 0 and t > 0):
        raise ParamError("BAD_TALAGRAND_INPUT", "med and t must be positive", "med")
    lower_threshold = med - t * math.sqrt(k * med)
    lower_bound = min(1.0, 2.0 * math.exp(-t * t / 4.0))
    m_upper = (t * math.sqrt(k) / 2.0 + 0.5 * math.sqrt(k * t * t + 4.0 * med)) ** 2
    return lower_threshold, lower_bound, m_upper


def av_limit_prob(a_const: float, alpha: float, k: int) -> float:
    """Limiting probability of covering the window at threshold offset A."""
    c = math.factorial(k) * math.factorial(k - 1)
    rate = 2.0 * alpha / (k - 1) * math.exp(-a_const * alpha ** (k - 1) / c)
    return math.exp(-rate)


def _overlap_counts_k3(n: int, j: int) -> int:
    # two triples of j over {0..n} overlap in exactly one element x; the other
    # two elements of each are distinct pairs summing to j - x, hence disjoint
    x = np.arange(n + 1, dtype=np.int64)
    s = j - x
    lo = np.maximum(0, s - n)
    hi = (s - 1) // 2
    q = np.clip(hi - lo + 1, 0, None)
    other = s - x
    q -= ((other >= 0) & (other <= n) & (other != x) & (q > 0)).astype(np.int64)
    return int((q * (q - 1) // 2).sum())


def overlap_pair_counts(n: int, k: int, j: int, n_cap: int = OVERLAP_N_CAP) -> dict[int, int]:
    """Overlapping pairs of representations of j over {0, ..., n}, split by overlap size."""
    if k == 2:
        return {}
    if k == 3:
        return {1: _overlap_counts_k3(n, j), 2: 0}
    if n > n_cap:
        raise ComputationError("N_CAP_EXCEEDED", f"n={n} exceeds the exact-overlap cap {n_cap}")
    reps = enumerate_reps(range(n + 1), k, j)
    return overlap_pairs(reps, budget=10**6)[1]


def overlap_order(n: int, k: int) -> float:
    """n^(-1/k) (log n)^((k+1)/k)."""
    return n ** (-1.0 / k) * math.log(n) ** ((k + 1.0) / k)


def expected_overlap(n: int, k: int, p: float, j: int, ground: str = "full", n_cap: int = OVERLAP_N_CAP):
    """Expected W at target j.

    ``ground="full"`` returns ``(sum_l pairs_l p^(2k-l), pairs_by_size)``;
    ``ground="estimate"`` returns ``(order_estimate, None)``.
    """
    if ground == "estimate":
        return overlap_order(n, k), None
    if ground != "full":
        raise ParamError("BAD_GROUND", f"unknown ground {ground!r}", "ground")
    by_size = overlap_pair_counts(n, k, j, n_cap)
    return sum(c * p ** (2 * k - l) for l, c in by_size.items()), by_size


@dataclass(frozen=True)
class BoundsReport:
    n: int | None
    k: int
    alpha: float
    p: float | None
    e_y: float | None
    f_at: float | None
    g_at: float | None
    delta0: float | None
    eps0: float | None
    k_const: float
    c_k: int
    c_j: float
    gamma_j: float
    delta_j: float
    med_gap: float | None
    tail_prob: float | None
    av_limit: float
    notes: tuple = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["notes"] = list(self.notes)
        return d


def capacity_constant(n: int, k: int, j: int) -> float:
    """Finite-n stand-in rho(n, k, j) / n^(k-1) for C(j)."""
    return rho_max(n, k, j) / float(n) ** (k - 1)


def bounds_report(params: ExperimentParams, c_j: float | None = None, gamma_target: float | None = None) -> BoundsReport:
    """Every constant for ``params``. ``params.n`` may be 0 to skip the n-dependent entries."""
    k, alpha = params.k, params.alpha
    notes = []
    have_n = params.n >= 2
    # without n only the scalar fields are checked
    validate_params(params if have_n else replace(params, n=10**6))
    if c_j is None:
        c_j = capacity_constant_floor(alpha, k)
        if have_n:
            try:
                w = window_of(params.n, k, alpha)
                c_j = max(c_j, capacity_constant(params.n, k, w.lo))
            except ComputationError:
                notes.append("c_j: capacity cap exceeded, using the floor value")
    c = constants(alpha, k, params.eps, params.xi, c_j)
    delta_j = upper_window_constant(c_j, c.K, k)

    d0 = e0 = f_at = g_at = None
    if k == 2:
        gamma = gamma_target if gamma_target is not None else params.eta * alpha / 4.0
        d0 = solve_upper(alpha, params.eta, params.lam)
        f_at = upper_rate(d0, alpha, params.eta)
        try:
            e0 = solve_lower(alpha, params.eta, gamma)
            g_at = lower_rate(e0, alpha, params.eta)
        except ComputationError as err:
            notes.append(err.code)

    p = e_y = med_gap = tail = None
    if have_n:
        n = params.n
        rule = ProbabilityRule.thm21(alpha, params.eta) if k == 2 else ProbabilityRule.thm31(alpha, k, params.eps)
        p, clamped = probability_for(rule, n)
        if clamped:
            notes.append("p clamped to 1")
        try:
            e_y = expected_count(rho_max(n, k, k * n // 2), p, k)
            med_gap = c.med_gap_coeff * math.sqrt(e_y)
        except ComputationError as err:
            notes.append(err.code)
        if k == 2:
            tail = min(1.0, n ** (-params.lam) + (n**-gamma if e0 is not None else 1.0))
        else:
            tail = min(1.0, k * n * (2.0 * n**-1.25 + 2.0 * n ** (-1.0 - params.xi)))
    return BoundsReport(
        n=params.n if have_n else None,
        k=k,
        alpha=alpha,
        p=p,
        e_y=e_y,
        f_at=f_at,
        g_at=g_at,
        delta0=d0,
        eps0=e0,
        k_const=c.K,
        c_k=c.C_k,
        c_j=c_j,
        gamma_j=c.gamma_j,
        delta_j=delta_j,
        med_gap=med_gap,
        tail_prob=tail,
        av_limit=av_limit_prob(params.a_const, alpha, k),
        notes=tuple(notes),
    )
