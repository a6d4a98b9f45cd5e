"""Inclusion-probability rules and seeded random subsets of {0, ..., n}.

Random stream convention (fixed, tested against frozen vectors):

* ``sample_basis(n, p, seed)`` draws ``n + 1`` doubles from
  ``numpy.random.Generator(PCG64(seed)).random`` and keeps integer ``i``
  iff the ``i``-th draw is ``< p``.
* The seed of trial ``t`` under master seed ``s`` is the first 64-bit word of
  ``numpy.random.SeedSequence([s, t]).generate_state(1, uint64)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .model import BasisSample, ParamError, check_alpha

RULE_TAGS = ("THM21", "THM31", "AV2", "AVK", "LOGPOWER", "RAW")

SEED_MAX = 2**64 - 1


@dataclass(frozen=True)
class ProbabilityRule:
    """One of the closed-form choices of p_n. Unused fields stay ``None``."""

    tag: str
    alpha: float | None = None
    eta: float | None = None
    k: int | None = None
    eps: float | None = None
    a_const: float | None = None
    K: float | None = None
    p: float | None = None

    @classmethod
    def thm21(cls, alpha, eta):
        return cls("THM21", alpha=alpha, eta=eta, k=2).validated()

    @classmethod
    def thm31(cls, alpha, k, eps):
        return cls("THM31", alpha=alpha, k=k, eps=eps).validated()

    @classmethod
    def av2(cls, alpha, a_const):
        return cls("AV2", alpha=alpha, k=2, a_const=a_const).validated()

    @classmethod
    def avk(cls, alpha, k, a_const):
        return cls("AVK", alpha=alpha, k=k, a_const=a_const).validated()

    @classmethod
    def logpower(cls, K, eps):
        return cls("LOGPOWER", K=K, eps=eps).validated()

    @classmethod
    def raw(cls, p):
        return cls("RAW", p=p).validated()

    def validated(self) -> "ProbabilityRule":
        t = self.tag
        if t not in RULE_TAGS:
            raise ParamError("BAD_RULE", f"unknown rule {t!r}", "rule")
        if t in ("THM21", "THM31", "AV2", "AVK"):
            check_alpha(self.alpha)
        if t in ("THM31", "AVK") and not (isinstance(self.k, int) and self.k >= 2):
            raise ParamError("K_TOO_SMALL", f"k must be an integer >= 2, got {self.k}", "k")
        if t == "THM21" and not self.eta >= 0:
            raise ParamError("ETA_NEGATIVE", f"eta must be >= 0, got {self.eta}", "eta")
        if t == "THM31" and not self.eps >= 0:
            raise ParamError("EPS_NEGATIVE", f"eps must be >= 0, got {self.eps}", "eps")
        if t in ("AV2", "AVK") and not math.isfinite(self.a_const):
            raise ParamError("A_NOT_FINITE", "a_const must be finite", "a_const")
        if t == "LOGPOWER":
            if not self.K > 0:
                raise ParamError("K_NONPOSITIVE", f"K must be > 0, got {self.K}", "K")
            if not self.eps > 0:
                raise ParamError("EPS_NONPOSITIVE", f"eps must be > 0, got {self.eps}", "eps")
        if t == "RAW" and not (0.0 <= self.p <= 1.0):
            raise ParamError("P_OUT_OF_RANGE", f"p must lie in [0, 1], got {self.p}", "p")
        return self

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def theorem31_constant(alpha: float, k: int, eps: float) -> float:
    """(4 + eps) (k!)^2 / alpha^(k-1)."""
    return (4.0 + eps) * math.factorial(k) ** 2 / alpha ** (k - 1)


def basis_constant(alpha: float, k: int) -> float:
    """k! (k-1)! / alpha^(k-1), the plain-basis threshold constant."""
    return math.factorial(k) * math.factorial(k - 1) / alpha ** (k - 1)


def probability_for(rule: ProbabilityRule, n: int) -> tuple[float, bool]:
    """Evaluate ``rule`` at ``n``. Returns ``(p, clamped)``; p > 1 is clamped to 1."""
    if n < 2:
        raise ParamError("N_TOO_SMALL", f"n must be >= 2 so that log n > 0, got {n}", "n")
    rule.validated()
    log_n = math.log(n)
    t = rule.tag
    if t == "RAW":
        return float(rule.p), False
    if t == "THM21":
        q = math.sqrt((2.0 / rule.alpha + rule.eta) * log_n / n)
    elif t == "THM31":
        K = theorem31_constant(rule.alpha, rule.k, rule.eps)
        q = (K * log_n / float(n) ** (rule.k - 1)) ** (1.0 / rule.k)
    elif t == "LOGPOWER":
        q = math.sqrt(rule.K * log_n ** (1.0 + rule.eps) / n)
    else:
        k = 2 if t == "AV2" else rule.k
        c = basis_constant(rule.alpha, k)
        inner = c * log_n - c * math.log(log_n) + rule.a_const
        if inner < 0:
            raise ParamError(
                "INNER_NEGATIVE",
                f"threshold expression is negative ({inner:.6g}) at n={n}",
                "a_const",
            )
        q = (inner / float(n) ** (k - 1)) ** (1.0 / k)
    if q > 1.0:
        return 1.0, True
    return q, False


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ParamError("BAD_SEED", f"seed must lie in [0, 2^64), got {seed}", "seed")
    return seed


def trial_seed(master_seed: int, trial: int) -> int:
    """Per-trial 64-bit seed; independent of execution order."""
    ss = np.random.SeedSequence([check_seed(master_seed), int(trial)])
    return int(ss.generate_state(1, np.uint64)[0])


def sample_indicator(n: int, p: float, seed: int) -> np.ndarray:
    """Boolean membership array of length n + 1."""
    if not 0.0 <= p <= 1.0:
        raise ParamError("P_OUT_OF_RANGE", f"p must lie in [0, 1], got {p}", "p")
    if n < 0:
        raise ParamError("N_TOO_SMALL", f"n must be >= 0, got {n}", "n")
    rng = np.random.Generator(np.random.PCG64(check_seed(seed)))
    return rng.random(n + 1) < p


def sample_basis(n: int, p: float, seed: int, rule_tag: str = "RAW") -> BasisSample:
    """Include each of 0..n independently with probability ``p``."""
    members = np.flatnonzero(sample_indicator(n, p, seed))
    return BasisSample(n=n, members=tuple(members.tolist()), p=float(p), seed=int(seed), rule_tag=rule_tag)
