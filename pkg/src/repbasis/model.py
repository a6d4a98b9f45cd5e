"""Core value types, parameter validation and window arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction


class RepBasisError(Exception):
    """Base error. ``code`` is a stable machine-readable name."""

    code = "ERROR"

    def __init__(self, code: str, message: str, field: str | None = None):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.field = field


class ParamError(RepBasisError, ValueError):
    """Invalid input parameters (usage/validation)."""


class ComputationError(RepBasisError, RuntimeError):
    """A computation could not be completed (overflow, cap, budget)."""


@dataclass(frozen=True)
class ExperimentParams:
    n: int
    k: int
    alpha: float
    eta: float = 0.5
    eps: float = 0.5
    xi: float = 0.1
    lam: float = 1.0
    a_const: float = 0.0


@dataclass(frozen=True)
class Window:
    lo: int
    hi: int

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1))

    def __contains__(self, j: int) -> bool:
        return self.lo <= j <= self.hi


@dataclass(frozen=True)
class BasisSample:
    n: int
    members: tuple[int, ...]
    p: float
    seed: int | None = None
    rule_tag: str = "RAW"

    def __post_init__(self):
        prev = -1
        for m in self.members:
            if not (0 <= m <= self.n) or m <= prev:
                raise ParamError(
                    "BAD_MEMBERS",
                    "members must be strictly increasing integers in [0, n]",
                    "members",
                )
            prev = m

    @classmethod
    def from_members(cls, members, n: int | None = None) -> "BasisSample":
        ms = tuple(sorted({int(m) for m in members}))
        if n is None:
            n = ms[-1] if ms else 0
        return cls(n=n, members=ms, p=float("nan"), seed=None, rule_tag="GIVEN")

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class BandPolicy:
    """How "order log n" is decided for a finite n.

    ``fixed``: Y(j) must lie in [c_lo * log n, c_hi * log n].
    ``proof``: bounds are derived from the Chernoff/Talagrand constants for the
    run's parameters, with the tail targets ``target_gamma``/``target_lambda``.
    """

    mode: str = "proof"
    c_lo: float = 0.0
    c_hi: float = math.inf
    target_gamma: float = 1.0
    target_lambda: float = 1.0
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.mode not in ("proof", "fixed"):
            raise ParamError("BAD_BAND_MODE", f"unknown band mode {self.mode!r}", "band")
        if self.mode == "fixed":
            # c_lo = 0 and c_hi = inf are allowed so degenerate bands can be expressed
            if not (self.c_lo >= 0 and self.c_hi > 0 and self.c_lo < self.c_hi):
                raise ParamError("BAD_BAND", "need 0 <= c_lo < c_hi", "c_lo")
        if not (self.target_gamma > 0 and self.target_lambda > 0):
            raise ParamError("BAD_BAND", "band targets must be positive", "target_gamma")


def _exact(x: float) -> Fraction:
    # via repr so that e.g. alpha=0.1, n=30 gives exactly 3
    return Fraction(repr(float(x)))


def check_alpha(alpha: float) -> None:
    if not (0.0 < alpha < 1.0) or math.isnan(alpha):
        raise ParamError("ALPHA_OUT_OF_RANGE", f"alpha must lie in (0, 1), got {alpha}", "alpha")


def window_of(n: int, k: int, alpha: float) -> Window:
    """Integer targets of [alpha*n, (k-alpha)*n], rounded inward."""
    check_alpha(alpha)
    if k < 2:
        raise ParamError("K_TOO_SMALL", f"k must be >= 2, got {k}", "k")
    if n < 1:
        raise ParamError("N_TOO_SMALL", f"n must be >= 1, got {n}", "n")
    a = _exact(alpha)
    lo = math.ceil(a * n)
    hi = math.floor((k - a) * n)
    if lo > hi or lo < 1:
        raise ParamError("EMPTY_WINDOW", f"window [{lo}, {hi}] is empty for n={n}", "n")
    return Window(lo, hi)


def validate_params(params: ExperimentParams) -> ExperimentParams:
    """Return ``params`` unchanged if every field is in range, else raise ParamError."""
    p = params
    if not isinstance(p.n, int) or p.n < 1:
        raise ParamError("N_TOO_SMALL", f"n must be a positive integer, got {p.n}", "n")
    if not isinstance(p.k, int) or p.k < 2:
        raise ParamError("K_TOO_SMALL", f"k must be an integer >= 2, got {p.k}", "k")
    check_alpha(p.alpha)
    if not p.eta >= 0:
        raise ParamError("ETA_NEGATIVE", f"eta must be >= 0, got {p.eta}", "eta")
    if not p.eps >= 0:
        raise ParamError("EPS_NEGATIVE", f"eps must be >= 0, got {p.eps}", "eps")
    if not p.xi > 0:
        raise ParamError("XI_NONPOSITIVE", f"xi must be > 0, got {p.xi}", "xi")
    if not p.lam > 0:
        raise ParamError("LAMBDA_NONPOSITIVE", f"lambda must be > 0, got {p.lam}", "lam")
    if not math.isfinite(p.a_const):
        raise ParamError("A_NOT_FINITE", f"a_const must be finite, got {p.a_const}", "a_const")
    # eps = 0 means the slack is unused, so the coupling is only checked when eps > 0
    if p.eps > 0 and not p.xi < p.eps / 4:
        raise ParamError(
            "XI_EPS_CONSTRAINT", f"need xi < eps/4, got xi={p.xi}, eps={p.eps}", "xi"
        )
    window_of(p.n, p.k, p.alpha)
    return p
