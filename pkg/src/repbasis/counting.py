"""Exact representation counts Y(j) and capacities rho(j).

Three independent routes compute the same numbers:

* :func:`count_all` - size x sum dynamic program, any k, both modes;
* :func:`count_fast_k2` - autoconvolution of the membership array (k = 2);
* :func:`count_brute` - plain enumeration with :mod:`itertools`.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement

import numpy as np

from .model import BasisSample, ComputationError, ParamError

MODES = ("distinct", "multiset")

BRUTE_BUDGET = 10**7
ENUM_CAP = 10**6
RHO_N_CAP = 5000


@dataclass(frozen=True, eq=False)
class RepProfile:
    """Counts indexed by target j in [0, k*n]."""

    n: int
    k: int
    mode: str
    counts: np.ndarray

    def __getitem__(self, j: int) -> int:
        if 0 <= j < len(self.counts):
            return int(self.counts[j])
        return 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, RepProfile):
            return NotImplemented
        return (
            (self.n, self.k, self.mode) == (other.n, other.k, other.mode)
            and np.array_equal(self.counts, other.counts)
        )

    def total(self) -> int:
        return int(sum(int(c) for c in self.counts))


def _members(sample) -> np.ndarray:
    if isinstance(sample, BasisSample):
        return np.asarray(sample.members, dtype=np.int64)
    return np.asarray(sample, dtype=np.int64)


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ParamError("BAD_MODE", f"mode must be one of {MODES}, got {mode!r}", "mode")


def _check_k(k: int, minimum: int = 2) -> None:
    if not isinstance(k, (int, np.integer)) or k < minimum:
        raise ParamError("K_TOO_SMALL", f"k must be an integer >= {minimum}, got {k}", "k")


def _dp_counts(members: np.ndarray, n: int, k: int, mode: str) -> np.ndarray:
    size = k * n + 1
    dp = np.zeros((k + 1, size), dtype=np.int64)
    dp[0, 0] = 1
    order = range(k, 0, -1) if mode == "distinct" else range(1, k + 1)
    for a in members.tolist():
        if a == 0:
            for c in order:
                dp[c] += dp[c - 1]
                if dp[c].min() < 0:
                    raise ComputationError("COUNT_OVERFLOW", "count exceeds the 64-bit range")
            continue
        for c in order:
            seg = dp[c, a:]
            seg += dp[c - 1, : size - a]
            if seg.min() < 0:
                raise ComputationError("COUNT_OVERFLOW", "count exceeds the 64-bit range")
    return dp[k]


def count_all(sample: BasisSample, k: int, mode: str = "distinct") -> RepProfile:
    """Number of k-subsets (or k-multisets) of the sample summing to each j."""
    _check_k(k)
    _check_mode(mode)
    counts = _dp_counts(_members(sample), sample.n, k, mode)
    return RepProfile(sample.n, k, mode, counts)


def autoconvolve(indicator: np.ndarray) -> np.ndarray:
    """Exact integer self-convolution of a 0/1 vector, via a real FFT.

    Falls back to direct convolution if the rounding residue is not clearly
    below one half.
    """
    x = np.asarray(indicator, dtype=np.float64)
    out_len = 2 * len(x) - 1
    if len(x) < 64:
        return np.convolve(x.astype(np.int64), x.astype(np.int64))
    size = 1 << (out_len - 1).bit_length()
    f = np.fft.rfft(x, size)
    raw = np.fft.irfft(f * f, size)[:out_len]
    rounded = np.rint(raw)
    if np.max(np.abs(raw - rounded), initial=0.0) > 0.25:
        xi = x.astype(np.int64)
        return np.convolve(xi, xi)
    return rounded.astype(np.int64)


def fast_k2_counts(indicator: np.ndarray) -> np.ndarray:
    """Distinct 2-sum counts from a membership array (length n+1 -> 2n+1)."""
    c = autoconvolve(indicator)
    diag = np.zeros_like(c)
    diag[0::2] = np.asarray(indicator, dtype=np.int64)
    return (c - diag) // 2


def count_fast_k2(sample: BasisSample) -> RepProfile:
    """Distinct-mode k = 2 profile from the autoconvolution of the membership array."""
    ind = np.zeros(sample.n + 1, dtype=np.int64)
    ind[_members(sample)] = 1
    return RepProfile(sample.n, 2, "distinct", fast_k2_counts(ind))


def brute_profile(sample, k: int, mode: str = "distinct", budget: int = BRUTE_BUDGET) -> Counter:
    """Exhaustively enumerate every k-combination once and tally the sums."""
    _check_k(k, minimum=1)
    _check_mode(mode)
    ms = [int(m) for m in _members(sample)]
    size = math.comb(len(ms), k) if mode == "distinct" else math.comb(len(ms) + k - 1, k)
    if size > budget:
        raise ComputationError("BUDGET_EXCEEDED", f"{size} combinations exceed budget {budget}")
    gen = combinations if mode == "distinct" else combinations_with_replacement
    return Counter(sum(c) for c in gen(ms, k))


def count_brute(sample, k: int, j: int, mode: str = "distinct", budget: int = BRUTE_BUDGET) -> int:
    """Count by exhaustive enumeration. Reference oracle for the faster routes."""
    return brute_profile(sample, k, mode, budget)[j]


def _pairs_from(arr: np.ndarray, start: int, target: int) -> tuple[np.ndarray, np.ndarray]:
    b = arr[start:]
    t = target - b
    keep = t > b
    b, t = b[keep], t[keep]
    idx = np.searchsorted(arr, t)
    idx[idx == len(arr)] = 0
    hit = arr[idx] == t
    return b[hit], t[hit]


def _triples_from(arr: np.ndarray, start: int, target: int, prefix: tuple, out: list, cap: int) -> None:
    m = len(arr)
    # smallest element a needs a + (a+1) + (a+2) <= target
    stop = start + int(np.searchsorted(arr[start:], (target - 3) / 3.0, side="right"))
    rows = max(1, (1 << 20) // max(m - start, 1))
    for r0 in range(start, stop, rows):
        r1 = min(r0 + rows, stop)
        a = arr[r0:r1]
        b = arr[r0:]
        t = target - a[:, None] - b[None, :]
        col = np.arange(r0, m)[None, :]
        row = np.arange(r0, r1)[:, None]
        ok = (col > row) & (t > b[None, :])
        ii, jj = np.nonzero(ok)
        tt = t[ii, jj]
        idx = np.searchsorted(arr, tt)
        idx[idx == m] = 0
        hit = arr[idx] == tt
        ii, jj, tt = ii[hit], jj[hit], tt[hit]
        if len(out) + len(ii) > cap:
            raise ComputationError("CAP_EXCEEDED", f"more than {cap} representations")
        for x, y, z in zip(a[ii].tolist(), b[jj].tolist(), tt.tolist()):
            out.append(prefix + (x, y, z))


def _enumerate(arr: np.ndarray, start: int, r: int, target: int, prefix: tuple, out: list, cap: int) -> None:
    if r == 1:
        i = int(np.searchsorted(arr, target))
        if start <= i < len(arr) and arr[i] == target:
            if len(out) >= cap:
                raise ComputationError("CAP_EXCEEDED", f"more than {cap} representations")
            out.append(prefix + (target,))
        return
    if r == 2:
        b, t = _pairs_from(arr, start, target)
        if len(out) + len(b) > cap:
            raise ComputationError("CAP_EXCEEDED", f"more than {cap} representations")
        out.extend(prefix + (x, y) for x, y in zip(b.tolist(), t.tolist()))
        return
    if r == 3:
        _triples_from(arr, start, target, prefix, out, cap)
        return
    m = len(arr)
    tail = r * (r - 1) // 2
    for i in range(start, m - r + 1):
        a = int(arr[i])
        if r * a + tail > target:
            break
        # largest possible completion
        if a + int(arr[m - r + 1 :].sum()) < target:
            continue
        _enumerate(arr, i + 1, r - 1, target - a, prefix + (a,), out, cap)


def enumerate_reps(sample, k: int, j: int, cap: int = ENUM_CAP) -> list[tuple[int, ...]]:
    """All k-subsets of distinct members summing to j, in lexicographic order."""
    _check_k(k, minimum=1)
    arr = _members(sample)
    out: list[tuple[int, ...]] = []
    if len(arr) >= k and j >= 0:
        _enumerate(arr, 0, k, int(j), (), out, cap)
    return out


def count_at(sample, k: int, j: int) -> int:
    """Distinct-mode Y(j) for a single target."""
    return len(enumerate_reps(sample, k, j, cap=10**9))


def _rho3(n: int, j: int) -> int:
    # smallest element a; pairs a < b < c <= n with b + c = j - a
    a = np.arange(n + 1, dtype=np.int64)
    s = j - a
    lo = np.maximum(a + 1, s - n)
    hi = (s + 1) // 2  # exclusive: b < s/2
    return int(np.clip(hi - lo, 0, None).sum())


def rho_max(n: int, k: int, j: int, n_cap: int = RHO_N_CAP) -> int:
    """Representations of j as a k-sum of distinct elements of {0, ..., n}."""
    _check_k(k)
    if not 0 <= j <= k * n:
        raise ParamError("J_OUT_OF_RANGE", f"j must lie in [0, {k * n}], got {j}", "j")
    if k == 2:
        return -(-min(j, 2 * n - j) // 2)
    if k == 3:
        return _rho3(n, j)
    if n > n_cap:
        raise ComputationError("N_CAP_EXCEEDED", f"n={n} exceeds the exact-capacity cap {n_cap}")
    return int(_dp_counts(np.arange(n + 1, dtype=np.int64), n, k, "distinct")[j])


def rho_lower_bound(n: int, k: int, alpha: float) -> float:
    """(alpha n)^(k-1) / (k! (k-1)!)."""
    return (alpha * n) ** (k - 1) / (math.factorial(k) * math.factorial(k - 1))
