import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from repbasis.bounds import (
    av_limit_prob,
    bounds_report,
    capacity_constant_floor,
    chernoff_solve,
    constants,
    expected_count,
    expected_overlap,
    lower_rate,
    solve_upper,
    overlap_pair_counts,
    talagrand_tail,
    upper_rate,
)
from repbasis.counting import enumerate_reps, rho_max
from repbasis.model import ComputationError, ExperimentParams, ParamError
from repbasis.packing import overlap_pairs
from repbasis.sampling import ProbabilityRule, probability_for


def test_expected_count_examples():
    assert expected_count(4, 0.5, 2) == 1.0
    assert expected_count(0, 0.3, 3) == 0.0
    n = 10**4
    p, _ = probability_for(ProbabilityRule.thm21(0.5, 0.0), n)
    assert expected_count(rho_max(n, 2, n), p, 2) == pytest.approx(2 * math.log(n), rel=0.01)


def test_upper_rate_at_e_minus_one():
    assert upper_rate(math.e - 1, 1.0, 0.0) == pytest.approx(1.0, abs=1e-12)


def test_delta0_against_brentq():
    d0 = solve_upper(1.0, 0.0, 1.0)
    ref = brentq(lambda d: upper_rate(d, 1.0, 0.0) - 2.0, 0.0, 10.0, xtol=1e-14)
    assert d0 == pytest.approx(ref, rel=1e-11)
    assert d0 == pytest.approx(2.5911, abs=1e-4)


@pytest.mark.parametrize("alpha,eta,gamma", [(0.5, 0.5, 0.05), (0.9, 1.0, 0.3), (0.2, 2.0, 0.1)])
def test_eps0_against_brentq(alpha, eta, gamma):
    sol = chernoff_solve(alpha, eta, 1.0, gamma)
    ref = brentq(lambda e: lower_rate(e, alpha, eta) - 1 - gamma, 1e-300, math.exp(-1), xtol=1e-16)
    assert 0 < sol.eps0 <= math.exp(-1)
    assert sol.eps0 == pytest.approx(ref, rel=1e-10)


def test_no_lower_root():
    with pytest.raises(ComputationError) as exc:
        chernoff_solve(0.5, 0.5, 1.0, 0.125)
    assert exc.value.code == "NO_LOWER_ROOT"


def test_band_from_extremes():
    sol = chernoff_solve(0.5, 0.5, 1.0, 0.05, e_min=10.0, e_max=20.0)
    assert sol.band == (sol.eps0 * 10.0, (1 + sol.delta0) * 20.0)


def test_f_increasing_unbounded():
    d = np.geomspace(1e-6, 1e6, 400)
    f = [upper_rate(x, 0.5, 0.5) for x in d]
    assert all(a < b for a, b in zip(f, f[1:])) and f[-1] > 1e6


def test_g_decreasing_with_limit():
    e = np.linspace(1e-9, math.exp(-1), 400)
    g = [lower_rate(x, 0.5, 0.5) for x in e]
    assert all(a > b for a, b in zip(g, g[1:]))
    assert lower_rate(1e-15, 0.5, 0.5) == pytest.approx(1.125, abs=1e-12)
    assert lower_rate(math.exp(-1), 0.5, 0.5) == pytest.approx((1 - 4 / math.e) * 1.125)


def test_constants_examples():
    c = constants(0.5, 3, 0.0, 0.1, 1.0)
    assert c.K == 576 and c.C_k == 384
    assert c.gamma_j == pytest.approx(576 - math.sqrt(4.4) * math.sqrt(1728))
    assert c.gamma_j == pytest.approx(488.8, abs=0.05)
    assert c.med_gap_coeff == pytest.approx(40 * math.sqrt(3))


def test_cj_floor_enforced():
    with pytest.raises(ParamError) as exc:
        constants(0.5, 3, 0.5, 0.1, 1e-6)
    assert exc.value.code == "CJ_TOO_SMALL"


@given(
    st.floats(0.01, 0.99),
    st.integers(2, 6),
    st.floats(0.01, 4.0),
    st.floats(0.0, 1.0),
    st.floats(1.0, 100.0),
)
@settings(max_examples=300)
def test_gamma_j_positive(alpha, k, eps, xi_frac, cj_mult):
    xi = xi_frac * eps / 4 * 0.999 + 1e-9
    c_j = capacity_constant_floor(alpha, k) * cj_mult
    assert constants(alpha, k, eps, xi, c_j).gamma_j > 0


def test_talagrand_examples():
    lo, lb, m = talagrand_tail(100, 2, 4)
    assert m == pytest.approx((2 + 0.5 * math.sqrt(416)) ** 2)
    assert m - 2 * math.sqrt(4 * m) == pytest.approx(100, abs=1e-9)
    assert lo == pytest.approx(60) and lb == pytest.approx(2 / math.e)
    t = math.sqrt(5 * math.log(math.e**2))
    assert talagrand_tail(100, t, 3)[1] == pytest.approx(2 * math.exp(-2.5))
    assert talagrand_tail(100, 0.1, 3)[1] == 1.0


# medians below 1 with large t lose the identity to cancellation in m - t sqrt(k m)
@given(st.floats(1.0, 1e8), st.floats(1e-3, 20), st.integers(2, 8))
def test_m_round_trip(med, t, k):
    m = talagrand_tail(med, t, k)[2]
    assert abs(m - t * math.sqrt(k * m) - med) <= 1e-9 * med


def test_av_limit_examples():
    assert av_limit_prob(0, 0.5, 2) == pytest.approx(math.exp(-1), abs=1e-15)
    assert av_limit_prob(0, 0.5, 3) == pytest.approx(math.exp(-0.5), abs=1e-15)
    assert av_limit_prob(500, 0.5, 2) == pytest.approx(1.0)
    assert av_limit_prob(-500, 0.5, 2) == 0.0


# the range keeps both values clear of floating-point underflow and rounding to 1
@given(st.floats(-5, 5), st.floats(0.05, 0.95), st.integers(2, 4))
def test_av_limit_monotone(a, alpha, k):
    lo, hi = av_limit_prob(a, alpha, k), av_limit_prob(a + 0.5, alpha, k)
    assert 0 < lo < hi < 1


def test_expected_overlap_examples():
    p = 0.3
    val, by = expected_overlap(6, 3, p, 7)
    assert by == {1: 6, 2: 0}
    assert val == pytest.approx(6 * p**5)
    assert expected_overlap(50, 2, p, 50)[0] == 0
    est, _ = expected_overlap(10**4, 3, p, 0, ground="estimate")
    # n^(-1/3) (ln n)^(4/3) at n = 10^4
    assert est == pytest.approx(10 ** (-4 / 3) * math.log(1e4) ** (4 / 3))
    assert est == pytest.approx(0.8961, abs=1e-4)


@pytest.mark.parametrize("n", [5, 9, 14, 20])
def test_overlap_counts_k3_closed_form(n):
    for j in range(0, 3 * n + 1):
        reps = enumerate_reps(range(n + 1), 3, j)
        by_size = overlap_pairs(reps)[1]
        assert overlap_pair_counts(n, 3, j) == {1: by_size.get(1, 0), 2: by_size.get(2, 0)}


def test_overlap_counts_k4_enumerated():
    reps = enumerate_reps(range(13), 4, 24)
    assert overlap_pair_counts(12, 4, 24) == overlap_pairs(reps, budget=10**6)[1]
    with pytest.raises(ComputationError):
        overlap_pair_counts(1000, 4, 2000)


def test_bounds_report_k3():
    rep = bounds_report(ExperimentParams(n=0, k=3, alpha=0.5, eps=0.0))
    assert rep.k_const == 576 and rep.c_k == 384 and rep.n is None
    rep = bounds_report(ExperimentParams(n=10**4, k=3, alpha=0.5, eps=0.5))
    assert 0 <= rep.tail_prob <= 1 and rep.e_y > 0 and rep.gamma_j > 0


def test_bounds_report_k2():
    rep = bounds_report(ExperimentParams(n=10**4, k=2, alpha=0.5, eta=0.5))
    assert upper_rate(rep.delta0, 0.5, 0.5) == pytest.approx(2.0)
    assert lower_rate(rep.eps0, 0.5, 0.5) == pytest.approx(1.0625)
    rep = bounds_report(ExperimentParams(n=10**4, k=2, alpha=0.5, eta=0.5), gamma_target=1.0)
    assert "NO_LOWER_ROOT" in rep.notes and rep.eps0 is None
