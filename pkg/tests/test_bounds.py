"""Unit tests for the closed-form bound layer.

Golden values were derived independently with 50-digit mpmath evaluations
of each formula and frozen here; tolerances are relative 1e-12 unless a
looser one is stated inline.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqpow.bounds import (
    BoundValue,
    ComparisonParams,
    ParameterError,
    alt_general_bound,
    bernoulli_search_exact,
    bernoulli_search_simplified,
    bernoulli_search_stirling,
    comparison_table,
    honest_round_rate,
    k0_target,
    log_binomial,
    majority_threshold,
    pow_chain_bound,
    reduction_bound,
    settlement_ratio,
    tail_eps_min,
    typical_execution_tail,
)

REL = 1e-12


# ----------------------------------------------------------------- goldens

GOLDEN_EXACT = [
    # (N, k, p, value)
    (0, 1, 0.25, 0.75),
    (1, 1, 0.25, 2.6115381056766579701),
    (2, 1, 0.125, 3.6057251067135993562),
    (4, 2, 1e-3, 4.8281291579799324812e-4),
    (60, 10, 1e-3, 3.4356338822069721683e-8),
    (100, 10, 1e-4, 1.506270143581949186e-13),
]


@pytest.mark.parametrize("N,k,p,value", GOLDEN_EXACT)
def test_search_exact_goldens(N, k, p, value):
    got = bernoulli_search_exact(N, k, p)
    assert got.raw == pytest.approx(value, rel=REL)


def test_search_exact_log_golden():
    got = bernoulli_search_exact(100, 10, 1e-4)
    assert got.log_raw == pytest.approx(-29.523969717422773634, rel=1e-14)


def test_search_exact_zero_queries_is_guessing_mass():
    # With N = 0 only the i = 0 term survives: 4(1-p) p^k.
    got = bernoulli_search_exact(0, 3, 0.5)
    assert got.raw == pytest.approx(4 * 0.5 * 0.5**3, rel=REL)


GOLDEN_STIRLING = [
    (4, 4, 0.25, 1.3899439417586634882),
    (200, 8, 2.0**-10, 13605.609725289977574),
]


@pytest.mark.parametrize("N,k,p,value", GOLDEN_STIRLING)
def test_search_stirling_goldens(N, k, p, value):
    got = bernoulli_search_stirling(N, k, p)
    assert got.raw == pytest.approx(value, rel=REL)


def test_chain_bound_goldens():
    got = pow_chain_bound(10, 5, 0.01)
    assert got.closed.raw == pytest.approx(0.016394670002287274657, rel=REL)
    assert got.exponential.raw == pytest.approx(0.1300640778717541939, rel=REL)
    assert got.log_prefactor == pytest.approx(-2.0710709535770566805, rel=1e-14)


def test_majority_threshold_goldens():
    assert majority_threshold(0.03, 1e-6, 0.1) == pytest.approx(
        8.7588750584364308627, rel=REL
    )
    assert majority_threshold(0.5, 0.25, 0.5) == pytest.approx(
        0.061313240195240386933, rel=REL
    )


def test_k0_target_golden():
    assert k0_target(100, 10, 1e-6, 0.1) == pytest.approx(
        2.990110011304949774, rel=REL
    )


def test_typical_execution_tail_golden():
    got = typical_execution_tail(1e4, 1, 1e-6, 0.5)
    assert got.raw == pytest.approx(6.0833455904330126385e-15, rel=1e-11)
    assert got.log_raw == pytest.approx(-32.733221588686623573, rel=1e-13)


def test_tail_eps_min_golden():
    assert tail_eps_min(0.01) == pytest.approx(0.37330225702539149254, rel=REL)


def test_settlement_ratio_golden():
    assert settlement_ratio(0.1, 0.03, 1.0) == pytest.approx(
        0.011454753722794961238, rel=1e-13
    )


def test_alt_general_golden():
    got = alt_general_bound(100, 10, 1e-4)
    assert got.raw == pytest.approx(4730.1484883203747041, rel=1e-11)


GOLDEN_HONEST_RATE = [
    # (n, q, p, exact rate 1 - (1-p)^(nq))
    (16, 1, 2.0**-8, 0.060701904106183561536),
    (16, 4, 1e-3, 0.062025036174154449416),
    (16, 24, 1e-4, 0.03767391506943363284),
]


@pytest.mark.parametrize("n,q,p,value", GOLDEN_HONEST_RATE)
def test_honest_round_rate_goldens(n, q, p, value):
    assert honest_round_rate(n, q, p, exact=True) == pytest.approx(value, rel=1e-14)
    # Linearized form upper-bounds the exact rate.
    assert honest_round_rate(n, q, p, exact=False) >= value


# ------------------------------------------------------------- identities


def test_stirling_matches_squared_bracket_form():
    # 2(1-p)/(pi k) p^k (Ne/k)^(2k) must equal
    # 4 [ sqrt(1-p) sqrt(p)^k (Ne/k)^k (2 pi k)^(-1/2) ]^2 identically.
    rng = np.random.default_rng(7)
    for _ in range(200):
        N = int(rng.integers(4, 300))
        k = int(rng.integers(4, N + 1))
        p = float(2.0 ** -rng.uniform(1, 20))
        got = bernoulli_search_stirling(N, k, p).log_raw
        bracket = (
            0.5 * math.log1p(-p)
            + k * (0.5 * math.log(p) + math.log(N) + 1.0 - math.log(k))
            - 0.5 * math.log(2 * math.pi * k)
        )
        want = 2 * math.log(2.0) + 2.0 * bracket
        assert got == pytest.approx(want, abs=1e-10)


def test_chain_prefactor_identity():
    for N, k, p in [(10, 5, 0.01), (50, 3, 1e-4), (7, 7, 0.24)]:
        got = pow_chain_bound(N, k, p)
        want = math.log(2 * (1 - p) / (math.pi * k))
        assert got.log_prefactor == pytest.approx(want, rel=1e-14)
        assert got.closed.log_raw - got.exponential.log_raw == pytest.approx(
            got.log_prefactor, abs=1e-9
        )


def test_reduction_delegates_bit_identically():
    for N, k, p in [(10, 3, 0.01), (0, 1, 0.5), (100, 10, 1e-4)]:
        assert (
            reduction_bound(N, k, p).log_raw
            == bernoulli_search_exact(N + k, k, p).log_raw
        )


def test_expected_optimal_ratio_is_exactly_eight():
    table = comparison_table(
        ComparisonParams(n=10, t=3, q=2, p=0.01, eps=0.1, Q=5, s=1000)
    )
    assert table["expected_optimal"]["alt_general_over_main"] == 8.0


def test_expected_optimal_goldens():
    # N = s*Q = 5000 here, so pin the N = 100 values via explicit budget.
    table = comparison_table(
        ComparisonParams(n=10, t=3, q=2, p=0.01, eps=0.1, Q=5, s=1000, N=100)
    )
    opt = table["expected_optimal"]
    assert opt["main"] == pytest.approx(27.182818284590452354, rel=REL)
    assert opt["alt_restricted"] == pytest.approx(28.284271247461900976, rel=REL)
    assert opt["alt_general"] == pytest.approx(217.46254627672361883, rel=REL)


# ------------------------------------------------------ comparison table


def test_comparison_table_golden_row():
    params = ComparisonParams(n=100, t=30, q=300, p=1e-6, eps=0.1, Q=5, s=1000)
    table = comparison_table(params)
    assert table["params"]["f"] == pytest.approx(0.03, rel=1e-15)
    assert table["params"]["f_mode"] == "product"
    hm = table["honest_majority"]
    assert hm["classical"]["lhs"] == pytest.approx(0.42857142857142857143, rel=REL)
    assert hm["classical"]["rhs"] == pytest.approx(0.61, rel=REL)
    assert hm["classical"]["holds"] is True
    assert hm["quantum"]["threshold"] == pytest.approx(8.7588750584364308627, rel=REL)
    assert hm["quantum"]["holds"] is True
    exp = table["max_expected_adversarial_pows"]
    assert exp["classical"] == pytest.approx(9.0, rel=REL)
    assert exp["quantum"] == pytest.approx(14.950550056524748794, rel=REL)
    conc = table["concentration_exponent"]
    assert conc["classical"] == pytest.approx(0.3, rel=REL)
    assert conc["quantum"] == pytest.approx(26.19, rel=REL)
    assert table["settlement"]["ratio"] == pytest.approx(
        0.011454753722794961238, rel=1e-13
    )


def test_comparison_table_exact_f_mode():
    params = ComparisonParams(
        n=100, t=30, q=300, p=1e-6, eps=0.1, Q=5, s=1000, f_exact=True
    )
    table = comparison_table(params)
    assert table["params"]["f_mode"] == "exact"
    assert table["params"]["f"] == pytest.approx(0.029554481008184421582, rel=1e-14)


def test_comparison_table_stirling_rows_only_in_window():
    table = comparison_table(
        ComparisonParams(n=4, t=1, q=1, p=0.01, eps=0.1, Q=1, s=6, k_values=(1, 4, 8))
    )
    rows = {row["k"]: row for row in table["per_k_bounds"]}
    assert "main_stirling" not in rows[1]  # k < 4
    assert "main_stirling" in rows[4]  # 4 <= k <= N = 6
    assert "main_stirling" not in rows[8]  # k > N


def test_comparison_params_validation():
    with pytest.raises(ParameterError):
        ComparisonParams(n=0, t=0, q=1, p=0.5, eps=0.1, Q=1, s=1).validate()
    with pytest.raises(ParameterError):
        ComparisonParams(n=4, t=4, q=1, p=0.5, eps=0.1, Q=1, s=1).validate()
    with pytest.raises(ParameterError):
        ComparisonParams(n=4, t=1, q=1, p=0.5, eps=1.5, Q=1, s=1).validate()
    with pytest.raises(ParameterError):
        ComparisonParams(n=4, t=1, q=1, p=0.5, eps=0.1, Q=1, s=0).validate()
    with pytest.raises(ParameterError):
        ComparisonParams(
            n=4, t=1, q=1, p=0.5, eps=0.1, Q=1, s=1, k_values=(0,)
        ).validate()


# ---------------------------------------------------------- BoundValue


def test_bound_value_clamps_at_one():
    over = BoundValue.from_log(2.5)
    assert over.exceeds_one
    assert over.clamped == 1.0
    assert over.raw == pytest.approx(math.exp(2.5), rel=REL)
    under = BoundValue.from_log(-2.5)
    assert not under.exceeds_one
    assert under.clamped == under.raw == pytest.approx(math.exp(-2.5), rel=REL)


def test_bound_value_overflow_reports_inf():
    huge = BoundValue.from_log(1e6)
    assert huge.raw == math.inf
    assert huge.clamped == 1.0
    assert math.isfinite(huge.log_raw)


# ----------------------------------------------------- parameter window


@pytest.mark.parametrize("bad_p", [0.0, 1.0, -0.5, 1.5])
def test_probability_window_enforced(bad_p):
    with pytest.raises(ParameterError):
        bernoulli_search_exact(10, 2, bad_p)
    with pytest.raises(ParameterError):
        pow_chain_bound(10, 2, bad_p)
    with pytest.raises(ParameterError):
        majority_threshold(0.03, bad_p, 0.1) if 0 < 0.03 < 1 else None


def test_stirling_window_enforced():
    with pytest.raises(ParameterError):
        bernoulli_search_stirling(10, 3, 0.01)
    with pytest.raises(ParameterError):
        bernoulli_search_stirling(3, 4, 0.01)
    # Boundary itself is accepted.
    bernoulli_search_stirling(4, 4, 0.01)


def test_misc_window_enforcement():
    with pytest.raises(ParameterError):
        bernoulli_search_exact(-1, 2, 0.5)
    with pytest.raises(ParameterError):
        bernoulli_search_simplified(10, 0, 0.5)
    with pytest.raises(ParameterError):
        alt_general_bound(10, 0, 0.5)
    with pytest.raises(ParameterError):
        pow_chain_bound(10, 0, 0.5)
    with pytest.raises(ParameterError):
        majority_threshold(0.0, 0.01, 0.1)
    with pytest.raises(ParameterError):
        majority_threshold(0.03, 0.01, 0.0)
    with pytest.raises(ParameterError):
        k0_target(-1, 1, 0.01, 0.1)
    with pytest.raises(ParameterError):
        typical_execution_tail(10, 1, 0.01, 0.1)  # eps below admissible floor
    with pytest.raises(ParameterError):
        tail_eps_min(0.2)  # e*sqrt(p) >= 1
    with pytest.raises(ParameterError):
        settlement_ratio(0.0, 0.5)
    with pytest.raises(ParameterError):
        settlement_ratio(0.1, 0.0)
    with pytest.raises(ParameterError):
        settlement_ratio(0.1, 0.5, c_settle=0.0)
    with pytest.raises(ParameterError):
        honest_round_rate(-1, 4, 0.01)
    with pytest.raises(ParameterError):
        log_binomial(4, 5)
    with pytest.raises(ParameterError):
        log_binomial(4, -1)


def test_settlement_diverges_at_unit_rate():
    assert settlement_ratio(0.1, 1.0) == math.inf


def test_k0_degenerate_window_is_zero():
    assert k0_target(0, 5, 0.01, 0.1) == 0.0
    assert k0_target(5, 0, 0.01, 0.1) == 0.0


# ------------------------------------------------------- property tests


@given(
    n=st.integers(min_value=0, max_value=500),
    k=st.integers(min_value=0, max_value=500),
)
def test_log_binomial_symmetry_and_exactness(n, k):
    if k > n:
        with pytest.raises(ParameterError):
            log_binomial(n, k)
        return
    got = log_binomial(n, k)
    assert got == pytest.approx(log_binomial(n, n - k), abs=1e-10)
    assert got == pytest.approx(math.log(math.comb(n, k)) if n else 0.0, abs=1e-10)


@given(
    n=st.integers(min_value=10_000, max_value=50_000),
    tail=st.integers(min_value=2001, max_value=4000),
)
@settings(max_examples=20)
def test_log_binomial_lgamma_route_accuracy(n, tail):
    # Force the log-gamma branch and compare against exact integers.
    k = n // 2 if n // 2 > tail else tail
    got = log_binomial(n, k)
    want = math.log(math.comb(n, k))
    assert got == pytest.approx(want, rel=1e-12)


@given(
    N=st.integers(min_value=0, max_value=300),
    k=st.integers(min_value=0, max_value=30),
    p=st.floats(min_value=1e-8, max_value=0.75),
)
@settings(max_examples=150)
def test_search_exact_monotone_in_budget(N, k, p):
    a = bernoulli_search_exact(N, k, p).log_raw
    b = bernoulli_search_exact(N + 1, k, p).log_raw
    assert b >= a - 1e-12


@given(
    N=st.integers(min_value=7, max_value=200),
    frac=st.floats(min_value=0.0, max_value=1.0),
    j=st.integers(min_value=1, max_value=9),
)
@settings(max_examples=300, deadline=None)
def test_ordering_holds_away_from_diagonal_corner(N, frac, j):
    # For N >= 7 the Stirling relaxation dominates the exact form at every
    # k in [4, N] and p in the dyadic ladder; the only failures of the
    # ordering in the full window sit at N <= 6 (see the diagonal test).
    k = 4 + int(round(frac * (N - 4)))
    p = 2.0**-j
    exact = bernoulli_search_exact(N, k, p).log_raw
    stirling = bernoulli_search_stirling(N, k, p).log_raw
    assert exact <= stirling + 1e-9


@pytest.mark.parametrize("p", [0.25, 2.0**-6, 2.0**-10])
def test_ordering_fails_near_diagonal(p):
    # The relaxation chain behind the Stirling form is invalid at k = N:
    # sum_{i<=k} C(N,i) <= N^k/k! is false there (16 > 256/24 at N=k=4),
    # so the claimed exact <= stirling ordering genuinely reverses. Pinned
    # here so the full-window acceptance sweep's failure is understood.
    exact = bernoulli_search_exact(4, 4, p).log_raw
    stirling = bernoulli_search_stirling(4, 4, p).log_raw
    assert exact > stirling + 1e-3


@given(
    N=st.integers(min_value=1, max_value=200),
    k=st.integers(min_value=1, max_value=20),
    p=st.floats(min_value=1e-10, max_value=0.9),
)
@settings(max_examples=150)
def test_chain_closed_below_exponential_form(N, k, p):
    # The dropped prefactor 2(1-p)/(pi k) is < 1 for every valid input,
    # so the closed form can never exceed the exponential form.
    got = pow_chain_bound(N, k, p)
    assert got.log_prefactor < 0
    assert got.closed.log_raw <= got.exponential.log_raw


@given(
    N=st.integers(min_value=0, max_value=100),
    k=st.integers(min_value=1, max_value=20),
    p=st.floats(min_value=1e-10, max_value=0.9),
)
@settings(max_examples=150)
def test_chain_capped_by_inflated_search(N, k, p):
    # Producing a k-chain in N queries is no easier than k-search with
    # N + k queries.
    cap = reduction_bound(N, k, p)
    assert cap.log_raw == bernoulli_search_exact(N + k, k, p).log_raw


@given(
    f=st.floats(min_value=1e-6, max_value=1 - 1e-6),
    p=st.floats(min_value=1e-12, max_value=0.99),
    eps=st.floats(min_value=1e-6, max_value=1 - 1e-6),
)
@settings(max_examples=200)
def test_majority_threshold_positive_and_symmetric(f, p, eps):
    thr = majority_threshold(f, p, eps)
    assert thr > 0
    assert thr == pytest.approx(majority_threshold(1 - f, p, eps), rel=1e-9)


@given(
    s=st.floats(min_value=0, max_value=1e6),
    Q=st.floats(min_value=0, max_value=1e3),
    j=st.integers(min_value=8, max_value=40),
    eps=st.floats(min_value=0.5, max_value=0.99),
)
@settings(max_examples=200)
def test_typical_tail_is_a_probability_shape(s, Q, j, eps):
    p = 2.0**-j
    if eps <= tail_eps_min(p):
        return
    got = typical_execution_tail(s, Q, p, eps)
    assert got.log_raw <= 0.0
    assert 0.0 <= got.clamped <= 1.0
    # Monotone decreasing in the window length.
    longer = typical_execution_tail(s + 1.0, Q, p, eps)
    assert longer.log_raw <= got.log_raw + 1e-12


@given(
    n=st.integers(min_value=1, max_value=64),
    q=st.integers(min_value=1, max_value=512),
    p=st.floats(min_value=1e-10, max_value=0.1),
)
@settings(max_examples=200)
def test_honest_rate_exact_below_product(n, q, p):
    exact = honest_round_rate(n, q, p, exact=True)
    product = honest_round_rate(n, q, p, exact=False)
    # exact can round up to 1.0 in IEEE when nq log(1-p) is very negative.
    assert 0.0 < exact <= 1.0
    assert exact <= product + 1e-15


@given(x=st.floats(min_value=-700, max_value=700))
def test_bound_value_round_trip(x):
    bv = BoundValue.from_log(x)
    assert bv.log_raw == x
    assert bv.clamped <= 1.0
    assert bv.raw >= 0.0
    assert bv.exceeds_one == (x > 0)
