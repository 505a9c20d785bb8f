"""Closed-form security bounds for proof-of-work search under quantum queries.

Everything is evaluated in log domain with log-sum-exp reductions, so the
module stays well-behaved where a bound overflows or underflows a float.
Clamping at 1 happens only at the reporting boundary, never inside the math.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

LOG_TWO = math.log(2.0)

# Below these sizes binomials are computed as exact integers; above, the
# log-gamma route is accurate to well under 1e-12 relative because the
# result itself is large.
_EXACT_N = 2000
_EXACT_TAIL = 2000


class ParameterError(ValueError):
    """A bound was requested outside its validity window."""


def log_binomial(n: int, k: int) -> float:
    """Natural log of C(n, k).

    Exact integer arithmetic for small n or small min(k, n-k), log-gamma
    otherwise. Raises ParameterError for k < 0 or k > n.
    """
    if n < 0 or k < 0 or k > n:
        raise ParameterError(f"binomial C({n}, {k}) undefined")
    if k == 0 or k == n:
        return 0.0
    if n <= _EXACT_N or min(k, n - k) <= _EXACT_TAIL:
        return math.log(math.comb(n, k))
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


@lru_cache(maxsize=1024)
def _log_binomial_row(n: int) -> np.ndarray:
    """log C(n, i) for i = 0..n as a float array, cached per n."""
    row = np.empty(n + 1)
    c = 1
    for i in range(n + 1):
        row[i] = math.log(c)
        c = c * (n - i) // (i + 1)
    row.setflags(write=False)
    return row


def _log_sum_exp(terms: np.ndarray) -> float:
    m = float(np.max(terms))
    if m == -math.inf:
        return -math.inf
    return m + math.log(float(np.sum(np.exp(terms - m))))


@dataclass(frozen=True)
class BoundValue:
    """A bound carried in log domain, materialized for reporting.

    raw may overflow to inf; log_raw never does. clamped = min(raw, 1).
    """

    log_raw: float
    raw: float
    clamped: float

    @classmethod
    def from_log(cls, log_raw: float) -> "BoundValue":
        try:
            raw = math.exp(log_raw)
        except OverflowError:
            raw = math.inf
        clamped = math.exp(min(log_raw, 0.0))
        return cls(log_raw=log_raw, raw=raw, clamped=clamped)

    @property
    def exceeds_one(self) -> bool:
        return self.log_raw > 0.0


def _check_p(p: float) -> None:
    if not (0.0 < p < 1.0):
        raise ParameterError(f"success probability p={p} outside (0, 1)")


def _check_counts(N: int, k: int) -> None:
    if N < 0:
        raise ParameterError(f"query budget N={N} negative")
    if k < 0:
        raise ParameterError(f"target count k={k} negative")


def bernoulli_search_exact(N: int, k: int, p: float) -> BoundValue:
    """Success bound for finding k ones of a Bernoulli(p) function with N queries.

    Computes 4(1-p) p^k (sum_{i=0}^{k} sqrt(1-p)^i C(N, i))^2 in log domain.
    Terms with i > N vanish, so k > N is fine.
    """
    _check_p(p)
    _check_counts(N, k)
    top = min(k, N)
    half_log_q = 0.5 * math.log1p(-p)
    if N <= 400:
        row = _log_binomial_row(N)[: top + 1]
    else:
        row = np.array([log_binomial(N, i) for i in range(top + 1)])
    terms = row + half_log_q * np.arange(top + 1)
    log_sum = _log_sum_exp(terms)
    log_raw = 2 * LOG_TWO + math.log1p(-p) + k * math.log(p) + 2.0 * log_sum
    return BoundValue.from_log(log_raw)


def bernoulli_search_stirling(N: int, k: int, p: float) -> BoundValue:
    """Stirling relaxation of the search bound: 2(1-p)/(pi k) * p^k * (Ne/k)^(2k).

    Only valid for 4 <= k <= N; anything else raises ParameterError.
    """
    _check_p(p)
    if not (4 <= k <= N):
        raise ParameterError(f"Stirling form needs 4 <= k <= N, got k={k}, N={N}")
    log_raw = (
        LOG_TWO
        + math.log1p(-p)
        - math.log(math.pi * k)
        + k * math.log(p)
        + 2.0 * k * (math.log(N) + 1.0 - math.log(k))
    )
    return BoundValue.from_log(log_raw)


def bernoulli_search_simplified(N: int, k: int, p: float) -> BoundValue:
    """Informational single-line form (1/(pi k)) (e^2 (N/k)^2 p)^k.

    Looser than the Stirling form by the 2(1-p) factor; reported for
    comparison only, never used in calibration.
    """
    _check_p(p)
    if k < 1 or N < 1:
        raise ParameterError("simplified form needs N >= 1 and k >= 1")
    log_raw = -math.log(math.pi * k) + k * (2.0 + 2.0 * (math.log(N) - math.log(k)) + math.log(p))
    return BoundValue.from_log(log_raw)


@dataclass(frozen=True)
class PowChainBound:
    """Both published forms of the sequential-chain bound.

    closed = 2(1-p)/(pi k) * ((N+k) e sqrt(p) / k)^(2k); exponential drops
    the sub-unit prefactor, so closed.log_raw - exponential.log_raw equals
    log(2(1-p)/(pi k)) exactly.
    """

    closed: BoundValue
    exponential: BoundValue
    log_prefactor: float


def pow_chain_bound(N: int, k: int, p: float) -> PowChainBound:
    """Bound on producing a k-block chain of proofs of work within N queries."""
    _check_p(p)
    _check_counts(N, k)
    if k < 1:
        raise ParameterError("chain bound needs k >= 1")
    log_core = 2.0 * k * (math.log(N + k) + 1.0 + 0.5 * math.log(p) - math.log(k))
    log_prefactor = LOG_TWO + math.log1p(-p) - math.log(math.pi * k)
    return PowChainBound(
        closed=BoundValue.from_log(log_prefactor + log_core),
        exponential=BoundValue.from_log(log_core),
        log_prefactor=log_prefactor,
    )


def reduction_bound(N: int, k: int, p: float) -> BoundValue:
    """Search bound at an inflated budget N+k.

    Chain production with N queries never succeeds more often than plain
    search with N+k queries, so this caps the chained task. Delegates to
    bernoulli_search_exact for bit-identical values.
    """
    _check_counts(N, k)
    return bernoulli_search_exact(N + k, k, p)


def alt_general_bound(N: int, k: int, p: float) -> BoundValue:
    """Alternative published analysis of the same search task.

    2 (8 e N sqrt(p) / k)^k + (1/2)^k, in log domain via logaddexp.
    """
    _check_p(p)
    _check_counts(N, k)
    if k < 1:
        raise ParameterError("alternative bound needs k >= 1")
    if N == 0:
        return BoundValue.from_log(-k * LOG_TWO)
    log_first = LOG_TWO + k * (3.0 * LOG_TWO + 1.0 + math.log(N) + 0.5 * math.log(p) - math.log(k))
    log_raw = float(np.logaddexp(log_first, -k * LOG_TWO))
    return BoundValue.from_log(log_raw)


def majority_threshold(f: float, p: float, eps: float) -> float:
    """Largest adversarial query rate Q tolerated by honest majority.

    (1-eps) f (1-f) / ((1+eps) e sqrt(p)).
    """
    _check_p(p)
    if not (0.0 < f < 1.0):
        raise ParameterError(f"honest round rate f={f} outside (0, 1)")
    if not (0.0 < eps < 1.0):
        raise ParameterError(f"quality parameter eps={eps} outside (0, 1)")
    return (1.0 - eps) * f * (1.0 - f) / ((1.0 + eps) * math.e * math.sqrt(p))


def k0_target(s: float, Q: float, p: float, eps: float) -> float:
    """Adversarial block budget over an s-round window: s (1+eps) e Q sqrt(p)."""
    _check_p(p)
    if s < 0 or Q < 0:
        raise ParameterError("window length and query rate must be nonnegative")
    return s * (1.0 + eps) * math.e * Q * math.sqrt(p)


def tail_eps_min(p: float) -> float:
    """Smallest eps for which the tail bound below is meaningful."""
    _check_p(p)
    r = math.e * math.sqrt(p)
    if r >= 1.0:
        raise ParameterError(f"e*sqrt(p) = {r:.4g} >= 1, no admissible eps")
    return r / (1.0 - r)


def typical_execution_tail(s: float, Q: float, p: float, eps: float) -> BoundValue:
    """Probability that the adversary beats its budget over some s-window.

    exp(-2 e (1+eps) s Q sqrt(p) * log((1+eps) / (1 + e (1+eps) sqrt(p)))).
    Requires eps > tail_eps_min(p), otherwise the exponent is not negative
    and a ParameterError is raised.
    """
    _check_p(p)
    if s < 0 or Q < 0:
        raise ParameterError("window length and query rate must be nonnegative")
    floor = tail_eps_min(p)
    if eps <= floor:
        raise ParameterError(f"eps={eps} must exceed {floor:.6g} for this p")
    ratio = (1.0 + eps) / (1.0 + math.e * (1.0 + eps) * math.sqrt(p))
    log_raw = -2.0 * math.e * (1.0 + eps) * s * Q * math.sqrt(p) * math.log(ratio)
    return BoundValue.from_log(log_raw)


def settlement_ratio(eps: float, f: float, c_settle: float = 1.0) -> float:
    """Quantum-to-classical settlement time ratio c eps^2 / ((1-eps)(1-f)).

    Diverges as f approaches 1; an exact f = 1 reports math.inf instead of
    raising, since callers probe the boundary deliberately.
    """
    if not (0.0 < eps < 1.0):
        raise ParameterError(f"quality parameter eps={eps} outside (0, 1)")
    if not (0.0 < f <= 1.0):
        raise ParameterError(f"honest round rate f={f} outside (0, 1]")
    if c_settle <= 0:
        raise ParameterError("settlement constant must be positive")
    denom = (1.0 - eps) * (1.0 - f)
    if denom == 0.0:
        return math.inf
    return c_settle * eps * eps / denom


def honest_round_rate(n: int, q: int, p: float, exact: bool = True) -> float:
    """Per-round probability that at least one of n q-query miners succeeds.

    exact=True gives 1 - (1-p)^(nq); exact=False the linearized n*p*q.
    """
    _check_p(p)
    if n < 0 or q < 0:
        raise ParameterError("party and query counts must be nonnegative")
    if exact:
        return -math.expm1(n * q * math.log1p(-p))
    return n * p * q


@dataclass(frozen=True)
class ComparisonParams:
    """Inputs for the side-by-side classical/quantum comparison table."""

    n: int
    t: int
    q: int
    p: float
    eps: float
    Q: float
    s: int
    c_settle: float = 1.0
    f_exact: bool = False
    N: int | None = None
    k_values: tuple[int, ...] = (1, 2, 4, 8)

    def validate(self) -> None:
        _check_p(self.p)
        if self.n <= 0 or self.q <= 0:
            raise ParameterError("need n >= 1 honest parties and q >= 1 queries")
        if not (0 <= self.t < self.n):
            raise ParameterError(f"corrupted party count t={self.t} outside [0, n)")
        if not (0.0 < self.eps < 1.0):
            raise ParameterError(f"quality parameter eps={self.eps} outside (0, 1)")
        if self.Q < 0 or self.s <= 0:
            raise ParameterError("need Q >= 0 and s >= 1")
        if any(k < 1 for k in self.k_values):
            raise ParameterError("per-k rows need k >= 1")

    @property
    def f(self) -> float:
        return honest_round_rate(self.n, self.q, self.p, exact=self.f_exact)

    @property
    def budget(self) -> int:
        return self.N if self.N is not None else int(self.s * self.Q)


def comparison_table(params: ComparisonParams) -> dict:
    """Classical versus quantum security table for one parameter point.

    Returns a plain dict of rows ready for JSON or text rendering. The
    expected-optimal entries obey alt_general / main = 8 exactly.
    """
    params.validate()
    f = params.f
    p, eps, s, Q = params.p, params.eps, params.s, params.Q
    sqrt_p = math.sqrt(p)
    N = params.budget

    thr = majority_threshold(f, p, eps)
    lhs = params.t / (params.n - params.t)
    rhs = 1.0 - 3.0 * (f + eps)

    per_k = []
    for k in params.k_values:
        row = {
            "k": k,
            "main_exact": bernoulli_search_exact(N, k, p).clamped,
            "main_exact_log": bernoulli_search_exact(N, k, p).log_raw,
            "alt_general": alt_general_bound(N, k, p).clamped,
            "alt_general_log": alt_general_bound(N, k, p).log_raw,
        }
        if 4 <= k <= N:
            sv = bernoulli_search_stirling(N, k, p)
            row["main_stirling"] = sv.clamped
            row["main_stirling_log"] = sv.log_raw
        per_k.append(row)

    opt_main = math.e * sqrt_p * N
    opt_alt_general = 8.0 * math.e * sqrt_p * N
    table = {
        "params": {
            "n": params.n,
            "t": params.t,
            "q": params.q,
            "p": p,
            "eps": eps,
            "Q": Q,
            "s": s,
            "N": N,
            "c_settle": params.c_settle,
            "f_mode": "exact" if params.f_exact else "product",
            "f": f,
        },
        "honest_majority": {
            "classical": {"lhs": lhs, "rhs": rhs, "holds": lhs < rhs},
            "quantum": {"Q": Q, "threshold": thr, "holds": Q <= thr},
        },
        "max_expected_adversarial_pows": {
            "classical": p * params.q * params.t * s,
            "quantum": (1.0 + eps) * math.e * sqrt_p * Q * s,
        },
        "concentration_exponent": {
            "classical": eps * eps * f * s,
            "quantum": (1.0 - eps) * f * (1.0 - f) * s,
        },
        "settlement": {
            "ratio": settlement_ratio(eps, f, params.c_settle),
            "classical_rounds": float(s),
            "quantum_rounds": settlement_ratio(eps, f, params.c_settle) * s,
        },
        "per_k_bounds": per_k,
        "expected_optimal": {
            "main": opt_main,
            "alt_restricted": math.sqrt(8.0 * p) * N,
            "alt_general": opt_alt_general,
            "alt_general_over_main": opt_alt_general / opt_main,
        },
        "informational": {
            "simplified_form_log": [
                {"k": k, "log": bernoulli_search_simplified(N, k, p).log_raw}
                for k in params.k_values
                if N >= 1
            ],
        },
    }
    return table
