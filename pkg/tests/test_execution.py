"""Tests for protocol executions, adversary calibration, and checkers."""
import dataclasses
import math

import numpy as np
import pytest

from pqpow.backbone import Block, Chain, OracleParams, params_from_probability, validate_chain
from pqpow.bounds import k0_target
from pqpow.execution import (
    AdversarySpec,
    ChainQualityResult,
    ChecksConfig,
    ExecutionConfig,
    ExecutionError,
    chain_quality_check,
    common_prefix_check,
    counters,
    expected_single_success,
    honest_rate,
    min_round_span,
    per_party_rate,
    provenance_flaws,
    run_execution,
    run_trials,
    trace_events,
    trace_hash,
    trial_summary,
    typical_check,
    window_series,
)
from pqpow.recording import ResourceLimitError

FAST = OracleParams(T=1 << 26, kappa=32, q=8, seed=0)  # p = 2^-6 per query


def honest_config(**kw):
    base = dict(n=4, oracle=FAST, rounds=400, eps=0.5, seed=11, trials=1)
    base.update(kw)
    return ExecutionConfig(**base)


# ------------------------------------------------------------- config


def test_config_validation():
    with pytest.raises(ExecutionError):
        honest_config(n=0)
    with pytest.raises(ExecutionError):
        honest_config(eps=0.0)
    with pytest.raises(ExecutionError):
        honest_config(trials=0)
    with pytest.raises(ExecutionError):
        honest_config(window_s=0)
    with pytest.raises(ResourceLimitError):
        honest_config(n=100_000, rounds=10_000)
    with pytest.raises(ExecutionError):
        AdversarySpec(kind="weird")
    with pytest.raises(ExecutionError):
        AdversarySpec(kind="classical", t=0)
    with pytest.raises(ExecutionError):
        AdversarySpec(kind="quantum_rate", Q=-1)
    with pytest.raises(ExecutionError):
        AdversarySpec(kind="private_chain", Q=1, release_threshold=0)


def test_rate_helpers():
    assert per_party_rate(FAST) == pytest.approx(1 - (1 - 2**-6) ** 8, rel=1e-14)
    assert honest_rate(4, FAST) == pytest.approx(1 - (1 - 2**-6) ** 32, rel=1e-14)
    rho = per_party_rate(FAST)
    assert expected_single_success(4, FAST) == pytest.approx(
        4 * rho * (1 - rho) ** 3, rel=1e-14
    )


# ------------------------------------------------------- honest runs


def test_zero_rounds_all_empty():
    trace = run_execution(honest_config(rounds=0))
    assert all(chain is Chain.EMPTY for chain in trace.final_chains)
    assert trace.rounds == 0
    assert counters(trace, (0, 0)) == counters(trace, (0, 0))
    assert counters(trace, (0, 0)).X == 0


def test_honest_run_shape_and_validity():
    trace = run_execution(honest_config())
    assert int(np.sum(trace.honest_counts)) == len(trace.mined_events)
    for chain in trace.final_chains:
        assert validate_chain(trace.oracle, chain, trace.granted)
    # Lengths within one block of each other after any synchronized round.
    lengths = sorted(chain.length for chain in trace.final_chains)
    assert lengths[-1] - lengths[0] <= 1
    # Adoption lengths are nondecreasing per party.
    per_party: dict[int, list[int]] = {}
    for r, i, chain in trace.adoption_events:
        per_party.setdefault(i, []).append(chain.length)
    for series in per_party.values():
        assert series == sorted(series)


def test_determinism_and_trial_independence():
    config = honest_config(rounds=120)
    a = run_execution(config, trial=0)
    b = run_execution(config, trial=0)
    c = run_execution(config, trial=1)
    assert trace_hash(a) == trace_hash(b)
    assert trace_hash(a) != trace_hash(c)
    assert trace_events(a) == trace_events(b)


def test_empirical_honest_rate():
    config = honest_config(n=2, rounds=4000, seed=5)
    trace = run_execution(config)
    f = honest_rate(2, trace.oracle)
    mean = float(np.mean(trace.honest_counts >= 1))
    sigma = math.sqrt(f * (1 - f) / 4000)
    assert abs(mean - f) < 3 * sigma


# ------------------------------------------------------------ counters


def test_counters_and_window_series():
    trace = run_execution(honest_config(rounds=200))
    full = counters(trace, (0, 200))
    assert full.Y <= full.X <= 200
    assert full.Z == 0
    xs, ys, zs = window_series(trace, 50)
    assert len(xs) == 151
    w = counters(trace, (17, 50))
    assert (w.X, w.Y, w.Z) == (int(xs[17]), int(ys[17]), int(zs[17]))
    with pytest.raises(ExecutionError):
        counters(trace, (190, 20))
    with pytest.raises(ExecutionError):
        window_series(trace, 0)


def test_two_successes_count_in_x_not_y():
    trace = run_execution(honest_config(rounds=1))
    patched = dataclasses.replace(
        trace,
        honest_counts=np.array([2], dtype=np.int64),
        adv_counts=np.array([0], dtype=np.int64),
    )
    w = counters(patched, (0, 1))
    assert (w.X, w.Y) == (1, 0)


# -------------------------------------------------------- typical check


def test_typical_check_passes_honest_only():
    config = honest_config(n=8, rounds=600, eps=0.5, seed=3)
    trace = run_execution(config)
    result = typical_check(trace, s=150)
    assert result.passed, result
    assert result.n_windows == 451
    assert result.violations_a == 0 and result.violations_b == 0


def test_typical_check_preconditions():
    trace = run_execution(honest_config(rounds=60))
    with pytest.raises(ExecutionError):
        typical_check(trace, s=100)  # longer than the trace
    low_p = dataclasses.replace(honest_config(rounds=60), oracle=OracleParams(T=1, kappa=32, q=1))
    short = run_execution(low_p)
    with pytest.raises(ExecutionError):
        typical_check(short, s=50)  # s*f far below 2


def test_typical_check_condition_b_threshold():
    config = honest_config(n=8, rounds=600, eps=0.5, seed=3)
    trace = run_execution(config)
    f = honest_rate(8, trace.oracle)
    s = 150
    cap = (1 - 0.5) * f * (1 - f) * s
    forced = np.zeros(600, dtype=np.int64)
    forced[300] = math.ceil(cap)  # one window crosses the threshold
    patched = dataclasses.replace(trace, adv_counts=forced)
    result = typical_check(patched, s=s)
    assert not result.passed
    assert result.failed_condition == "b"
    assert result.violations_b >= 1


def _flat_params():
    # p = 1/2 at one query: a deterministic-looking alternating pattern
    # keeps every window inside the concentration band.
    return OracleParams(T=1 << 31, kappa=32, q=1, seed=0)


def _synthetic_trace(chain, rounds=16):
    params = _flat_params()
    config = ExecutionConfig(n=1, oracle=params, rounds=rounds, eps=0.5, seed=0)
    honest = np.tile([1, 0], rounds // 2).astype(np.int64)
    return dataclasses.replace(
        run_execution(config),
        honest_counts=honest,
        adv_counts=np.zeros(rounds, dtype=np.int64),
        adoption_events=[(rounds - 1, 0, chain)],
        final_chains=[chain],
    )


def _linked_chain(rounds_list, params=None):
    params = params or _flat_params()
    chain = Chain.EMPTY
    for idx, r in enumerate(rounds_list):
        block = Block(chain.head_hash, b"b%d" % idx, 0)
        chain = chain.extend(params, block, creator=-1, round=r)
    return chain


def test_provenance_detectors():
    # Prediction: the second block extends a block created later.
    pred = _linked_chain([5, 3])
    kinds = {kind for kind, _ in provenance_flaws(_synthetic_trace(pred))}
    assert "prediction" in kinds
    # Insertion: middle block created after both neighbors existed.
    ins = _linked_chain([1, 9, 3])
    kinds = {kind for kind, _ in provenance_flaws(_synthetic_trace(ins))}
    assert "insertion" in kinds
    # Copy: identical block at two heights.
    params = _flat_params()
    a = Block(0, b"dup", 0)
    chain = Chain.EMPTY.extend(params, a, 0, 0)
    chain = chain.extend(params, Block(chain.head_hash, b"mid", 0), 0, 1)
    chain = chain.extend(params, a, 0, 2)
    kinds = {kind for kind, _ in provenance_flaws(_synthetic_trace(chain))}
    assert "copy" in kinds
    # Clean honest trace: no flaws.
    trace = run_execution(honest_config(rounds=120))
    assert provenance_flaws(trace) == []


def test_typical_check_condition_c():
    trace = _synthetic_trace(_linked_chain([1, 9, 3]))
    result = typical_check(trace, s=8)
    assert not result.passed
    assert result.failed_condition.startswith("c:")


# ------------------------------------------------------- common prefix


def test_common_prefix_single_party():
    trace = run_execution(honest_config(n=1, rounds=200))
    assert common_prefix_check(trace, 0).passed
    assert common_prefix_check(trace, 2).passed


def test_common_prefix_honest_network():
    # Low per-party rate keeps simultaneous forks (the only honest source
    # of prefix divergence) rare enough that k=1 sees zero violations.
    slow = OracleParams(T=1 << 24, kappa=32, q=8, seed=0)  # rho ~ 0.031
    for seed in (1, 2, 3):
        trace = run_execution(honest_config(oracle=slow, rounds=300, seed=seed))
        result = common_prefix_check(trace, 1)
        assert result.passed, result.witness
    # At the faster rate forks are common but depth-bounded: a modest k
    # absorbs them.
    for seed in (1, 2, 3):
        trace = run_execution(honest_config(rounds=300, seed=seed))
        result = common_prefix_check(trace, 4)
        assert result.passed, result.witness


def test_common_prefix_k0_fork_detected():
    # At k = 0 a simultaneous double success forks the claimed tip.
    found = False
    for seed in range(40):
        config = honest_config(n=6, rounds=120, seed=seed, oracle=OracleParams(T=1 << 29, kappa=32, q=8, seed=0))
        trace = run_execution(config)
        if np.any(trace.honest_counts >= 2):
            result = common_prefix_check(trace, 0)
            if not result.passed:
                found = True
                assert result.witness["kind"] in (
                    "settled block mismatch",
                    "settled height beyond chain",
                )
                break
    assert found, "no fork found across seeds"


# ---------------------------------------------------------- adversaries


def test_quantum_rate_worst_case_schedule():
    p_params = params_from_probability(1e-6, q=2)
    spec = AdversarySpec(kind="quantum_rate", Q=10, mode="worst_case", rate_eps=0.1)
    config = ExecutionConfig(
        n=2, oracle=p_params, rounds=300, eps=0.1, adversary=spec, seed=0, window_s=100
    )
    trace = run_execution(config)
    budget = math.ceil(k0_target(100, 10, p_params.p, 0.1))
    assert budget == 3
    sliding = np.convolve(trace.adv_counts, np.ones(100, dtype=int), mode="valid")
    assert np.all(sliding == budget)
    # Granted blocks validate only through the registry.
    best = max(trace.final_chains, key=lambda c: c.length)
    assert validate_chain(trace.oracle, best, trace.granted)
    assert not validate_chain(trace.oracle, best)


def test_quantum_rate_poisson_mean():
    p_params = params_from_probability(1e-4, q=1)
    spec = AdversarySpec(kind="quantum_rate", Q=10, mode="poisson", rate_eps=0.1)
    config = ExecutionConfig(
        n=1, oracle=p_params, rounds=20_000, eps=0.1, adversary=spec, seed=4
    )
    trace = run_execution(config)
    lam = 1.1 * math.e * math.sqrt(p_params.p) * 10
    mean = float(np.mean(trace.adv_counts))
    sigma = math.sqrt(lam / 20_000)
    assert abs(mean - lam) < 3 * sigma


def test_quantum_rate_zero_q_matches_none():
    base = honest_config(rounds=150)
    spec = AdversarySpec(kind="quantum_rate", Q=0, mode="poisson")
    with_adv = dataclasses.replace(base, adversary=spec)
    assert trace_hash(run_execution(base)) == trace_hash(run_execution(with_adv))


def test_tail_coupled_mode_runs():
    p_params = params_from_probability(1e-4, q=2)
    spec = AdversarySpec(kind="quantum_rate", Q=5, mode="tail_coupled", rate_eps=0.5)
    config = ExecutionConfig(
        n=2, oracle=p_params, rounds=128, eps=0.5, adversary=spec, seed=9, window_s=32
    )
    trace = run_execution(config)
    assert np.all(trace.adv_counts >= 0)
    # Counts are constant within each aligned window's schedule total.
    for w in range(4):
        chunk = trace.adv_counts[w * 32 : (w + 1) * 32]
        assert chunk.sum() == int(chunk.sum())


def test_worst_case_requires_window():
    spec = AdversarySpec(kind="quantum_rate", Q=1, mode="worst_case")
    with pytest.raises(ExecutionError):
        run_execution(honest_config(adversary=spec, rounds=10))


def test_private_chain_never_release():
    spec = AdversarySpec(
        kind="private_chain", Q=2, mode="poisson", rate_eps=0.1,
        release_threshold=math.inf,
    )
    config = honest_config(adversary=spec, rounds=200)
    trace = run_execution(config)
    assert trace.releases == []
    for chain in trace.final_chains:
        assert all(node.creator is not None and node.creator >= 0 for node in chain.nodes())
    assert int(np.sum(trace.adv_counts)) > 0  # it did mine, silently


def test_private_chain_release_and_adoption():
    spec = AdversarySpec(
        kind="private_chain", Q=4, mode="poisson", rate_eps=0.1,
        release_threshold=5,
    )
    config = honest_config(adversary=spec, rounds=200, seed=2)
    trace = run_execution(config)
    assert len(trace.releases) >= 1
    adopted_adv = any(
        any(node.creator is not None and node.creator < 0 for node in chain.nodes())
        for chain in trace.final_chains
    )
    assert adopted_adv
    for chain in trace.final_chains:
        assert validate_chain(trace.oracle, chain, trace.granted)


def test_classical_adversary_mines_for_real():
    spec = AdversarySpec(kind="classical", t=2)
    config = honest_config(adversary=spec, rounds=300, seed=6)
    trace = run_execution(config)
    assert int(np.sum(trace.adv_counts)) > 0
    assert trace.granted == frozenset()  # classical blocks carry real PoW
    for chain in trace.final_chains:
        assert validate_chain(trace.oracle, chain)
    # Classical condition (b) uses the pqts + eps*f*s cap.
    result = typical_check(trace, s=150)
    assert result.failed_condition in (None, "a", "b")


# ------------------------------------------------------- chain quality


def test_chain_quality_honest_only():
    trace = run_execution(honest_config(rounds=300))
    result = chain_quality_check(trace, l=5, mu=1.0)
    assert result.passed
    assert result.worst_ratio == 1.0


def test_chain_quality_forced_adversarial_window():
    params = _flat_params()
    chain = _linked_chain([0, 1, 2, 3], params)  # all creator=-1
    trace = _synthetic_trace(chain)
    result = chain_quality_check(trace, l=4, mu=0.5)
    assert not result.passed
    assert result.worst_ratio == 0.0
    assert result.witness is not None
    # Windows longer than every chain are vacuous.
    vacuous = chain_quality_check(trace, l=10, mu=0.9)
    assert vacuous.passed
    with pytest.raises(ExecutionError):
        chain_quality_check(trace, l=0, mu=0.5)


def test_round_span_of_block_windows():
    config = honest_config(n=8, rounds=600, eps=0.5, seed=3)
    trace = run_execution(config)
    f = honest_rate(8, trace.oracle)
    s = 150
    k = math.ceil(2 * f * s)
    best = max(trace.final_chains, key=lambda c: c.length)
    span = min_round_span(best, k)
    assert span is not None and span > k / (2 * f)


# ------------------------------------------------------------- trials


def test_trial_summaries_and_parallel_determinism():
    config = honest_config(rounds=120, trials=3)
    checks = ChecksConfig(
        common_prefix_k=4, chain_quality_l=4, chain_quality_mu=0.5, typical_s=(60,)
    )
    seq = run_trials(config, checks, jobs=1)
    par = run_trials(config, checks, jobs=2)
    assert seq == par
    assert [s["trial"] for s in seq] == [0, 1, 2]
    for summary in seq:
        assert summary["common_prefix_ok"] is True
        assert summary["chain_quality_ok"] is True
        assert "typical_ok_s60" in summary
        assert summary["adversarial_pows"] == 0
        assert 0.0 <= summary["honest_round_fraction"] <= 1.0
