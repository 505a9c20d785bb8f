"""Round-synchronous protocol executions with calibrated adversaries.

An execution runs ``n`` honest miners against a hash oracle for a fixed
number of rounds. Each round proceeds as: deliver last round's messages,
adopt the longest chain, mine with ``q`` queries, diffuse any new block,
then let the adversary act (it sees this round's honest messages before
scheduling its own deliveries — the classic rushing power).

The quantum adversary is modeled as a block-arrival process calibrated
by the proven query bounds rather than as a quantum computation: proven
upper bounds are the interface, and the simulator instantiates the
extremal behavior they allow. Granted blocks bypass the difficulty
predicate through the granted-identity registry (see ``backbone``).

Three calibration modes:

* ``poisson`` — independent per-round counts with mean
  ``(1 + eps) * e * sqrt(p) * Q``, the maximum-expectation row of the
  adversarial-power comparison;
* ``worst_case`` — a deterministic schedule placing exactly
  ``ceil(k0)`` blocks in *every* sliding ``s``-round window, where
  ``k0`` is the chained-PoW budget the typical-execution argument
  concedes to the adversary;
* ``tail_coupled`` — per aligned window, a total drawn from the
  distribution whose tail is exactly ``min(1, chain_bound(sQ, k))``
  (conservative: the bound is not tight below its optimum).

Property checkers implement the standard blockchain execution properties:
typical-execution conditions (honest-count concentration, adversarial
count threshold, and the no-insertion/copy/prediction provenance
checks), the common-prefix relation over all honest party/round pairs,
and chain quality over block windows.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .backbone import (
    Block,
    Chain,
    OracleParams,
    honest_round,
    select_chain,
    validate_chain,
)
from .bounds import k0_target, pow_chain_bound
from .recording import ResourceLimitError

__all__ = [
    "ExecutionError",
    "AdversarySpec",
    "ExecutionConfig",
    "ExecutionTrace",
    "WindowCounters",
    "run_execution",
    "counters",
    "window_series",
    "honest_rate",
    "per_party_rate",
    "expected_single_success",
    "typical_check",
    "TypicalResult",
    "common_prefix_check",
    "CommonPrefixResult",
    "chain_quality_check",
    "ChainQualityResult",
    "provenance_flaws",
    "min_round_span",
    "trace_events",
    "trace_hash",
    "run_trials",
    "trial_summary",
    "ChecksConfig",
]

_MAX_PARTY_ROUNDS = 50_000_000

ADVERSARY_KINDS = ("none", "classical", "quantum_rate", "private_chain")
RATE_MODES = ("poisson", "worst_case", "tail_coupled")


class ExecutionError(ValueError):
    """Invalid execution configuration or checker arguments."""


@dataclass(frozen=True)
class AdversarySpec:
    """Adversary model for one execution; exactly one kind is active.

    ``t`` applies to ``classical`` (that many real mining workers);
    ``Q``, ``mode`` and ``rate_eps`` apply to ``quantum_rate`` and
    ``private_chain`` (the block-source calibration); a ``private_chain``
    adversary additionally withholds its blocks until its private fork
    leads the public best by ``release_threshold`` blocks
    (``math.inf`` = never release).
    """

    kind: str = "none"
    t: int = 0
    Q: float = 0.0
    mode: str = "poisson"
    rate_eps: float = 0.1
    release_threshold: float = math.inf

    def __post_init__(self) -> None:
        if self.kind not in ADVERSARY_KINDS:
            raise ExecutionError(f"unknown adversary kind {self.kind!r}")
        if self.mode not in RATE_MODES:
            raise ExecutionError(f"unknown rate mode {self.mode!r}")
        if self.kind == "classical" and self.t < 1:
            raise ExecutionError("classical adversary needs t >= 1")
        if self.kind in ("quantum_rate", "private_chain"):
            if self.Q < 0:
                raise ExecutionError("Q must be >= 0")
            if self.rate_eps <= 0:
                raise ExecutionError("rate_eps must be > 0")
        if self.kind == "private_chain" and self.release_threshold < 1:
            raise ExecutionError("release_threshold must be >= 1")


@dataclass(frozen=True)
class ExecutionConfig:
    """Full description of one Monte Carlo experiment.

    ``window_s`` is the round-window length used by the worst-case
    adversary schedule and as the default for property checks; when
    omitted it defaults to ``ceil(2 / f)`` at check time, the shortest
    window the concentration arguments admit.
    """

    n: int
    oracle: OracleParams
    rounds: int
    eps: float = 0.1
    adversary: AdversarySpec = field(default_factory=AdversarySpec)
    seed: int = 0
    trials: int = 1
    window_s: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ExecutionError("need at least one honest party")
        if self.rounds < 0:
            raise ExecutionError("rounds must be >= 0")
        if not 0.0 < self.eps < 1.0:
            raise ExecutionError("eps must be in (0, 1)")
        if not 0 <= self.seed < 1 << 64:
            raise ExecutionError("seed must fit in 64 bits")
        if self.trials < 1:
            raise ExecutionError("trials must be >= 1")
        if self.window_s is not None and self.window_s < 1:
            raise ExecutionError("window_s must be >= 1")
        if self.n * max(self.rounds, 1) > _MAX_PARTY_ROUNDS:
            raise ResourceLimitError(
                f"n * rounds = {self.n * self.rounds} exceeds "
                f"{_MAX_PARTY_ROUNDS}"
            )


def per_party_rate(params: OracleParams) -> float:
    """Per-party per-round success probability 1 - (1-p)^q."""
    return -math.expm1(params.q * math.log1p(-params.p))


def honest_rate(n: int, params: OracleParams) -> float:
    """Exact probability that >= 1 honest party finds a PoW in a round."""
    return -math.expm1(n * params.q * math.log1p(-params.p))


def expected_single_success(n: int, params: OracleParams) -> float:
    """Expected fraction of rounds with *exactly* one honest success."""
    rho = per_party_rate(params)
    return n * rho * (1.0 - rho) ** (n - 1)


def derive_trial_seed(seed: int, trial: int) -> int:
    """Independent 64-bit seed for one trial, stable across platforms."""
    digest = hashlib.blake2b(
        struct.pack(">QQ", seed, trial), digest_size=8, person=b"pq-trial-seed"
    ).digest()
    return int.from_bytes(digest, "big")


# ----------------------------------------------------------- adversary


class _Adversary:
    """Base: no adversary."""

    def __init__(self, config: ExecutionConfig, params: OracleParams, rng) -> None:
        self.config = config
        self.params = params
        self.rng = rng
        self.granted: set[tuple[int, bytes, int]] = set()
        self.releases: list[tuple[int, Chain]] = []

    def step(
        self, round_index: int, chains: Sequence[Chain], mined: Sequence[Chain]
    ) -> tuple[int, list[list[Chain]]]:
        """Return (new adversarial PoWs, per-party deliveries for next round)."""
        return 0, [[] for _ in range(self.config.n)]

    def _public_best(
        self, chains: Sequence[Chain], mined: Sequence[Chain]
    ) -> Chain:
        best = Chain.EMPTY
        for candidate in list(chains) + list(mined):
            if candidate.length > best.length:
                best = candidate
        return best


def _adversary_payload(round_index: int, index: int) -> bytes:
    return struct.pack(">IIB", round_index, index, 0xAD)


class _ClassicalAdversary(_Adversary):
    """t real mining workers extending the public best tip each round."""

    def step(self, round_index, chains, mined):
        best = self._public_best(chains, mined)
        out: list[Chain] = []
        new_pows = 0
        for worker in range(self.config.adversary.t):
            result = honest_round(
                self.params,
                best,
                round_index,
                worker,
                payload=_adversary_payload(round_index, worker),
            )
            if result.chain is not None:
                chain = Chain(
                    result.chain.block,
                    best,
                    result.chain.head_hash,
                    -(worker + 1),
                    round_index,
                )
                out.append(chain)
                new_pows += 1
        deliveries = [list(out) for _ in range(self.config.n)]
        return new_pows, deliveries


class _RateSource:
    """Per-round granted-block counts under one calibration mode."""

    def __init__(self, spec: AdversarySpec, params: OracleParams, window_s, rng):
        self.spec = spec
        self.rng = rng
        self.params = params
        p = params.p
        self.mean = (1.0 + spec.rate_eps) * math.e * math.sqrt(p) * spec.Q
        if spec.mode in ("worst_case", "tail_coupled"):
            if window_s is None:
                raise ExecutionError(
                    f"{spec.mode} mode requires window_s in the execution config"
                )
            self.s = int(window_s)
        if spec.mode == "worst_case":
            budget = math.ceil(
                k0_target(self.s, max(spec.Q, 0.0), p, spec.rate_eps)
            )
            schedule = np.zeros(self.s, dtype=np.int64)
            for j in range(budget):
                schedule[(j * self.s) // max(budget, 1)] += 1
            self.schedule = schedule
            self.window_budget = budget
        elif spec.mode == "tail_coupled":
            self.tail = self._clamped_tail(p)
            self.window_counts: np.ndarray | None = None

    def _clamped_tail(self, p: float) -> np.ndarray:
        n_queries = self.s * self.spec.Q
        tail = [1.0]
        k = 1
        while True:
            value = min(1.0, pow_chain_bound(n_queries, k, p).closed.clamped)
            if value < 1e-18 or k > 10_000:
                break
            tail.append(value)
            k += 1
        return np.asarray(tail)

    def counts_for(self, round_index: int) -> int:
        if self.spec.Q == 0:
            return 0
        mode = self.spec.mode
        if mode == "poisson":
            return int(self.rng.poisson(self.mean))
        if mode == "worst_case":
            return int(self.schedule[round_index % self.s])
        # tail_coupled: draw once per aligned window, spread evenly.
        offset = round_index % self.s
        if offset == 0 or self.window_counts is None:
            u = self.rng.random()
            total = int(np.sum(self.tail > u)) - 1  # tail[0] = 1 always passes
            window = np.zeros(self.s, dtype=np.int64)
            for j in range(total):
                window[(j * self.s) // max(total, 1)] += 1
            self.window_counts = window
        return int(self.window_counts[offset])


class _QuantumRateAdversary(_Adversary):
    """Granted blocks immediately extend and broadcast the public best."""

    def __init__(self, config, params, rng):
        super().__init__(config, params, rng)
        self.source = _RateSource(config.adversary, params, config.window_s, rng)
        self.tip = Chain.EMPTY

    def _grant_on(self, tip: Chain, round_index: int, index: int) -> Chain:
        block = Block(
            tip.head_hash, _adversary_payload(round_index, index), 0
        )
        self.granted.add(block.identity)
        return tip.extend(self.params, block, creator=-1, round=round_index)

    def step(self, round_index, chains, mined):
        count = self.source.counts_for(round_index)
        best = self._public_best(chains, mined)
        if best.length > self.tip.length:
            self.tip = best
        for j in range(count):
            self.tip = self._grant_on(self.tip, round_index, j)
        if count:
            deliveries = [[self.tip] for _ in range(self.config.n)]
        else:
            deliveries = [[] for _ in range(self.config.n)]
        return count, deliveries


class _PrivateChainAdversary(_QuantumRateAdversary):
    """Withhold granted blocks on a private fork; release past a lead."""

    def step(self, round_index, chains, mined):
        count = self.source.counts_for(round_index)
        public = self._public_best(chains, mined)
        if public.length > self.tip.length:
            # The public chain overtook the private fork: restart from it.
            self.tip = public
        for j in range(count):
            self.tip = self._grant_on(self.tip, round_index, j)
        threshold = self.config.adversary.release_threshold
        release = (
            math.isfinite(threshold)
            and self.tip.length >= public.length + threshold
            and self.tip is not public
        )
        if release:
            self.releases.append((round_index, self.tip))
            deliveries = [[self.tip] for _ in range(self.config.n)]
        else:
            deliveries = [[] for _ in range(self.config.n)]
        return count, deliveries


def _make_adversary(config: ExecutionConfig, params: OracleParams, rng) -> _Adversary:
    kind = config.adversary.kind
    if kind == "none":
        return _Adversary(config, params, rng)
    if kind == "classical":
        return _ClassicalAdversary(config, params, rng)
    if kind == "quantum_rate":
        return _QuantumRateAdversary(config, params, rng)
    return _PrivateChainAdversary(config, params, rng)


# ----------------------------------------------------------- execution


@dataclass
class ExecutionTrace:
    """Complete record of one trial, sufficient to recompute every check."""

    config: ExecutionConfig
    trial_index: int
    oracle: OracleParams  # with the trial-derived seed
    honest_counts: np.ndarray  # per round: number of honest PoWs
    adv_counts: np.ndarray  # per round: number of adversarial PoWs
    mined_events: list[tuple[int, int, Chain]]  # (round, party, new chain)
    # (round, party, chain) whenever a party's start-of-round adopted
    # chain changed; the adopted chain "at round r" is the post-delivery,
    # pre-mining state, which is what the prefix and quality properties
    # quantify over.
    adoption_events: list[tuple[int, int, Chain]]
    final_chains: list[Chain]
    granted: frozenset
    releases: list[tuple[int, Chain]]
    total_queries: int

    @property
    def rounds(self) -> int:
        return int(len(self.honest_counts))

    def adopted_chains_by_round(self) -> Iterable[tuple[int, int, Chain]]:
        return iter(self.adoption_events)

    def distinct_adopted_heads(self) -> list[Chain]:
        seen: dict[int, Chain] = {}
        for _, _, chain in self.adoption_events:
            seen[id(chain)] = chain
        for chain in self.final_chains:
            seen[id(chain)] = chain
        return list(seen.values())


def run_execution(config: ExecutionConfig, trial: int = 0) -> ExecutionTrace:
    """Run one trial; deterministic given (config.seed, trial)."""
    trial_seed = derive_trial_seed(config.seed, trial)
    params = dataclasses.replace(config.oracle, seed=trial_seed)
    rng = np.random.default_rng(trial_seed)
    n = config.n
    chains: list[Chain] = [Chain.EMPTY] * n
    pending: list[list[Chain]] = [[] for _ in range(n)]
    adversary = _make_adversary(config, params, rng)
    honest_counts = np.zeros(config.rounds, dtype=np.int64)
    adv_counts = np.zeros(config.rounds, dtype=np.int64)
    mined_events: list[tuple[int, int, Chain]] = []
    adoption_events: list[tuple[int, int, Chain]] = []
    last_recorded: list[Chain] = [Chain.EMPTY] * n
    total_queries = 0
    for r in range(config.rounds):
        # 1. delivery of last round's messages, longest-chain adoption
        for i in range(n):
            if pending[i]:
                chains[i] = select_chain(chains[i], pending[i])
            pending[i] = []
        # The chain a party holds entering the round is its adopted chain
        # for property checks; blocks it mines this round only become
        # comparable once others can have received them.
        for i in range(n):
            if chains[i] is not last_recorded[i]:
                adoption_events.append((r, i, chains[i]))
                last_recorded[i] = chains[i]
        # 2. mining (parties are independent within a round)
        mined: list[Chain] = []
        count = 0
        for i in range(n):
            result = honest_round(params, chains[i], r, i)
            total_queries += result.queries_used
            if result.chain is not None:
                chains[i] = result.chain
                mined.append(result.chain)
                mined_events.append((r, i, result.chain))
                count += 1
        honest_counts[r] = count
        # 3. adversary acts after seeing this round's honest messages
        new_pows, deliveries = adversary.step(r, chains, mined)
        adv_counts[r] = new_pows
        # 4. queue next round: adversarial deliveries first (rushing),
        #    then every honest diffusion of this round
        for i in range(n):
            pending[i] = deliveries[i] + mined
    return ExecutionTrace(
        config=config,
        trial_index=trial,
        oracle=params,
        honest_counts=honest_counts,
        adv_counts=adv_counts,
        mined_events=mined_events,
        adoption_events=adoption_events,
        final_chains=list(chains),
        granted=frozenset(adversary.granted),
        releases=list(adversary.releases),
        total_queries=total_queries,
    )


# ------------------------------------------------------------ counters


@dataclass(frozen=True)
class WindowCounters:
    X: int
    Y: int
    Z: int
    window: tuple[int, int]  # (start_round, s)


def counters(trace: ExecutionTrace, window: tuple[int, int]) -> WindowCounters:
    """Honest >= 1, honest == 1, and adversarial counts over one window."""
    start, s = window
    if start < 0 or s < 0 or start + s > trace.rounds:
        raise ExecutionError(f"window {window} out of range for {trace.rounds} rounds")
    chunk = trace.honest_counts[start : start + s]
    return WindowCounters(
        X=int(np.count_nonzero(chunk >= 1)),
        Y=int(np.count_nonzero(chunk == 1)),
        Z=int(np.sum(trace.adv_counts[start : start + s])),
        window=(start, s),
    )


def window_series(trace: ExecutionTrace, s: int):
    """X, Y, Z for every sliding s-window as numpy arrays."""
    if not 1 <= s <= trace.rounds:
        raise ExecutionError(f"window length {s} out of range")
    x_ind = (trace.honest_counts >= 1).astype(np.int64)
    y_ind = (trace.honest_counts == 1).astype(np.int64)

    def sliding(arr):
        csum = np.concatenate([[0], np.cumsum(arr)])
        return csum[s:] - csum[:-s]

    return sliding(x_ind), sliding(y_ind), sliding(trace.adv_counts)


# ----------------------------------------------------- provenance flaws


def provenance_flaws(trace: ExecutionTrace) -> list[tuple[str, object]]:
    """Insertion / copy / prediction detectors over all adopted chains.

    * prediction — a block extends a block created in a later round;
    * insertion — a block spliced between two consecutive blocks that
      both existed before it was created;
    * copy — one block identity at two different heights.
    """
    flaws: list[tuple[str, object]] = []
    heights: dict[tuple, set[int]] = {}
    seen_nodes: set[int] = set()
    for head in trace.distinct_adopted_heads() + [c for _, c in trace.releases]:
        window: list[Chain] = []  # child-side lookahead for triples
        for node in head.nodes():
            parent = node.parent
            if (
                parent is not None
                and parent.block is not None
                and node.round is not None
                and parent.round is not None
            ):
                if node.round < parent.round:
                    flaws.append(("prediction", (parent.block, node.block)))
                grand = parent.parent
                if (
                    grand is not None
                    and node.round is not None
                    and parent.round is not None
                    and parent.round > node.round
                    and (grand.block is None or (grand.round or 0) <= node.round)
                ):
                    flaws.append(("insertion", (parent.block, node.block)))
            if id(node) not in seen_nodes:
                seen_nodes.add(id(node))
                block = node.block
                assert block is not None
                height = node.length - 1
                spots = heights.setdefault(block.identity, set())
                if spots and height not in spots:
                    flaws.append(("copy", (block, sorted(spots | {height}))))
                spots.add(height)
    return flaws


# -------------------------------------------------------- typical check


@dataclass(frozen=True)
class TypicalResult:
    passed: bool
    failed_condition: Optional[str]
    witness_window: Optional[tuple[int, int]]
    n_windows: int
    violations_a: int
    violations_b: int


def typical_check(
    trace: ExecutionTrace, eps: Optional[float] = None, s: Optional[int] = None
) -> TypicalResult:
    """Typical-execution test over every sliding s-window.

    (a) honest concentration: (1-eps) f s < X < (1+eps) f s and
        Y > (1-eps) E[Y];
    (b) adversarial counts: Z < (1-eps) f (1-f) s for calibrated
        adversaries, or Z < p q t s + eps f s for the classical(t)
        baseline;
    (c) no insertions, copies, or predictions in block provenance.

    Requires s f >= 2 (shorter windows carry no concentration content).
    """
    config = trace.config
    eps = config.eps if eps is None else eps
    f = honest_rate(config.n, trace.oracle)
    if s is None:
        s = config.window_s or math.ceil(2.0 / f)
    if trace.rounds < s:
        raise ExecutionError(f"trace has {trace.rounds} rounds, window needs {s}")
    if s * f < 2.0:
        raise ExecutionError(f"window too short: s*f = {s * f:.3f} < 2")
    xs, ys, zs = window_series(trace, s)
    ey = s * expected_single_success(config.n, trace.oracle)
    lo, hi = (1 - eps) * f * s, (1 + eps) * f * s
    bad_a = (xs <= lo) | (xs >= hi) | (ys <= (1 - eps) * ey)
    if config.adversary.kind == "classical":
        params = trace.oracle
        z_cap = params.p * params.q * config.adversary.t * s + eps * f * s
    else:
        z_cap = (1 - eps) * f * (1 - f) * s
    bad_b = zs >= z_cap
    flaws = provenance_flaws(trace)
    failed = None
    witness = None
    if bad_a.any():
        failed = "a"
        witness = (int(np.argmax(bad_a)), s)
    elif bad_b.any():
        failed = "b"
        witness = (int(np.argmax(bad_b)), s)
    elif flaws:
        failed = f"c:{flaws[0][0]}"
    return TypicalResult(
        passed=failed is None,
        failed_condition=failed,
        witness_window=witness,
        n_windows=len(xs),
        violations_a=int(np.count_nonzero(bad_a)),
        violations_b=int(np.count_nonzero(bad_b)),
    )


# --------------------------------------------------- common prefix


@dataclass(frozen=True)
class CommonPrefixResult:
    passed: bool
    witness: Optional[dict]


def common_prefix_check(trace: ExecutionTrace, k: int) -> CommonPrefixResult:
    """Pruned-prefix agreement across all honest party and round pairs.

    For every pair of honest parties P1, P2 and rounds r1 <= r2 with
    adopted chains C1, C2: pruning the k rightmost blocks of C1 must
    leave a prefix of C2. Implemented incrementally: once a height is
    k-deep in anyone's chain its block is *claimed*, every later (and
    same-round) chain must agree with all claims, and no chain may be
    shorter than the claimed region.
    """
    if k < 0:
        raise ExecutionError("k must be >= 0")
    n = trace.config.n
    claims: list[tuple] = []  # height -> block identity
    claim_meta: list[tuple[int, int]] = []  # height -> (claimant, round)
    current: list[Chain] = [Chain.EMPTY] * n
    events_by_round: dict[int, list[tuple[int, Chain]]] = {}
    for r, i, chain in trace.adoption_events:
        events_by_round.setdefault(r, []).append((i, chain))

    def check_chain(party: int, chain: Chain, r: int) -> Optional[dict]:
        blocks = chain.blocks()
        if len(claims) > len(blocks):
            claimant, r1 = claim_meta[len(blocks)]
            return {
                "round": r,
                "claimant": claimant,
                "claim_round": r1,
                "party": party,
                "height": len(blocks),
                "kind": "settled height beyond chain",
            }
        for h in range(len(claims)):
            if blocks[h].identity != claims[h]:
                claimant, r1 = claim_meta[h]
                return {
                    "round": r,
                    "claimant": claimant,
                    "claim_round": r1,
                    "party": party,
                    "height": h,
                    "kind": "settled block mismatch",
                }
        return None

    for r in range(trace.rounds):
        changed = events_by_round.get(r, [])
        for i, chain in changed:
            current[i] = chain
        new_claim_start = len(claims)
        for i, chain in changed:
            witness = check_chain(i, chain, r)
            if witness is not None:
                return CommonPrefixResult(False, witness)
            blocks = chain.blocks()
            settled = chain.length - k
            for h in range(len(claims), settled):
                claims.append(blocks[h].identity)
                claim_meta.append((i, r))
        if len(claims) > new_claim_start:
            # fresh claims must hold against everyone's current chain
            for i in range(n):
                chain = current[i]
                if chain.length <= new_claim_start:
                    if len(claims) > chain.length:
                        claimant, r1 = claim_meta[chain.length]
                        return CommonPrefixResult(
                            False,
                            {
                                "round": r,
                                "claimant": claimant,
                                "claim_round": r1,
                                "party": i,
                                "height": chain.length,
                                "kind": "settled height beyond chain",
                            },
                        )
                    continue
                for h in range(new_claim_start, min(len(claims), chain.length)):
                    if chain.at(h).identity != claims[h]:
                        claimant, r1 = claim_meta[h]
                        return CommonPrefixResult(
                            False,
                            {
                                "round": r,
                                "claimant": claimant,
                                "claim_round": r1,
                                "party": i,
                                "height": h,
                                "kind": "settled block mismatch",
                            },
                        )
    return CommonPrefixResult(True, None)


# --------------------------------------------------- chain quality


@dataclass(frozen=True)
class ChainQualityResult:
    passed: bool
    worst_ratio: float
    witness: Optional[dict]


def _maximal_chains(heads: list[Chain]) -> list[Chain]:
    by_len = sorted(heads, key=lambda c: -c.length)
    visited: set[int] = set()
    maximal = []
    for head in by_len:
        if id(head) in visited or head.length == 0:
            continue
        maximal.append(head)
        node = head
        while node.block is not None and id(node) not in visited:
            visited.add(id(node))
            node = node.parent  # type: ignore[assignment]
    return maximal


def chain_quality_check(trace: ExecutionTrace, l: int, mu: float) -> ChainQualityResult:
    """Honest-block ratio >= mu in every l-block window of adopted chains."""
    if l < 1:
        raise ExecutionError("l must be >= 1")
    worst = 1.0
    witness = None
    for head in _maximal_chains(trace.distinct_adopted_heads()):
        honest_flags = [
            1 if (node.creator is not None and node.creator >= 0) else 0
            for node in head.nodes()
        ][::-1]
        if len(honest_flags) < l:
            continue
        csum = np.concatenate([[0], np.cumsum(honest_flags)])
        window_counts = csum[l:] - csum[:-l]
        idx = int(np.argmin(window_counts))
        ratio = window_counts[idx] / l
        if ratio < worst:
            worst = float(ratio)
            witness = {"start_height": idx, "length": l, "honest": int(window_counts[idx])}
    return ChainQualityResult(worst >= mu, worst, witness if worst < mu else None)


def min_round_span(chain: Chain, k: int) -> Optional[int]:
    """Smallest round span covered by any k consecutive blocks of a chain."""
    rounds = [node.round for node in chain.nodes()][::-1]
    if len(rounds) < k or any(r is None for r in rounds):
        return None
    spans = [rounds[i + k - 1] - rounds[i] for i in range(len(rounds) - k + 1)]
    return min(spans)


# ----------------------------------------------------------- trace I/O


def trace_events(trace: ExecutionTrace) -> list[dict]:
    """Flat, JSON-ready event list (newline-delimited export upstream)."""
    events: list[dict] = []
    for r, i, chain in trace.mined_events:
        block = chain.block
        assert block is not None
        events.append(
            {
                "round": r,
                "type": "honest_pow",
                "party": i,
                "height": chain.length - 1,
                "s": block.s,
                "x": block.x.hex(),
                "ctr": block.ctr,
            }
        )
    adv_rounds = np.nonzero(trace.adv_counts)[0]
    for r in adv_rounds:
        events.append(
            {"round": int(r), "type": "adversary_pow", "count": int(trace.adv_counts[r])}
        )
    for r, chain in trace.releases:
        events.append(
            {"round": r, "type": "release", "length": chain.length}
        )
    for r, i, chain in trace.adoption_events:
        events.append(
            {
                "round": r,
                "type": "adopt",
                "party": i,
                "height": chain.length - 1,
                "head": chain.head_hash,
            }
        )
    events.sort(key=lambda e: (e["round"], e["type"], e.get("party", -1)))
    return events


def trace_hash(trace: ExecutionTrace) -> str:
    payload = "\n".join(
        json.dumps(e, sort_keys=True, separators=(",", ":")) for e in trace_events(trace)
    )
    return hashlib.blake2b(payload.encode(), digest_size=16).hexdigest()


# ------------------------------------------------------------- trials


@dataclass(frozen=True)
class ChecksConfig:
    """Which property checks a batch of trials should evaluate."""

    common_prefix_k: Optional[int] = None
    chain_quality_l: Optional[int] = None
    chain_quality_mu: Optional[float] = None
    typical_s: tuple[int, ...] = ()


def trial_summary(
    config: ExecutionConfig, trial: int, checks: Optional[ChecksConfig] = None
) -> dict:
    """Run one trial and reduce it to a JSON-ready summary document."""
    trace = run_execution(config, trial)
    f = honest_rate(config.n, trace.oracle)
    summary: dict = {
        "trial": trial,
        "rounds": trace.rounds,
        "honest_pows": int(np.sum(trace.honest_counts)),
        "honest_round_fraction": float(np.mean(trace.honest_counts >= 1))
        if trace.rounds
        else 0.0,
        "adversarial_pows": int(np.sum(trace.adv_counts)),
        "releases": len(trace.releases),
        "max_chain_length": max((c.length for c in trace.final_chains), default=0),
        "trace_hash": trace_hash(trace),
        "f_exact": f,
    }
    if checks is not None:
        if checks.common_prefix_k is not None:
            result = common_prefix_check(trace, checks.common_prefix_k)
            summary["common_prefix_ok"] = result.passed
        if checks.chain_quality_l is not None:
            cq = chain_quality_check(
                trace, checks.chain_quality_l, checks.chain_quality_mu or 0.0
            )
            summary["chain_quality_ok"] = cq.passed
            summary["chain_quality_worst_ratio"] = cq.worst_ratio
        for s in checks.typical_s:
            result = typical_check(trace, s=s)
            summary[f"typical_ok_s{s}"] = result.passed
            summary[f"typical_violations_a_s{s}"] = result.violations_a
            summary[f"typical_windows_s{s}"] = result.n_windows
    return summary


def _trial_worker(args: tuple) -> dict:
    config, trial, checks = args
    return trial_summary(config, trial, checks)


def run_trials(
    config: ExecutionConfig,
    checks: Optional[ChecksConfig] = None,
    jobs: int = 1,
) -> list[dict]:
    """All trials' summaries, in trial order regardless of parallelism."""
    tasks = [(config, t, checks) for t in range(config.trials)]
    if jobs <= 1 or config.trials == 1:
        return [_trial_worker(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_trial_worker, tasks, chunksize=1))
