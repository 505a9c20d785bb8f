"""Query strategies driven against the recorded-function simulator.

A strategy owns a QuantumSystem and exposes three hooks:

  pre_query(state, i)  : adversary operations before query i (0-based)
  post_query(state, i) : adversary operations right after query i
  finalize(state)      : last operations, including writing the claim slots

The runner interleaves the hooks with dual-domain queries and records the
progress trajectory (recorded-ones mass per threshold k), the per-query
transfer-candidate norms, unitarity drift, and the final success
probability. Strategies whose marginal on every branch is a measured
classical computation set classical=True; the verification layer asserts
strictly more for those.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from pqpow.recording import Domain, QuantumSystem, State

X_GATE = np.array([[0.0, 1.0], [1.0, 0.0]])
H_GATE = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


@dataclass
class StrategyRun:
    """Trajectory record of one strategy execution."""

    name: str
    classical: bool
    m: int
    out_k: int
    n_queries: int
    p: float
    success: float
    # a[k][i] = recorded-weight >= k mass before query i+1 (i = 0..N-1)
    # plus the final value at index N.
    a: dict[int, list[float]]
    # beta[k][i] = transfer-candidate norm before query i+1 (i = 0..N-1).
    beta: dict[int, list[float]]
    unitarity_err: float
    dual_gap: float


class Strategy:
    """Base class; subclasses fill in the hooks."""

    name = "strategy"
    classical = False

    def __init__(self, system: QuantumSystem, n_queries: int):
        if n_queries < 0:
            raise ValueError("query count must be nonnegative")
        self.system = system
        self.n_queries = n_queries

    def pre_query(self, state: State, i: int) -> None:  # pragma: no cover
        raise NotImplementedError

    def post_query(self, state: State, i: int) -> None:
        pass

    def finalize(self, state: State) -> None:
        pass


def _xor_constant_perm(system: QuantumSystem, x_xor: int = 0, z_xor: int = 0) -> np.ndarray:
    """Permutation XORing constants into the x and z registers."""
    cfg = system.config
    dim = cfg.adversary_dim
    b = np.arange(dim)
    z = b & (cfg.workspace - 1)
    y = (b >> cfg.w) & 1
    x = b >> (cfg.w + 1)
    return ((x ^ x_xor) << (cfg.w + 1)) | (y << cfg.w) | (z ^ z_xor)


def _basis_fields(system: QuantumSystem) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(x, y, z) value of every joint adversary basis index."""
    cfg = system.config
    b = np.arange(cfg.adversary_dim)
    return b >> (cfg.w + 1), (b >> cfg.w) & 1, b & (cfg.workspace - 1)


def _pack(system: QuantumSystem, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    cfg = system.config
    return (x << (cfg.w + 1)) | (y << cfg.w) | z


class ClassicalDistinctQueries(Strategy):
    """Measured classical search: query points 0..N-1, claim recorded ones.

    Each query prepares the response qubit in |->, so the phase query acts
    as a bit query; the answer is swapped into a scratch bit, which also
    returns the response qubit to |0>. The final step claims the first
    out_k points with answer one, padded with never-queried points (whose
    one-probability is an independent p), then with answered-zero points.

    Workspace layout: low out_k*m bits claim slots, next n_queries bits
    answer bits.
    """

    name = "classical-distinct"
    classical = True

    def __init__(self, system: QuantumSystem, n_queries: int):
        super().__init__(system, n_queries)
        cfg = system.config
        if n_queries > system.M:
            raise ValueError("distinct queries need n_queries <= number of points")
        if cfg.w < cfg.out_k * cfg.m + n_queries:
            raise ValueError(
                f"needs workspace {cfg.out_k * cfg.m + n_queries} bits, have {cfg.w}"
            )
        if cfg.out_k > system.M:
            raise ValueError("cannot claim more distinct points than exist")

    def _answer_bit(self, i: int) -> int:
        return self.system.config.out_k * self.system.config.m + i

    def pre_query(self, state: State, i: int) -> None:
        # Move x from its previous value to point i, then y: |0> -> |->.
        prev = i - 1 if i > 0 else 0
        if prev ^ i:
            self.system.apply_basis_permutation(
                state, _xor_constant_perm(self.system, x_xor=prev ^ i)
            )
        self.system.apply_bit_gate(state, X_GATE, "y")
        self.system.apply_bit_gate(state, H_GATE, "y")

    def post_query(self, state: State, i: int) -> None:
        # |-> / |+> back to y = f(x), then swap into the answer bit.
        self.system.apply_bit_gate(state, H_GATE, "y")
        self.system.apply_bit_gate(state, X_GATE, "y")
        x, y, z = _basis_fields(self.system)
        bit = self._answer_bit(i)
        zbit = (z >> bit) & 1
        new_z = z ^ ((zbit ^ y) << bit)
        new_y = zbit
        self.system.apply_basis_permutation(state, _pack(self.system, x, new_y, new_z))

    def claim_for_answers(self, answers: np.ndarray) -> np.ndarray:
        """Claimed points for each answer-bit pattern, shape (len, out_k).

        answers is an integer array of n_queries-bit patterns; bit j is the
        recorded answer for point j.
        """
        cfg = self.system.config
        n, M, out_k = self.n_queries, self.system.M, cfg.out_k
        rows = np.empty((len(answers), out_k), dtype=np.int64)
        for r, a in enumerate(answers):
            ones = [j for j in range(n) if (int(a) >> j) & 1]
            guesses = list(range(n, M))
            zeros = [j for j in range(n) if not (int(a) >> j) & 1]
            pool = ones + guesses + zeros
            rows[r] = pool[:out_k]
        return rows

    def finalize(self, state: State) -> None:
        cfg = self.system.config
        if cfg.out_k == 0:
            return
        x, y, z = _basis_fields(self.system)
        answers = (z >> (cfg.out_k * cfg.m)) & ((1 << self.n_queries) - 1)
        uniq, inverse = np.unique(answers, return_inverse=True)
        claims = self.claim_for_answers(uniq)[inverse]  # (dim, out_k)
        enc = np.zeros_like(z)
        for j in range(cfg.out_k):
            enc |= claims[:, j] << (j * cfg.m)
        # Claim slots are still |0>, so XOR writes the encoded claims.
        self.system.apply_basis_permutation(state, _pack(self.system, x, y, z ^ enc))


class GroverK1(Strategy):
    """Amplitude amplification toward the recorded ones, single claim.

    y is set to 1 once and stays there, so each query is a phase flip on
    the marked points; between queries the standard inversion about the
    uniform state runs on x. The final step copies x into the claim slot.
    Needs out_k = 1 and w >= m.
    """

    name = "grover-k1"
    classical = False

    def __init__(self, system: QuantumSystem, n_queries: int):
        super().__init__(system, n_queries)
        cfg = system.config
        if cfg.out_k != 1 or cfg.w < cfg.m:
            raise ValueError("needs out_k = 1 and w >= m")

    def _diffusion(self) -> np.ndarray:
        M = self.system.M
        d = 2.0 / M * np.ones((M, M)) - np.eye(M)
        eye_rest = np.eye(2 * self.system.config.workspace)
        return np.kron(d, eye_rest)

    def pre_query(self, state: State, i: int) -> None:
        if i == 0:
            self.system.apply_bit_gate(state, X_GATE, "y")
            for bit in range(self.system.config.m):
                self.system.apply_bit_gate(state, H_GATE, "x", bit=bit)
        else:
            self.system.apply_adversary_unitary(state, self._diffusion())

    def finalize(self, state: State) -> None:
        x, y, z = _basis_fields(self.system)
        self.system.apply_basis_permutation(state, _pack(self.system, x, y, z ^ x))


class BareQueries(Strategy):
    """Phase-style probing: y pinned to 1, one query per point, no readout.

    At p = 1/2 two such queries drive the recorded weight to 2 with
    certainty, which is the standing counterexample to per-case transfer
    constants that hold for measured classical strategies. Claims point 0.
    """

    name = "bare-queries"
    classical = False

    def __init__(self, system: QuantumSystem, n_queries: int):
        super().__init__(system, n_queries)
        if n_queries > system.M:
            raise ValueError("needs n_queries <= number of points")

    def pre_query(self, state: State, i: int) -> None:
        if i == 0:
            self.system.apply_bit_gate(state, X_GATE, "y")
        else:
            self.system.apply_basis_permutation(
                state, _xor_constant_perm(self.system, x_xor=(i - 1) ^ i)
            )


class RandomCircuit(Strategy):
    """Seeded Haar-random unitaries between queries, single claim.

    All unitaries are drawn at construction time, so repeated executions of
    one instance (e.g. against each fixed function during the mixture
    check) replay the identical circuit.
    """

    name = "random-circuit"
    classical = False

    def __init__(self, system: QuantumSystem, n_queries: int, seed: int):
        super().__init__(system, n_queries)
        if system.config.out_k != 1:
            raise ValueError("needs out_k = 1")
        self.seed = seed
        rng = np.random.default_rng(seed)
        self._unitaries = [self._haar(rng) for _ in range(n_queries + 1)]

    def _haar(self, rng: np.random.Generator) -> np.ndarray:
        dim = self.system.config.adversary_dim
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        q, r = np.linalg.qr(g)
        return q * (np.diag(r) / np.abs(np.diag(r)))

    def pre_query(self, state: State, i: int) -> None:
        self.system.apply_adversary_unitary(state, self._unitaries[i], check=False)

    def finalize(self, state: State) -> None:
        self.system.apply_adversary_unitary(state, self._unitaries[-1], check=False)


def run_strategy(
    strategy: Strategy,
    k_values: tuple[int, ...] | None = None,
    cross_check: bool = True,
) -> StrategyRun:
    """Execute a strategy and record its full verification trajectory."""
    system = strategy.system
    cfg = system.config
    if k_values is None:
        k_values = tuple(range(1, min(strategy.n_queries, system.M) + 1)) or (1,)
    state = system.new_state(Domain.DUAL)
    a: dict[int, list[float]] = {k: [] for k in k_values}
    beta: dict[int, list[float]] = {k: [] for k in k_values}
    unit_err = 0.0
    dual_gap = 0.0

    def track_norm() -> None:
        nonlocal unit_err
        unit_err = max(unit_err, abs(1.0 - state.norm()))

    for i in range(strategy.n_queries):
        strategy.pre_query(state, i)
        track_norm()
        for k in k_values:
            a[k].append(system.progress(state, k))
            beta[k].append(system.transfer_candidate_norm(state, k))
        if cross_check:
            alt = state.copy()
            system.dual_query_via_conjugation(alt)
        system.dual_query(state)
        if cross_check:
            dual_gap = max(dual_gap, float(np.max(np.abs(state.psi - alt.psi))))
        track_norm()
        strategy.post_query(state, i)
        track_norm()
    strategy.finalize(state)
    track_norm()
    for k in k_values:
        a[k].append(system.progress(state, k))

    return StrategyRun(
        name=strategy.name,
        classical=strategy.classical,
        m=cfg.m,
        out_k=cfg.out_k,
        n_queries=strategy.n_queries,
        p=cfg.p,
        success=system.success_probability(state),
        a=a,
        beta=beta,
        unitarity_err=unit_err,
        dual_gap=dual_gap,
    )
