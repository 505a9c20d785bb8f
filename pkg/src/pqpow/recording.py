"""Dense-state simulator for superposed oracle queries with a recorded function.

The simulated system carries four registers:

  x : query input, M = 2**m basis values
  y : response qubit
  z : workspace, 2**w basis values (the low out_k * m bits hold the claimed
      points at measurement time, one m-bit point per claim slot)
  D : the recorded function, 2**M basis values; basis state D encodes the
      truth table f(v) = bit v of D

State vectors are complex128 arrays of shape (M, 2, 2**w, 2**M) and live in
one of two domains. In the standard domain the function register is
distributed as the product measure (each bit independently sqrt(1-p)|0> +
sqrt(p)|1>) and a query is the phase flip (-1)**(y * f(x)). In the dual
domain every function bit is rotated by the inverse of

  U_p = [[sqrt(1-p), -sqrt(p)],
         [sqrt(p),  sqrt(1-p)]]

so the fresh function register is |0...0> and the query acts on the single
function bit addressed by x (on the y = 1 slice) through the kernel

  K = U_p^T Z U_p = [[1 - 2p,              -2 sqrt(p(1-p))],
                     [-2 sqrt(p(1-p)),      2p - 1        ]]

which at p = 1/2 is exactly -X. The number of recorded ones (the Hamming
weight of D in the dual domain) is the progress measure the verification
layer tracks.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

UNITARY_TOL = 1e-10


class ResourceLimitError(RuntimeError):
    """The requested system exceeds the configured memory budget."""


class DomainError(ValueError):
    """An operation was applied to a state in the wrong domain."""


class Domain(enum.Enum):
    STANDARD = "standard"
    DUAL = "dual"


def rotation_matrix(p: float) -> np.ndarray:
    """The per-bit rotation U_p taking |0> to sqrt(1-p)|0> + sqrt(p)|1>."""
    sq, sp = math.sqrt(1.0 - p), math.sqrt(p)
    return np.array([[sq, -sp], [sp, sq]])


def dual_query_kernel(p: float) -> np.ndarray:
    """U_p^T Z U_p, the action of one query on the addressed function bit."""
    c, s = 1.0 - 2.0 * p, 2.0 * math.sqrt(p * (1.0 - p))
    return np.array([[c, -s], [-s, -c]])


@dataclass(frozen=True)
class SystemConfig:
    """Static shape of a simulated system.

    m      : input width in bits (M = 2**m query points)
    out_k  : number of claimed points in the final output (0 allowed)
    w      : workspace width in bits; claim slot j reads z bits
             [j*m, (j+1)*m), and slot bits beyond the workspace width read
             as zero, so a narrow workspace pins the high claim bits to 0
    p      : per-point one-probability of the recorded function
    max_entries : cap on total state-vector entries (default 2**24,
                  about 256 MB of complex128)
    """

    m: int
    out_k: int
    w: int
    p: float
    max_entries: int = 1 << 24

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError(f"input width m={self.m} must be >= 1")
        if self.out_k < 0:
            raise ValueError(f"claim count out_k={self.out_k} must be >= 0")
        if self.w < 0:
            raise ValueError(f"workspace width w={self.w} must be >= 0")
        if not (0.0 < self.p < 1.0):
            raise ValueError(f"one-probability p={self.p} outside (0, 1)")

    @property
    def M(self) -> int:
        return 1 << self.m

    @property
    def n_funcs(self) -> int:
        return 1 << self.M

    @property
    def workspace(self) -> int:
        return 1 << self.w

    @property
    def adversary_dim(self) -> int:
        """Joint dimension of the registers the adversary may touch."""
        return self.M * 2 * self.workspace

    @property
    def entries(self) -> int:
        return self.adversary_dim * self.n_funcs


@dataclass
class State:
    """A state vector tagged with the domain its function register uses."""

    system: "QuantumSystem"
    psi: np.ndarray
    domain: Domain

    def copy(self) -> "State":
        return State(self.system, self.psi.copy(), self.domain)

    def norm(self) -> float:
        return float(np.linalg.norm(self.psi))


class QuantumSystem:
    """Precomputed tables and operations for one system shape."""

    def __init__(self, config: SystemConfig):
        if config.entries > config.max_entries:
            raise ResourceLimitError(
                f"state vector needs {config.entries} entries, cap is "
                f"{config.max_entries}; shrink m/w or raise max_entries"
            )
        self.config = config
        self.M = config.M
        self.n_funcs = config.n_funcs
        self.p = config.p

    # ------------------------------------------------------------- tables

    @cached_property
    def bit_at(self) -> np.ndarray:
        """bit_at[v, D] = bit v of D, shape (M, 2**M), uint8."""
        d = np.arange(self.n_funcs, dtype=np.uint64)
        v = np.arange(self.M, dtype=np.uint64)
        return ((d[None, :] >> v[:, None]) & 1).astype(np.uint8)

    @cached_property
    def popcount(self) -> np.ndarray:
        """Number of recorded ones per function basis state, shape (2**M,)."""
        return self.bit_at.sum(axis=0).astype(np.int64)

    @cached_property
    def query_signs(self) -> np.ndarray:
        """(-1)**bit_at, shape (M, 2**M), float64."""
        return 1.0 - 2.0 * self.bit_at.astype(np.float64)

    @cached_property
    def _dbit_zero_index(self) -> np.ndarray:
        """For each bit v, the function indices with bit v = 0."""
        idx = np.arange(self.n_funcs)
        return np.stack([idx[self.bit_at[v] == 0] for v in range(self.M)])

    @cached_property
    def claim_points(self) -> np.ndarray:
        """claim_points[z, j] = j-th claimed point encoded in z, (2**w, out_k)."""
        cfg = self.config
        z = np.arange(cfg.workspace, dtype=np.int64)
        cols = [
            (z >> (j * cfg.m)) & (self.M - 1) for j in range(cfg.out_k)
        ]
        if not cols:
            return np.empty((cfg.workspace, 0), dtype=np.int64)
        return np.stack(cols, axis=1)

    @cached_property
    def claims_distinct(self) -> np.ndarray:
        """Whether the claim slots of z name pairwise distinct points."""
        pts = self.claim_points
        k = pts.shape[1]
        if k <= 1:
            return np.ones(self.config.workspace, dtype=bool)
        srt = np.sort(pts, axis=1)
        return np.all(srt[:, 1:] != srt[:, :-1], axis=1)

    @cached_property
    def success_mask(self) -> np.ndarray:
        """(z, D) pairs where the claims are distinct and all recorded one."""
        mask = np.ones((self.config.workspace, self.n_funcs), dtype=bool)
        for j in range(self.config.out_k):
            mask &= self.bit_at[self.claim_points[:, j], :].astype(bool)
        return mask & self.claims_distinct[:, None]

    # ------------------------------------------------------------- states

    def new_state(self, domain: Domain = Domain.DUAL) -> State:
        """Fresh system: x = y = z = 0, no recorded ones."""
        cfg = self.config
        psi = np.zeros((self.M, 2, cfg.workspace, self.n_funcs), dtype=np.complex128)
        psi[0, 0, 0, 0] = 1.0
        state = State(self, psi, Domain.DUAL)
        if domain is Domain.STANDARD:
            self.to_standard(state)
        return state

    def random_state(self, rng: np.random.Generator, domain: Domain = Domain.DUAL) -> State:
        """Haar-ish random unit vector, for property tests."""
        shape = (self.M, 2, self.config.workspace, self.n_funcs)
        psi = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        psi /= np.linalg.norm(psi)
        return State(self, psi, domain)

    # ----------------------------------------------------- domain changes

    def _rotate_function_bit(self, psi: np.ndarray, v: int, mat: np.ndarray) -> None:
        """Apply a 2x2 matrix to function bit v across all leading axes."""
        i0 = self._dbit_zero_index[v]
        i1 = i0 | (1 << v)
        a = psi[..., i0]
        b = psi[..., i1]
        psi[..., i0] = mat[0, 0] * a + mat[0, 1] * b
        psi[..., i1] = mat[1, 0] * a + mat[1, 1] * b

    def to_standard(self, state: State) -> State:
        """Rotate every function bit by U_p (in place)."""
        if state.domain is Domain.STANDARD:
            return state
        u = rotation_matrix(self.p)
        for v in range(self.M):
            self._rotate_function_bit(state.psi, v, u)
        state.domain = Domain.STANDARD
        return state

    def to_dual(self, state: State) -> State:
        """Rotate every function bit by U_p^T (in place)."""
        if state.domain is Domain.DUAL:
            return state
        u = rotation_matrix(self.p).T
        for v in range(self.M):
            self._rotate_function_bit(state.psi, v, u)
        state.domain = Domain.DUAL
        return state

    # ------------------------------------------------------------ queries

    def std_query(self, state: State) -> State:
        """Phase flip (-1)**(y * f(x)) in the standard domain (in place)."""
        if state.domain is not Domain.STANDARD:
            raise DomainError("standard query needs a standard-domain state")
        state.psi[:, 1, :, :] *= self.query_signs[:, None, :]
        return state

    def dual_query(self, state: State) -> State:
        """One query in the dual domain: kernel K on the addressed bit.

        For each input value v the y = 1 slice gets K applied to function
        bit v; the y = 0 slice is untouched.
        """
        if state.domain is not Domain.DUAL:
            raise DomainError("dual query needs a dual-domain state")
        k = dual_query_kernel(self.p)
        for v in range(self.M):
            self._rotate_function_bit(state.psi[v, 1], v, k)
        return state

    def dual_query_via_conjugation(self, state: State) -> State:
        """Cross-check path: rotate out, phase-flip, rotate back (in place)."""
        if state.domain is not Domain.DUAL:
            raise DomainError("dual query needs a dual-domain state")
        self.to_standard(state)
        self.std_query(state)
        self.to_dual(state)
        return state

    # ------------------------------------------- adversary register moves

    def apply_adversary_unitary(
        self, state: State, u: np.ndarray, check: bool = True, tol: float = UNITARY_TOL
    ) -> State:
        """Apply a dense unitary on the joint (x, y, z) registers (in place).

        The function register is untouched, so this is domain-agnostic.
        """
        dim = self.config.adversary_dim
        if u.shape != (dim, dim):
            raise ValueError(f"adversary unitary must be {dim}x{dim}, got {u.shape}")
        if check:
            err = float(np.max(np.abs(u.conj().T @ u - np.eye(dim))))
            if err > tol:
                raise ValueError(f"matrix is not unitary: max |U*U - I| = {err:.3e}")
        flat = state.psi.reshape(dim, -1)
        flat[:] = u @ flat
        return state

    def apply_bit_gate(self, state: State, gate: np.ndarray, register: str, bit: int = 0) -> State:
        """Apply a 2x2 gate to one bit of x, y, or z (in place).

        register is "x", "y", or "z"; bit indexes the bit inside the x or z
        value (ignored for y). The 2x2 gate is checked for unitarity.
        """
        if gate.shape != (2, 2):
            raise ValueError("bit gate must be 2x2")
        err = float(np.max(np.abs(gate.conj().T @ gate - np.eye(2))))
        if err > UNITARY_TOL:
            raise ValueError(f"gate is not unitary: max |G*G - I| = {err:.3e}")
        axis = {"x": 0, "y": 1, "z": 2}.get(register)
        if axis is None:
            raise ValueError(f"unknown register {register!r}")
        width = {"x": self.config.m, "y": 1, "z": self.config.w}[register]
        if not (0 <= bit < width):
            raise ValueError(f"bit {bit} outside register {register} of width {width}")
        moved = np.moveaxis(state.psi, axis, 0)
        vals = np.arange(moved.shape[0])
        i0 = vals[(vals >> bit) & 1 == 0]
        i1 = i0 | (1 << bit)
        a = moved[i0]
        b = moved[i1]
        moved[i0] = gate[0, 0] * a + gate[0, 1] * b
        moved[i1] = gate[1, 0] * a + gate[1, 1] * b
        return state

    def apply_basis_permutation(self, state: State, perm: np.ndarray) -> State:
        """Apply a classical reversible map on the joint (x, y, z) basis.

        perm[b] is the image of basis index b, where b enumerates (x, y, z)
        in C order, i.e. b = (x * 2 + y) * 2**w + z. Raises if perm is not
        a bijection.
        """
        dim = self.config.adversary_dim
        perm = np.asarray(perm, dtype=np.int64)
        if perm.shape != (dim,):
            raise ValueError(f"permutation must have length {dim}")
        if not np.array_equal(np.sort(perm), np.arange(dim)):
            raise ValueError("permutation is not a bijection")
        flat = state.psi.reshape(dim, -1)
        out = np.empty_like(flat)
        out[perm] = flat
        flat[:] = out
        return state

    # --------------------------------------------------------- measuring

    def _weight_mask(self, k: int, mode: str) -> np.ndarray:
        if mode == "eq":
            return self.popcount == k
        if mode == "ge":
            return self.popcount >= k
        if mode == "le":
            return self.popcount <= k
        raise ValueError(f"unknown weight mode {mode!r}")

    def weight_norm(self, state: State, k: int, mode: str = "ge") -> float:
        """Norm of the component whose recorded-ones count satisfies mode k.

        Only meaningful in the dual domain, where the function register's
        Hamming weight counts recorded ones.
        """
        if state.domain is not Domain.DUAL:
            raise DomainError("recorded-ones weight lives in the dual domain")
        mask = self._weight_mask(k, mode)
        sq = np.sum(np.abs(state.psi[..., mask]) ** 2)
        return float(math.sqrt(sq))

    def progress(self, state: State, k: int) -> float:
        """Norm of the recorded-weight >= k component (the progress measure)."""
        return self.weight_norm(state, k, mode="ge")

    def weight_project(self, state: State, k: int, mode: str = "eq") -> State:
        """A copy of the state with only the selected weight classes kept."""
        if state.domain is not Domain.DUAL:
            raise DomainError("recorded-ones weight lives in the dual domain")
        out = state.copy()
        out.psi[..., ~self._weight_mask(k, mode)] = 0.0
        return out

    def transfer_candidate_norm(self, state: State, k: int) -> float:
        """Norm of the mass a query can promote from weight k-1 to weight k.

        That is the component with recorded weight exactly k - 1, response
        qubit y = 1, and the addressed function bit still unrecorded
        (bit x of D = 0). One dual query moves at most
        2 sqrt(p(1-p)) times this norm into weight >= k.
        """
        if state.domain is not Domain.DUAL:
            raise DomainError("recorded-ones weight lives in the dual domain")
        weight_ok = self.popcount == k - 1
        # mask[v, D]: weight k-1 and bit v of D unset
        mask = weight_ok[None, :] & (self.bit_at == 0)
        sq = 0.0
        for v in range(self.M):
            slice_v = state.psi[v, 1][:, mask[v]]
            sq += float(np.sum(np.abs(slice_v) ** 2))
        return float(math.sqrt(sq))

    def project_slot_pattern(self, state: State, slots: tuple[int, ...], bits: tuple[int, ...]) -> State:
        """A copy keeping only function states matching bits on the slots.

        slots are function positions, bits the required values (0/1).
        Domain-agnostic: it projects the function register's computational
        basis in whichever domain the state is in.
        """
        if len(slots) != len(bits):
            raise ValueError("slots and bits must have equal length")
        if len(set(slots)) != len(slots):
            raise ValueError("slots must be distinct")
        mask = np.ones(self.n_funcs, dtype=bool)
        for slot, b in zip(slots, bits):
            if not (0 <= slot < self.M):
                raise ValueError(f"slot {slot} outside [0, {self.M})")
            mask &= self.bit_at[slot] == b
        out = state.copy()
        out.psi[..., ~mask] = 0.0
        return out

    def slot_pattern_norm(self, state: State, slots: tuple[int, ...], bits: tuple[int, ...]) -> float:
        """Norm of the component matching the given slot pattern."""
        return self.project_slot_pattern(state, slots, bits).norm()

    def success_probability(self, state: State) -> float:
        """Probability that the claimed points are distinct and all map to one.

        Measured in the standard domain (the true function distribution);
        the input state is not modified. With out_k = 0 there is nothing to
        claim and the probability is the total squared norm.
        """
        work = state.copy()
        self.to_standard(work)
        if self.config.out_k == 0:
            return float(np.sum(np.abs(work.psi) ** 2))
        sq = np.sum(np.abs(work.psi) ** 2, axis=(0, 1))  # (z, D)
        return float(np.sum(sq[self.success_mask]))


def new_system(m: int, out_k: int, w: int, p: float, max_entries: int = 1 << 24) -> QuantumSystem:
    """Build a QuantumSystem from scalar parameters."""
    return QuantumSystem(SystemConfig(m=m, out_k=out_k, w=w, p=p, max_entries=max_entries))
