"""Blockchain data structures and honest-party mining logic.

Blocks are triples ``(s, x, ctr)`` linked by hashes: a block's link value
``s`` must equal the link hash of its predecessor, and a block carries
proof of work when its own link hash falls below the difficulty target
``T``. Two hash roles are involved: an inner body hash over ``s || x``
and an outer link hash over ``ctr || body``. Both are realized as keyed,
personalized BLAKE2b so that entire executions are replayable bit-exactly
from a single 64-bit seed.

Byte layout (fixed so link hashes are reproducible across platforms):

* body preimage: ``s`` as ``kappa/8`` big-endian bytes, then the raw
  payload bytes ``x``;
* link preimage: ``ctr`` as 8 big-endian bytes, then the body hash as
  ``kappa/8`` big-endian bytes.

The genesis convention is ``s = 0``; an empty chain's head hash is 0.

Chains are persistent singly linked structures sharing their prefixes,
so extending is O(1) and thousands of per-party copies per execution
cost nothing. Each node stores its head hash plus simulation-only
provenance (creator id and creation round) that is never hashed.

A *granted* set of block identities lets the execution layer model an
adversary whose block production is calibrated by proven query bounds
rather than by actually searching the hash space: a granted block is
treated as carrying proof of work regardless of its link hash.
"""
from __future__ import annotations

import functools
import hashlib
import json
import struct
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional

__all__ = [
    "BackboneError",
    "OracleParams",
    "params_from_probability",
    "oracle_eval",
    "Block",
    "Chain",
    "block_hash",
    "has_pow",
    "valid_block",
    "validate_chain",
    "select_chain",
    "HonestMineResult",
    "honest_round",
    "honest_payload",
    "chain_to_bytes",
    "chain_from_bytes",
    "chain_to_json",
]

_PERSON_LINK = b"pq-link-hash"
_PERSON_BODY = b"pq-body-hash"


class BackboneError(ValueError):
    """Invalid protocol parameters or malformed serialized data."""


@dataclass(frozen=True)
class OracleParams:
    """Hash-oracle and difficulty parameters for one execution.

    ``T`` is the integer difficulty target: a block carries proof of work
    when its link hash is strictly below ``T``, so a single query
    succeeds with probability exactly ``p = T / 2**kappa``. ``q`` is the
    number of hash queries an honest party may spend per round, and
    ``seed`` keys the oracle for the whole execution.
    """

    T: int
    kappa: int = 32
    q: int = 16
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kappa % 8 != 0 or not 8 <= self.kappa <= 512:
            raise BackboneError(
                f"kappa must be a multiple of 8 in [8, 512], got {self.kappa}"
            )
        if not isinstance(self.T, int) or not 0 < self.T <= 1 << self.kappa:
            raise BackboneError(f"T must be an integer in (0, 2^kappa], got {self.T}")
        if self.q < 1:
            raise BackboneError(f"q must be >= 1, got {self.q}")
        if not 0 <= self.seed < 1 << 64:
            raise BackboneError("seed must fit in 64 bits")

    @property
    def hash_bytes(self) -> int:
        return self.kappa // 8

    @property
    def p(self) -> float:
        """Exact per-query success probability ``T / 2**kappa``."""
        return self.T / (1 << self.kappa)


def params_from_probability(
    p: float, kappa: int = 32, q: int = 16, seed: int = 0
) -> OracleParams:
    """Build params whose integer target realizes ``p`` as closely as possible.

    The realized probability is ``params.p = round(p * 2**kappa) / 2**kappa``;
    callers comparing simulation output against closed forms must use the
    realized value, not the requested one.
    """
    if not 0.0 < p <= 1.0:
        raise BackboneError(f"p must be in (0, 1], got {p}")
    target = max(1, round(p * (1 << kappa)))
    return OracleParams(T=target, kappa=kappa, q=q, seed=seed)


@functools.lru_cache(maxsize=64)
def _hash_prototype(digest_size: int, seed: int, person: bytes):
    """A keyed, personalized hasher with no data yet.

    Key processing is the expensive part of constructing a keyed BLAKE2b;
    copying a cached prototype skips it while producing digests identical
    to a fresh construction.
    """
    return hashlib.blake2b(
        digest_size=digest_size, key=seed.to_bytes(8, "big"), person=person
    )


def oracle_eval(params: OracleParams, role: str, data: bytes) -> int:
    """Evaluate one hash role on raw bytes, returning a kappa-bit integer.

    Role ``"H"`` is the outer link hash, ``"G"`` the inner body hash; the
    two are domain-separated by BLAKE2b personalization and keyed with the
    execution seed (8 big-endian bytes).
    """
    if role == "H":
        person = _PERSON_LINK
    elif role == "G":
        person = _PERSON_BODY
    else:
        raise BackboneError(f"unknown oracle role {role!r}")
    hasher = _hash_prototype(params.kappa // 8, params.seed, person).copy()
    hasher.update(data)
    return int.from_bytes(hasher.digest(), "big")


@dataclass(frozen=True)
class Block:
    """One block: previous link hash ``s``, payload ``x``, nonce ``ctr``."""

    s: int
    x: bytes
    ctr: int

    @property
    def identity(self) -> tuple[int, bytes, int]:
        return (self.s, self.x, self.ctr)


def block_hash(params: OracleParams, block: Block) -> int:
    """Link hash of a block: H(ctr || G(s || x))."""
    body = oracle_eval(
        params, "G", block.s.to_bytes(params.hash_bytes, "big") + block.x
    )
    return oracle_eval(
        params,
        "H",
        struct.pack(">Q", block.ctr) + body.to_bytes(params.hash_bytes, "big"),
    )


def has_pow(params: OracleParams, block: Block) -> bool:
    return block_hash(params, block) < params.T


class Chain:
    """Persistent chain of blocks; extension shares the entire prefix.

    ``Chain.EMPTY`` is the canonical empty chain with head hash 0 (the
    genesis link value). ``creator`` and ``round`` are simulation
    metadata: honest creators are party indices >= 0, adversarial blocks
    use negative ids, and neither value enters any hash.
    """

    __slots__ = ("block", "parent", "length", "head_hash", "creator", "round")

    EMPTY: "Chain"

    def __init__(
        self,
        block: Optional[Block],
        parent: Optional["Chain"],
        head_hash: int,
        creator: Optional[int],
        round: Optional[int],
    ) -> None:
        self.block = block
        self.parent = parent
        self.length = 0 if parent is None else parent.length + 1
        self.head_hash = head_hash
        self.creator = creator
        self.round = round

    # -- construction ------------------------------------------------

    def extend_with_hash(
        self,
        block: Block,
        head_hash: int,
        creator: Optional[int] = None,
        round: Optional[int] = None,
    ) -> "Chain":
        """Append a block whose link hash the caller already computed."""
        return Chain(block, self, head_hash, creator, round)

    def extend(
        self,
        params: OracleParams,
        block: Block,
        creator: Optional[int] = None,
        round: Optional[int] = None,
    ) -> "Chain":
        return self.extend_with_hash(block, block_hash(params, block), creator, round)

    # -- structure ---------------------------------------------------

    def __len__(self) -> int:
        return self.length

    def __bool__(self) -> bool:
        return self.length > 0

    def nodes(self) -> Iterator["Chain"]:
        """Nodes from head back to the first block (excludes EMPTY)."""
        node = self
        while node.block is not None:
            yield node
            node = node.parent  # type: ignore[assignment]

    def blocks(self) -> list[Block]:
        """Blocks in chain order, first block to head."""
        out = [node.block for node in self.nodes()]
        out.reverse()
        return out  # type: ignore[return-value]

    def ancestor(self, steps: int) -> "Chain":
        """The node ``steps`` links back from the head (EMPTY if past the root)."""
        node = self
        for _ in range(min(steps, self.length)):
            node = node.parent  # type: ignore[assignment]
        return node

    def at(self, height: int) -> Block:
        """Block at 0-based height (0 = first block)."""
        if not 0 <= height < self.length:
            raise IndexError(f"height {height} out of range for length {self.length}")
        node = self.ancestor(self.length - 1 - height)
        assert node.block is not None
        return node.block

    def prune(self, k: int) -> "Chain":
        """Drop the ``k`` rightmost blocks; k >= length gives the empty chain."""
        if k <= 0:
            return self
        return self.ancestor(k) if k < self.length else Chain.EMPTY

    def is_prefix(self, other: "Chain") -> bool:
        """Exact sequence-prefix test (empty is a prefix of everything)."""
        if self.length > other.length:
            return False
        candidate = other.ancestor(other.length - self.length)
        if candidate is self:
            return True
        a, b = self, candidate
        while a.block is not None:
            if b is a:
                return True
            if b.block is None or a.block != b.block:
                return False
            a = a.parent  # type: ignore[assignment]
            b = b.parent  # type: ignore[assignment]
        return True


Chain.EMPTY = Chain(None, None, 0, None, None)


def valid_block(
    params: OracleParams,
    block: Block,
    prev_hash: int,
    granted: Optional[frozenset | set] = None,
) -> bool:
    """Check one block against its predecessor's link hash.

    Valid iff the link value matches, the nonce is within the per-round
    budget (0 <= ctr <= q; honest miners only use the first q values),
    and the block either carries real proof of work or appears in the
    granted-identity set.
    """
    if block.s != prev_hash or not 0 <= block.ctr <= params.q:
        return False
    if granted and block.identity in granted:
        return True
    return has_pow(params, block)


def validate_chain(
    params: OracleParams,
    chain: Chain,
    granted: Optional[frozenset | set] = None,
) -> bool:
    """Full structural validation; the empty chain is valid."""
    prev_hash = 0
    for block in chain.blocks():
        if not valid_block(params, block, prev_hash, granted):
            return False
        prev_hash = block_hash(params, block)
    return True


def select_chain(
    current: Chain,
    received: Iterable[Chain],
    validator: Optional[Callable[[Chain], bool]] = None,
) -> Chain:
    """Longest-chain rule with a stable tie-break.

    Returns the strictly longest candidate among ``current`` and the
    received chains; on ties the current chain is kept, and among
    equally long received chains the first in delivery order wins. A
    ``validator`` (when given) silently discards invalid candidates.
    """
    best = current
    for candidate in received:
        if candidate.length > best.length:
            if validator is None or validator(candidate):
                best = candidate
    return best


def honest_payload(round_index: int, party_id: int) -> bytes:
    """Default pass-through payload: round number || party id (u32 BE each)."""
    return struct.pack(">II", round_index, party_id)


@dataclass(frozen=True)
class HonestMineResult:
    chain: Optional[Chain]
    block: Optional[Block]
    queries_used: int


def honest_round(
    params: OracleParams,
    chain: Chain,
    round_index: int,
    party_id: int,
    payload: Optional[bytes] = None,
) -> HonestMineResult:
    """One honest party's mining attempt for one round.

    Tries nonces ctr = 0, 1, ..., q-1 against the adopted head and stops
    at the first success, so the per-round success probability is
    ``1 - (1 - p)**q`` over oracle seeds. On success the returned chain
    extends the input chain by the new block.
    """
    x = honest_payload(round_index, party_id) if payload is None else payload
    s = chain.head_hash
    width = params.kappa // 8
    seed = params.seed
    body_hasher = _hash_prototype(width, seed, _PERSON_BODY).copy()
    body_hasher.update(s.to_bytes(width, "big") + x)
    body_bytes = body_hasher.digest()
    link_proto = _hash_prototype(width, seed, _PERSON_LINK)
    target = params.T
    for ctr in range(params.q):
        link_hasher = link_proto.copy()
        link_hasher.update(struct.pack(">Q", ctr) + body_bytes)
        link = int.from_bytes(link_hasher.digest(), "big")
        if link < target:
            block = Block(s, x, ctr)
            new_chain = chain.extend_with_hash(block, link, party_id, round_index)
            return HonestMineResult(new_chain, block, ctr + 1)
    return HonestMineResult(None, None, params.q)


# ----------------------------------------------------------------- I/O


def chain_to_bytes(params: OracleParams, chain: Chain) -> bytes:
    """Length-prefixed binary form: hash width, block count, then blocks.

    Per block: ``s`` (hash-width BE) || payload length (u32 BE) ||
    payload || ``ctr`` (u64 BE). Provenance is metadata and not included.
    """
    width = params.hash_bytes
    parts = [struct.pack(">BI", width, chain.length)]
    for block in chain.blocks():
        parts.append(block.s.to_bytes(width, "big"))
        parts.append(struct.pack(">I", len(block.x)))
        parts.append(block.x)
        parts.append(struct.pack(">Q", block.ctr))
    return b"".join(parts)


def chain_from_bytes(params: OracleParams, data: bytes) -> Chain:
    """Parse the binary form and relink, recomputing every head hash."""
    try:
        width, count = struct.unpack_from(">BI", data, 0)
        if width != params.hash_bytes:
            raise BackboneError(
                f"hash width {width} does not match params ({params.hash_bytes})"
            )
        offset = 5
        chain = Chain.EMPTY
        for _ in range(count):
            s = int.from_bytes(data[offset : offset + width], "big")
            offset += width
            (x_len,) = struct.unpack_from(">I", data, offset)
            offset += 4
            x = data[offset : offset + x_len]
            if len(x) != x_len:
                raise BackboneError("truncated payload")
            offset += x_len
            (ctr,) = struct.unpack_from(">Q", data, offset)
            offset += 8
            chain = chain.extend(params, Block(s, x, ctr))
        if offset != len(data):
            raise BackboneError("trailing bytes after chain")
        return chain
    except struct.error as exc:
        raise BackboneError(f"truncated chain encoding: {exc}") from exc


def chain_to_json(chain: Chain) -> str:
    """JSON debug form including provenance metadata."""
    rows = []
    for node in reversed(list(chain.nodes())):
        block = node.block
        assert block is not None
        rows.append(
            {
                "s": block.s,
                "x": block.x.hex(),
                "ctr": block.ctr,
                "creator": node.creator,
                "round": node.round,
            }
        )
    return json.dumps({"length": chain.length, "blocks": rows}, sort_keys=True)
