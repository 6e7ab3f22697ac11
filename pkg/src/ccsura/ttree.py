"""
Tree outer code with a list decoder that tolerates up to t uncovered slots.

Messages are k-bit integers split MSB-first into chunks u_1..u_L of sizes
b_1..b_L.  Slot i carries the c-bit symbol

    X_i = sum_{j <= i} u_j G_{j,i}   (over GF(2))

so X_1..X_i depend only on u_1..u_i.  The symbol map is the identity on c-bit
integers, the first bit of a chunk being its MSB.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Set, Tuple

import numpy as np


@dataclass(frozen=True, eq=False)
class TreeCodeSpec:
    """Bit allocation plus the blocks G_{j,i} (b_j x c, uint8) for j <= i."""

    bit_allocation: Tuple[int, ...]
    c: int
    blocks: Dict[Tuple[int, int], np.ndarray] = field(repr=False)
    seed: Optional[int] = None

    def __post_init__(self):
        alloc = tuple(int(b) for b in self.bit_allocation)
        object.__setattr__(self, "bit_allocation", alloc)
        if any(b < 0 for b in alloc) or not alloc:
            raise ValueError("bit allocation must be a nonempty list of nonnegative sizes")
        L = len(alloc)
        for j in range(L):
            for i in range(L):
                blk = self.blocks.get((j, i))
                if i < j:
                    if blk is not None:
                        raise ValueError(f"block ({j}, {i}) below the diagonal")
                elif blk is None or blk.shape != (alloc[j], self.c):
                    raise ValueError(f"block ({j}, {i}) missing or misshaped")
        # tables[(j, i)][v] = chunk value v times G_{j,i}, as a c-bit integer
        weights = 1 << np.arange(self.c - 1, -1, -1)
        tables = {}
        for (j, i), blk in self.blocks.items():
            rows = blk.astype(np.int64) @ weights
            b = alloc[j]
            vals = np.arange(1 << b)
            tab = np.zeros(1 << b, dtype=np.int64)
            for r in range(b):
                bit = (vals >> (b - 1 - r)) & 1
                tab ^= np.where(bit == 1, rows[r], 0)
            tables[(j, i)] = tab
        object.__setattr__(self, "_tables", tables)

    @property
    def L(self) -> int:
        return len(self.bit_allocation)

    @property
    def k(self) -> int:
        return sum(self.bit_allocation)

    @property
    def Q(self) -> int:
        return 1 << self.c

    def table(self, j: int, i: int) -> np.ndarray:
        return self._tables[(j, i)]

    def generator_matrix(self) -> np.ndarray:
        """Full k x (L c) binary generator with zero blocks below the diagonal."""
        L, c = self.L, self.c
        G = np.zeros((self.k, L * c), dtype=np.uint8)
        offs = np.concatenate([[0], np.cumsum(self.bit_allocation)])
        for (j, i), blk in self.blocks.items():
            G[offs[j]:offs[j + 1], i * c:(i + 1) * c] = blk
        return G

    def chunks(self, u: int) -> List[int]:
        if not 0 <= u < (1 << self.k):
            raise ValueError(f"message must be a {self.k}-bit integer")
        out = []
        shift = self.k
        for b in self.bit_allocation:
            shift -= b
            out.append((u >> shift) & ((1 << b) - 1))
        return out

    def to_bytes(self) -> bytes:
        """Header (L, c, allocation as little-endian uint16) then block bits row-major, j outer."""
        head = struct.pack(f"<HH{self.L}H", self.L, self.c, *self.bit_allocation)
        bits = [self.blocks[(j, i)].reshape(-1)
                for j in range(self.L) for i in range(j, self.L)]
        flat = np.concatenate(bits) if bits else np.zeros(0, np.uint8)
        return head + np.packbits(flat).tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "TreeCodeSpec":
        L, c = struct.unpack_from("<HH", data)
        alloc = struct.unpack_from(f"<{L}H", data, 4)
        off = 4 + 2 * L
        n_bits = sum(alloc[j] * c * (L - j) for j in range(L))
        flat = np.unpackbits(np.frombuffer(data[off:], dtype=np.uint8))[:n_bits]
        blocks = {}
        pos = 0
        for j in range(L):
            for i in range(j, L):
                n = alloc[j] * c
                blocks[(j, i)] = flat[pos:pos + n].reshape(alloc[j], c).copy()
                pos += n
        return cls(tuple(alloc), c, blocks)


def build_generator(bit_allocation: Sequence[int], c: int, seed: int) -> TreeCodeSpec:
    """Random code from the ensemble: every admissible block entry i.i.d. fair bit."""
    rng = np.random.default_rng([int(seed), 0x7EE])
    alloc = tuple(int(b) for b in bit_allocation)
    L = len(alloc)
    blocks = {}
    for j in range(L):
        for i in range(j, L):
            blocks[(j, i)] = rng.integers(0, 2, size=(alloc[j], c), dtype=np.uint8)
    return TreeCodeSpec(alloc, c, blocks, seed)


def encode(spec: TreeCodeSpec, u: int) -> List[int]:
    """Outer codeword (L symbols in [0, 2^c)) of the k-bit message u."""
    ch = spec.chunks(u)
    out = []
    for i in range(spec.L):
        x = 0
        for j in range(i + 1):
            x ^= int(spec.table(j, i)[ch[j]])
        out.append(x)
    return out


def encode_many(spec: TreeCodeSpec, messages: Sequence[int]) -> np.ndarray:
    """Vectorised ``encode`` for an array of messages; returns shape (N, L)."""
    msgs = np.asarray(messages, dtype=object)
    L = spec.L
    shift = spec.k
    chunks = []
    for b in spec.bit_allocation:
        shift -= b
        chunks.append(np.array([(int(u) >> shift) & ((1 << b) - 1) for u in msgs], dtype=np.int64))
    out = np.zeros((len(msgs), L), dtype=np.int64)
    for i in range(L):
        for j in range(i + 1):
            out[:, i] ^= spec.table(j, i)[chunks[j]]
    return out


class DecodeResult(NamedTuple):
    messages: Set[int]
    overflow: bool
    path_counts: List[int]


def decode(spec: TreeCodeSpec, y: Sequence, t: int,
           path_cap: Optional[int] = None) -> DecodeResult:
    """Sequential list decoding: keep every prefix with at most t uncovered slots.

    Without ``path_cap`` the output is exactly the set of messages whose
    codeword has list-cover distance <= t.  With a cap, each level keeps the
    ``path_cap`` survivors of least distance (ties: smaller prefix value) and
    ``overflow`` reports that pruning happened.  ``path_counts`` holds the
    survivor count after each level, before pruning.
    """
    L, Q = spec.L, spec.Q
    if len(y) != L:
        raise ValueError(f"expected {L} slot lists, got {len(y)}")
    if path_cap is not None and path_cap < 1:
        raise ValueError("path_cap must be >= 1")
    member = np.zeros((L, Q), dtype=bool)
    for i, yi in enumerate(y):
        idx = np.fromiter((int(s) for s in yi), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= Q):
            raise ValueError(f"slot {i} holds symbols outside [0, {Q})")
        member[i, idx] = True

    # survivors: prefix value, distance, partial parities for slots l..L-1
    prefix = np.zeros(1, dtype=np.int64 if spec.k < 63 else object)
    dist = np.zeros(1, dtype=np.int64)
    parity = np.zeros((1, L), dtype=np.int64)
    overflow = False
    counts = []
    for l in range(L):
        b = spec.bit_allocation[l]
        ext = np.arange(1 << b, dtype=np.int64)
        sym = parity[:, l][:, None] ^ spec.table(l, l)[ext][None, :]
        d = dist[:, None] + (~member[l, sym]).astype(np.int64)
        keep_s, keep_e = np.nonzero(d <= t)
        dist = d[keep_s, keep_e]
        prefix = prefix[keep_s] * (1 << b) + ext[keep_e]
        new_par = parity[keep_s].copy()
        for i in range(l + 1, L):
            new_par[:, i] ^= spec.table(l, i)[ext[keep_e]]
        parity = new_par
        counts.append(int(dist.size))
        if path_cap is not None and dist.size > path_cap:
            overflow = True
            if prefix.dtype == object:
                order = sorted(range(dist.size), key=lambda s: (dist[s], prefix[s]))[:path_cap]
                order = np.asarray(order, dtype=np.int64)
            else:
                order = np.lexsort((prefix, dist))[:path_cap]
            dist, prefix, parity = dist[order], prefix[order], parity[order]
        if dist.size == 0:
            counts.extend([0] * (L - l - 1))
            break
    return DecodeResult({int(p) for p in prefix}, overflow, counts)
