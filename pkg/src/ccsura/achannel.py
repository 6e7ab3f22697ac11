"""
Outer channel seen by the list-recoverable code.

Each slot first passes through the A-channel (the receiver learns the set of
transmitted symbols, not their multiplicities), then every element of the
alphabet is independently dropped (if present) or inserted (if absent).
Symbols are 0-based integers ``0..Q-1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Sequence

import numpy as np

SlotSymbolSet = FrozenSet[int]
ReceivedLists = List[SlotSymbolSet]

# Above this alphabet size insertions are drawn as a binomial count.
EXACT_NOISE_MAX_Q = 1 << 16


@dataclass(frozen=True)
class OuterChannelParams:
    Q: int
    K_a: int
    p_m: float
    p_f: float

    def __post_init__(self):
        if self.Q < 2:
            raise ValueError(f"Q must be >= 2, got {self.Q}")
        if self.K_a < 1:
            raise ValueError(f"K_a must be >= 1, got {self.K_a}")
        for name in ("p_m", "p_f"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")


def a_channel_union(transmitted: Iterable[int], Q: int) -> SlotSymbolSet:
    """Set of distinct transmitted symbols."""
    out = frozenset(int(x) for x in transmitted)
    bad = [x for x in out if not 0 <= x < Q]
    if bad:
        raise ValueError(f"symbols {sorted(bad)} outside alphabet [0, {Q})")
    return out


def apply_symbol_noise(ya: Iterable[int], params: OuterChannelParams,
                       rng: np.random.Generator) -> SlotSymbolSet:
    """Drop each member with probability p_m, insert each non-member with probability p_f."""
    Q = params.Q
    ya = a_channel_union(ya, Q)
    members = np.fromiter(sorted(ya), dtype=np.int64, count=len(ya))
    kept = members[rng.random(members.size) >= params.p_m]
    if params.p_f == 0.0:
        return frozenset(kept.tolist())
    if Q <= EXACT_NOISE_MAX_Q:
        inserted = rng.random(Q) < params.p_f
        inserted[members] = False
        extra = np.flatnonzero(inserted)
    else:
        n_extra = rng.binomial(Q - members.size, params.p_f)
        extra_set = set()
        while len(extra_set) < n_extra:
            for x in rng.integers(0, Q, size=n_extra - len(extra_set)).tolist():
                if x not in ya:
                    extra_set.add(x)
        extra = np.fromiter(extra_set, dtype=np.int64)
    return frozenset(kept.tolist()) | frozenset(extra.tolist())


def list_cover_distance(y: Sequence[Iterable[int]], x: Sequence[int]) -> int:
    """Number of positions i with x[i] not in y[i]."""
    if len(y) != len(x):
        raise ValueError(f"codeword length {len(x)} does not match {len(y)} slots")
    return sum(1 for yi, xi in zip(y, x) if xi not in yi)


def mu_r(Q: int, r: int, p_m: float, p_f: float) -> float:
    """Probability that a fixed symbol independent of the r transmitted ones is in the output list."""
    if r < 1:
        raise ValueError("r must be >= 1")
    miss_all = math.exp(r * math.log1p(-1.0 / Q))
    mu = (1.0 - miss_all) * (1.0 - p_m) + miss_all * p_f
    return min(1.0, max(0.0, mu))


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def capacity_estimate(params: OuterChannelParams) -> float:
    """Uniform-input mutual information estimate in bits per outer symbol.

    Uses H(Y) <= Q h(mu_{K_a}); the result can therefore be negative and is
    returned unclipped.
    """
    Q, K_a = params.Q, params.K_a
    miss_all = math.exp(K_a * math.log1p(-1.0 / Q))
    h_y = Q * binary_entropy(mu_r(Q, K_a, params.p_m, params.p_f))
    h_y_given_x = (Q * (1.0 - miss_all) * binary_entropy(params.p_m)
                   + Q * miss_all * binary_entropy(params.p_f))
    return h_y - h_y_given_x
