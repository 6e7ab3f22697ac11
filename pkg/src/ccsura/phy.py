"""
Inner slot code: random spherical codebook, fading/AWGN multiple-access slot
channel, OMP list decoding and ROC estimation.

Noise is unit-variance circularly symmetric complex Gaussian per dimension,
so SNR is set purely through the per-symbol power P.  Energy per bit relates
to P through E_b/N_0 = P n / k.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

CHANNELS = ("rayleigh", "awgn")
# Relative norm below which a newly selected column is treated as lying in
# the span of the previous selections.
OMP_RANK_TOL = 1e-10
ROC_BATCH = 64


def power_from_ebno(ebno_db: float, k: int, n: int) -> float:
    return 10.0 ** (ebno_db / 10.0) * k / n


def ebno_from_power(P: float, k: int, n: int) -> float:
    return 10.0 * math.log10(P * n / k)


def trial_rng(seed: int, *counter: int) -> np.random.Generator:
    """Independent stream for one trial, derived from the master seed and a counter."""
    return np.random.default_rng([int(seed), *map(int, counter)])


@dataclass(frozen=True, eq=False)
class InnerCodebook:
    n_1: int
    Q: int
    P: float
    seed: int
    columns: np.ndarray = field(repr=False)

    @property
    def hermitian(self) -> np.ndarray:
        return self._hermitian

    def __post_init__(self):
        object.__setattr__(self, "_hermitian", np.ascontiguousarray(self.columns.conj().T))


def gen_codebook(n_1: int, Q: int, P: float, seed: int) -> InnerCodebook:
    """Q columns drawn uniformly on the complex sphere of squared radius n_1 * P."""
    if n_1 < 1 or Q < 2 or P <= 0:
        raise ValueError(f"invalid codebook parameters n_1={n_1}, Q={Q}, P={P}")
    rng = np.random.default_rng([int(seed), 0xC0DE])
    a = rng.standard_normal((n_1, Q)) + 1j * rng.standard_normal((n_1, Q))
    a *= np.sqrt(n_1 * P) / np.linalg.norm(a, axis=0)
    return InnerCodebook(n_1, Q, P, seed, a)


def draw_gains(K_a: int, channel: str, rng: np.random.Generator) -> np.ndarray:
    if channel == "rayleigh":
        return (rng.standard_normal(K_a) + 1j * rng.standard_normal(K_a)) / np.sqrt(2.0)
    if channel == "awgn":
        return np.ones(K_a, dtype=complex)
    raise ValueError(f"unknown channel {channel!r}, expected one of {CHANNELS}")


def transmit_slot(codebook: InnerCodebook, symbols: Sequence[int], channel: str,
                  rng: np.random.Generator, gains: Optional[np.ndarray] = None,
                  noise: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """One slot of the multiple-access channel.

    ``gains`` carries the quasi-static fading coefficients of the frame; when
    omitted they are drawn fresh.  Noise is drawn after the gains from the
    same stream.  Returns ``(y, gains)``.
    """
    symbols = np.asarray(symbols, dtype=np.int64)
    if symbols.size and (symbols.min() < 0 or symbols.max() >= codebook.Q):
        raise ValueError("symbol index outside codebook")
    if gains is None:
        gains = draw_gains(symbols.size, channel, rng)
    elif channel == "awgn":
        gains = np.ones(symbols.size, dtype=complex)
    y = codebook.columns[:, symbols] @ gains if symbols.size else np.zeros(codebook.n_1, complex)
    if noise:
        n = codebook.n_1
        y = y + (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    return y, gains


def omp_batch(codebook: InnerCodebook, Y: np.ndarray, K_0: int) -> np.ndarray:
    """OMP selection order for each column of ``Y`` (shape n_1 x B).

    The residual is kept orthogonal to the selected columns through an
    incrementally built orthonormal basis, which is the least-squares
    projection.  A selected column whose orthogonal part falls below
    ``OMP_RANK_TOL`` adds nothing to the basis, matching a pseudo-inverse
    solve on the rank-deficient selection.
    """
    if not 1 <= K_0 <= codebook.Q:
        raise ValueError(f"K_0 must be in [1, {codebook.Q}], got {K_0}")
    A, AH = codebook.columns, codebook.hermitian
    Y = np.asarray(Y, dtype=complex)
    if Y.ndim == 1:
        Y = Y[:, None]
    n, B = Y.shape
    R = Y.T.copy()                               # B x n residuals
    basis = np.zeros((B, n, K_0), dtype=complex)
    order = np.empty((B, K_0), dtype=np.int64)
    chosen = np.zeros((B, codebook.Q), dtype=bool)
    col_norm = math.sqrt(codebook.n_1 * codebook.P)
    rows = np.arange(B)
    for it in range(K_0):
        corr = np.abs(R @ AH.T)                  # B x Q
        corr[chosen] = -1.0
        j = np.argmax(corr, axis=1)
        order[:, it] = j
        chosen[rows, j] = True
        v = A[:, j].T.copy()                     # B x n
        if it:
            Qb = basis[:, :, :it]
            for _ in range(2):
                v -= np.einsum("bnk,bk->bn", Qb, np.einsum("bnk,bn->bk", Qb.conj(), v))
        nv = np.linalg.norm(v, axis=1)
        ok = nv > OMP_RANK_TOL * col_norm
        q = np.zeros_like(v)
        q[ok] = v[ok] / nv[ok, None]
        basis[:, :, it] = q
        R -= q * np.einsum("bn,bn->b", q.conj(), R)[:, None]
    return order


def omp_decode(codebook: InnerCodebook, y: np.ndarray, K_0: int) -> np.ndarray:
    """Ordered list of K_0 selected codeword indices."""
    return omp_batch(codebook, np.asarray(y).reshape(-1, 1), K_0)[0]


@dataclass
class RocTable:
    """Measured (K_0, p_m, p_f) operating points of the inner decoder."""

    K0: np.ndarray
    p_m: np.ndarray
    p_f: np.ndarray
    ebno_db: Optional[float] = None
    L: Optional[int] = None
    n_1: Optional[int] = None
    Q: Optional[int] = None
    K_a: Optional[int] = None
    channel: Optional[str] = None

    def __post_init__(self):
        self.K0 = np.asarray(self.K0, dtype=np.int64)
        self.p_m = np.asarray(self.p_m, dtype=float)
        self.p_f = np.asarray(self.p_f, dtype=float)
        if not (self.K0.shape == self.p_m.shape == self.p_f.shape):
            raise ValueError("ROC columns must have equal length")

    def is_monotone(self) -> bool:
        o = np.argsort(self.K0)
        return bool(np.all(np.diff(self.p_m[o]) <= 0) and np.all(np.diff(self.p_f[o]) >= 0))

    def rows(self):
        return zip(self.K0.tolist(), self.p_m.tolist(), self.p_f.tolist())


def _roc_counts(codebook: InnerCodebook, K_a: int, channel: str, K_0_max: int,
                seed: int, trial_ids: Sequence[int]):
    """Miss/false counters over the given trials for every K_0 <= K_0_max."""
    Q, n = codebook.Q, codebook.n_1
    misses = np.zeros(K_0_max, dtype=np.int64)
    falses = np.zeros(K_0_max, dtype=np.int64)
    n_tx = n_other = 0
    trial_ids = list(trial_ids)
    for s in range(0, len(trial_ids), ROC_BATCH):
        ids = trial_ids[s:s + ROC_BATCH]
        Y = np.empty((n, len(ids)), dtype=complex)
        sets = []
        for b, tid in enumerate(ids):
            rng = trial_rng(seed, tid)
            sym = rng.integers(0, Q, size=K_a)
            Y[:, b], _ = transmit_slot(codebook, sym, channel, rng)
            sets.append(np.unique(sym))
        order = omp_batch(codebook, Y, K_0_max)
        for b, tx in enumerate(sets):
            is_tx = np.zeros(Q, dtype=bool)
            is_tx[tx] = True
            hits = np.cumsum(is_tx[order[b]])
            misses += tx.size - hits
            falses += np.arange(1, K_0_max + 1) - hits
            n_tx += tx.size
            n_other += Q - tx.size
    return misses, falses, n_tx, n_other


def estimate_roc(n_1: int, Q: int, P: float, K_a: int, channel: str, K_0_max: int,
                 trials: int, seed: int, ebno_db: Optional[float] = None,
                 L: Optional[int] = None, workers: int = 1) -> RocTable:
    """ROC of OMP list decoding from a single sequential decode per trial.

    p_m is the fraction of distinct transmitted symbols missing from the
    first K_0 selections; p_f the fraction of non-transmitted symbols
    present.  Results depend only on ``seed``, not on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}")
    cb = gen_codebook(n_1, Q, P, seed)
    batches = [range(s, min(s + ROC_BATCH, trials)) for s in range(0, trials, ROC_BATCH)]
    if workers > 1:
        # whole batches per worker keep every computation identical to the serial run
        shares = [[t for b in batches[w::workers] for t in b] for w in range(workers)]
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_roc_counts, [cb] * workers, [K_a] * workers,
                                [channel] * workers, [K_0_max] * workers,
                                [seed] * workers, shares))
    else:
        parts = [_roc_counts(cb, K_a, channel, K_0_max, seed, range(trials))]
    misses = sum(p[0] for p in parts)
    falses = sum(p[1] for p in parts)
    n_tx = sum(p[2] for p in parts)
    n_other = sum(p[3] for p in parts)
    K0 = np.arange(1, K_0_max + 1)
    p_m = misses / n_tx
    p_f = falses / n_other if n_other else np.ones(K_0_max)
    return RocTable(K0, p_m, p_f, ebno_db=ebno_db, L=L, n_1=n_1, Q=Q, K_a=K_a, channel=channel)
