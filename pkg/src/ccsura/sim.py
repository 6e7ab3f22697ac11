"""
End-to-end Monte Carlo of the concatenated scheme: outer encoding, slotted
inner channel with OMP list decoding (or the abstract symbol-noise channel),
outer list recovery, and PUPE / false-alarm accounting.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import csvio
from .achannel import OuterChannelParams, a_channel_union, apply_symbol_noise, list_cover_distance
from .phy import CHANNELS, InnerCodebook, draw_gains, gen_codebook, omp_batch, power_from_ebno, \
    transmit_slot, trial_rng
from .rs import CosetSchemeConfig, coset_decode, coset_encode
from .ttree import TreeCodeSpec, build_generator, decode as ttree_decode, encode_many

SCHEMES = ("ttree", "rs")
CHANNEL_KINDS = CHANNELS + ("abstract",)
Z95 = 1.959963984540054


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulated operating point.

    ``channel="abstract"`` replaces the slot channel and inner decoder by
    independent symbol misses (p_m) and insertions (p_f).  ``truncate``
    keeps at most K_a decoded messages, those of least list-cover distance.
    """

    K_a: int
    k: int
    n: int
    L: int
    Q: int
    ebno_db: float
    channel: str
    scheme: str
    K_0: int = 0
    trials: int = 100
    seed: int = 0
    code_seed: Optional[int] = None
    p_m: float = 0.0
    p_f: float = 0.0
    # tree code
    t: int = 0
    path_cap: Optional[int] = None
    bit_allocation: Optional[Tuple[int, ...]] = None
    # RS coset scheme
    x_p: int = 0
    h: int = 0
    k_O: int = 0
    m: int = 1
    carry_crc: bool = False
    truncate: bool = False

    def __post_init__(self):
        if self.channel not in CHANNEL_KINDS:
            raise ValueError(f"channel must be one of {CHANNEL_KINDS}, got {self.channel!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.K_a < 1 or self.k < 1 or self.L < 1 or self.trials < 1:
            raise ValueError("K_a, k, L and trials must be positive")
        if self.n % self.L:
            raise ValueError(f"frame length n={self.n} is not a multiple of L={self.L}")
        if self.Q < 2 or self.Q & (self.Q - 1):
            raise ValueError(f"Q must be a power of two, got {self.Q}")
        if self.channel != "abstract" and not 1 <= self.K_0 <= self.Q:
            raise ValueError(f"K_0 must lie in [1, Q], got {self.K_0}")
        if self.channel == "abstract":
            OuterChannelParams(self.Q, self.K_a, self.p_m, self.p_f)
        if self.scheme == "ttree":
            if self.bit_allocation is None:
                raise ValueError("tree scheme needs a bit_allocation")
            alloc = tuple(int(b) for b in self.bit_allocation)
            object.__setattr__(self, "bit_allocation", alloc)
            if len(alloc) != self.L or sum(alloc) != self.k:
                raise ValueError(f"bit_allocation must have L={self.L} entries summing to k={self.k}")
            if any(not 0 <= b <= self.c for b in alloc):
                raise ValueError(f"every allocation entry must lie in [0, {self.c}]")
            if self.t < 0:
                raise ValueError("t must be >= 0")
        else:
            self.coset_config()

    @property
    def c(self) -> int:
        return self.Q.bit_length() - 1

    @property
    def n_1(self) -> int:
        return self.n // self.L

    @property
    def P(self) -> float:
        """Per-symbol power; CRC bits charged but not sent lower the physical E_b/N_0."""
        corr = self.coset_config().energy_correction_db if self.scheme == "rs" else 0.0
        return power_from_ebno(self.ebno_db - corr, self.k, self.n)

    def coset_config(self) -> CosetSchemeConfig:
        return CosetSchemeConfig(self.Q, self.x_p, self.k, self.h, self.k_O, self.L,
                                 self.m, self.carry_crc)

    def effective_code_seed(self) -> int:
        return self.seed if self.code_seed is None else self.code_seed


@dataclass(eq=False)
class Scenario:
    """Codebooks built once per configuration."""

    config: ScenarioConfig
    tree: Optional[TreeCodeSpec] = None
    coset: Optional[CosetSchemeConfig] = None
    inner: Optional[InnerCodebook] = None

    @classmethod
    def build(cls, config: ScenarioConfig) -> "Scenario":
        s = cls(config)
        seed = config.effective_code_seed()
        if config.scheme == "ttree":
            s.tree = build_generator(config.bit_allocation, config.c, seed)
        else:
            s.coset = config.coset_config()
        if config.channel != "abstract":
            s.inner = gen_codebook(config.n_1, config.Q, config.P, seed)
        return s


class FrameOutcome(NamedTuple):
    missed: int
    false: List[int]
    overflow: bool


def _draw_message(rng: np.random.Generator, k: int) -> int:
    nb = (k + 7) // 8
    return int.from_bytes(rng.bytes(nb), "big") >> (8 * nb - k)


def _encode_all(sc: Scenario, msgs: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    if sc.tree is not None:
        return encode_many(sc.tree, msgs)
    return np.array([coset_encode(sc.coset, u, rng=rng) for u in msgs], dtype=np.int64)


def run_frame_trial(config: ScenarioConfig, rng: np.random.Generator,
                    scenario: Optional[Scenario] = None) -> FrameOutcome:
    """One frame: returns the number of users whose message is missing and the false messages."""
    sc = scenario or Scenario.build(config)
    msgs = [_draw_message(rng, config.k) for _ in range(config.K_a)]
    X = _encode_all(sc, msgs, rng)                       # K_a x L
    L = config.L
    if config.channel == "abstract":
        params = OuterChannelParams(config.Q, config.K_a, config.p_m, config.p_f)
        lists = [apply_symbol_noise(a_channel_union(X[:, l].tolist(), config.Q), params, rng)
                 for l in range(L)]
    else:
        gains = draw_gains(config.K_a, config.channel, rng)
        Y = np.empty((sc.inner.n_1, L), dtype=complex)
        for l in range(L):
            Y[:, l], _ = transmit_slot(sc.inner, X[:, l], config.channel, rng, gains=gains)
        order = omp_batch(sc.inner, Y, config.K_0)
        lists = [frozenset(order[l].tolist()) for l in range(L)]

    overflow = False
    if sc.tree is not None:
        res = ttree_decode(sc.tree, lists, config.t, config.path_cap)
        out, overflow = res.messages, res.overflow
    else:
        out = coset_decode(sc.coset, lists)
    if config.truncate and len(out) > config.K_a:
        out = _truncate(sc, out, lists, config.K_a)
    sent = set(msgs)
    missed = sum(1 for u in msgs if u not in out)
    return FrameOutcome(missed, sorted(u for u in out if u not in sent), overflow)


def _truncate(sc: Scenario, out, lists, K_a: int):
    ranked = []
    for u in sorted(out):
        if sc.tree is not None:
            x = encode_many(sc.tree, [u])[0].tolist()
            ranked.append((list_cover_distance(lists, x), u))
        else:
            # the prefix is unknown after decoding; score the best coset
            q = sc.coset.q
            best = min(list_cover_distance(lists, [p * q + s for s in _rs_symbols(sc.coset, u)])
                       for p in range(1 << sc.coset.x_p))
            ranked.append((best, u))
    ranked.sort()
    return {u for _, u in ranked[:K_a]}


def _rs_symbols(cfg: CosetSchemeConfig, u: int) -> List[int]:
    return coset_encode(cfg, u, p_u=0)


# rate estimation

@dataclass
class Counters:
    frames: int = 0
    users: int = 0
    missed: int = 0
    false_frames: int = 0
    false_total: int = 0
    false_sq: int = 0
    overflow_frames: int = 0

    def add(self, other: "Counters") -> "Counters":
        for f in self.__dataclass_fields__:
            setattr(self, f, getattr(self, f) + getattr(other, f))
        return self


def _run_frames(config: ScenarioConfig, frame_ids: Sequence[int]) -> Counters:
    sc = Scenario.build(config)
    c = Counters()
    for fid in frame_ids:
        o = run_frame_trial(config, trial_rng(config.seed, 0x5EED, fid), sc)
        nf = len(o.false)
        c.frames += 1
        c.users += config.K_a
        c.missed += o.missed
        c.false_frames += nf > 0
        c.false_total += nf
        c.false_sq += nf * nf
        c.overflow_frames += o.overflow
    return c


def wilson_interval(successes: int, n: int, z: float = Z95) -> Tuple[float, float]:
    if n <= 0:
        return 0.0, 1.0
    p = successes / n
    den = 1.0 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    lo = 0.0 if successes == 0 else max(0.0, mid - half)
    hi = 1.0 if successes == n else min(1.0, mid + half)
    return lo, hi


@dataclass(frozen=True)
class SimResult:
    pupe: float
    pupe_ci: Tuple[float, float]
    far_frame: float
    far_frame_ci: Tuple[float, float]
    false_count_mean: float
    false_count_ci: Tuple[float, float]
    trials: int
    overflow_frames: int = 0

    @classmethod
    def from_counters(cls, c: Counters) -> "SimResult":
        n = c.frames
        mean = c.false_total / n
        var = max(0.0, c.false_sq / n - mean * mean)
        half = Z95 * math.sqrt(var / n) if n > 1 else math.inf
        return cls(c.missed / c.users, wilson_interval(c.missed, c.users),
                   c.false_frames / n, wilson_interval(c.false_frames, n),
                   mean, (max(0.0, mean - half), mean + half), n, c.overflow_frames)


def estimate_rates(config: ScenarioConfig, workers: int = 1) -> SimResult:
    """PUPE and both false-alarm figures over ``config.trials`` frames.

    Frame i uses a stream derived from (seed, i) only, so the result does
    not depend on ``workers``.
    """
    ids = range(config.trials)
    if workers > 1 and config.trials > 1:
        shares = [list(ids[w::workers]) for w in range(workers)]
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_run_frames, [config] * workers, shares))
    else:
        parts = [_run_frames(config, ids)]
    total = Counters()
    for p in parts:
        total.add(p)
    return SimResult.from_counters(total)


# sweeps

def sim_row(config: ScenarioConfig, res: SimResult) -> Dict:
    lo, hi = res.pupe_ci
    return {"scheme": config.scheme, "Ka": config.K_a,
            "t": config.t if config.scheme == "ttree" else None,
            "ebno_db": float(config.ebno_db), "L": config.L,
            "K0": config.K_0 if config.channel != "abstract" else None,
            "pupe": res.pupe, "pupe_ci": (hi - lo) / 2.0, "far_frame": res.far_frame,
            "false_mean": res.false_count_mean, "trials": res.trials, "seed": config.seed}


_KEY_COLUMNS = ("scheme", "Ka", "t", "ebno_db", "L", "K0", "trials", "seed")


def _config_key(config: ScenarioConfig) -> Tuple[str, ...]:
    row = sim_row(config, SimResult(0.0, (0.0, 0.0), 0.0, (0.0, 0.0), 0.0, (0.0, 0.0),
                                    config.trials))
    return tuple(csvio.fmt(row[c]) for c in _KEY_COLUMNS)


def sweep(configs: Sequence[ScenarioConfig], out_path: str, workers: int = 1,
          resume: bool = True) -> List[Dict]:
    """Simulate every configuration and write one CSV row per cell.

    With ``resume``, rows already present in ``out_path`` (same scheme, K_a,
    t, E_b/N_0, L, K_0, trials and seed) are kept and not recomputed.  The
    file is rewritten atomically after every new row.
    """
    if not configs:
        raise ValueError("empty sweep grid")
    done: Dict[Tuple[str, ...], Dict] = {}
    if resume and os.path.exists(out_path):
        try:
            for r in csvio.read_csv(out_path, csvio.SIM_COLUMNS):
                done[tuple(r[c] for c in _KEY_COLUMNS)] = r
        except OSError as e:
            raise OSError(f"{out_path}: {e}") from e
    rows: List[Dict] = []
    for cfg in configs:
        key = _config_key(cfg)
        if key in done:
            rows.append(done[key])
            continue
        rows.append(sim_row(cfg, estimate_rates(cfg, workers)))
        try:
            csvio.write_csv(out_path, csvio.SIM_COLUMNS, rows)
        except OSError as e:
            raise OSError(f"{out_path}: {e}") from e
    try:
        csvio.write_csv(out_path, csvio.SIM_COLUMNS, rows)
    except OSError as e:
        raise OSError(f"{out_path}: {e}") from e
    return rows

