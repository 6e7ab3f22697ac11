"""
Acceptance criteria 1 to 8.  Each test records one PASS/FAIL line that is
printed in the terminal summary, then asserts the same condition.
"""

import itertools
import math
import time

import numpy as np
import pytest

from ccsura.achannel import OuterChannelParams, capacity_estimate
from ccsura.bounds import (RcbConfig, SearchConstraints, TreeBoundConfig, expected_paths,
                           min_ebno_search, rcb_error_prob, rcb_false_alarm)
from ccsura.crc import crc_check_batch
from ccsura.gf import get_field
from ccsura.phy import estimate_roc, power_from_ebno
from ccsura.rs import RsCodeSpec, list_recover, list_size_bound, multiplicity_matrix
from ccsura.ttree import build_generator, decode

from ._oracles import all_codewords, all_messages, guaranteed_mask


# criterion 1: random coding bound against Monte Carlo over the E_1 ensemble

def _e1_trial_block(rng, M, L, Q, K_a, t, p_m, p_f, T):
    """One random codebook, T transmissions: per-user error rate and false counts."""
    C = rng.integers(0, Q, size=(M, L))
    msgs = rng.integers(0, M, size=(T, K_a))
    Y = np.zeros((T, L, Q), dtype=bool)
    tt = np.repeat(np.arange(T), K_a * L)
    ll = np.tile(np.arange(L), T * K_a)
    Y[tt, ll, C[msgs].reshape(-1)] = True
    noise = rng.random((T, L, Q))
    Y = np.where(Y, noise >= p_m, noise < p_f)
    covered = Y[:, np.arange(L)[None, :], C]                       # T x M x L
    decoded = (L - covered.sum(axis=2)) <= t                       # T x M
    hit = np.take_along_axis(decoded, msgs, axis=1)
    sent = np.zeros((T, M), dtype=bool)
    sent[np.repeat(np.arange(T), K_a), msgs.reshape(-1)] = True
    false = (decoded & ~sent).sum(axis=1)
    return 1.0 - hit.mean(), false.mean()


def test_criterion_1_random_coding_bound(criterion):
    k, L, Q, K_a = 6, 4, 8, 3
    M = 1 << k
    rng = np.random.default_rng(20240601)
    start = time.time()
    lines, ok = [], True
    for t, p_m, p_f in itertools.product((0, 1), (0.02, 0.1), (0.02, 0.1)):
        pe, fa = np.empty(1000), np.empty(1000)
        for b in range(1000):
            pe[b], fa[b] = _e1_trial_block(rng, M, L, Q, K_a, t, p_m, p_f, 1000)
        pe_th = rcb_error_prob(L, t, p_m)
        fa_th = rcb_false_alarm(RcbConfig(k, L, Q, t, K_a, p_m, p_f))
        s_pe = pe.std(ddof=1) / math.sqrt(pe.size)
        s_fa = fa.std(ddof=1) / math.sqrt(fa.size)
        good = abs(pe.mean() - pe_th) <= 3 * s_pe and fa.mean() <= fa_th + 3 * s_fa
        ok &= good
        lines.append(f"t={t} pm={p_m} pf={p_f}: Pe {pe.mean():.5f}/{pe_th:.5f} "
                     f"FA {fa.mean():.4f}/{fa_th:.4f}")
    elapsed = time.time() - start
    ok &= elapsed < 300
    criterion(1, "random coding bound vs Monte Carlo", ok, f"({elapsed:.0f} s)")
    assert ok, "\n".join(lines)


# criterion 2: tree decoder equals brute force

def _all_codewords_tree(spec):
    u = np.arange(1 << spec.k, dtype=np.int64)
    shift = spec.k
    chunks = []
    for b in spec.bit_allocation:
        shift -= b
        chunks.append((u >> shift) & ((1 << b) - 1))
    X = np.zeros((u.size, spec.L), dtype=np.int64)
    for i in range(spec.L):
        for j in range(i + 1):
            X[:, i] ^= spec.table(j, i)[chunks[j]]
    return X


def _random_allocation(rng, L, c, k):
    alloc = np.zeros(L, dtype=int)
    for _ in range(k):
        free = np.flatnonzero(alloc < c)
        alloc[rng.choice(free)] += 1
    return tuple(int(b) for b in alloc)


def test_criterion_2_tree_decoder_exact(criterion):
    rng = np.random.default_rng(2)
    start = time.time()
    mismatches = 0
    for inst in range(10_000):
        L = int(rng.integers(1, 9))
        c = int(rng.integers(1, 6))
        k = int(rng.integers(1, min(14, L * c) + 1))
        t = int(rng.integers(0, min(2, L) + 1))
        spec = build_generator(_random_allocation(rng, L, c, k), c, seed=inst)
        X = _all_codewords_tree(spec)
        member = rng.random((L, spec.Q)) < rng.uniform(0.05, 0.6)
        lists = [set(np.flatnonzero(member[i]).tolist()) for i in range(L)]
        dist = (~member[np.arange(L)[None, :], X]).sum(axis=1)
        expected = set(np.flatnonzero(dist <= t).tolist())
        mismatches += decode(spec, lists, t).messages != expected
    elapsed = time.time() - start
    ok = mismatches == 0 and elapsed < 300
    criterion(2, "tree decoder equals exhaustive filter", ok,
              f"({mismatches} mismatches in 10^4, {elapsed:.0f} s)")
    assert ok


# criterion 3: per-level survivors against the ensemble bound

def test_criterion_3_survivor_bound(criterion):
    rng = np.random.default_rng(3)
    start = time.time()
    ok, worst = True, -math.inf
    details = []
    for cfg_id in range(12):
        c = int(rng.integers(4, 7))
        L = int(rng.integers(3, 7))
        k = int(rng.integers(L, min(16, L * c) + 1))
        alloc = _random_allocation(rng, L, c, k)
        K_a = int(rng.integers(2, 5))
        t = int(rng.integers(0, 2))
        p_m = float(rng.choice([0.02, 0.05, 0.1]))
        p_f = float(rng.choice([0.01, 0.03, 0.06]))
        cfg = TreeBoundConfig(alloc, c, K_a, p_m, p_f, t)
        Q = 1 << c
        N = 600
        counts = np.zeros((N, L))
        for n in range(N):
            spec = build_generator(alloc, c, seed=cfg_id * 100_000 + n)
            msgs = [int(x) for x in rng.integers(0, 1 << k, size=K_a)]
            X = _all_codewords_tree(spec)[msgs] if k <= 12 else np.array(
                [_encode(spec, u) for u in msgs])
            Y = np.zeros((L, Q), dtype=bool)
            Y[np.tile(np.arange(L), K_a), X.reshape(-1)] = True
            noise = rng.random((L, Q))
            Y = np.where(Y, noise >= p_m, noise < p_f)
            lists = [set(np.flatnonzero(Y[i]).tolist()) for i in range(L)]
            counts[n] = decode(spec, lists, t).path_counts
        for l in range(1, L + 1):
            mean = counts[:, l - 1].mean()
            sig = counts[:, l - 1].std(ddof=1) / math.sqrt(N)
            bound = expected_paths(cfg, l)
            worst = max(worst, (mean - bound) / max(sig, 1e-12))
            if mean > bound + 3 * sig:
                ok = False
                details.append(f"cfg {cfg_id} level {l}: {mean:.3f} > {bound:.3f} + 3*{sig:.3f}")
    elapsed = time.time() - start
    ok &= elapsed < 600
    criterion(3, "per-level survivors within the path bound", ok,
              f"(12 configs, worst excess {worst:+.2f} sigma, {elapsed:.0f} s)")
    assert ok, "\n".join(details)


def _encode(spec, u):
    from ccsura.ttree import encode
    return encode(spec, u)


# criterion 4: GS guarantee, exhaustive over GF(16)

def test_criterion_4_gs_guarantee(criterion):
    gf = get_field(4)
    rng = np.random.default_rng(4)
    start = time.time()
    misses = oversize = nonvacuous = 0
    for k_O in (2, 3, 4):
        spec = RsCodeSpec(gf, 15, k_O)
        cw = all_codewords(spec, all_messages(16, k_O))
        for m in (1, 2):
            for _ in range(1000):
                planted = cw[rng.integers(0, len(cw), size=int(rng.integers(1, 4)))]
                lists = [set(planted[:, j].tolist()) for j in range(15)]
                for j in rng.choice(15, size=int(rng.integers(0, 10)), replace=False):
                    lists[j] = set(rng.choice(16, size=int(rng.integers(0, 4)),
                                              replace=False).tolist())
                if not any(lists):
                    lists[0] = {0}
                M = multiplicity_matrix(lists, 16, m)
                must = {tuple(c) for c in cw[guaranteed_mask(M, cw, k_O)].tolist()}
                out = set(list_recover(spec, lists, m))
                nonvacuous += bool(must)
                misses += len(must - out)
                oversize += len(out) > list_size_bound(M, k_O) + 1e-9
    elapsed = time.time() - start
    ok = misses == 0 and oversize == 0 and elapsed < 900
    criterion(4, "GS recovers every codeword meeting the guarantee", ok,
              f"({misses} misses, {oversize} oversize lists, {nonvacuous}/6000 patterns with "
              f"guaranteed codewords, {elapsed:.0f} s)")
    assert ok


# criterion 5: concatenated rate has an interior maximum over n_1

def test_criterion_5_capacity_shape(criterion):
    Q, K_a, P = 1024, 20, 1.0
    start = time.time()
    rates = []
    grid = (16, 24, 32, 48, 64, 96, 128, 192, 256)
    for n_1 in grid:
        roc = estimate_roc(n_1, Q, P, K_a, "rayleigh", 40, 256, seed=3)
        cu = max(capacity_estimate(OuterChannelParams(Q, K_a, pm, pf))
                 for _, pm, pf in roc.rows())
        rates.append(cu * math.log2(Q) / n_1)
    peak = int(np.argmax(rates))
    elapsed = time.time() - start
    ok = rates[peak] > rates[0] and rates[peak] > rates[-1] and elapsed < 1800
    criterion(5, "rate C_u*log2(Q)/n_1 peaks inside the sweep", ok,
              f"(peak {rates[peak]:.2f} at n_1={grid[peak]}, ends {rates[0]:.2f}/"
              f"{rates[-1]:.2f}, {elapsed:.0f} s)")
    assert ok


# criterion 6: CRC forgery rate

def test_criterion_6_crc_forgeries(criterion):
    rng = np.random.default_rng(6)
    start = time.time()
    ok, parts = True, []
    N = 1_000_000
    for h in (8, 14, 15):
        words = rng.integers(0, 2, size=(N, 100 + h), dtype=np.uint8)
        rate = crc_check_batch(words, h).mean()
        p = 2.0 ** -h
        good = abs(rate - p) <= 3 * math.sqrt(p * (1 - p) / N)
        ok &= good
        parts.append(f"h={h}: {rate * N:.0f} vs {p * N:.1f}")
    elapsed = time.time() - start
    ok &= elapsed < 60
    criterion(6, "random forgeries pass the CRC at 2^-h", ok,
              f"({'; '.join(parts)}, {elapsed:.0f} s)")
    assert ok


# criterion 7: list recovery lowers the required energy

@pytest.mark.slow
def test_criterion_7_t1_beats_t0(criterion):
    Q, n, k, K_a = 1024, 3000, 100, 20
    start = time.time()
    found = {}
    e = 10.0
    while len(found) < 2 and e <= 40:
        family = {(e, L): estimate_roc(n // L, Q, power_from_ebno(e, k, n), K_a, "rayleigh",
                                       40, 400, seed=7, ebno_db=e, L=L)
                  for L in range(18, 38, 2)}
        for t in (0, 1):
            if t not in found:
                op = min_ebno_search(family, SearchConstraints(k, K_a, Q, t))
                if not op.saturated:
                    found[t] = op
        e += 1.0
    elapsed = time.time() - start
    ok = set(found) == {0, 1} and found[1].ebno_db < found[0].ebno_db and elapsed <= 7200
    desc = ", ".join(f"t={t}: {op.ebno_db:g} dB (L={op.L}, K0={op.K_0})"
                     for t, op in sorted(found.items()))
    criterion(7, "t=1 needs less E_b/N_0 than t=0", ok, f"({desc}, {elapsed:.0f} s)")
    assert ok


# criterion 8: full-scale reproduction runs offline

@pytest.mark.skip(reason="full-scale (Q=2^15, n=30000, K_a up to 300) reproduction takes hours; "
                         "run the README recipe offline")
def test_criterion_8_full_scale():
    pass
