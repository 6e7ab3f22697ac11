"""
Closed-form evaluators for the outer-code bounds and the minimum-E_b/N_0 search.

Random coding bound (i.i.d. uniform codebooks):

* ``rcb_error_prob`` -- per-user error, a binomial tail in the miss probability;
* ``rcb_false_alarm`` -- union bound over collision patterns (exact, small M);
* ``rcb_false_alarm_corollary`` -- the simplified form usable at M = 2^100.

Tree-code ensemble (random block upper-triangular generators):

* ``expected_paths`` -- bound on the mean decoder list size at level l;
* ``ttree_bound`` -- (P_e, v_L) with v_L reported as printed;
* ``greedy_bit_allocation`` -- fill each slot with as many bits as the path
  budget allows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binom

from .achannel import mu_r
from .phy import RocTable

# Exact (non-corollary) false-alarm evaluation is refused above this size.
EXACT_MAX_LOG2_M = 40


# message collisions

@lru_cache(maxsize=None)
def _stirling2_row(n: int) -> Tuple[int, ...]:
    """Stirling numbers of the second kind S(n, r), r = 0..n."""
    row = [1]
    for i in range(1, n + 1):
        new = [0] * (i + 1)
        for r in range(1, i + 1):
            new[r] = r * (row[r] if r < len(row) else 0) + row[r - 1]
        row = new
    return tuple(row)


def nu_r(M: int, K_a: int, r: int) -> float:
    """Probability that K_a i.i.d. uniform messages from [M] take exactly r distinct values.

    The alternating inclusion-exclusion sum equals M(M-1)...(M-r+1) S(K_a, r) / M^K_a;
    that form is evaluated in exact integer arithmetic and rounded once.
    """
    if not 1 <= r <= min(M, K_a):
        raise ValueError(f"r={r} outside [1, min(M={M}, K_a={K_a})]")
    falling = 1
    for i in range(r):
        falling *= M - i
    return float(Fraction(falling * _stirling2_row(K_a)[r], M ** K_a))


def collision_prob(M: int, K_a: int) -> float:
    """Pr[some two of K_a uniform messages coincide] = 1 - prod_{i<K_a} (1 - i/M)."""
    return -math.expm1(math.fsum(math.log1p(-i / M) for i in range(K_a)))


def collision_cap(M: int, K_a: int) -> float:
    """Union-bound cap C(K_a, 2) / M on ``collision_prob``."""
    return math.comb(K_a, 2) / M


# binomial kernels

def rcb_error_prob(L: int, t: int, p_m: float) -> float:
    """Pr[more than t of L slots miss], misses i.i.d. with probability p_m."""
    if t > L:
        raise ValueError(f"t={t} exceeds L={L}")
    if t >= L or p_m <= 0.0:
        return 0.0
    return float(binom.sf(t, L, p_m))


def log_accept_prob(L: int, t: int, mu: float) -> float:
    """log Pr[at most t of L positions uncovered], each covered independently with prob mu."""
    if mu >= 1.0:
        return 0.0
    if mu <= 0.0:
        return 0.0 if t >= L else -math.inf
    i = np.arange(0, min(t, L) + 1)
    lc = np.array([math.lgamma(L + 1) - math.lgamma(j + 1) - math.lgamma(L - j + 1) for j in i])
    terms = lc + i * math.log1p(-mu) + (L - i) * math.log(mu)
    return float(logsumexp(terms))


def accept_prob(L: int, t: int, mu: float) -> float:
    return math.exp(log_accept_prob(L, t, mu))


# random coding bound

@dataclass(frozen=True)
class RcbConfig:
    log2_M: int
    L: int
    Q: int
    t: int
    K_a: int
    p_m: float
    p_f: float

    def __post_init__(self):
        if self.t > self.L:
            raise ValueError(f"t={self.t} exceeds L={self.L}")
        for name in ("p_m", "p_f"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")

    @property
    def M(self) -> int:
        return 1 << self.log2_M


def rcb_false_alarm(config: RcbConfig, clamp: bool = False) -> float:
    """Union bound sum_r nu_r (M - r) Pr[accept | r distinct transmitted].

    Without ``clamp`` this is the expected number of accepted non-transmitted
    messages over the ensemble.  With ``clamp`` each conditional term is capped
    at 1, which gives a valid probability bound never exceeding the corollary.
    """
    if config.log2_M > EXACT_MAX_LOG2_M:
        raise ValueError(
            f"exact evaluation refused for k={config.log2_M} > {EXACT_MAX_LOG2_M}; "
            "use rcb_false_alarm_corollary")
    M, K_a = config.M, config.K_a
    total = 0.0
    for r in range(1, min(M, K_a) + 1):
        mu = mu_r(config.Q, r, config.p_m, config.p_f)
        cond = (M - r) * accept_prob(config.L, config.t, mu)
        if clamp:
            cond = min(cond, 1.0)
        total += nu_r(M, K_a, r) * cond
    return total


def rcb_false_alarm_corollary(config: RcbConfig) -> float:
    """(M - K_a) Pr[accept | K_a distinct] + Pr[collision], evaluated in the log domain."""
    M, K_a = config.M, config.K_a
    mu = mu_r(config.Q, K_a, config.p_m, config.p_f)
    log_term = math.log(max(M - K_a, 0)) if M > K_a else -math.inf
    log_term += log_accept_prob(config.L, config.t, mu)
    main = math.exp(log_term) if log_term > -math.inf else 0.0
    return main + collision_prob(M, K_a)


# tree-code ensemble

@dataclass(frozen=True)
class TreeBoundConfig:
    bit_allocation: Tuple[int, ...]
    c: int
    K_a: int
    p_m: float
    p_f: float
    t: int

    def __post_init__(self):
        object.__setattr__(self, "bit_allocation", tuple(int(b) for b in self.bit_allocation))
        if any(b < 0 for b in self.bit_allocation):
            raise ValueError("bit allocation entries must be nonnegative")

    @property
    def L(self) -> int:
        return len(self.bit_allocation)

    @property
    def k(self) -> int:
        return sum(self.bit_allocation)

    @property
    def Q(self) -> int:
        return 1 << self.c


def _one_minus_no_match(K_a: int, B: int) -> float:
    """1 - (1 - 2^-B)^K_a, accurate for large B."""
    if B == 0:
        return 1.0
    return -math.expm1(K_a * math.log1p(-math.ldexp(1.0, -B)))


def match_length_probs(bit_allocation: Sequence[int], K_a: int, l: int) -> List[float]:
    """lambda_0..lambda_l: distribution of the longest prefix match at level l."""
    B = np.cumsum(bit_allocation[:l]).tolist()
    d = [_one_minus_no_match(K_a, b) for b in B]          # d[j-1] = 1 - (1 - 1/M_j)^K_a
    lam = [1.0 - d[0]]
    lam += [d[j - 1] - d[j] for j in range(1, l)]
    lam.append(d[l - 1])
    return lam


def _path_terms(config: TreeBoundConfig, l: int) -> List[float]:
    """rho_j * lambda_j for j = 0..l."""
    K_a, Q, p_m, p_f, t = config.K_a, config.Q, config.p_m, config.p_f, config.t
    g1 = (K_a / Q) * p_m + (1.0 - 1.0 / Q) * (1.0 - p_f)
    g2 = (K_a / Q) * (1.0 - p_m) + (1.0 - 1.0 / Q) * p_f
    lam = match_length_probs(config.bit_allocation, K_a, l)
    out = []
    for j in range(l + 1):
        rho = 0.0
        for x in range(min(j, t) + 1):
            px = math.comb(j, x) * p_m ** x * (1.0 - p_m) ** (j - x)
            if px == 0.0:
                continue
            for y in range(min(l - j, t - x) + 1):
                rho += px * math.comb(l - j, y) * g1 ** y * g2 ** (l - j - y)
        out.append(rho * lam[j])
    return out


def expected_paths(config: TreeBoundConfig, l: int) -> float:
    """Bound on the mean number of surviving prefixes after slot l (1-based)."""
    if not 1 <= l <= config.L:
        raise ValueError(f"level {l} outside [1, {config.L}]")
    B_l = sum(config.bit_allocation[:l])
    return math.ldexp(math.fsum(_path_terms(config, l)), B_l)


def ttree_false_bound(config: TreeBoundConfig) -> float:
    """``expected_paths`` at l = L without the full-match term.

    The j = L term counts information words equal to a transmitted one, so
    the remaining sum bounds the expected number of false messages.
    """
    L = config.L
    terms = _path_terms(config, L)[:L]
    return math.ldexp(math.fsum(terms), config.k)


def ttree_bound(config: TreeBoundConfig) -> Tuple[float, float]:
    """(P_e, v_L): per-user error and the printed false-alarm bound."""
    L = config.L
    return rcb_error_prob(L, min(config.t, L), config.p_m), expected_paths(config, L)


def greedy_bit_allocation(k: int, c: int, K_a: int, p_m: float, p_f: float, t: int,
                          v_star: float, L_max: int) -> Optional[List[int]]:
    """Assign to each slot the most bits (up to c) keeping the path bound within v_star.

    Returns the allocation up to the slot where k bits are placed, or None if
    L_max slots do not suffice.
    """
    if k < 1 or v_star < 1:
        raise ValueError("need k >= 1 and v_star >= 1")
    alloc: List[int] = []
    placed = 0
    while placed < k:
        if len(alloc) >= L_max:
            return None
        best = 0
        for b in range(min(c, k - placed), 0, -1):
            cfg = TreeBoundConfig(tuple(alloc) + (b,), c, K_a, p_m, p_f, t)
            if math.isinf(v_star) or expected_paths(cfg, len(alloc) + 1) <= v_star:
                best = b
                break
        alloc.append(best)
        placed += best
    return alloc


# operating-point search

@dataclass(frozen=True)
class OperatingPoint:
    ebno_db: float
    L: Optional[int]
    K_0: Optional[int]
    p_m: Optional[float]
    p_f: Optional[float]
    P_e: float
    P_f: Optional[float]
    bit_allocation: Optional[Tuple[int, ...]] = None
    saturated: bool = False


SATURATED = OperatingPoint(math.inf, None, None, None, None, 1.0, None, saturated=True)


@dataclass(frozen=True)
class SearchConstraints:
    """Targets and the bound that turns a ROC point into (P_e, P_f).

    ``bound`` is ``"rcb"`` (random coding corollary) or ``"ttree"`` (tree
    ensemble with greedy allocation under ``v_star`` paths).
    """

    k: int
    K_a: int
    Q: int
    t: int
    bound: str = "rcb"
    v_star: float = math.inf
    pe_target: float = 0.1
    pf_target: float = 1e-3
    pf_pe_ratio: float = 1e-2
    full_scan: bool = False

    def __post_init__(self):
        if self.bound not in ("rcb", "ttree"):
            raise ValueError(f"unknown bound {self.bound!r}")
        if self.bound == "ttree" and self.Q & (self.Q - 1):
            raise ValueError("tree bound needs Q a power of two")


def evaluate_point(cons: SearchConstraints, L: int, p_m: float, p_f: float):
    """(P_e, P_f, allocation) for one ROC point under the chosen bound."""
    t = min(cons.t, L)
    if cons.bound == "rcb":
        cfg = RcbConfig(cons.k, L, cons.Q, t, cons.K_a, p_m, p_f)
        return rcb_error_prob(L, t, p_m), rcb_false_alarm_corollary(cfg), None
    c = cons.Q.bit_length() - 1
    alloc = greedy_bit_allocation(cons.k, c, cons.K_a, p_m, p_f, t, cons.v_star, L)
    if alloc is None:
        return 1.0, math.inf, None
    alloc = tuple(alloc) + (0,) * (L - len(alloc))
    cfg = TreeBoundConfig(alloc, c, cons.K_a, p_m, p_f, t)
    if not math.isinf(cons.v_star):
        if any(expected_paths(cfg, l) > cons.v_star for l in range(len(alloc), L + 1)):
            return 1.0, math.inf, None
    return rcb_error_prob(L, t, p_m), ttree_false_bound(cfg), alloc


def _admissible(cons: SearchConstraints, pe: float, pf: float) -> bool:
    if pe > 0.0:
        return pf < cons.pf_pe_ratio * pe
    return pf < cons.pf_target


def best_on_roc(cons: SearchConstraints, roc: RocTable, L: int):
    """Minimal-P_e admissible point on one ROC curve; ties go to smaller K_0."""
    best = None
    for K0, p_m, p_f in sorted(roc.rows()):
        pe, pf, alloc = evaluate_point(cons, L, p_m, p_f)
        if not _admissible(cons, pe, pf):
            continue
        if best is None or pe < best[0]:
            best = (pe, pf, K0, p_m, p_f, alloc)
    return best


def _pe_of(best) -> float:
    return 1.0 if best is None else best[0]


def _best_over_L(cons: SearchConstraints, rocs: Mapping[int, RocTable]):
    Ls = sorted(rocs)
    cache: Dict[int, object] = {}

    def f(i):
        if i not in cache:
            cache[i] = best_on_roc(cons, rocs[Ls[i]], Ls[i])
        return cache[i]

    if cons.full_scan:
        idx = range(len(Ls))
    else:
        start = next((i for i, L in enumerate(Ls) if L * math.log2(cons.Q) >= cons.k), 0)
        i = start
        while i + 1 < len(Ls) and _pe_of(f(i + 1)) <= _pe_of(f(i)):
            i += 1
        # one extra probe past the minimum; improvement there means the
        # curve is not unimodal and everything gets scanned
        if i + 2 < len(Ls) and _pe_of(f(i + 2)) < _pe_of(f(i)):
            idx = range(len(Ls))
        else:
            idx = list(cache)
    found = None
    for i in sorted(idx):
        b = f(i)
        if b is None:
            continue
        key = (b[0], Ls[i], b[2])
        if found is None or key < found[0]:
            found = (key, Ls[i], b)
    return found


def min_ebno_search(roc_family: Mapping[Tuple[float, int], RocTable],
                    constraints: SearchConstraints) -> OperatingPoint:
    """Smallest E_b/N_0 on the grid whose best (L, K_0) meets both targets.

    At each E_b/N_0, every L is reduced to the admissible ROC point of least
    P_e (admissible: P_f / P_e below ``pf_pe_ratio``); the best L is then
    located by walking upward from the smallest L that can carry k bits.
    Returns ``SATURATED`` when no grid point is feasible.
    """
    if not roc_family:
        raise ValueError("empty ROC family")
    by_ebno: Dict[float, Dict[int, RocTable]] = {}
    for (e, L), roc in roc_family.items():
        by_ebno.setdefault(float(e), {})[int(L)] = roc
    for e in sorted(by_ebno):
        found = _best_over_L(constraints, by_ebno[e])
        if found is None:
            continue
        _, L, (pe, pf, K0, p_m, p_f, alloc) = found
        if pe < constraints.pe_target and pf < constraints.pf_target:
            return OperatingPoint(e, L, K0, p_m, p_f, pe, pf, alloc)
    return SATURATED
