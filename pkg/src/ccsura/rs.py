"""
Reed-Solomon outer code over GF(q) with Guruswami-Sudan list recovery, and
the prefix/coset scheme that shares one small-field RS code among users.

Polynomials are coefficient lists, lowest degree first.  Bivariate arrays
are indexed ``[deg_y, deg_x]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .crc import CRC_POLYS, bits_to_int, crc_attach, crc_check, int_to_bits
from .gf import GF, BivariatePolynomial, get_field, poly_eval

Point = Tuple[int, int, int]   # (x, y, multiplicity)


@dataclass(frozen=True, eq=False)
class RsCodeSpec:
    """RS code of length L and dimension k_O; locators default to 0, 1, ..., L-1."""

    field: GF
    L: int
    k_O: int
    locators: Tuple[int, ...] = ()

    def __post_init__(self):
        q = self.field.size
        if not 1 <= self.k_O <= self.L <= q:
            raise ValueError(f"need 1 <= k_O <= L <= q, got k_O={self.k_O}, L={self.L}, q={q}")
        locs = tuple(int(b) for b in self.locators) or tuple(range(self.L))
        if len(locs) != self.L or len(set(locs)) != self.L:
            raise ValueError("locators must be L distinct field elements")
        for b in locs:
            self.field.check(b)
        object.__setattr__(self, "locators", locs)

    @property
    def q(self) -> int:
        return self.field.size


def rs_encode(spec: RsCodeSpec, message: Sequence[int]) -> List[int]:
    if len(message) != spec.k_O:
        raise ValueError(f"message must have {spec.k_O} symbols, got {len(message)}")
    return [poly_eval(spec.field, message, b) for b in spec.locators]


# multiplicities and decoding radius

def multiplicity_matrix(y: Sequence[Iterable[int]], q: int, m: int) -> np.ndarray:
    """q x L matrix m * indicator(alpha_i in y_j)."""
    if m < 1:
        raise ValueError("multiplicity must be >= 1")
    M = np.zeros((q, len(y)), dtype=np.int64)
    for j, yj in enumerate(y):
        for a in yj:
            if not 0 <= a < q:
                raise ValueError(f"slot {j} symbol {a} outside GF({q})")
            M[a, j] = m
    return M


def interpolation_cost(M: np.ndarray) -> int:
    """Number of linear constraints, sum of m(m+1)/2."""
    M = np.asarray(M, dtype=np.int64)
    return int(np.sum(M * (M + 1) // 2))


def codeword_score(M: np.ndarray, codeword: Sequence[int]) -> int:
    """Inner product of M with the codeword's indicator matrix."""
    return int(sum(M[c, j] for j, c in enumerate(codeword)))


def gs_guaranteed(M: np.ndarray, codeword: Sequence[int], k_O: int) -> bool:
    """Sufficient recovery condition score >= sqrt(2 (k_O - 1) C(M)), in integers."""
    s = codeword_score(M, codeword)
    return s * s >= 2 * (k_O - 1) * interpolation_cost(M)


def list_size_bound(M: np.ndarray, k_O: int) -> float:
    return math.sqrt(2 * interpolation_cost(M) / (k_O - 1))


def gs_max_errors(L: int, k_O: int, K_a: int, m: int) -> float:
    """Uncovered slots tolerated when every list has K_a entries, all with multiplicity m."""
    return L * (1.0 - math.sqrt((k_O - 1) * K_a * (m + 1) / (L * m)))


def naive_scheme_feasible(L: int, k_O: int, K_a: int) -> bool:
    """Whole-field scheme: needs the outer rate k_O / L to be at most 1 / K_a."""
    return k_O * K_a <= L


# interpolation

def _monomial_count(D: int, w: int) -> int:
    return sum(D - j * w + 1 for j in range(D // w + 1))


def _interp_degree(C: int, w: int) -> int:
    """Smallest D with more monomials of weighted degree <= D than constraints."""
    D = 0
    while _monomial_count(D, w) <= C:
        D += 1
    return D


@lru_cache(maxsize=None)
def _binom_odd(n: int) -> np.ndarray:
    i = np.arange(n)
    return (i[:, None] & i[None, :]) == i[None, :]   # [i, a]: C(i, a) odd


def _hasse_weights(gf: GF, x0: int, a: int, n: int) -> np.ndarray:
    """w[i] = C(i, a) x0^(i-a) (mod 2), zero for i < a."""
    w = np.zeros(n, dtype=np.int64)
    if a < n:
        w[a:] = gf.vpow(x0, n - a)
        w[a:] *= _binom_odd(n)[a:, a]
    return w


def gs_interpolate(gf: GF, points: Sequence[Point], k_O: int) -> BivariatePolynomial:
    """Nonzero Q(x, y) of least (1, k_O - 1)-weighted degree with the given zeros.

    Each point (x, y, m) imposes every Hasse derivative of order (a, b),
    a + b < m, to vanish there.  Runs the iterative module update over the
    basis y^0, ..., y^rho, with leading monomials ordered by weighted
    degree, then y-degree.
    """
    if k_O < 2:
        raise ValueError("interpolation needs k_O >= 2")
    pts: Dict[Tuple[int, int], int] = {}
    for x, y, m in points:
        gf.check(x)
        gf.check(y)
        if m < 0:
            raise ValueError("multiplicities must be nonnegative")
        if m:
            if (x, y) in pts:
                raise ValueError(f"point ({x}, {y}) listed twice")
            pts[(x, y)] = m
    if not pts:
        raise ValueError("no interpolation constraints")
    w = k_O - 1
    C = sum(m * (m + 1) // 2 for m in pts.values())
    D = _interp_degree(C, w)
    rho = D // w
    R = rho + 1
    X = D + 2
    g = np.zeros((R, R, X), dtype=np.int64)
    g[np.arange(R), np.arange(R), 0] = 1
    key_grid = (np.arange(X)[None, :] + w * np.arange(R)[:, None]) * R + np.arange(R)[:, None]

    for (x0, y0), m in pts.items():
        for b in range(m):
            wy = _hasse_weights(gf, y0, b, R)
            for a in range(m - b):
                X = g.shape[2]
                W = gf.vmul(wy[:, None], _hasse_weights(gf, x0, a, X)[None, :])
                disc = np.bitwise_xor.reduce(gf.vmul(g, W[None]).reshape(R, -1), axis=1)
                nz = np.flatnonzero(disc)
                if nz.size == 0:
                    continue
                keys = np.where(g != 0, key_grid[None, :, :X], -1).reshape(R, -1).max(axis=1)
                s = nz[np.argmin(keys[nz])]
                ds = int(disc[s])
                gs = g[s].copy()
                others = nz[nz != s]
                if others.size:
                    g[others] = gf.vmul(g[others], ds) ^ gf.vmul(disc[others][:, None, None], gs[None])
                if np.any(gs[:, -1]):
                    g = np.concatenate([g, np.zeros_like(g)], axis=2)
                    gs = np.concatenate([gs, np.zeros_like(gs)], axis=1)
                    key_grid = (np.arange(g.shape[2])[None, :]
                                + w * np.arange(R)[:, None]) * R + np.arange(R)[:, None]
                shifted = np.zeros_like(gs)
                shifted[:, 1:] = gs[:, :-1]
                g[s] = shifted ^ gf.vscale(gs, x0)

    X = g.shape[2]
    keys = np.where(g != 0, key_grid[None, :, :X], -1).reshape(R, -1).max(axis=1)
    return BivariatePolynomial.from_array(gf, g[int(np.argmin(keys))])


# factorization

def _strip_x(arr: np.ndarray) -> np.ndarray:
    cols = np.flatnonzero(np.any(arr != 0, axis=0))
    return arr[:, cols[0]:cols[-1] + 1]


def _y_roots(gf: GF, coeffs: np.ndarray) -> np.ndarray:
    """All field elements z with sum_j coeffs[j] z^j = 0 (coeffs not all zero)."""
    z = np.arange(gf.size)
    j = np.arange(coeffs.size)
    logs = (gf.log[z][:, None] * j[None, :]) % gf.order
    pw = np.where(z[:, None] == 0, (j[None, :] == 0).astype(np.int64), gf.exp[logs])
    vals = np.bitwise_xor.reduce(gf.vmul(pw, coeffs[None, :]), axis=1)
    return np.flatnonzero(vals == 0)


def _shift_substitute(gf: GF, arr: np.ndarray, gamma: int) -> np.ndarray:
    """Array of Q(x, x y + gamma) given the array of Q(x, y)."""
    Y, X = arr.shape
    out = np.zeros((Y, X + Y - 1), dtype=np.int64)
    odd = _binom_odd(Y)
    gpow = gf.vpow(gamma, Y)
    for j in range(Y):
        if not np.any(arr[j]):
            continue
        for s in range(j + 1):
            if odd[j, s]:
                out[s, s:s + X] ^= gf.vscale(arr[j], int(gpow[j - s]))
    return out


def gs_factor(q_poly: BivariatePolynomial, k_O: int) -> List[Tuple[int, ...]]:
    """Every f with deg f < k_O such that y - f(x) divides q_poly.

    Results are coefficient tuples of length k_O, sorted, without duplicates.
    """
    if q_poly.is_zero():
        raise ValueError("cannot factor the zero polynomial")
    gf = q_poly.gf
    found: Set[Tuple[int, ...]] = set()

    def walk(arr: np.ndarray, prefix: List[int]):
        arr = _strip_x(arr)
        if len(prefix) == k_O:
            found.add(tuple(prefix))
            return
        for gamma in _y_roots(gf, arr[:, 0]):
            walk(_shift_substitute(gf, arr, int(gamma)), prefix + [int(gamma)])

    walk(q_poly.to_array(), [])
    return sorted(f for f in found if not any(q_poly.substitute_y(list(f))))


def gs_list_decode(spec: RsCodeSpec, y: Sequence[Iterable[int]], m: int = 1) -> List[Tuple[int, ...]]:
    """Messages (k_O coefficients) returned by interpolation plus factorization."""
    if len(y) != spec.L:
        raise ValueError(f"expected {spec.L} slot lists, got {len(y)}")
    if m < 1:
        raise ValueError("multiplicity must be >= 1")
    pts = [(spec.locators[j], int(a), m) for j, yj in enumerate(y) for a in sorted(set(yj))]
    return gs_factor(gs_interpolate(spec.field, pts, spec.k_O), spec.k_O)


def list_recover(spec: RsCodeSpec, y: Sequence[Iterable[int]], m: int = 1) -> List[Tuple[int, ...]]:
    """Codewords recovered from the received lists with uniform multiplicity m."""
    return [tuple(rs_encode(spec, f)) for f in gs_list_decode(spec, y, m)]


# prefix/coset scheme

@dataclass(frozen=True)
class CosetSchemeConfig:
    """Slot symbol = prefix (top x_p bits) followed by an RS symbol over GF(2^(c - x_p)).

    With ``carry_crc`` the h CRC bits are sent inside the RS message;
    otherwise only the k payload bits are sent (zero-padded to k_O symbols)
    and the CRC enters only through ``energy_correction_db``.
    """

    Q: int
    x_p: int
    k: int
    h: int
    k_O: int
    L: int
    m: int = 1
    carry_crc: bool = False
    _spec: RsCodeSpec = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        c = self.Q.bit_length() - 1
        if self.Q < 2 or self.Q != 1 << c:
            raise ValueError(f"Q must be a power of two, got {self.Q}")
        if not 0 <= self.x_p < c:
            raise ValueError(f"x_p must lie in [0, {c}), got {self.x_p}")
        if self.k < 1 or self.m < 1 or self.h < 0:
            raise ValueError("k and m must be positive, h nonnegative")
        if self.h and self.h not in CRC_POLYS:
            raise ValueError(f"no CRC generator for h={self.h}")
        if self.carry_crc and not self.h:
            raise ValueError("carry_crc needs h > 0")
        if self.k_O * (c - self.x_p) < self.message_bits:
            raise ValueError(f"{self.message_bits} bits do not fit in {self.k_O} symbols "
                             f"of {c - self.x_p} bits")
        if (c - self.x_p) > 16:
            raise ValueError("RS field larger than GF(2^16)")
        object.__setattr__(self, "_spec", RsCodeSpec(get_field(c - self.x_p), self.L, self.k_O))

    @property
    def c(self) -> int:
        return self.Q.bit_length() - 1

    @property
    def q_bits(self) -> int:
        return self.c - self.x_p

    @property
    def q(self) -> int:
        return 1 << self.q_bits

    @property
    def rs(self) -> RsCodeSpec:
        return self._spec

    @property
    def message_bits(self) -> int:
        return self.k + self.h if self.carry_crc else self.k

    @property
    def energy_correction_db(self) -> float:
        """E_b/N_0 penalty for CRC bits charged but not transmitted."""
        if self.carry_crc or not self.h:
            return 0.0
        return 10.0 * math.log10((self.k + self.h) / self.k)


def _pack(config: CosetSchemeConfig, payload: int) -> List[int]:
    if not 0 <= payload < (1 << config.k):
        raise ValueError(f"payload must be a {config.k}-bit integer")
    word = payload
    if config.carry_crc:
        word = bits_to_int(crc_attach(int_to_bits(payload, config.k), config.h))
    qb, k_O = config.q_bits, config.k_O
    word <<= k_O * qb - config.message_bits
    return [(word >> (qb * (k_O - 1 - i))) & (config.q - 1) for i in range(k_O)]


def _unpack(config: CosetSchemeConfig, message: Sequence[int]) -> Optional[int]:
    qb = config.q_bits
    word = 0
    for s in message:
        word = (word << qb) | int(s)
    pad = len(message) * qb - config.message_bits
    if word & ((1 << pad) - 1):
        return None
    word >>= pad
    if config.carry_crc:
        if not crc_check(int_to_bits(word, config.message_bits), config.h):
            return None
        word >>= config.h
    return word


def coset_encode(config: CosetSchemeConfig, payload: int, p_u: Optional[int] = None,
                 rng: Optional[np.random.Generator] = None) -> List[int]:
    """L slot symbols of the k-bit payload; p_u is drawn from rng when omitted."""
    if p_u is None:
        if rng is None:
            raise ValueError("need a prefix or a generator to draw one")
        p_u = int(rng.integers(0, 1 << config.x_p))
    if not 0 <= p_u < (1 << config.x_p):
        raise ValueError(f"prefix must lie in [0, {1 << config.x_p})")
    s = rs_encode(config.rs, _pack(config, payload))
    return [p_u * config.q + sj for sj in s]


def coset_decode(config: CosetSchemeConfig, y: Sequence[Iterable[int]],
                 m: Optional[int] = None) -> Set[int]:
    """Payloads found by per-prefix list recovery.

    Prefixes seen in fewer than k_O slots are skipped: no codeword with so
    few agreements meets the recovery condition.  A candidate is kept only
    if its padding bits are zero and, when carried, its CRC checks.
    """
    m = config.m if m is None else m
    L, q = config.L, config.q
    if len(y) != L:
        raise ValueError(f"expected {L} slot lists, got {len(y)}")
    by_prefix: Dict[int, List[Set[int]]] = {}
    for j, yj in enumerate(y):
        for s in yj:
            s = int(s)
            if not 0 <= s < config.Q:
                raise ValueError(f"slot {j} symbol {s} outside [0, {config.Q})")
            by_prefix.setdefault(s // q, [set() for _ in range(L)])[j].add(s % q)
    out: Set[int] = set()
    for lists in by_prefix.values():
        if sum(1 for lj in lists if lj) < config.k_O:
            continue
        for msg in gs_list_decode(config.rs, lists, m):
            p = _unpack(config, msg)
            if p is not None:
                out.add(p)
    return out
