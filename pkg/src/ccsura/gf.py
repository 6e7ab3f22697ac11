"""
GF(2^m) arithmetic with univariate and bivariate polynomial helpers.

Elements are plain integers in [0, 2^m) with polynomial-basis semantics:
bit i is the coefficient of x^i.  Multiplication goes through log/antilog
tables built once per field.

Univariate polynomials are lists of field elements, lowest degree first,
with no trailing zeros (the zero polynomial is ``[]``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

# Primitive polynomials, bit mask including the x^m term.
PRIMITIVE_POLYS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1011011,
    7: 0b10000011,
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10001101111,
    11: 0b100000000101,
    12: 0b1000011101011,
    13: 0b10000000011011,
    14: 0b100000010101001,
    15: 0b1000000000110101,
    16: 0b10000000000101101,
}

Poly = List[int]


class FieldError(ValueError):
    """Raised on invalid field operations (inverse of zero, mismatched fields)."""


@dataclass(frozen=True, eq=False)
class GF:
    """The field GF(2^m) defined by a primitive modulus.

    Parameters
    ----------
    m : int
        Extension degree, 1 <= m <= 16.
    modulus : int, optional
        Primitive polynomial as a bit mask including the x^m bit.  Defaults
        to the built-in table entry for ``m``.
    """

    m: int
    modulus: int = 0
    exp: np.ndarray = field(init=False, repr=False)
    log: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 1 <= self.m <= 16:
            raise FieldError(f"extension degree must be in [1, 16], got {self.m}")
        modulus = self.modulus or PRIMITIVE_POLYS[self.m]
        if modulus >> self.m != 1:
            raise FieldError(f"modulus {modulus:#x} does not have degree {self.m}")
        order = (1 << self.m) - 1
        exp = np.zeros(2 * order + 1, dtype=np.int64)
        log = np.full(1 << self.m, -1, dtype=np.int64)
        a = 1
        for i in range(order):
            if log[a] != -1:
                raise FieldError(f"modulus {modulus:#x} is not primitive for m={self.m}")
            exp[i] = a
            log[a] = i
            a <<= 1
            if a >> self.m:
                a ^= modulus
        if a != 1:
            raise FieldError(f"modulus {modulus:#x} is not primitive for m={self.m}")
        exp[order:2 * order] = exp[:order]
        exp[2 * order] = exp[0]
        exp.setflags(write=False)
        log.setflags(write=False)
        object.__setattr__(self, "modulus", modulus)
        object.__setattr__(self, "exp", exp)
        object.__setattr__(self, "log", log)

    def __eq__(self, other):
        return isinstance(other, GF) and (self.m, self.modulus) == (other.m, other.modulus)

    def __hash__(self):
        return hash((self.m, self.modulus))

    @property
    def size(self) -> int:
        return 1 << self.m

    @property
    def order(self) -> int:
        """Order of the multiplicative group."""
        return (1 << self.m) - 1

    def elements(self) -> range:
        return range(self.size)

    def check(self, a: int) -> int:
        if not 0 <= a < self.size:
            raise FieldError(f"{a} is not an element of GF(2^{self.m})")
        return a

    # scalar arithmetic

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    sub = add

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise FieldError("zero has no multiplicative inverse")
        return int(self.exp[self.order - self.log[a]])

    def div(self, a: int, b: int) -> int:
        if b == 0:
            raise FieldError("division by zero")
        if a == 0:
            return 0
        return int(self.exp[(self.log[a] - self.log[b]) % self.order])

    def pow(self, a: int, e: int) -> int:
        if e == 0:
            return 1
        if a == 0:
            if e < 0:
                raise FieldError("zero has no multiplicative inverse")
            return 0
        return int(self.exp[(int(self.log[a]) * e) % self.order])

    # vectorised arithmetic on integer arrays

    def vmul(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp[self.log[a] + self.log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def vscale(self, a, s: int) -> np.ndarray:
        """Multiply every entry of ``a`` by the scalar ``s``."""
        a = np.asarray(a, dtype=np.int64)
        if s == 0:
            return np.zeros_like(a)
        if s == 1:
            return a.copy()
        out = self.exp[self.log[a] + self.log[s]]
        return np.where(a == 0, 0, out)

    def vpow(self, a: int, n: int) -> np.ndarray:
        """Powers a^0, a^1, ..., a^(n-1)."""
        if a == 0:
            out = np.zeros(n, dtype=np.int64)
            if n:
                out[0] = 1
            return out
        idx = (int(self.log[a]) * np.arange(n)) % self.order
        return self.exp[idx].copy()


@lru_cache(maxsize=None)
def get_field(m: int) -> GF:
    """Shared field instance for the built-in modulus."""
    return GF(m)


# univariate polynomials

def poly_trim(f: Sequence[int]) -> Poly:
    f = list(f)
    while f and f[-1] == 0:
        f.pop()
    return f


def poly_degree(f: Sequence[int]) -> int:
    """Degree of ``f``; -1 for the zero polynomial."""
    return len(poly_trim(f)) - 1


def poly_eval(gf: GF, f: Sequence[int], x: int) -> int:
    """Evaluate ``f`` at ``x`` with Horner's rule."""
    gf.check(x)
    acc = 0
    for c in reversed(f):
        acc = gf.mul(acc, x) ^ gf.check(c)
    return acc


def poly_add(f: Sequence[int], g: Sequence[int]) -> Poly:
    n = max(len(f), len(g))
    out = [0] * n
    for i, c in enumerate(f):
        out[i] ^= c
    for i, c in enumerate(g):
        out[i] ^= c
    return poly_trim(out)


def poly_mul(gf: GF, f: Sequence[int], g: Sequence[int]) -> Poly:
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a == 0:
            continue
        for j, b in enumerate(g):
            out[i + j] ^= gf.mul(a, b)
    return poly_trim(out)


def poly_scale(gf: GF, f: Sequence[int], s: int) -> Poly:
    return poly_trim(gf.mul(c, s) for c in f)


# bivariate polynomials

class BivariatePolynomial:
    """Sparse polynomial in x and y over a binary extension field.

    ``coeffs`` maps ``(deg_x, deg_y)`` to a nonzero field element.
    """

    __slots__ = ("gf", "coeffs")

    def __init__(self, gf: GF, coeffs: Dict[Tuple[int, int], int] | None = None):
        self.gf = gf
        self.coeffs = {k: v for k, v in (coeffs or {}).items() if v}

    @classmethod
    def from_array(cls, gf: GF, arr: np.ndarray) -> "BivariatePolynomial":
        """Build from a dense array indexed ``[deg_y, deg_x]``."""
        ys, xs = np.nonzero(arr)
        return cls(gf, {(int(i), int(j)): int(arr[j, i]) for j, i in zip(ys, xs)})

    def to_array(self) -> np.ndarray:
        """Dense array indexed ``[deg_y, deg_x]``."""
        if not self.coeffs:
            return np.zeros((1, 1), dtype=np.int64)
        dx = max(i for i, _ in self.coeffs) + 1
        dy = max(j for _, j in self.coeffs) + 1
        arr = np.zeros((dy, dx), dtype=np.int64)
        for (i, j), c in self.coeffs.items():
            arr[j, i] = c
        return arr

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def y_degree(self) -> int:
        return max((j for _, j in self.coeffs), default=-1)

    def __eq__(self, other):
        return (
            isinstance(other, BivariatePolynomial)
            and self.gf == other.gf
            and self.coeffs == other.coeffs
        )

    def __repr__(self):
        terms = " + ".join(f"{c}*x^{i}*y^{j}" for (i, j), c in sorted(self.coeffs.items()))
        return f"BivariatePolynomial({terms or '0'})"

    def __add__(self, other: "BivariatePolynomial") -> "BivariatePolynomial":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) ^ v
        return BivariatePolynomial(self.gf, out)

    def __mul__(self, other: "BivariatePolynomial") -> "BivariatePolynomial":
        gf = self.gf
        out: Dict[Tuple[int, int], int] = {}
        for (i1, j1), a in self.coeffs.items():
            for (i2, j2), b in other.coeffs.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0) ^ gf.mul(a, b)
        return BivariatePolynomial(gf, out)

    def evaluate(self, x: int, y: int) -> int:
        gf = self.gf
        acc = 0
        for (i, j), c in self.coeffs.items():
            acc ^= gf.mul(c, gf.mul(gf.pow(x, i), gf.pow(y, j)))
        return acc

    def hasse(self, a: int, b: int, x: int, y: int) -> int:
        """Hasse derivative of order (a, b) evaluated at (x, y).

        Binomial coefficients are reduced mod 2 (Lucas: C(i, a) is odd iff
        ``a & i == a``).
        """
        gf = self.gf
        acc = 0
        for (i, j), c in self.coeffs.items():
            if i < a or j < b or (i & a) != a or (j & b) != b:
                continue
            acc ^= gf.mul(c, gf.mul(gf.pow(x, i - a), gf.pow(y, j - b)))
        return acc

    def substitute_y(self, f: Sequence[int]) -> Poly:
        """Univariate polynomial Q(x, f(x))."""
        gf = self.gf
        by_y: Dict[int, Poly] = {}
        for (i, j), c in self.coeffs.items():
            row = by_y.setdefault(j, [])
            if len(row) <= i:
                row.extend([0] * (i + 1 - len(row)))
            row[i] ^= c
        out: Poly = []
        fpow: Poly = [1]
        for j in range(self.y_degree + 1):
            if j in by_y:
                out = poly_add(out, poly_mul(gf, by_y[j], fpow))
            fpow = poly_mul(gf, fpow, f)
        return out


def weighted_degree(q: BivariatePolynomial, k_O: int) -> int:
    """(1, k_O - 1)-weighted degree: max of deg_x + (k_O - 1) * deg_y over monomials."""
    if q.is_zero():
        raise FieldError("weighted degree of the zero polynomial is undefined")
    if k_O < 1:
        raise ValueError("k_O must be positive")
    w = k_O - 1
    return max(i + w * j for i, j in q.coeffs)


def linear_factor(gf: GF, f: Iterable[int]) -> BivariatePolynomial:
    """The polynomial y - f(x)."""
    coeffs = {(i, 0): c for i, c in enumerate(f) if c}
    coeffs[(0, 1)] = 1
    return BivariatePolynomial(gf, coeffs)
