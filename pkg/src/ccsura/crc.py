"""Systematic CRC over bit sequences (MSB first), with a batch checker."""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

# Generator polynomials in normal form (x^h term implicit).
CRC_POLYS = {
    3: 0x3,          # CRC-3-GSM
    4: 0x3,          # CRC-4-ITU
    5: 0x05,         # CRC-5-USB
    6: 0x03,         # CRC-6-ITU
    7: 0x09,         # CRC-7-MMC
    8: 0x07,         # CRC-8-SMBUS
    10: 0x233,       # CRC-10-ATM
    11: 0x385,       # CRC-11-FlexRay
    12: 0x80F,       # CRC-12-3GPP
    13: 0x1CF5,      # CRC-13-BBC
    14: 0x0805,      # CRC-14-DARC
    15: 0x4599,      # CRC-15-CAN
    16: 0x1021,      # CRC-16-CCITT
    17: 0x1685B,     # CRC-17-CAN-FD
    21: 0x102899,    # CRC-21-CAN-FD
    24: 0x864CFB,    # CRC-24-OpenPGP
    30: 0x2030B9C7,  # CRC-30-CDMA
    32: 0x04C11DB7,  # CRC-32
}


def _poly(h: int) -> int:
    if h not in CRC_POLYS:
        raise ValueError(f"no CRC generator for h={h}; supported: {sorted(CRC_POLYS)}")
    return (1 << h) | CRC_POLYS[h]


def bits_to_int(bits: Sequence[int]) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | (int(b) & 1)
    return v


def int_to_bits(v: int, n: int) -> np.ndarray:
    if v >> n:
        raise ValueError(f"value does not fit in {n} bits")
    return np.array([(v >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.uint8)


def crc_remainder(value: int, n_bits: int, h: int) -> int:
    """Remainder of the n_bits-long word (as a polynomial) modulo the degree-h generator."""
    g = _poly(h)
    r = value
    for i in range(n_bits - 1, h - 1, -1):
        if (r >> i) & 1:
            r ^= g << (i - h)
    return r


def crc_attach(payload: Sequence[int], h: int) -> np.ndarray:
    """payload followed by h parity bits."""
    payload = np.asarray(payload, dtype=np.uint8)
    k = payload.size
    r = crc_remainder(bits_to_int(payload) << h, k + h, h)
    return np.concatenate([payload, int_to_bits(r, h)])


def crc_check(word: Sequence[int], h: int) -> bool:
    word = np.asarray(word, dtype=np.uint8)
    return crc_remainder(bits_to_int(word), word.size, h) == 0


@lru_cache(maxsize=None)
def _syndrome_matrix(n: int, h: int) -> np.ndarray:
    """Row i: remainder of x^(n-1-i) as h bits."""
    g = _poly(h)
    rows = np.zeros((n, h), dtype=np.float32)
    r = 1
    for deg in range(n):
        rows[n - 1 - deg] = int_to_bits(r, h)
        r <<= 1
        if r >> h:
            r ^= g
    return rows


def crc_check_batch(words: np.ndarray, h: int, chunk: int = 1 << 16) -> np.ndarray:
    """Vectorised ``crc_check`` over the rows of a 0/1 matrix."""
    words = np.asarray(words)
    S = _syndrome_matrix(words.shape[1], h)
    out = np.empty(words.shape[0], dtype=bool)
    for s in range(0, words.shape[0], chunk):
        syn = words[s:s + chunk].astype(np.float32) @ S
        out[s:s + chunk] = ~np.any(syn.astype(np.int64) & 1, axis=1)
    return out
