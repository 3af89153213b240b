"""Counter-based Philox4x64-10 generator and Gaussian increments.

A trajectory's noise is a pure function of ``(key, step)``, so any subset of
trajectories or steps can be regenerated independently of scheduling.
The block function matches ``numpy.random.Philox`` bit for bit.
"""

from __future__ import annotations

import math

import numba
import numpy as np

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_MASK32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_TWO_M53 = 2.0**-53

# second key word used when splitting a master seed into trajectory seeds
_SPLIT_TAG = np.uint64(0x53504C4954524A31)


@numba.njit(cache=True, inline="always")
def _mulhilo(a, b):
    a_lo = a & _MASK32
    a_hi = a >> _S32
    b_lo = b & _MASK32
    b_hi = b >> _S32
    lo_lo = a_lo * b_lo
    hi_lo = a_hi * b_lo
    lo_hi = a_lo * b_hi
    hi_hi = a_hi * b_hi
    cross = (lo_lo >> _S32) + (hi_lo & _MASK32) + lo_hi
    hi = hi_hi + (hi_lo >> _S32) + (cross >> _S32)
    return hi, a * b


@numba.njit(cache=True)
def philox4x64(c0, c1, c2, c3, k0, k1):
    """Ten-round Philox block: four 64-bit words for counter ``(c0..c3)``."""
    for r in range(10):
        if r > 0:
            k0 = k0 + _W0
            k1 = k1 + _W1
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


@numba.njit(cache=True, inline="always")
def _box_muller(w0, w1):
    u1 = (np.float64(w0 >> _S11) + 0.5) * _TWO_M53
    u2 = np.float64(w1 >> _S11) * _TWO_M53
    r = math.sqrt(-2.0 * math.log(u1))
    return r * math.cos(2.0 * math.pi * u2), r * math.sin(2.0 * math.pi * u2)


@numba.njit(cache=True)
def gaussian_block(key, block):
    """Four standard normals for counter ``block`` under ``(key, 0)``."""
    w0, w1, w2, w3 = philox4x64(np.uint64(block), np.uint64(0), np.uint64(0), np.uint64(0),
                                key, np.uint64(0))
    z0, z1 = _box_muller(w0, w1)
    z2, z3 = _box_muller(w2, w3)
    return z0, z1, z2, z3


@numba.njit(cache=True)
def _gaussians(key, n):
    out = np.empty(n)
    for b in range((n + 3) // 4):
        z = gaussian_block(key, b)
        for k in range(4):
            i = 4 * b + k
            if i < n:
                out[i] = z[k]
    return out


def gaussians(key: int, n: int) -> np.ndarray:
    """Standard normals ``0..n-1`` of the stream keyed by ``key``; normal ``i`` uses block ``i // 4``."""
    return _gaussians(np.uint64(key), int(n))


@numba.njit(cache=True)
def _split(seed, a, i):
    return philox4x64(np.uint64(a), np.uint64(i), np.uint64(0), np.uint64(0), seed, _SPLIT_TAG)[0]


def split_seed(seed: int, *indices: int) -> int:
    """Derive a 64-bit child seed from ``seed`` and up to two indices."""
    if len(indices) > 2:
        raise ValueError("at most two indices")
    idx = list(indices) + [0] * (2 - len(indices))
    return int(_split(np.uint64(seed), np.uint64(idx[0]), np.uint64(idx[1])))


@numba.njit(cache=True)
def _split_many(seed, a, n):
    out = np.empty(n, dtype=np.uint64)
    for i in range(n):
        out[i] = _split(seed, a, np.uint64(i))
    return out


def trajectory_seeds(seed: int, angle_index: int, n: int) -> np.ndarray:
    """Child seeds for trajectories ``0..n-1`` at one angle index."""
    return _split_many(np.uint64(seed), np.uint64(angle_index), int(n))
