"""Odd-only, bit-packed segmented sieve kernels (numba).

Bit ``i`` of the global bitmap stands for the odd number ``2i + 1``; a set
bit marks a composite (or 1).  Segments are ``64 * words`` bits long and
always start at a multiple of 64, so the 3*5*7*11*13 pre-sieve pattern
(15015 words, coprime to 64) can be copied in at a word offset.
"""

from __future__ import annotations

import math

import numba
import numpy as np

PRESIEVE_PRIMES = (3, 5, 7, 11, 13)
PATTERN_WORDS = 3 * 5 * 7 * 11 * 13
FIRST_SIEVING_PRIME = 17


def small_primes(limit: int) -> np.ndarray:
    """All primes ``<= limit`` by a plain byte sieve (used for base primes)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=np.bool_)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.nonzero(flags)[0].astype(np.int64)


def _build_pattern() -> np.ndarray:
    bits = np.zeros(PATTERN_WORDS * 64, dtype=np.bool_)
    idx = np.arange(PATTERN_WORDS * 64, dtype=np.int64)
    n = 2 * idx + 1
    for p in PRESIEVE_PRIMES:
        bits |= n % p == 0
    # bit i of word w is index 64 w + i on a little-endian host
    packed = np.packbits(bits, bitorder="little")
    return packed.view("<u8").astype(np.uint64)


PATTERN = _build_pattern()


@numba.njit(cache=True, inline="always")
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


@numba.njit(cache=True)
def _init_next(primes, g0):
    """Global index of the first multiple of each prime to cross off at or after ``g0``."""
    nxt = np.empty(primes.shape[0], dtype=np.int64)
    for j in range(primes.shape[0]):
        p = primes[j]
        start = (p * p - 1) // 2
        if start < g0:
            # odd multiples of p sit at indices (p - 1)/2 + k p
            r = (g0 - (p - 1) // 2) % p
            start = g0 if r == 0 else g0 + (p - r)
        nxt[j] = start
    return nxt


@numba.njit(cache=True)
def _fill_segment(words, g0, primes, nxt, pattern):
    n_words = words.shape[0]
    nbits = n_words * 64
    w0 = (g0 // 64) % pattern.shape[0]
    plen = pattern.shape[0]
    for w in range(n_words):
        words[w] = pattern[(w0 + w) % plen]
    if g0 == 0:
        # 1 is not prime; the pre-sieve primes themselves are
        words[0] |= np.uint64(1)
        for p in (3, 5, 7, 11, 13):
            i = (p - 1) // 2
            words[i >> 6] &= ~(np.uint64(1) << np.uint64(i & 63))
    for j in range(primes.shape[0]):
        p = primes[j]
        i = nxt[j] - g0
        while i < nbits:
            words[i >> 6] |= np.uint64(1) << np.uint64(i & 63)
            i += p
        nxt[j] = i + g0


@numba.njit(cache=True)
def _zeros_prefix(words, nbits):
    """Number of zero (prime) bits among the first ``nbits`` bits."""
    full = nbits >> 6
    total = 0
    for w in range(full):
        total += 64 - _popcount(words[w])
    rem = nbits & 63
    if rem:
        mask = (np.uint64(1) << np.uint64(rem)) - np.uint64(1)
        total += rem - _popcount(words[full] & mask)
    return total


@numba.njit(cache=True, parallel=True)
def segment_counts(seg_lo, seg_hi, n_words, primes, pattern, n_chunks):
    """Zero-bit count of every full segment ``k`` in ``[seg_lo, seg_hi)``.

    Segments are split into ``n_chunks`` contiguous runs, each with its own
    buffer and crossing-off state, so the result does not depend on the
    number of workers.
    """
    n_seg = seg_hi - seg_lo
    out = np.zeros(n_seg, dtype=np.int64)
    nbits = n_words * 64
    per = (n_seg + n_chunks - 1) // n_chunks
    for c in numba.prange(n_chunks):
        a = seg_lo + c * per
        b = min(seg_hi, a + per)
        if a >= b:
            continue
        words = np.empty(n_words, dtype=np.uint64)
        nxt = _init_next(primes, a * nbits)
        for k in range(a, b):
            _fill_segment(words, k * nbits, primes, nxt, pattern)
            out[k - seg_lo] = _zeros_prefix(words, nbits)
    return out


@numba.njit(cache=True)
def sieve_one_segment(k, n_words, primes, pattern):
    words = np.empty(n_words, dtype=np.uint64)
    nbits = n_words * 64
    nxt = _init_next(primes, k * nbits)
    _fill_segment(words, k * nbits, primes, nxt, pattern)
    return words


@numba.njit(cache=True)
def primes_from_words(words, g0, max_index):
    """Odd primes ``2i + 1`` for the zero bits ``i`` of a segment with ``i <= max_index``."""
    n_words = words.shape[0]
    out = np.empty(n_words * 64, dtype=np.int64)
    m = 0
    for w in range(n_words):
        x = ~words[w]
        while x:
            low = x & (~x + np.uint64(1))
            b = _popcount(low - np.uint64(1))
            i = g0 + w * 64 + b
            if i > max_index:
                return out[:m]
            out[m] = 2 * i + 1
            m += 1
            x ^= low
    return out[:m]


@numba.njit(cache=True)
def window_flags(a, b, primes):
    """Primality flags for every integer in ``[a, b]`` (plain sieve over the window)."""
    n = b - a + 1
    flags = np.ones(n, dtype=np.bool_)
    for v in range(a, min(b, 1) + 1):
        flags[v - a] = False
    if a <= 2 <= b:
        flags[2 - a] = True
    for j in range(primes.shape[0]):
        p = primes[j]
        if p * p > b:
            break
        start = max(p * p, ((a + p - 1) // p) * p)
        for m in range(start, b + 1, p):
            flags[m - a] = False
    return flags


@numba.njit(cache=True)
def audit_kernel(limit, n_words, primes, pattern, c1, inv8pi):
    """Float-path maximum of ``|theta(x) - x| / bound(x)`` over integers ``3 <= x <= limit``.

    Evaluated at ``x = p - 1`` (just before each prime ``p``) and at ``x = p``.
    ``theta`` is summed with Neumaier compensation.  Returns
    ``(max_ratio, argmax, theta_at_argmax, primes_seen)``.
    """
    s = math.log(2.0)
    comp = 0.0
    best = -1.0
    best_x = 0
    best_theta = 0.0
    nbits = n_words * 64
    last_index = (limit - 1) // 2
    n_seg = last_index // nbits + 1
    words = np.empty(n_words, dtype=np.uint64)
    nxt = _init_next(primes, 0)
    count = 1
    for k in range(n_seg):
        g0 = k * nbits
        _fill_segment(words, g0, primes, nxt, pattern)
        ps = primes_from_words(words, g0, last_index)
        for t in range(ps.shape[0]):
            p = ps[t]
            theta = s + comp
            x = p - 1
            if x >= 4:
                bound = c1 * x if x < 599 else math.sqrt(x) * math.log(x) ** 2 * inv8pi
                r = abs(theta - x) / bound
                if r > best:
                    best, best_x, best_theta = r, x, theta
            lg = math.log(p)
            tsum = s + lg
            if abs(s) >= abs(lg):
                comp += (s - tsum) + lg
            else:
                comp += (lg - tsum) + s
            s = tsum
            count += 1
            theta = s + comp
            x = p
            bound = c1 * x if x < 599 else math.sqrt(x) * math.log(x) ** 2 * inv8pi
            r = abs(theta - x) / bound
            if r > best:
                best, best_x, best_theta = r, x, theta
    theta = s + comp
    x = limit
    if x >= 3:
        bound = c1 * x if x < 599 else math.sqrt(x) * math.log(x) ** 2 * inv8pi
        r = abs(theta - x) / bound
        if r > best:
            best, best_x, best_theta = r, x, theta
    return best, best_x, best_theta, count
