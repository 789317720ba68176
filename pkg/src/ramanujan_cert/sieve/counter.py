"""Exact pi(x) and theta(x), Ramanujan checks at integers, and the theta-bound audit.

A :class:`PrimeCounter` keeps a table of prime counts at segment
boundaries, so ``pi(x)`` costs one re-sieved segment once the table
reaches ``x``.  The table can be persisted as a resumable checkpoint.
"""

from __future__ import annotations

import csv
import io
import math
import os
import re
import struct
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import gmpy2
import numba
import numpy as np
from mpmath import libmp

from ..errors import CertificationError, DomainError, ResourceLimit, UndecidedFloor
from ..numerics import CertReal, PrecisionContext, e, ln2, log
from ..theta_bound import theta_gap_bound
from . import kernel as K

# the default TBB layer warns about its version; workqueue is always there
numba.config.THREADING_LAYER = "workqueue"

DEFAULT_CEILING = 10**11
DEFAULT_MEMORY_BUDGET = 256 * 2**20
MEMORY_ENV = "RAMANUJAN_CERT_MEMORY_BUDGET"
DEFAULT_SEGMENT_WORDS = 16384
# segments counted per batch between checkpoint writes
BATCH_SEGMENTS = 512
FLOOR_RETRIES = 4
CHECKPOINT_MAGIC = "ramanujan-cert-sieve-checkpoint"
CHECKPOINT_VERSION = 1
THETA_FRACTION_BITS = 64
_ROW = struct.Struct("<QQB16s16s")
FLOOR_CONVENTION = "pi(x/alpha) is evaluated as pi(floor(x/alpha)) with a certified floor"
CSV_COLUMNS = ("x", "pi_x", "floor_x_over_alpha", "pi_floor", "lhs", "rhs_lo", "rhs_hi", "holds")
# the float fast path in scans needs |error of x/alpha| well below this
_FLOOR_MARGIN = 1e-3
_RHS_MARGIN = 1e-12


class UndecidedComparison(CertificationError):
    """The enclosure of the right-hand side contains the left-hand side."""


def parse_bytes(text) -> int:
    """``"256M"``, ``"2G"``, ``"1048576"`` -> bytes."""
    if isinstance(text, int):
        return text
    m = re.fullmatch(r"\s*(\d+)\s*([kKmMgG]?)i?[bB]?\s*", str(text))
    if not m:
        raise ValueError(f"cannot parse a byte count from {text!r}")
    scale = {"": 1, "k": 2**10, "m": 2**20, "g": 2**30}[m.group(2).lower()]
    return int(m.group(1)) * scale


def default_memory_budget() -> int:
    env = os.environ.get(MEMORY_ENV)
    return parse_bytes(env) if env else DEFAULT_MEMORY_BUDGET


@dataclass(frozen=True)
class PrimeCountResult:
    x: int
    pi: int
    theta: CertReal


@dataclass(frozen=True)
class CheckResult:
    x: int
    alpha: CertReal
    lhs: int
    rhs: CertReal
    holds: bool | None
    pi_x: int
    floor_x_over_alpha: int
    pi_floor: int
    status: str = "decided"


@dataclass(frozen=True)
class AuditReport:
    """Maximum of ``|theta(x) - x| / (a(x) x / log^5 x)`` over integers ``2 <= x <= limit``.

    ``max_ratio`` is attained at ``argmax``.  ``rest_ratio`` encloses the
    maximum over ``3 <= x <= limit``, at ``rest_argmax``; ``rest_exact`` is
    the same ratio recomputed with an exact theta.
    """

    limit: int
    max_ratio: CertReal
    argmax: int
    rest_ratio: CertReal | None
    rest_argmax: int | None
    rest_exact: CertReal | None
    primes_seen: int

    @property
    def holds(self) -> bool:
        return bool(self.max_ratio.lo <= 1) and (self.rest_ratio is None or self.rest_ratio.hi < 1)


def _to_fixed(value, rnd) -> int:
    return int(libmp.to_int(libmp.mpf_shift(value, THETA_FRACTION_BITS), rnd))


def _from_fixed(lo: int, hi: int, prec: int) -> CertReal:
    return CertReal._make(
        libmp.from_man_exp(lo, -THETA_FRACTION_BITS, prec, libmp.round_floor),
        libmp.from_man_exp(hi, -THETA_FRACTION_BITS, prec, libmp.round_ceiling),
        prec,
    )


def _product(values: np.ndarray):
    items = [gmpy2.mpz(v) for v in values.tolist()]
    if not items:
        return gmpy2.mpz(1)
    while len(items) > 1:
        nxt = [items[i] * items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def log_of_product(values: np.ndarray, prec: int) -> CertReal:
    """``sum log p`` over ``values`` as one directed-rounded log of the exact product."""
    p = int(_product(values))
    if p == 1:
        return CertReal(0, prec=prec)
    lo = libmp.mpf_log(libmp.from_int(p, prec, libmp.round_floor), prec, libmp.round_floor)
    hi = libmp.mpf_log(libmp.from_int(p, prec, libmp.round_ceiling), prec, libmp.round_ceiling)
    return CertReal._make(lo, hi, prec)


class PrimeCounter:
    """Segmented, odd-only prime counter with a cumulative boundary table.

    ``segment_words`` 64-bit words make one segment (``128 * segment_words``
    integers).  Results do not depend on it.
    """

    def __init__(self, memory_budget: int | None = None, ceiling: int = DEFAULT_CEILING,
                 segment_words: int = DEFAULT_SEGMENT_WORDS, checkpoint: str | Path | None = None,
                 ctx: PrecisionContext | None = None, workers: int | None = None):
        self.memory_budget = default_memory_budget() if memory_budget is None else parse_bytes(memory_budget)
        self.ceiling = ceiling
        self.segment_words = segment_words
        self.nbits = 64 * segment_words
        self.workers = workers or numba.get_num_threads()
        self.ctx = ctx or PrecisionContext()
        if self.segment_words <= 0 or self.segment_words * 8 * self.workers > self.memory_budget:
            raise ResourceLimit(
                f"{self.workers} segment buffers of {self.segment_words * 8} bytes exceed "
                f"the memory budget of {self.memory_budget} bytes"
            )
        self._lock = threading.RLock()
        # _cum[k] = number of prime (zero) bits in segments [0, k)
        self._cum = np.zeros(1, dtype=np.int64)
        # _theta[k] = sum of log p over odd primes in segments [0, k), where known
        self._theta: list[CertReal] = [CertReal(0, prec=self._theta_prec)]
        self._base = np.zeros(0, dtype=np.int64)
        self._base_limit = 0
        self._last = (-1, None)
        self.checkpoint = Path(checkpoint) if checkpoint else None
        if self.checkpoint and self.checkpoint.exists():
            self._load_checkpoint()

    @property
    def _theta_prec(self) -> int:
        return self.ctx.prec + 32

    # ---------------------------------------------------------------- basics
    def _check_x(self, x: int):
        if isinstance(x, bool) or not isinstance(x, (int, np.integer)):
            raise TypeError("x must be an exact integer")
        if x > self.ceiling:
            raise ResourceLimit(f"x = {x} exceeds the sieve ceiling {self.ceiling}")

    def _base_primes(self, seg_end: int) -> np.ndarray:
        """Sieving primes (>= 17) good for every segment below ``seg_end``."""
        top = 2 * seg_end * self.nbits + 1
        need = math.isqrt(top) + 1
        if need > self._base_limit:
            limit = max(need, 2 * self._base_limit, 1024)
            ps = K.small_primes(limit)
            self._base = ps[ps >= K.FIRST_SIEVING_PRIME]
            self._base_limit = limit
        return self._base

    def _segment(self, k: int) -> np.ndarray:
        if self._last[0] != k:
            words = K.sieve_one_segment(k, self.segment_words, self._base_primes(k + 1), K.PATTERN)
            self._last = (k, words)
        return self._last[1]

    def _extend(self, k: int):
        """Make ``_cum[k]`` available."""
        with self._lock:
            while len(self._cum) <= k:
                lo = len(self._cum) - 1
                hi = min(k, lo + BATCH_SEGMENTS)
                counts = K.segment_counts(lo, hi, self.segment_words, self._base_primes(hi),
                                          K.PATTERN, self.workers)
                self._cum = np.concatenate([self._cum, self._cum[-1] + np.cumsum(counts)])
                if self.checkpoint:
                    self.save_checkpoint()

    # -------------------------------------------------------------------- pi
    def pi(self, x: int) -> int:
        self._check_x(x)
        x = int(x)
        if x < 2:
            return 0
        idx = (x - 1) // 2
        k = idx // self.nbits
        self._extend(k)
        with self._lock:
            words = self._segment(k)
            return 1 + int(self._cum[k]) + int(K._zeros_prefix(words, idx - k * self.nbits + 1))

    def primes_between(self, a: int, b: int) -> np.ndarray:
        """All primes in ``[a, b]``."""
        a, b = max(int(a), 2), int(b)
        if b < a:
            return np.zeros(0, dtype=np.int64)
        base = K.small_primes(math.isqrt(b) + 1)
        flags = K.window_flags(a, b, base)
        return np.nonzero(flags)[0].astype(np.int64) + a

    # ----------------------------------------------------------------- theta
    def _segment_primes(self, k: int, max_index: int) -> np.ndarray:
        words = self._segment(k)
        return K.primes_from_words(words, k * self.nbits, max_index)

    def theta(self, x: int, prec: int | None = None) -> CertReal:
        """Enclosure of ``theta(x) = sum_{p <= x} log p``."""
        self._check_x(x)
        x = int(x)
        prec = prec or self.ctx.prec
        if x < 2:
            return CertReal(0, prec=prec)
        wp = max(prec + 32, self._theta_prec)
        idx = (x - 1) // 2
        k = idx // self.nbits
        with self._lock:
            while len(self._theta) <= k:
                j = len(self._theta) - 1
                self._base_primes(j + 1)
                part = log_of_product(self._segment_primes(j, (j + 1) * self.nbits - 1), wp)
                self._theta.append(self._theta[-1] + part)
            head = self._theta[k]
            if head.prec < wp:
                # stored at a lower precision (e.g. from a checkpoint): recompute
                head = CertReal(0, prec=wp)
                for j in range(k):
                    head = head + log_of_product(self._segment_primes(j, (j + 1) * self.nbits - 1), wp)
            self._base_primes(k + 1)
            tail = log_of_product(self._segment_primes(k, idx), wp)
        return (ln2(wp) + head + tail).with_prec(prec)

    # ------------------------------------------------------------ checkpoint
    def save_checkpoint(self, path: str | Path | None = None):
        path = Path(path or self.checkpoint)
        header = (
            f"{CHECKPOINT_MAGIC}\nversion {CHECKPOINT_VERSION}\n"
            f"segment_words {self.segment_words}\ntheta_fraction_bits {THETA_FRACTION_BITS}\n"
            f"rows {len(self._cum)}\n\n"
        )
        buf = io.BytesIO()
        buf.write(header.encode("ascii"))
        for k, c in enumerate(self._cum.tolist()):
            if k < len(self._theta):
                t = self._theta[k]
                lo = _to_fixed(t._lo, libmp.round_floor)
                hi = _to_fixed(t._hi, libmp.round_ceiling)
                row = _ROW.pack(k * self.nbits, c, 1, lo.to_bytes(16, "little"), hi.to_bytes(16, "little"))
            else:
                row = _ROW.pack(k * self.nbits, c, 0, bytes(16), bytes(16))
            buf.write(row)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(buf.getvalue())
        os.replace(tmp, path)

    def _load_checkpoint(self):
        data = self.checkpoint.read_bytes()
        head, sep, body = data.partition(b"\n\n")
        lines = head.decode("ascii").splitlines()
        if not sep or not lines or lines[0] != CHECKPOINT_MAGIC:
            raise CertificationError(f"{self.checkpoint} is not a sieve checkpoint")
        meta = dict(line.split(" ", 1) for line in lines[1:])
        if int(meta["version"]) != CHECKPOINT_VERSION:
            raise CertificationError(f"unsupported checkpoint version {meta['version']}")
        if int(meta["segment_words"]) != self.segment_words:
            raise CertificationError(
                f"checkpoint segment size {meta['segment_words']} != {self.segment_words}"
            )
        if int(meta["theta_fraction_bits"]) != THETA_FRACTION_BITS:
            raise CertificationError("checkpoint theta precision does not match")
        rows = int(meta["rows"])
        if len(body) != rows * _ROW.size:
            raise CertificationError("truncated checkpoint")
        cum, theta = [], []
        theta_ok = True
        for k in range(rows):
            base, c, has, lo, hi = _ROW.unpack_from(body, k * _ROW.size)
            if base != k * self.nbits:
                raise CertificationError("checkpoint rows are out of order")
            cum.append(c)
            if has and theta_ok:
                theta.append(_from_fixed(int.from_bytes(lo, "little"), int.from_bytes(hi, "little"),
                                         self._theta_prec))
            else:
                theta_ok = False
        self._cum = np.array(cum, dtype=np.int64)
        self._theta = theta or [CertReal(0, prec=self._theta_prec)]


_default: PrimeCounter | None = None


def default_counter() -> PrimeCounter:
    global _default
    if _default is None:
        _default = PrimeCounter()
    return _default


def sieve_pi_theta(x: int, counter: PrimeCounter | None = None, prec: int | None = None) -> PrimeCountResult:
    counter = counter or default_counter()
    if isinstance(x, bool) or not isinstance(x, int):
        raise TypeError("x must be an exact integer")
    if x < 2:
        raise DomainError("sieve_pi_theta needs x >= 2")
    return PrimeCountResult(x, counter.pi(x), counter.theta(x, prec))


# ------------------------------------------------------------------ checks
def _alpha_source(alpha):
    """A function ``prec -> CertReal`` and whether raising ``prec`` tightens it."""
    if alpha is None or (isinstance(alpha, str) and alpha.strip().lower() == "e"):
        return e, True
    if isinstance(alpha, CertReal):
        return (lambda prec: alpha), False
    if isinstance(alpha, float):
        alpha = Fraction(alpha)
    if isinstance(alpha, str):
        alpha = Fraction(alpha.strip())
    value = Fraction(alpha)
    return (lambda prec: CertReal(value, prec=prec)), True


def certified_floor(x: int, alpha, prec: int) -> tuple[int, CertReal]:
    """``floor(x/alpha)`` from an enclosure, raising the precision while it straddles."""
    source, refinable = _alpha_source(alpha)
    if isinstance(alpha, (int, float, Fraction, str)) and not (isinstance(alpha, str) and alpha.strip().lower() == "e"):
        q = Fraction(alpha.strip() if isinstance(alpha, str) else alpha)
        if q <= 0:
            raise DomainError("alpha must be positive")
        # exact rationals need no enclosure for the floor
        return (x * q.denominator) // q.numerator, source(prec)
    for attempt in range(FLOOR_RETRIES + 1):
        a = source(prec << attempt)
        if not a > 0:
            raise DomainError("alpha must be positive")
        q = CertReal(x, prec=a.prec) / a
        lo, hi = int(libmp.to_int(q._lo, libmp.round_floor)), int(libmp.to_int(q._hi, libmp.round_floor))
        if lo == hi:
            return lo, a
        if not refinable:
            break
    raise UndecidedFloor(f"the enclosure of {x}/alpha contains an integer")


def _decide(x: int, pi_x: int, f: int, pi_f: int, a: CertReal) -> CheckResult:
    prec = a.prec
    lhs = pi_x * pi_x
    if pi_f == 0:
        rhs = CertReal(0, prec=prec)
    else:
        xc = CertReal(x, prec=prec)
        rhs = a * xc / log(xc) * pi_f
    if lhs < rhs.lo:
        holds, status = True, "decided"
    elif lhs >= rhs.hi:
        holds, status = False, "decided"
    else:
        holds, status = None, "undecided"
    return CheckResult(x, a, lhs, rhs, holds, pi_x, f, pi_f, status)


def check_point(x: int, alpha=None, counter: PrimeCounter | None = None,
                ctx: PrecisionContext | None = None) -> CheckResult:
    """Ramanujan's inequality ``pi(x)^2 < (alpha x/log x) pi(x/alpha)`` at the integer ``x``.

    ``alpha`` defaults to ``e``; it may be a CertReal, an exact rational, or
    the string ``"e"``.
    """
    if isinstance(x, bool) or not isinstance(x, int):
        raise TypeError("x must be an exact integer")
    if x < 2:
        raise DomainError("check_point needs x >= 2")
    ctx = ctx or PrecisionContext()
    counter = counter or default_counter()
    f, a = certified_floor(x, alpha, ctx.prec)
    return _decide(x, counter.pi(x), f, counter.pi(f), a)


@dataclass
class ScanReport:
    lo: int
    hi: int
    failing: list[int] = field(default_factory=list)
    undecided: list[int] = field(default_factory=list)
    rows: list[CheckResult] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


def scan(lo: int, hi: int, alpha=None, counter: PrimeCounter | None = None,
         ctx: PrecisionContext | None = None, keep_rows: bool = False,
         chunk: int | None = None) -> ScanReport:
    """Every integer of ``[lo, hi]`` at which the inequality fails.

    Windows of primality flags around ``[lo, hi]`` and around
    ``[lo/alpha, hi/alpha]`` carry pi incrementally from two counter
    queries per chunk.  Points are decided in floating point when both
    the floor of ``x/alpha`` and the comparison clear generous error
    margins, and with interval arithmetic otherwise (or when
    ``keep_rows`` asks for certified rows).
    """
    for v in (lo, hi):
        if isinstance(v, bool) or not isinstance(v, int):
            raise TypeError("scan bounds must be exact integers")
    if not 2 <= lo <= hi:
        raise DomainError("scan needs 2 <= lo <= hi")
    ctx = ctx or PrecisionContext()
    counter = counter or default_counter()
    if hi > counter.ceiling:
        raise ResourceLimit(f"hi = {hi} exceeds the sieve ceiling {counter.ceiling}")
    source, _ = _alpha_source(alpha)
    a_cert = source(ctx.prec)
    if not a_cert > 0:
        raise DomainError("alpha must be positive")
    a_f = float(a_cert.mid)
    fast = (not keep_rows and float(a_cert.width) <= 1e-15 * a_f
            and hi / a_f * 4e-16 < _FLOOR_MARGIN / 4)
    # bytes per integer across the two flag windows and the float work arrays
    chunk = chunk or max(1024, min(1 << 22, counter.memory_budget // 64))
    report = ScanReport(lo, hi, metadata={
        "floor_convention": FLOOR_CONVENTION,
        "alpha": list(a_cert.to_decimal_pair(ctx.digits, outward=True)),
        "digits": ctx.digits,
    })
    base = K.small_primes(math.isqrt(hi) + 2)
    pi_prev = counter.pi(lo - 1)
    a = lo
    while a <= hi:
        b = min(hi, a + chunk - 1)
        fa, _ = certified_floor(a, alpha, ctx.prec) if not fast else (int(a / a_f), None)
        fb, _ = certified_floor(b, alpha, ctx.prec) if not fast else (int(b / a_f), None)
        wa, wb = max(fa - 2, 0), fb + 2
        pi_before_w = counter.pi(wa - 1) if wa >= 1 else 0
        flags_x = K.window_flags(a, b, base)
        pi_x = pi_prev + np.cumsum(flags_x, dtype=np.int64)
        flags_f = K.window_flags(wa, wb, base)
        pi_w = pi_before_w + np.cumsum(flags_f, dtype=np.int64)
        pending = np.arange(a, b + 1, dtype=np.int64)
        if fast:
            xs = pending.astype(np.float64)
            q = xs / a_f
            fl = np.floor(q)
            frac = q - fl
            safe_floor = (frac > _FLOOR_MARGIN) & (frac < 1 - _FLOOR_MARGIN)
            fi = fl.astype(np.int64)
            pf = np.where(safe_floor, pi_w[np.clip(fi - wa, 0, len(pi_w) - 1)], 0)
            rhs = a_f * xs / np.log(xs) * pf
            lhs = pi_x.astype(np.float64) ** 2
            yes = safe_floor & (lhs < rhs * (1 - _RHS_MARGIN))
            no = safe_floor & (lhs > rhs * (1 + _RHS_MARGIN))
            report.failing.extend(int(v) for v in pending[no])
            pending = pending[~(yes | no)]
        for x in pending.tolist():
            f, a_used = certified_floor(x, alpha, ctx.prec)
            if not wa <= f <= wb:
                raise CertificationError(f"floor({x}/alpha) = {f} left the sieve window")
            res = _decide(x, int(pi_x[x - a]), f, int(pi_w[f - wa]) if f >= 1 else 0, a_used)
            if keep_rows:
                report.rows.append(res)
            if res.holds is False:
                report.failing.append(x)
            elif res.holds is None:
                report.undecided.append(x)
        pi_prev = int(pi_x[-1])
        a = b + 1
    report.failing.sort()
    return report


def scan_range(lo: int, hi: int, alpha=None, counter: PrimeCounter | None = None,
               ctx: PrecisionContext | None = None) -> list[int]:
    """Failing integers of ``[lo, hi]``; an undecided point is an error, never a guess."""
    report = scan(lo, hi, alpha, counter, ctx)
    if report.undecided:
        raise UndecidedComparison(f"undecided at x = {report.undecided[:10]}")
    return report.failing


def write_csv(rows, out, digits: int = 30):
    """CSV export of check results, one row per integer."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        lo, hi = r.rhs.to_decimal_pair(digits, outward=True)
        holds = "undecided" if r.holds is None else str(r.holds).lower()
        writer.writerow([r.x, r.pi_x, r.floor_x_over_alpha, r.pi_floor, r.lhs, lo, hi, holds])


# ------------------------------------------------------------------- audit
def _ratio(theta: CertReal, x: int, ctx: PrecisionContext) -> CertReal:
    return abs(theta - x) / theta_gap_bound(x, ctx)


def audit_theta_bound(limit: int, counter: PrimeCounter | None = None,
                      ctx: PrecisionContext | None = None) -> AuditReport:
    """Largest ``|theta(x) - x| / bound(x)`` over integers ``2 <= x <= limit``.

    Between consecutive primes theta is constant, and on B1 and B2 the ratio
    is monotone between jumps, so the integers ``p - 1`` and ``p`` (the two
    sides of each jump) carry the maximum over integers.  The float pass
    uses compensated summation; its enclosure assumes ``log`` and ``sqrt``
    are correct to one ulp.  x = 2 and the float maximizer are recomputed
    exactly.
    """
    if isinstance(limit, bool) or not isinstance(limit, int):
        raise TypeError("limit must be an exact integer")
    if limit < 2:
        raise DomainError("audit needs limit >= 2")
    ctx = ctx or PrecisionContext()
    counter = counter or default_counter()
    if limit > counter.ceiling:
        raise ResourceLimit(f"limit = {limit} exceeds the sieve ceiling {counter.ceiling}")
    if limit >= 10**26:
        raise ResourceLimit("the audit covers the B1 and B2 ranges only")
    at_two = _ratio(ln2(ctx.prec), 2, ctx)
    if limit < 3:
        return AuditReport(limit, at_two, 2, None, None, None, 1)
    base = K.small_primes(math.isqrt(2 * ((limit - 1) // 2 // counter.nbits + 1) * counter.nbits + 1) + 1)
    base = base[base >= K.FIRST_SIEVING_PRIME]
    c1 = float((2 - ln2(53)).mid) / 2
    best, best_x, _best_theta, count = K.audit_kernel(
        limit, counter.segment_words, base, K.PATTERN, c1, 1 / (8 * math.pi)
    )
    eps = 2.0**-52
    # per-log rounding plus the compensated-sum error, against the smallest bound
    d_theta = count * eps * math.log(limit) * 2 + 4 * eps * limit
    min_bound = 3 * c1
    slack = d_theta / min_bound + best * 1e-13
    rest = CertReal(max(best - slack, 0.0), best + slack, prec=ctx.prec)
    exact = _ratio(counter.theta(int(best_x), ctx.prec), int(best_x), ctx)
    if exact.hi < rest.lo or rest.hi < exact.lo:
        raise CertificationError("float audit pass disagrees with the exact recomputation")
    if rest.hi < at_two.lo:
        top, arg = at_two, 2
    elif at_two.hi < rest.lo:
        top, arg = exact, int(best_x)
    else:
        top, arg = CertReal.hull(at_two, rest), 2
    return AuditReport(limit, top, arg, rest, int(best_x), exact, int(count))
