"""Desk-scale ground truth for the factor statistics of n^3+2.

Factorises every n^3+2 over a range (x_min, x_max], counts prime factors
above an explicit threshold, counts cubic-congruence roots nu(d), and checks
the prime-sum estimate sum_{p<=x} nu(p) log p / p = log x + O(1).

The factorisation is sieve-driven: for each prime p in the root table with
roots of n^3+2 == 0 (mod p), the roots' arithmetic progressions are marked
across segments and p is divided out at the hits; the remaining cofactor has
at most three prime factors, all above the table limit, and is certified
prime or split. Segments are independent work units; counting runs can be
spread over processes and reduced by exact integer sums.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from math import isqrt
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple

from .errors import DomainError, FactorizationError

MAX_RANGE_TOP = 10**7  # values stay below 1e21+2, inside the certified MR range

# deterministic Miller-Rabin witness sets with their validity thresholds
_MR_LADDER = (
    (3_215_031_751, (2, 3, 5, 7)),
    (3_474_749_660_383, (2, 3, 5, 7, 11, 13)),
    (341_550_071_728_321, (2, 3, 5, 7, 11, 13, 17)),
    (3_825_123_056_546_413_051, (2, 3, 5, 7, 11, 13, 17, 19, 23)),
    (318_665_857_834_031_151_167_461, (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)),
)
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def sieve_primes(limit: int) -> list[int]:
    """All primes up to and including limit."""
    if limit < 2:
        return []
    flags = bytearray([1]) * (limit + 1)
    flags[0] = flags[1] = 0
    for p in range(2, isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = bytearray(len(range(p * p, limit + 1, p)))
    return [i for i in range(2, limit + 1) if flags[i]]


def is_certified_prime(n: int) -> bool:
    """Deterministic Miller-Rabin; valid for n below ~3.18e23."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    for bound, bases in _MR_LADDER:
        if n < bound:
            break
    else:
        raise DomainError(f"{n} is beyond the certified primality range")
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in bases:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# Roots of n^3 + 2 == 0 modulo primes and prime powers
# ---------------------------------------------------------------------------

def count_cubic_roots(p: int) -> int:
    """nu(p) for prime p without computing the roots themselves.

    For p = 2, 3 and p == 2 (mod 3) cubing is a bijection so nu(p) = 1; for
    p == 1 (mod 3) the count is 3 or 0 by the cubic-residue character of -2.
    """
    if p in (2, 3) or p % 3 == 2:
        return 1
    return 3 if pow(p - 2, (p - 1) // 3, p) == 1 else 0


def cube_roots_of_minus2(p: int) -> tuple[int, ...]:
    """All n mod p with n^3 + 2 == 0, for prime p.

    p == 2 (mod 3): the unique root is (-2)^((2p-1)/3). p == 1 (mod 3): if -2
    passes the cubic-residue test, one root is built by a discrete-log fixup
    inside the 3-Sylow subgroup and the other two follow by the cube roots of
    unity.
    """
    if p == 2:
        return (0,)
    if p == 3:
        return (1,)
    a = p - 2
    if p % 3 == 2:
        return (pow(a, (2 * p - 1) // 3, p),)
    if pow(a, (p - 1) // 3, p) != 1:
        return ()
    t, u = 0, p - 1
    while u % 3 == 0:
        t += 1
        u //= 3
    z = 2
    while pow(z, (p - 1) // 3, p) == 1:
        z += 1
    g = pow(z, u, p)  # order exactly 3^t
    x = pow(a, pow(3, -1, u), p)
    # e = x^3 / a lies in <g> and is a cube there; divide its cube root out
    e = x * x % p * x % p * pow(a, p - 2, p) % p
    gamma = pow(g, 3 ** (t - 1), p)
    w = 0
    cur = e
    for i in range(t):
        d = pow(cur, 3 ** (t - 1 - i), p)
        if d == 1:
            digit = 0
        elif d == gamma:
            digit = 1
        else:
            digit = 2
        if digit:
            w += digit * 3**i
            cur = cur * pow(g, 3**t - digit * 3**i, p) % p
    x = x * pow(g, (3**t - w) // 3, p) % p
    if x * x % p * x % p != a:
        raise DomainError(f"cube-root construction failed for p={p}")
    return tuple(sorted((x, x * gamma % p, x * gamma % p * gamma % p)))


def roots_mod_prime_power(p: int, e: int) -> tuple[int, ...]:
    """Roots of n^3 + 2 == 0 (mod p^e) by lifting the roots mod p.

    Non-singular roots (3r^2 invertible mod p, every p except 2 and 3) lift
    uniquely; the singular cases are lifted by direct scan of the p
    candidates per level.
    """
    if e < 1:
        raise DomainError(f"exponent must be positive, got {e}")
    roots: Iterable[int] = cube_roots_of_minus2(p)
    mod = p
    for _ in range(e - 1):
        nxt = mod * p
        lifted = []
        for r in roots:
            fr = r * r * r + 2
            df = 3 * r * r % p
            if df:
                step = (-(fr // mod) * pow(df, -1, p)) % p
                lifted.append(r + step * mod)
            else:
                for i in range(p):
                    cand = r + i * mod
                    if (cand * cand * cand + 2) % nxt == 0:
                        lifted.append(cand)
        roots = lifted
        mod = nxt
    return tuple(sorted(r % mod for r in roots))


def _trial_factor(d: int) -> dict[int, int]:
    out: dict[int, int] = {}
    for p in (2, 3):
        while d % p == 0:
            out[p] = out.get(p, 0) + 1
            d //= p
    f = 5
    while f * f <= d:
        for p in (f, f + 2):
            while d % p == 0:
                out[p] = out.get(p, 0) + 1
                d //= p
        f += 6
    if d > 1:
        out[d] = out.get(d, 0) + 1
    return out


def nu(d: int) -> int:
    """Number of n mod d with n^3 + 2 == 0 (mod d).

    Multiplicative over coprime parts (Chinese remainder), so d is factorised
    and the prime-power root counts are multiplied. Direct use is capped at
    d <= 1e9; factor larger d yourself and call nu_from_factors.
    """
    if not isinstance(d, int) or d < 1:
        raise DomainError(f"d must be a positive integer, got {d!r}")
    if d > 10**9:
        raise DomainError("d above 1e9; factor it and use nu_from_factors")
    if d == 1:
        return 1
    count = 1
    for p, e in _trial_factor(d).items():
        count *= len(roots_mod_prime_power(p, e))
        if count == 0:
            return 0
    return count


def nu_from_factors(factors: Mapping[int, int]) -> int:
    """nu of a prime-factored integer prod p^e (for d beyond the direct cap)."""
    count = 1
    for p, e in factors.items():
        if not is_certified_prime(p):
            raise DomainError(f"{p} is not prime")
        count *= len(roots_mod_prime_power(p, e))
        if count == 0:
            return 0
    return count


# ---------------------------------------------------------------------------
# Root table with optional binary cache
# ---------------------------------------------------------------------------

class RootTable(NamedTuple):
    limit: int
    roots: dict[int, tuple[int, ...]]


_CACHE_MAGIC = b"CRT1"
_CACHE_VERSION = 1


def build_root_table(limit: int) -> RootTable:
    """Roots of n^3 + 2 == 0 (mod p) for every prime p <= limit."""
    return RootTable(limit, {p: cube_roots_of_minus2(p) for p in sieve_primes(limit)})


def save_root_table(path: str, table: RootTable) -> None:
    """Binary cache: 16-byte header (magic, version, prime limit), then per
    prime ascending: p as 8-byte little-endian, root count byte, roots as
    8-byte little-endian each."""
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<I", _CACHE_VERSION))
        fh.write(struct.pack("<Q", table.limit))
        for p in sorted(table.roots):
            roots = table.roots[p]
            fh.write(struct.pack("<QB", p, len(roots)))
            for r in roots:
                fh.write(struct.pack("<Q", r))


def load_root_table(path: str) -> RootTable:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 16 or data[:4] != _CACHE_MAGIC:
        raise DomainError(f"{path}: not a root-table cache")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != _CACHE_VERSION:
        raise DomainError(f"{path}: unsupported cache version {version}")
    (limit,) = struct.unpack_from("<Q", data, 8)
    roots: dict[int, tuple[int, ...]] = {}
    off = 16
    prev = 0
    while off < len(data):
        if off + 9 > len(data):
            raise DomainError(f"{path}: truncated entry at offset {off}")
        p, count = struct.unpack_from("<QB", data, off)
        off += 9
        if p <= prev or p > limit or count > 3:
            raise DomainError(f"{path}: corrupt entry for p={p}")
        if off + 8 * count > len(data):
            raise DomainError(f"{path}: truncated roots for p={p}")
        rs = struct.unpack_from(f"<{count}Q", data, off) if count else ()
        off += 8 * count
        for r in rs:
            if r >= p or (r * r * r + 2) % p:
                raise DomainError(f"{path}: invalid root {r} for p={p}")
        roots[p] = tuple(rs)
        prev = p
    return RootTable(limit, roots)


# ---------------------------------------------------------------------------
# Range factorisation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RangeJob:
    """Factorisation work order for the range (x_min, x_max]."""

    x_min: int
    x_max: int
    threshold: int
    h: int
    segment_size: int = 1 << 16

    def __post_init__(self) -> None:
        if self.x_min < 0 or self.x_min >= self.x_max:
            raise DomainError(f"need 0 <= x_min < x_max, got {self.x_min}, {self.x_max}")
        if self.x_max > MAX_RANGE_TOP:
            raise DomainError(f"x_max is capped at {MAX_RANGE_TOP}, got {self.x_max}")
        if self.threshold < 2:
            raise DomainError(f"threshold must be at least 2, got {self.threshold}")
        if self.h < 0:
            raise DomainError(f"h must be non-negative, got {self.h}")
        if self.segment_size < 1:
            raise DomainError(f"segment_size must be positive, got {self.segment_size}")


@dataclass(frozen=True)
class FactorProfile:
    """Complete factorisation of one value n^3 + 2."""

    n: int
    value: int
    factors: tuple[tuple[int, int], ...]

    def omega_above(self, t: int) -> int:
        """Prime factors >= t counted with multiplicity."""
        return sum(e for p, e in self.factors if p >= t)


def _icbrt(n: int) -> int:
    c = round(n ** (1.0 / 3.0))
    while c * c * c > n:
        c -= 1
    while (c + 1) ** 3 <= n:
        c += 1
    return c


def _pollard_brent(v: int, n: int) -> int:
    """A non-trivial divisor of composite v (Brent's cycle variant with a
    deterministic parameter march, so output streams are reproducible)."""
    if v % 2 == 0:
        return 2
    for c in range(1, 41):
        y, r, q = 2, 1, 1
        g = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % v
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(128, r - k)):
                    y = (y * y + c) % v
                    q = q * (x - y) % v
                g = math.gcd(q, v)
                k += 128
            r <<= 1
        if g == v:
            g = 1
            y = ys
            while g == 1:
                y = (y * y + c) % v
                g = math.gcd(x - y, v)
        if 1 < g < v:
            return g
    raise FactorizationError(n, f"could not split cofactor {v}")


def _factor_cofactor(m: int, n: int, floor: int = 0) -> dict[int, int]:
    """Factor a cofactor whose prime factors all exceed floor: certify prime
    (immediate when the value fits below floor^2), peel perfect squares and
    cubes, otherwise split and recurse."""
    sq = floor * floor
    out: dict[int, int] = {}
    stack = [m]
    while stack:
        v = stack.pop()
        if v == 1:
            continue
        if v <= sq or is_certified_prime(v):
            out[v] = out.get(v, 0) + 1
            continue
        r = isqrt(v)
        if r * r == v:
            stack += [r, r]
            continue
        c = _icbrt(v)
        if c * c * c == v:
            stack += [c, c, c]
            continue
        d = _pollard_brent(v, n)
        if d <= 1 or d >= v:
            raise FactorizationError(n, f"bad split of {v}")
        stack += [d, v // d]
    return out


def _sieved_segments(
    job: RangeJob, table: RootTable
) -> Iterator[tuple[int, int, list[int], list[dict[int, int]]]]:
    """Strip every table prime from each segment of (x_min, x_max].

    Yields (lo, hi, residuals, found) where residuals[i] is what is left of
    (lo+i)^3 + 2 and found[i] maps the stripped primes to multiplicities.
    Roots' progressions for primes above the segment size are kept in
    per-segment buckets so each prime is touched only at its actual hits.
    """
    base = job.x_min + 1
    seg = job.segment_size
    smalls = [
        (p, r)
        for p, roots in table.roots.items()
        if roots and p <= seg
        for r in roots
    ]
    buckets: dict[int, list[tuple[int, int]]] = {}
    for p, roots in table.roots.items():
        if p <= seg or not roots:
            continue
        for r in roots:
            n0 = base + (r - base) % p
            if n0 <= job.x_max:
                buckets.setdefault((n0 - base) // seg, []).append((p, n0))

    n_segments = (job.x_max - job.x_min + seg - 1) // seg
    for si in range(n_segments):
        lo = base + si * seg
        hi = min(lo + seg - 1, job.x_max)
        width = hi - lo + 1
        residual = [n * n * n + 2 for n in range(lo, hi + 1)]
        found: list[dict[int, int]] = [{} for _ in range(width)]

        def strip(idx: int, p: int) -> None:
            v = residual[idx]
            e = 0
            while v % p == 0:
                v //= p
                e += 1
            if e:
                residual[idx] = v
                found[idx][p] = e

        for p, r in smalls:
            for n in range(lo + (r - lo) % p, hi + 1, p):
                strip(n - lo, p)
        for p, n in buckets.pop(si, ()):
            while n <= hi:
                strip(n - lo, p)
                n += p
            if n <= job.x_max:
                buckets.setdefault((n - base) // seg, []).append((p, n))
        yield lo, hi, residual, found


def factor_range(
    job: RangeJob,
    table: RootTable | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> Iterator[FactorProfile]:
    """Yield the FactorProfile of every n in (x_min, x_max], in n order.

    Every profile is verified to multiply back to n^3 + 2 exactly before it
    is yielded; a verification failure (or an unsplittable cofactor) raises
    FactorizationError rather than passing silently.
    """
    if table is None:
        table = build_root_table(job.x_max)
    elif table.limit < job.x_max:
        raise DomainError(
            f"root table covers primes to {table.limit}, need {job.x_max}"
        )
    for lo, hi, residual, found in _sieved_segments(job, table):
        for idx in range(hi - lo + 1):
            n = lo + idx
            value = n * n * n + 2
            fac = found[idx]
            if residual[idx] > 1:
                for p, e in _factor_cofactor(residual[idx], n, table.limit).items():
                    fac[p] = fac.get(p, 0) + e
            factors = tuple(sorted(fac.items()))
            check = 1
            for p, e in factors:
                check *= p**e
            if check != value:
                raise FactorizationError(n, f"reconstruction mismatch: {factors}")
            yield FactorProfile(n=n, value=value, factors=factors)
        if progress is not None:
            progress(lo, hi)


def _rough_omega(m: int, floor: int, n: int) -> int:
    """Number of prime factors of m with multiplicity, given that every prime
    factor exceeds floor. Below floor^2 the cofactor must be prime; a
    composite one below floor^3 has exactly two factors; only the rare rest
    needs an actual split."""
    if m <= floor * floor:
        return 1
    if is_certified_prime(m):
        return 1
    if m <= floor * floor * floor:
        return 2
    return sum(_factor_cofactor(m, n, floor).values())


def _count_range(
    job: RangeJob,
    table: RootTable,
    progress: Callable[[int, int], None] | None = None,
) -> int:
    if table.limit < job.x_max:
        raise DomainError(
            f"root table covers primes to {table.limit}, need {job.x_max}"
        )
    # when the threshold is within the sieved limit, every residual factor
    # (all above the limit) counts, so only the factor count of the residual
    # matters and most splits are avoided
    count_whole_residual = job.threshold <= table.limit + 1
    count = 0
    for lo, hi, residual, found in _sieved_segments(job, table):
        for idx in range(hi - lo + 1):
            om = sum(e for p, e in found[idx].items() if p >= job.threshold)
            m = residual[idx]
            if m > 1:
                if count_whole_residual:
                    om += _rough_omega(m, table.limit, lo + idx)
                else:
                    om += sum(
                        e
                        for p, e in _factor_cofactor(m, lo + idx, table.limit).items()
                        if p >= job.threshold
                    )
            if om >= job.h:
                count += 1
        if progress is not None:
            progress(lo, hi)
    return count


def _count_chunk(args: tuple[RangeJob, RootTable]) -> int:
    return _count_range(*args)


def empirical_T(
    job: RangeJob,
    table: RootTable | None = None,
    jobs: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> int:
    """Exact count of n in (x_min, x_max] whose value has at least h prime
    factors >= threshold (with multiplicity).

    With jobs > 1 the range is split into contiguous chunks counted in
    separate processes; the reduction is an order-independent integer sum
    (progress callbacks only fire in the single-process path).
    """
    if table is None:
        table = build_root_table(job.x_max)
    span = job.x_max - job.x_min
    if jobs <= 1 or span < 2:
        return _count_range(job, table, progress)
    per = (span + jobs - 1) // jobs
    chunks = []
    lo = job.x_min
    while lo < job.x_max:
        hi = min(lo + per, job.x_max)
        chunks.append((replace(job, x_min=lo, x_max=hi), table))
        lo = hi
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return sum(pool.map(_count_chunk, chunks))


# ---------------------------------------------------------------------------
# Prime-sum estimate
# ---------------------------------------------------------------------------

def mertens_check(
    x: int, checkpoints: Iterable[int] | None = None
) -> list[tuple[int, float]]:
    """Deviations sum_{p<=x_i} nu(p) log(p)/p - log(x_i) at each checkpoint.

    Exact prime enumeration with floating accumulation; checkpoints default
    to the powers of ten up to x, plus x itself.
    """
    if x < 2:
        raise DomainError(f"x must be at least 2, got {x}")
    if x > 10**8:
        raise DomainError(f"x is capped at 1e8, got {x}")
    if checkpoints is None:
        cps = [10**j for j in range(1, 9) if 10**j < x]
        cps.append(x)
    else:
        cps = sorted(set(int(c) for c in checkpoints))
        if not cps or cps[0] < 2 or cps[-1] > x:
            raise DomainError("checkpoints must lie in [2, x]")
    primes = sieve_primes(cps[-1])
    out: list[tuple[int, float]] = []
    acc = 0.0
    i = 0
    for cp in cps:
        while i < len(primes) and primes[i] <= cp:
            p = primes[i]
            acc += count_cubic_roots(p) * math.log(p) / p
            i += 1
        out.append((cp, acc - math.log(cp)))
    return out


def mean_nu(limit: int) -> float:
    """Average of nu(p) over primes p <= limit."""
    primes = sieve_primes(limit)
    if not primes:
        raise DomainError(f"no primes up to {limit}")
    return sum(count_cubic_roots(p) for p in primes) / len(primes)
