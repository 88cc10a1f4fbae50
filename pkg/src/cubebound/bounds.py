"""Explicit coefficients c(h, delta) bounding the proportion of n in (X, 2X]
for which n^3+2 has at least h prime factors above X^delta.

Two families are computed. The plain closed form keeps k = [h/degree] primes
and relaxes the size region to a box, giving

    c = (1/k!) * (log((degree - (k-1)*delta) / ((h-k+1)*delta)))^k.

The tilted refinement keeps k in [[h/3], K] primes and, for k < K, penalises
the region where the kept primes must multiply up to nearly the full range by
weighting the integrand with exp(alpha*(s_1+...+s_k - lower)), which turns
each k-term into

    exp(-alpha*(h-k-3)/(h-k-1)) / k! * (int_delta^s_max exp(alpha*s)/s ds)^k.

A Monte Carlo estimator of the exact (unrelaxed) region integrals is provided
as an oracle for small k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .lognum import ZERO, LogNumber, ln_sum
from .quadrature import DEFAULT_SPEC, QuadratureSpec, exp_integral

# coarse geometric tilt grid; refined by golden section around the best point
ALPHA_GRID = (0.0,) + tuple(2.0**j for j in range(-2, 15))

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def as_fraction(delta) -> Fraction:
    """Coerce delta to an exact rational; floats are rejected on purpose."""
    if isinstance(delta, Fraction):
        return delta
    if isinstance(delta, float):
        raise DomainError("delta must be an exact rational (e.g. Fraction(1, 321)), not a float")
    return Fraction(delta)


def _check_delta(delta: Fraction) -> None:
    if not (0 < delta < 1):
        raise DomainError(f"delta must lie in (0, 1), got {delta}")


def s_max_exact(h: int, delta: Fraction, degree: int, k: int) -> Fraction:
    """Upper coordinate limit (degree - (k-1)*delta) / (h-k+1), exactly."""
    return (Fraction(degree) - (k - 1) * delta) / (h - k + 1)


@dataclass(frozen=True)
class BoundParams:
    """Parameters of one bound term: h large factors, cutoff exponent delta,
    polynomial degree, and k primes kept in the divisor."""

    h: int
    delta: Fraction
    degree: int = 3
    k: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", as_fraction(self.delta))
        if self.h < 3:
            raise DomainError(f"h must be at least 3, got {self.h}")
        _check_delta(self.delta)
        if self.degree < 2:
            raise DomainError(f"degree must be at least 2, got {self.degree}")
        if not (self.h // self.degree <= self.k <= self.h - 1):
            raise DomainError(
                f"k must lie in [{self.h // self.degree}, {self.h - 1}], got {self.k}"
            )

    @property
    def s_max(self) -> Fraction:
        return s_max_exact(self.h, self.delta, self.degree, self.k)

    def is_empty(self) -> bool:
        """True when s_max <= delta, i.e. the size region has no interior."""
        return self.s_max <= self.delta


@dataclass(frozen=True)
class TiltChoice:
    """Optimised tilt for one k-term and the resulting term value."""

    k: int
    alpha: float
    term_value: LogNumber
    evaluations: int


def _log_ratio(num: Fraction, den: Fraction) -> float:
    r = num / den
    return math.log(r.numerator) - math.log(r.denominator)


def _closed_form(h: int, delta: Fraction, degree: int, k: int) -> LogNumber:
    """(1/k!) * log(s_max/delta)^k, or zero when the region is empty."""
    smax = s_max_exact(h, delta, degree, k)
    if smax <= delta:
        return ZERO
    big_l = _log_ratio(smax, delta)
    return LogNumber(1, k * math.log(big_l) - math.lgamma(k + 1))


def first_bound(h: int, delta, degree: int = 3) -> LogNumber:
    """Closed-form coefficient with k = [h/degree] primes kept.

    Zero (empty region) once h*delta >= degree; for degree 3 and
    delta = 1/321 that is every h >= 963.
    """
    delta = as_fraction(delta)
    if h < 3:
        raise DomainError(f"h must be at least 3, got {h}")
    _check_delta(delta)
    if degree < 2:
        raise DomainError(f"degree must be at least 2, got {degree}")
    k = h // degree
    if k < 1:
        raise DomainError(f"h={h} below degree={degree} leaves no primes to keep")
    return _closed_form(h, delta, degree, k)


def second_bound_term(
    p: BoundParams, alpha: float, spec: QuadratureSpec = DEFAULT_SPEC
) -> LogNumber:
    """One tilted k-term: exp(-alpha*(h-k-3)/(h-k-1))/k! * I(alpha)^k with
    I(alpha) = int_delta^s_max exp(alpha*s)/s ds.

    Valid for k <= h-2 (the K boundary term uses the closed form instead).
    An empty region yields zero, not an error.
    """
    if alpha < 0.0:
        raise DomainError(f"alpha must be non-negative, got {alpha!r}")
    if p.degree != 3:
        raise DomainError("tilted terms are defined for degree 3 only")
    if p.k > p.h - 2:
        raise DomainError(f"tilted term needs k <= h-2, got k={p.k}, h={p.h}")
    smax = p.s_max
    if smax <= p.delta:
        return ZERO
    integral = exp_integral(alpha, float(p.delta), float(smax), spec)
    lower = (p.h - p.k - 3) / (p.h - p.k - 1)
    return LogNumber(
        1, -alpha * lower - math.lgamma(p.k + 1) + p.k * math.log(integral)
    )


def optimize_alpha(p: BoundParams, spec: QuadratureSpec = DEFAULT_SPEC) -> TiltChoice:
    """Minimise the tilted k-term over alpha >= 0.

    Coarse geometric grid first (the objective is not assumed unimodal), then
    golden-section refinement on the bracket around the best grid point. The
    grid is capped at 700/s_max so the quadrature precondition always holds.
    alpha = 0 is always evaluated, so the result never exceeds the untilted
    term.
    """
    if p.is_empty():
        return TiltChoice(k=p.k, alpha=0.0, term_value=ZERO, evaluations=0)
    cap = 700.0 / float(p.s_max)
    grid = [a for a in ALPHA_GRID if a <= cap]
    evals = 0

    def f(alpha: float) -> float:
        nonlocal evals
        evals += 1
        return second_bound_term(p, alpha, spec).log_mag

    values = [f(a) for a in grid]
    best = min(range(len(grid)), key=lambda i: values[i])
    best_a, best_v = grid[best], values[best]

    lo = grid[best - 1] if best > 0 else grid[0]
    hi = grid[best + 1] if best + 1 < len(grid) else grid[best]
    if hi > lo:
        x1 = hi - _INVPHI * (hi - lo)
        x2 = lo + _INVPHI * (hi - lo)
        f1, f2 = f(x1), f(x2)
        while hi - lo > 1e-7 * max(1.0, hi):
            if f1 < f2:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - _INVPHI * (hi - lo)
                f1 = f(x1)
                if f1 < best_v:
                    best_a, best_v = x1, f1
            else:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + _INVPHI * (hi - lo)
                f2 = f(x2)
                if f2 < best_v:
                    best_a, best_v = x2, f2
    return TiltChoice(k=p.k, alpha=best_a, term_value=LogNumber(1, best_v), evaluations=evals)


@dataclass(frozen=True)
class SecondBoundDetail:
    """Tilted bound broken into its optimised k-terms and the K boundary term."""

    h: int
    K: int
    total: LogNumber
    tilt_choices: tuple[TiltChoice, ...]
    boundary_term: LogNumber


def second_bound_detail(
    h: int, delta, K: int, spec: QuadratureSpec = DEFAULT_SPEC
) -> SecondBoundDetail:
    """Sum of optimised tilted terms for k in [[h/3], K-1] plus the closed-form
    K-term. With K = [h/3] the sum is empty and this reduces to first_bound."""
    delta = as_fraction(delta)
    if h < 3:
        raise DomainError(f"h must be at least 3, got {h}")
    _check_delta(delta)
    k0 = h // 3
    if not (k0 <= K <= h - 1):
        raise DomainError(f"K must lie in [{k0}, {h - 1}], got {K}")
    choices = tuple(
        optimize_alpha(BoundParams(h, delta, 3, k), spec) for k in range(k0, K)
    )
    boundary = _closed_form(h, delta, 3, K)
    total = ln_sum([c.term_value for c in choices] + [boundary])
    return SecondBoundDetail(
        h=h, K=K, total=total, tilt_choices=choices, boundary_term=boundary
    )


def second_bound(h: int, delta, K: int, spec: QuadratureSpec = DEFAULT_SPEC) -> LogNumber:
    return second_bound_detail(h, delta, K, spec).total


def region_integral_mc(
    p: BoundParams,
    with_lower_constraint: bool,
    samples: int,
    seed: int,
    batch: int = 1 << 18,
) -> tuple[float, float]:
    """Monte Carlo estimate (value, standard error) of the exact region
    integral int prod(1/s_i) ds over ordered tuples delta <= s_1 <= ... <= s_k
    subject to s_1+...+s_{k-1}+(h-k+1)*s_k <= 3 and, when
    with_lower_constraint is set, also sum(s) <= 1 and
    sum(s) >= (h-k-3)/(h-k-1).

    Samples unordered tuples uniformly from the bounding box [delta, s_max]^k
    and divides by k!, so the ordering constraint never has to be enforced.
    Oracle for small instances only (k <= 8).
    """
    if p.k > 8:
        raise DomainError(f"Monte Carlo oracle is for k <= 8, got k={p.k}")
    if samples < 100_000:
        raise DomainError(f"need at least 1e5 samples, got {samples}")
    if p.is_empty():
        return 0.0, 0.0

    s_lo = float(p.delta)
    s_hi = float(p.s_max)
    h, k = p.h, p.k
    lower = (h - k - 3) / (h - k - 1)

    rng = np.random.default_rng(seed)
    total_w = 0.0
    total_w2 = 0.0
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        s = np.sort(rng.uniform(s_lo, s_hi, size=(m, k)), axis=1)
        ok = s[:, :-1].sum(axis=1) + (h - k + 1) * s[:, -1] <= 3.0
        if with_lower_constraint:
            t = s.sum(axis=1)
            ok &= t <= 1.0
            ok &= t >= lower
        w = np.where(ok, 1.0 / np.prod(s, axis=1), 0.0)
        total_w += float(w.sum())
        total_w2 += float((w * w).sum())
        done += m

    scale = (s_hi - s_lo) ** k / math.factorial(k)
    mean = total_w / samples
    var = max(total_w2 - samples * mean * mean, 0.0) / (samples - 1)
    return scale * mean, scale * math.sqrt(var / samples)
