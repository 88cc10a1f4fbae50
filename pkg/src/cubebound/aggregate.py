"""Assembly of the weighted tail sums and the final proportion constants.

The pipeline sums min(h, [1/delta]) * 2^h * c(h, delta) over h above a cutoff
H, using the tilted bound below split_h and the closed form from split_h up,
subtracts the total from the sieve lower-bound constant S_lower, applies the
2^(-H)/min(H, [1/delta]) weight, and reports the resulting proportion alpha
together with the exponent varpi = alpha*delta/2.

All reductions run in ascending h so reports are bit-reproducible.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

from .bounds import TiltChoice, as_fraction, first_bound, second_bound_detail
from .errors import DomainError
from .lognum import (
    ZERO,
    LogNumber,
    from_fraction,
    from_real,
    ln_add,
    ln_mul,
    ln_pow_int,
    ln_sub,
    ln_sum,
)
from .quadrature import QuadratureSpec

_LN2 = math.log(2.0)

# margins below this relative size are treated as numerically zero, so
# S_lower == tail_total degrades to an explicit failure state instead of a
# meaningless round-off proportion
_MARGIN_REL_FLOOR = 1e-9


@dataclass(frozen=True)
class AggregateConfig:
    """Pipeline parameters; defaults reproduce the reference constants."""

    delta: Fraction = Fraction(1, 321)
    H: int = 132
    split_h: int = 190
    h_max: int = 963
    K_offset: int = 20
    S_lower: float = 9.2e-8
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", as_fraction(self.delta))
        if not (0 < self.delta < 1):
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        if self.H < 1:
            raise DomainError(f"H must be at least 1, got {self.H}")
        if not (self.H < self.split_h <= self.h_max + 1):
            raise DomainError(
                f"need H < split_h <= h_max+1, got H={self.H}, "
                f"split_h={self.split_h}, h_max={self.h_max}"
            )
        if self.K_offset < 1:
            raise DomainError(f"K_offset must be at least 1, got {self.K_offset}")
        if self.S_lower < 0.0:
            raise DomainError(f"S_lower must be non-negative, got {self.S_lower}")

    @property
    def inv_delta_floor(self) -> int:
        """[1/delta]; 321 at the default delta."""
        return self.delta.denominator // self.delta.numerator


@dataclass(frozen=True)
class PerHTerm:
    """One h slice of the tail: bound coefficient and its weighted value."""

    h: int
    method: str
    K: int | None
    coefficient: LogNumber
    weighted: LogNumber
    tilt_choices: tuple[TiltChoice, ...] = ()


@dataclass(frozen=True)
class AggregateReport:
    """Pipeline result; ok is False when the margin is zero or negative."""

    ok: bool
    failure: str | None
    delta: Fraction
    H: int
    split_h: int
    h_max: int
    K_offset: int
    S_lower: float
    tail_first: LogNumber
    tail_second: LogNumber
    tail_total: LogNumber
    margin: LogNumber
    alpha_proportion: LogNumber
    varpi: LogNumber
    count_proportion: LogNumber
    per_h_terms: tuple[PerHTerm, ...]
    tilt_choices: tuple[TiltChoice, ...]


def _per_h_entry(cfg: AggregateConfig, h: int, method: str) -> PerHTerm:
    if method == "first":
        coeff = first_bound(h, cfg.delta, 3)
        K = None
        choices: tuple[TiltChoice, ...] = ()
    else:
        K = min(h // 3 + cfg.K_offset, h - 1)
        detail = second_bound_detail(h, cfg.delta, K, cfg.quadrature)
        coeff = detail.total
        choices = detail.tilt_choices
    weight = LogNumber(1, math.log(min(h, cfg.inv_delta_floor)) + h * _LN2)
    return PerHTerm(
        h=h, method=method, K=K, coefficient=coeff,
        weighted=ln_mul(weight, coeff), tilt_choices=choices,
    )


def _entry_args(args: tuple[AggregateConfig, int, str]) -> PerHTerm:
    return _per_h_entry(*args)


def _compute_terms(
    cfg: AggregateConfig, hs: Sequence[int], method: str, jobs: int
) -> list[PerHTerm]:
    if jobs <= 1 or len(hs) < 4:
        return [_per_h_entry(cfg, h, method) for h in hs]
    work = [(cfg, h, method) for h in hs]
    chunk = max(1, len(work) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_entry_args, work, chunksize=chunk))


def weighted_tail(
    cfg: AggregateConfig,
    h_from: int,
    h_to: int,
    method: str,
    jobs: int = 1,
) -> tuple[LogNumber, list[PerHTerm]]:
    """Sum of min(h, [1/delta]) * 2^h * c(h, delta) for h in [h_from, h_to],
    reduced in ascending h. An empty range sums to zero."""
    if method not in ("first", "second"):
        raise DomainError(f"method must be 'first' or 'second', got {method!r}")
    if h_from > h_to:
        return ZERO, []
    if not (cfg.H < h_from and h_to <= cfg.h_max):
        raise DomainError(
            f"need H < h_from <= h_to <= h_max, got H={cfg.H}, "
            f"h_from={h_from}, h_to={h_to}, h_max={cfg.h_max}"
        )
    terms = _compute_terms(cfg, range(h_from, h_to + 1), method, jobs)
    return ln_sum(t.weighted for t in terms), terms


def _assemble_report(
    cfg: AggregateConfig,
    second_terms: Sequence[PerHTerm],
    first_terms: Sequence[PerHTerm],
) -> AggregateReport:
    tail_second = ln_sum(t.weighted for t in second_terms)
    tail_first = ln_sum(t.weighted for t in first_terms)
    tail_total = ln_add(tail_first, tail_second)
    s_lower = from_real(cfg.S_lower)
    margin = ln_sub(s_lower, tail_total)

    per_h = tuple(second_terms) + tuple(first_terms)
    choices = tuple(c for t in per_h for c in t.tilt_choices)
    common = dict(
        delta=cfg.delta, H=cfg.H, split_h=cfg.split_h, h_max=cfg.h_max,
        K_offset=cfg.K_offset, S_lower=cfg.S_lower,
        tail_first=tail_first, tail_second=tail_second, tail_total=tail_total,
        margin=margin, per_h_terms=per_h, tilt_choices=choices,
    )

    numeric_floor = (
        LogNumber(1, s_lower.log_mag + math.log(_MARGIN_REL_FLOOR))
        if s_lower.sign > 0 else ZERO
    )
    if margin.sign <= 0 or margin <= numeric_floor:
        return AggregateReport(
            ok=False,
            failure=(
                "margin S_lower - tail_total is zero or negative; "
                "no positive proportion follows"
            ),
            alpha_proportion=ZERO, varpi=ZERO, count_proportion=ZERO,
            **common,
        )

    weight = LogNumber(
        1, -cfg.H * _LN2 - math.log(min(cfg.H, cfg.inv_delta_floor))
    )
    alpha = ln_mul(weight, margin)
    varpi = ln_mul(alpha, from_fraction(cfg.delta / 2))
    count = ln_mul(from_fraction(cfg.delta), ln_pow_int(alpha, 2))
    return AggregateReport(
        ok=True, failure=None,
        alpha_proportion=alpha, varpi=varpi, count_proportion=count,
        **common,
    )


def final_constants(cfg: AggregateConfig, jobs: int = 1) -> AggregateReport:
    """Run the full pipeline at the given configuration.

    tail_second covers H < h < split_h with the tilted bound (K clamped to
    h-1 where [h/3]+K_offset would exceed it); tail_first covers
    split_h <= h <= h_max with the closed form.
    """
    _, second_terms = weighted_tail(cfg, cfg.H + 1, cfg.split_h - 1, "second", jobs)
    _, first_terms = weighted_tail(cfg, cfg.split_h, cfg.h_max, "first", jobs)
    return _assemble_report(cfg, second_terms, first_terms)


def sweep_H(
    cfg: AggregateConfig, H_values: Iterable[int], jobs: int = 1
) -> list[tuple[int, AggregateReport]]:
    """final_constants for every H in H_values, sharing the per-h terms.

    Per-H failures come back as reports with ok=False, never as exceptions.
    """
    hs = list(H_values)
    if not hs:
        return []
    for H in hs:
        if not (1 <= H < cfg.split_h):
            raise DomainError(f"swept H must satisfy 1 <= H < split_h, got {H}")
    base = replace(cfg, H=min(hs))
    _, second_terms = weighted_tail(base, base.H + 1, cfg.split_h - 1, "second", jobs)
    _, first_terms = weighted_tail(base, cfg.split_h, cfg.h_max, "first", jobs)
    out = []
    for H in hs:
        cfg_h = replace(cfg, H=H)
        kept = [t for t in second_terms if t.h > H]
        out.append((H, _assemble_report(cfg_h, kept, first_terms)))
    return out


def display_round(value: LogNumber, mode: str, sig: int = 2) -> str:
    """Render to sig significant figures, rounding 'up' for upper-bound
    coefficients and 'down' for lower-bound ones (conservative quoting)."""
    if mode not in ("up", "down"):
        raise DomainError(f"mode must be 'up' or 'down', got {mode!r}")
    if value.sign == 0:
        return "0"
    if value.sign < 0:
        # conservative direction flips for negative values
        inner = display_round(LogNumber(1, value.log_mag), "down" if mode == "up" else "up", sig)
        return "-" + inner
    e10 = value.log_mag / math.log(10.0)
    exp10 = math.floor(e10)
    scaled = 10.0 ** (e10 - exp10 + sig - 1)
    m = math.ceil(scaled - 1e-9) if mode == "up" else math.floor(scaled + 1e-9)
    if m >= 10**sig:
        m //= 10
        exp10 += 1
    mant = m / 10 ** (sig - 1)
    return f"{mant:.{sig - 1}f}e{exp10:+03d}"
