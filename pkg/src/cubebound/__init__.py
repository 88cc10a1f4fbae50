"""Explicit tail bounds for the count of n in (X, 2X] whose cubic value
n^3+2 has many prime factors above X^delta, the aggregation pipeline that
turns them into a proportion and exponent, and a desk-scale empirical
counting harness."""

__version__ = "0.1.0"

from .aggregate import (
    AggregateConfig,
    AggregateReport,
    PerHTerm,
    display_round,
    final_constants,
    sweep_H,
    weighted_tail,
)
from .bounds import (
    BoundParams,
    SecondBoundDetail,
    TiltChoice,
    first_bound,
    optimize_alpha,
    region_integral_mc,
    second_bound,
    second_bound_detail,
    second_bound_term,
)
from .empirical import (
    FactorProfile,
    RangeJob,
    RootTable,
    build_root_table,
    cube_roots_of_minus2,
    count_cubic_roots,
    empirical_T,
    factor_range,
    load_root_table,
    mean_nu,
    mertens_check,
    nu,
    nu_from_factors,
    roots_mod_prime_power,
    save_root_table,
)
from .errors import DomainError, FactorizationError, PrecisionError
from .lognum import (
    ONE,
    ZERO,
    LogNumber,
    from_fraction,
    from_real,
    ln_add,
    ln_div,
    ln_factorial,
    ln_mul,
    ln_neg,
    ln_pow_int,
    ln_sub,
    ln_sum,
    to_real,
)
from .quadrature import QuadratureSpec, exp_integral

__all__ = [
    "__version__",
    "AggregateConfig", "AggregateReport", "PerHTerm", "display_round",
    "final_constants", "sweep_H", "weighted_tail",
    "BoundParams", "SecondBoundDetail", "TiltChoice", "first_bound",
    "optimize_alpha", "region_integral_mc", "second_bound",
    "second_bound_detail", "second_bound_term",
    "FactorProfile", "RangeJob", "RootTable", "build_root_table",
    "cube_roots_of_minus2", "count_cubic_roots", "empirical_T",
    "factor_range", "load_root_table", "mean_nu", "mertens_check", "nu",
    "nu_from_factors", "roots_mod_prime_power", "save_root_table",
    "DomainError", "FactorizationError", "PrecisionError",
    "ONE", "ZERO", "LogNumber", "from_fraction", "from_real", "ln_add",
    "ln_div", "ln_factorial", "ln_mul", "ln_neg", "ln_pow_int", "ln_sub",
    "ln_sum", "to_real",
    "QuadratureSpec", "exp_integral",
]
