"""Certified harmonic-volume trace values f(N, k) for quotient Fermat curves."""

__version__ = "0.1.0"

from .ball import BigReal, as_rational
from .curve import CurveParams, CyclotomicInteger, admissible_set, find_m, period, validate_N
from .errors import (
    CeresaError,
    DivergenceError,
    DomainError,
    InconsistencyError,
    IndexSetError,
    KOutOfRange,
    NotPrime,
    PrecisionError,
    WrongResidueClass,
)
from .gamma import beta_rational, gamma_rational, gamma_ratio_N, pochhammer
from .hypergeom import HypParams32, Method, f21, f32_unit, f32_unit_quadrature, f32_unit_series
from .volume import Verdict, VolumeResult, f_N_1, f_N_k, required_precision, summand, verdict_of
