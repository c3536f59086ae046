"""Trace values f(N, k) of the harmonic volume and their non-integrality verdicts.

``prec_bits`` throughout this module is an *absolute* accuracy target for each
summand of the trace sum: every summand ball has radius around ``2**-prec_bits``.
``required_precision`` picks it so that, after multiplying by 2 N^6 (and by
k! N^(4k-4)), the radius of f(N, k) is still about ``10**-target_digits``.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .ball import BigReal
from .curve import AdmissibleIndex, CurveParams, admissible_set, validate_N
from .errors import DomainError, KOutOfRange
from .gamma import GUARD_BITS, gamma_ratio_N
from .hypergeom import HypParams32, Method, f32_unit

READINGS = ("printed", "alternate")
# The printed second parameter duplicates the first; the alternate reading uses <hm>/N.
# Reproducing the reference table settles which is meant (see README).
DEFAULT_READING = "alternate"
DEFAULT_TARGET_DIGITS = 10
DEFAULT_GUARD_DIGITS = 10
_MIN_KERNEL_PREC = 64


class Verdict(str, enum.Enum):
    NON_INTEGER_PROVEN = "NonIntegerProven"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self) -> str:
        return self.value


def _check_reading(reading: str) -> str:
    if reading not in READINGS:
        raise DomainError(f"unknown parameter reading {reading!r}; expected one of {READINGS}")
    return reading


def _method(method) -> Method:
    try:
        return Method(method)
    except ValueError:
        raise DomainError(f"unknown method {method!r}") from None


def hyp_params(N: int, idx: AdmissibleIndex, reading: str = DEFAULT_READING) -> HypParams32:
    second = idx.t2 if _check_reading(reading) == "alternate" else idx.h
    return HypParams32(Fraction(idx.h, N), Fraction(second, N), Fraction(idx.t3, N))


def _log2_magnitude(N: int, idx: AdmissibleIndex) -> float:
    """Rough log2 of the summand, enough to turn an absolute target into a relative one."""
    lg = math.lgamma
    g = lg((N - idx.t2) / N) + lg((N - idx.t3) / N) - lg(idx.t2 / N)
    # the 3F2 factor is >= 1 and grows at most logarithmically in N here
    return 2 * g / math.log(2) + math.log2(math.log(N) + 2)


@dataclass(frozen=True)
class Summand:
    h: AdmissibleIndex
    gamma_factor: BigReal
    hyp_value: BigReal
    product: BigReal

    def to_dict(self) -> dict:
        return {
            "h": list(self.h.triple),
            "gamma_factor": self.gamma_factor.to_json(),
            "hyp_value": self.hyp_value.to_json(),
            "product": self.product.to_json(),
        }


@lru_cache(maxsize=1 << 15)
def _summand_cached(N: int, idx: AdmissibleIndex, prec: int, method: Method, reading: str) -> Summand:
    rel = max(_MIN_KERNEL_PREC, prec + math.ceil(_log2_magnitude(N, idx)) + 8)
    gamma_factor = gamma_ratio_N([N - idx.t2, N - idx.t3], [idx.t2], N, rel)
    hyp_value = f32_unit(hyp_params(N, idx, reading), rel, method)
    product = gamma_factor.square() * hyp_value
    return Summand(idx, gamma_factor, hyp_value, product)


def summand(N: int, m: int, h: int, prec_bits: int, method="both", reading: str = DEFAULT_READING) -> Summand:
    """Gamma^N(N-<hm>, N-<hm^2>; <hm>)^2 * 3F2(h/N, *, <hm^2>/N; 1, 1; 1) for admissible h."""
    by_h = {a.h: a for a in admissible_set(N, m)}
    if h not in by_h:
        raise DomainError(f"h={h} is not admissible for (N, m) = ({N}, {m})")
    return _summand_cached(N, by_h[h], int(prec_bits), _method(method), _check_reading(reading))


def verdict_of(value_mod1: BigReal) -> Verdict:
    """NonIntegerProven iff the closed ball contains no integer."""
    if value_mod1.excludes_integers():
        return Verdict.NON_INTEGER_PROVEN
    return Verdict.INCONCLUSIVE


def required_precision(N: int, k: int = 1, target_digits: int = DEFAULT_TARGET_DIGITS,
                       guard_digits: int = DEFAULT_GUARD_DIGITS) -> int:
    """Absolute summand accuracy (bits) giving ``target_digits`` correct digits of f(N, k) mod 1.

    >>> required_precision(7, 1, 10)
    85
    """
    log10 = math.log10
    digits = (
        6 * log10(N)
        + math.lgamma(k + 1) / math.log(10)
        + (4 * k - 4) * log10(N)
        + target_digits
        + log10((N - 1) / 2)
        + guard_digits
    )
    return math.ceil(digits * math.log2(10))


def max_k(N: int) -> int:
    return (N - 3) // 2


def multiplier(N: int, k: int) -> int:
    """k! N^(4k-4), the exact integer relating f(N, k) to f(N, 1)."""
    return math.factorial(k) * N ** (4 * k - 4)


@dataclass(frozen=True)
class VolumeResult:
    N: int
    m: int
    k: int
    value_mod1: BigReal
    raw_sum: BigReal
    verdict: Verdict
    prec_bits: int
    method: str
    param_reading: str = DEFAULT_READING
    # wall-clock time is provenance only: excluded from equality and canonical output
    elapsed: float = field(default=0.0, compare=False)

    @property
    def value(self) -> float:
        return float(self.value_mod1)

    @property
    def err(self) -> float:
        return float(self.value_mod1.err)

    def margin(self) -> Fraction:
        """Distance from the ball to the nearest integer (negative when it contains one)."""
        mid, rad = self.value_mod1.mid_fraction(), self.value_mod1.rad_fraction()
        return min(mid, 1 - mid) - rad

    def to_dict(self, with_elapsed: bool = False) -> dict:
        d = {
            "N": self.N,
            "m": self.m,
            "k": self.k,
            "value_mod1": self.value_mod1.to_json(),
            "raw_sum": self.raw_sum.to_json(),
            "verdict": self.verdict.value,
            "prec_bits": self.prec_bits,
            "method": self.method,
            "param_reading": self.param_reading,
        }
        if with_elapsed:
            d["elapsed"] = self.elapsed
        return d

    @classmethod
    def from_dict(cls, d: dict) -> VolumeResult:
        return cls(
            N=d["N"], m=d["m"], k=d["k"],
            value_mod1=BigReal.from_json(d["value_mod1"]),
            raw_sum=BigReal.from_json(d["raw_sum"]),
            verdict=Verdict(d["verdict"]),
            prec_bits=d["prec_bits"],
            method=d["method"],
            param_reading=d.get("param_reading", DEFAULT_READING),
            elapsed=d.get("elapsed", 0.0),
        )


def _resolve_m(N: int, m: int | None, m_choice: str) -> int:
    if m is not None:
        return CurveParams(N, m).m
    return CurveParams.canonical(N, m_choice).m


def trace_sum(N: int, m: int, prec_bits: int, method="both", reading: str = DEFAULT_READING) -> BigReal:
    """The sum over admissible h, accumulated in ascending h."""
    method = _method(method)
    reading = _check_reading(reading)
    idxs = admissible_set(N, m)
    # absolute accuracy 2**-prec needs the sum's magnitude on top of prec
    top = max(_log2_magnitude(N, i) for i in idxs) + math.log2(len(idxs))
    wp = prec_bits + max(0, math.ceil(top)) + GUARD_BITS
    total = BigReal.exact(0, wp)
    for idx in idxs:
        total = total + _summand_cached(N, idx, prec_bits, method, reading).product.rounded(wp)
    return total


@lru_cache(maxsize=4096)
def _f_N_1_cached(N: int, m: int, prec: int, method: Method, reading: str) -> VolumeResult:
    start = time.perf_counter()
    raw = trace_sum(N, m, prec, method, reading)
    value = raw.mul_exact(2 * N**6).frac()
    return VolumeResult(
        N=N, m=m, k=1, value_mod1=value, raw_sum=raw, verdict=verdict_of(value),
        prec_bits=prec, method=method.value, param_reading=reading,
        elapsed=time.perf_counter() - start,
    )


def clear_caches() -> None:
    """Drop every in-process memo (results, summands, kernel values, quadrature nodes)."""
    from . import gamma, hypergeom, tanhsinh

    for fn in (_f_N_1_cached, _summand_cached, hypergeom._series_cached, hypergeom._quadrature_cached,
               gamma._gamma_positive, gamma._log_two_pi, tanhsinh.node):
        fn.cache_clear()


def f_N_1(N: int, prec_bits: int | None = None, method="both", m: int | None = None,
          m_choice: str = "small", reading: str = DEFAULT_READING,
          target_digits: int = DEFAULT_TARGET_DIGITS) -> VolumeResult:
    """frac(2 N^6 * sum of summands) with a certified radius and verdict.

    >>> round(f_N_1(7).value, 5)
    0.64692
    """
    N = validate_N(N)
    m = _resolve_m(N, m, m_choice)
    if prec_bits is None:
        prec_bits = required_precision(N, 1, target_digits)
    return _f_N_1_cached(N, m, int(prec_bits), _method(method), _check_reading(reading))


def f_N_k(N: int, k: int, prec_bits: int | None = None, method="both", m: int | None = None,
          m_choice: str = "small", reading: str = DEFAULT_READING,
          target_digits: int = DEFAULT_TARGET_DIGITS) -> VolumeResult:
    """frac(k! N^(4k-4) f(N, 1)), computed from the reduced f(N, 1) ball.

    The multiplier is an integer, so scaling the reduced value gives the same
    residue mod 1; only the radius grows, which ``required_precision`` budgets for.
    """
    N = validate_N(N)
    k = int(k)
    if not 1 <= k <= max_k(N):
        raise KOutOfRange(f"k={k} is outside [1, {max_k(N)}] for N={N}")
    if prec_bits is None:
        prec_bits = required_precision(N, k, target_digits)
    base = f_N_1(N, prec_bits, method, m=m, m_choice=m_choice, reading=reading)
    if k == 1:
        return base
    start = time.perf_counter()
    value = base.value_mod1.mul_exact(multiplier(N, k)).frac()
    return VolumeResult(
        N=N, m=base.m, k=k, value_mod1=value, raw_sum=base.raw_sum, verdict=verdict_of(value),
        prec_bits=base.prec_bits, method=base.method, param_reading=base.param_reading,
        elapsed=base.elapsed + time.perf_counter() - start,
    )


__all__ = [
    "READINGS",
    "DEFAULT_READING",
    "Verdict",
    "Summand",
    "VolumeResult",
    "hyp_params",
    "summand",
    "verdict_of",
    "required_precision",
    "max_k",
    "multiplier",
    "trace_sum",
    "f_N_1",
    "f_N_k",
    "clear_caches",
]
