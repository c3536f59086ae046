"""Gamma, Beta and Pochhammer values at rational arguments, as certified balls.

The Gamma function is evaluated by shifting the argument up to ``z >= z0`` and
summing the Stirling series for log Gamma.  Because ``z`` is rational the
Bernoulli sum is accumulated exactly; the only approximations are the series
remainder (bounded by the first omitted term, valid for real ``z > 0``) and
the rounding of ``log``/``exp``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from mpmath.libmp import bernfrac, from_int, mpf_log

from .ball import BigReal, _ulp_bound, as_rational
from .errors import DomainError

GUARD_BITS = 32


@lru_cache(maxsize=None)
def _bernoulli(n: int) -> Fraction:
    p, q = bernfrac(n)
    return Fraction(int(p), int(q))


@lru_cache(maxsize=64)
def _log_two_pi(prec: int) -> BigReal:
    return (BigReal.pi(prec) * 2).log()


def _log_int(n: int, prec: int) -> BigReal:
    mid = mpf_log(from_int(n), prec, "n")
    return BigReal(mid, _ulp_bound(mid, prec, 4), prec)


def _stirling_shift(prec: int) -> int:
    # the optimally truncated Stirling series at z has error ~ exp(-2 pi z)
    return int(0.12 * prec) + 8


def _log_gamma_large(z: Fraction, wp: int) -> BigReal:
    """log Gamma(z) for rational z >= _stirling_shift(wp)."""
    tol = Fraction(1, 1 << wp)
    zsq = z * z
    power = z  # z ** (2k - 1)
    total = Fraction(0)
    k = 1
    while True:
        total += _bernoulli(2 * k) / (2 * k * (2 * k - 1) * power)
        power *= zsq
        remainder = abs(_bernoulli(2 * k + 2)) / ((2 * k + 2) * (2 * k + 1) * power)
        if remainder < tol or k > 4 * wp:
            break
        k += 1
    log_z = _log_int(z.numerator, wp) - _log_int(z.denominator, wp)
    half = Fraction(1, 2)
    result = (log_z * (z - half)) - z + (_log_two_pi(wp) * half) + BigReal.exact(total, wp)
    return result.add_error(remainder)


@lru_cache(maxsize=1 << 16)
def _gamma_positive(x: Fraction, prec: int) -> BigReal:
    if x.denominator == 1:
        return BigReal.exact(math.factorial(x.numerator - 1), prec)
    wp = prec + GUARD_BITS
    shift = max(0, math.ceil(_stirling_shift(wp) - x))
    z = x + shift
    rising = Fraction(1)
    for j in range(shift):
        rising *= x + j
    value = _log_gamma_large(z, wp).exp() / BigReal.exact(rising, wp)
    return value.rounded(prec)


def gamma_rational(x, prec_bits: int) -> BigReal:
    """Gamma(x) for a positive rational ``x``.

    >>> float(gamma_rational(5, 64))
    24.0
    """
    x = as_rational(x)
    if x <= 0:
        raise DomainError(f"gamma_rational needs a positive argument, got {x}")
    return _gamma_positive(x, int(prec_bits))


def gamma_signed(x, prec_bits: int) -> BigReal:
    """Gamma at any rational that is not a pole (used by connection formulas)."""
    x = as_rational(x)
    if x > 0:
        return _gamma_positive(x, int(prec_bits))
    if x.denominator == 1:
        raise DomainError(f"Gamma has a pole at {x}")
    shift = math.ceil(-x) + 1
    rising = Fraction(1)
    for j in range(shift):
        rising *= x + j
    value = _gamma_positive(x + shift, prec_bits + 8) / BigReal.exact(rising, prec_bits + 8)
    return value.rounded(prec_bits)


def rgamma_signed(x, prec_bits: int) -> BigReal:
    """1/Gamma(x), which is zero at the poles."""
    x = as_rational(x)
    if x <= 0 and x.denominator == 1:
        return BigReal.exact(0, prec_bits)
    return BigReal.exact(1, prec_bits + 8) / gamma_signed(x, prec_bits + 8)


def beta_rational(a, b, prec_bits: int) -> BigReal:
    """B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b) for positive rationals."""
    a, b = as_rational(a), as_rational(b)
    if a <= 0 or b <= 0:
        raise DomainError("beta_rational needs positive arguments")
    wp = prec_bits + 8
    value = gamma_rational(a, wp) * gamma_rational(b, wp) / gamma_rational(a + b, wp)
    return value.rounded(prec_bits)


def pochhammer(alpha, n: int, prec_bits: int) -> BigReal:
    """Rising factorial (alpha)_n as a direct product, rounded once at the end."""
    if n < 0:
        raise DomainError("pochhammer needs n >= 0")
    alpha = as_rational(alpha)
    product = Fraction(1)
    for j in range(n):
        product *= alpha + j
    return BigReal.exact(product, prec_bits)


def gamma_ratio_N(
    numerators: Sequence[int], denominators: Sequence[int], N: int, prec_bits: int
) -> BigReal:
    """prod Gamma(a_i / N) / prod Gamma(b_j / N) for integer entries in (0, N)."""
    if N < 4:
        raise DomainError("gamma_ratio_N needs N >= 4")
    for e in (*numerators, *denominators):
        if not 0 < e < N:
            raise DomainError(f"entry {e} is outside (0, {N})")
    wp = prec_bits + 4 + 2 * (len(numerators) + len(denominators)).bit_length()
    value = BigReal.exact(1, wp)
    for a in numerators:
        value = value * gamma_rational(Fraction(a, N), wp)
    for b in denominators:
        value = value / gamma_rational(Fraction(b, N), wp)
    return value.rounded(prec_bits)
