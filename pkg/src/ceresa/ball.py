"""Midpoint-radius real balls on top of mpmath's low-level mpf tuples.

Every operation takes its working precision from the operands, never from
``mpmath.mp``, so balls can be used from several threads at once.  Radii are
kept at a short precision and are always rounded upward.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

from mpmath import mp, mpf
from mpmath.libmp import (
    fone,
    from_int,
    from_man_exp,
    from_rational,
    fzero,
    mpf_abs,
    mpf_add,
    mpf_cmp,
    mpf_div,
    mpf_exp,
    mpf_floor,
    mpf_log,
    mpf_mul,
    mpf_neg,
    mpf_pi,
    mpf_sub,
    to_float,
    to_rational,
    to_str,
)

from .errors import DomainError

RAD_PREC = 30
# allowance for libmp transcendental functions, in units of the last place
_TRANSCENDENTAL_ULPS = 4

RationalArg = Fraction


def as_rational(x) -> Fraction:
    """Normalise ``x`` (int, Fraction, ``"p/q"`` string or ``(p, q)``) to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rational arguments")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    try:
        if isinstance(x, str):
            return Fraction(x)
        if isinstance(x, tuple) and len(x) == 2:
            return Fraction(int(x[0]), int(x[1]))
    except ZeroDivisionError:
        raise DomainError(f"zero denominator in {x!r}") from None
    raise TypeError(f"cannot interpret {x!r} as a rational argument")


def _up_add(a, b):
    return mpf_add(a, b, RAD_PREC, "u")


def _up_mul(a, b):
    return mpf_mul(a, b, RAD_PREC, "u")


def _ulp_bound(x, prec: int, ulps: int = 1):
    """Upper bound for ``ulps`` units in the last place of ``x`` at ``prec`` bits."""
    if x == fzero:
        return fzero
    _, _, exp, bc = x
    return from_man_exp(ulps, exp + bc - prec)


class BigReal:
    """An arbitrary-precision real carried with a rigorous absolute error radius.

    The exact quantity is guaranteed to lie in ``[value - err, value + err]``.
    ``prec_bits`` is the mantissa size the midpoint was rounded to.
    """

    __slots__ = ("_mid", "_rad", "prec_bits")

    def __init__(self, mid, rad=fzero, prec_bits: int = 53):
        if mpf_cmp(rad, fzero) < 0:
            raise ValueError("radius must be non-negative")
        self._mid = mid
        self._rad = rad
        self.prec_bits = int(prec_bits)

    # construction -------------------------------------------------------

    @classmethod
    def exact(cls, x, prec_bits: int) -> BigReal:
        """Round an exact int or rational to ``prec_bits`` bits, radius covering the rounding."""
        x = as_rational(x)
        if x.denominator == 1:
            mid = from_int(x.numerator, prec_bits, "n")
        else:
            mid = from_rational(x.numerator, x.denominator, prec_bits, "n")
        if Fraction(*to_rational(mid)) == x:
            return cls(mid, fzero, prec_bits)
        return cls(mid, _ulp_bound(mid, prec_bits), prec_bits)

    @classmethod
    def from_fixed(cls, man: int, shift: int, err_units, prec_bits: int) -> BigReal:
        """Ball for ``man * 2**-shift`` with ``err_units`` units of ``2**-shift`` error."""
        exact = from_man_exp(man, -shift)
        mid = from_man_exp(man, -shift, prec_bits, "n")
        rad = mpf_abs(mpf_sub(exact, mid, RAD_PREC, "u"))
        if err_units:
            units = from_int(math.ceil(err_units))
            rad = _up_add(rad, _up_mul(units, from_man_exp(1, -shift)))
        return cls(mid, rad, prec_bits)

    @classmethod
    def pi(cls, prec_bits: int) -> BigReal:
        mid = mpf_pi(prec_bits, "n")
        return cls(mid, _ulp_bound(mid, prec_bits), prec_bits)

    @classmethod
    def from_interval(cls, lo, hi, prec_bits: int) -> BigReal:
        """Smallest ball (at ``prec_bits``) covering the raw mpf interval ``[lo, hi]``."""
        mid = mpf_mul(mpf_add(lo, hi, prec_bits + 2, "n"), from_man_exp(1, -1), prec_bits, "n")
        rad = mpf_sub(hi, mid, RAD_PREC, "u")
        rad2 = mpf_sub(mid, lo, RAD_PREC, "u")
        if mpf_cmp(rad2, rad) > 0:
            rad = rad2
        if mpf_cmp(rad, fzero) < 0:
            rad = fzero
        return cls(mid, rad, prec_bits)

    # views ---------------------------------------------------------------

    @property
    def mid_raw(self):
        return self._mid

    @property
    def rad_raw(self):
        return self._rad

    @property
    def value(self) -> mpf:
        # make_mpf wraps the raw tuple without rounding to the global context
        return mp.make_mpf(self._mid)

    @property
    def err(self) -> mpf:
        return mp.make_mpf(self._rad)

    @property
    def lower(self):
        return mpf_sub(self._mid, self._rad, self.prec_bits + RAD_PREC, "f")

    @property
    def upper(self):
        return mpf_add(self._mid, self._rad, self.prec_bits + RAD_PREC, "c")

    def mid_fraction(self) -> Fraction:
        return Fraction(*to_rational(self._mid))

    def rad_fraction(self) -> Fraction:
        return Fraction(*to_rational(self._rad))

    def __float__(self) -> float:
        return to_float(self._mid)

    def __repr__(self) -> str:
        dps = max(5, int(self.prec_bits * 0.30103))
        return f"BigReal({to_str(self._mid, dps)} +/- {to_str(self._rad, 3)}, prec={self.prec_bits})"

    def str(self, digits: int = 20) -> str:
        return to_str(self._mid, digits)

    # predicates -----------------------------------------------------------

    def contains(self, x) -> bool:
        """True if the exact number ``x`` (int/Fraction/BigReal/mpf) lies in the ball."""
        if isinstance(x, BigReal):
            return (mpf_cmp(self.lower, x.lower) <= 0) and (mpf_cmp(x.upper, self.upper) <= 0)
        if isinstance(x, mpf):
            point = x._mpf_
        else:
            q = as_rational(x)
            diff = abs(self.mid_fraction() - q)
            return diff <= self.rad_fraction()
        lo, hi = self.lower, self.upper
        return mpf_cmp(lo, point) <= 0 <= mpf_cmp(hi, point)

    def overlaps(self, other: BigReal) -> bool:
        return mpf_cmp(self.lower, other.upper) <= 0 and mpf_cmp(other.lower, self.upper) <= 0

    def is_positive(self) -> bool:
        return mpf_cmp(self.lower, fzero) > 0

    def excludes_integers(self) -> bool:
        """True when no integer lies in the closed ball."""
        lo_floor = mpf_floor(self.lower)
        hi_floor = mpf_floor(self.upper)
        if mpf_cmp(lo_floor, hi_floor) != 0:
            return False
        return mpf_cmp(self.lower, lo_floor) > 0

    # arithmetic ----------------------------------------------------------

    def _coerce(self, other) -> BigReal:
        if isinstance(other, BigReal):
            return other
        return BigReal.exact(other, self.prec_bits)

    def __neg__(self) -> BigReal:
        return BigReal(mpf_neg(self._mid), self._rad, self.prec_bits)

    def __pos__(self) -> BigReal:
        return self

    def __abs__(self) -> BigReal:
        return BigReal(mpf_abs(self._mid), self._rad, self.prec_bits)

    def __add__(self, other) -> BigReal:
        if not isinstance(other, (BigReal, int, Fraction)):
            return NotImplemented
        other = self._coerce(other)
        prec = max(self.prec_bits, other.prec_bits)
        mid = mpf_add(self._mid, other._mid, prec, "n")
        rad = _up_add(_up_add(self._rad, other._rad), _ulp_bound(mid, prec))
        return BigReal(mid, rad, prec)

    __radd__ = __add__

    def __sub__(self, other) -> BigReal:
        if not isinstance(other, (BigReal, int, Fraction)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> BigReal:
        return self._coerce(other) - self

    def __mul__(self, other) -> BigReal:
        if not isinstance(other, (BigReal, int, Fraction)):
            return NotImplemented
        other = self._coerce(other)
        prec = max(self.prec_bits, other.prec_bits)
        mid = mpf_mul(self._mid, other._mid, prec, "n")
        rad = _up_add(
            _up_mul(mpf_abs(self._mid), other._rad),
            _up_mul(mpf_abs(other._mid), self._rad),
        )
        rad = _up_add(rad, _up_mul(self._rad, other._rad))
        rad = _up_add(rad, _ulp_bound(mid, prec))
        return BigReal(mid, rad, prec)

    __rmul__ = __mul__

    def __truediv__(self, other) -> BigReal:
        if not isinstance(other, (BigReal, int, Fraction)):
            return NotImplemented
        other = self._coerce(other)
        babs = mpf_abs(other._mid)
        gap = mpf_sub(babs, other._rad, RAD_PREC, "d")
        if mpf_cmp(gap, fzero) <= 0:
            raise DomainError("division by a ball that contains zero")
        prec = max(self.prec_bits, other.prec_bits)
        mid = mpf_div(self._mid, other._mid, prec, "n")
        num = _up_add(_up_mul(mpf_abs(self._mid), other._rad), _up_mul(babs, self._rad))
        den = mpf_mul(babs, gap, RAD_PREC, "d")
        rad = _up_add(mpf_div(num, den, RAD_PREC, "u"), _ulp_bound(mid, prec))
        return BigReal(mid, rad, prec)

    def __rtruediv__(self, other) -> BigReal:
        return self._coerce(other) / self

    def __pow__(self, n: int) -> BigReal:
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        result = BigReal(fone, fzero, self.prec_bits)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def square(self) -> BigReal:
        return self * self

    def mul_exact(self, n: int) -> BigReal:
        """Multiply by an integer without rounding the midpoint."""
        mid = mpf_mul(self._mid, from_int(n), 0)
        rad = _up_mul(self._rad, from_int(abs(n)))
        return BigReal(mid, rad, self.prec_bits)

    def exp(self) -> BigReal:
        prec = self.prec_bits
        mid = mpf_exp(self._mid, prec, "n")
        # exp(m + r) - exp(m) <= exp(m) * r * exp(r)
        grow = _up_mul(_up_mul(mpf_exp(self._mid, RAD_PREC, "u"), self._rad), mpf_exp(self._rad, RAD_PREC, "u"))
        rad = _up_add(grow, _ulp_bound(mid, prec, _TRANSCENDENTAL_ULPS))
        return BigReal(mid, rad, prec)

    def log(self) -> BigReal:
        gap = mpf_sub(self._mid, self._rad, RAD_PREC, "d")
        if mpf_cmp(gap, fzero) <= 0:
            raise DomainError("logarithm of a ball that is not strictly positive")
        prec = self.prec_bits
        mid = mpf_log(self._mid, prec, "n")
        # log(m) - log(m - r) <= r / (m - r)
        grow = mpf_div(self._rad, gap, RAD_PREC, "u")
        rad = _up_add(grow, _ulp_bound(mid, prec, _TRANSCENDENTAL_ULPS))
        if mid == fzero:
            rad = _up_add(rad, from_man_exp(1, -prec))
        return BigReal(mid, rad, prec)

    def rounded(self, prec_bits: int) -> BigReal:
        """Re-round the midpoint to ``prec_bits`` bits, widening the radius to match."""
        mid = mpf_add(self._mid, fzero, prec_bits, "n")
        moved = mpf_abs(mpf_sub(self._mid, mid, RAD_PREC, "u"))
        return BigReal(mid, _up_add(self._rad, moved), prec_bits)

    def add_error(self, extra) -> BigReal:
        """Widen the radius by ``extra`` (raw mpf, Fraction, int or float)."""
        if isinstance(extra, tuple):
            e = extra
        elif isinstance(extra, float):
            e = mpf(extra)._mpf_
        else:
            q = as_rational(extra)
            e = from_rational(q.numerator, q.denominator, RAD_PREC, "u")
        return BigReal(self._mid, _up_add(self._rad, mpf_abs(e)), self.prec_bits)

    # set operations --------------------------------------------------------

    def intersect(self, other: BigReal) -> BigReal:
        if not self.overlaps(other):
            raise DomainError("balls are disjoint")
        lo = self.lower if mpf_cmp(self.lower, other.lower) >= 0 else other.lower
        hi = self.upper if mpf_cmp(self.upper, other.upper) <= 0 else other.upper
        return BigReal.from_interval(lo, hi, max(self.prec_bits, other.prec_bits))

    def union(self, other: BigReal) -> BigReal:
        lo = self.lower if mpf_cmp(self.lower, other.lower) <= 0 else other.lower
        hi = self.upper if mpf_cmp(self.upper, other.upper) >= 0 else other.upper
        return BigReal.from_interval(lo, hi, max(self.prec_bits, other.prec_bits))

    def floor_mid(self) -> int:
        man = mpf_floor(self._mid)
        p, q = to_rational(man)
        return int(p) // int(q)

    def frac(self) -> BigReal:
        """Subtract the integer part of the midpoint exactly, leaving a midpoint in [0, 1)."""
        n = self.floor_mid()
        mid = mpf_sub(self._mid, from_int(n), 0)
        return BigReal(mid, self._rad, self.prec_bits).rounded(self.prec_bits)

    # serialisation ---------------------------------------------------------

    def to_json(self) -> dict:
        return {"mid": _raw_to_pair(self._mid), "rad": _raw_to_pair(self._rad), "prec_bits": self.prec_bits}

    @classmethod
    def from_json(cls, data: dict) -> BigReal:
        return cls(_pair_to_raw(data["mid"]), _pair_to_raw(data["rad"]), data["prec_bits"])

    def __eq__(self, other) -> bool:
        if not isinstance(other, BigReal):
            return NotImplemented
        return (
            mpf_cmp(self._mid, other._mid) == 0
            and mpf_cmp(self._rad, other._rad) == 0
            and self.prec_bits == other.prec_bits
        )

    def __hash__(self) -> int:
        return hash((self._mid, self._rad, self.prec_bits))


def _raw_to_pair(x) -> list[int]:
    sign, man, exp, _ = x
    m = int(man)
    return [-m if sign else m, int(exp)]


def _pair_to_raw(pair):
    man, exp = pair
    return from_man_exp(int(man), int(exp))
