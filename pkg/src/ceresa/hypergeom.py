"""Certified 2F1 on [0, 1] and 3F2 at unit argument.

Two independent routes evaluate 3F2(a1, a2, a3; b1, b2; 1):

* ``f32_unit_series`` sums the defining series exactly in fixed point up to a
  cutoff ``M`` and replaces the remainder by an asymptotic expansion
  ``T(M) = t_M * M * sum_j c_j M**-j``.  The coefficients ``c_j`` come from the
  difference equation ``T(M) - T(M+1) = t_M`` and the rational term ratio, so
  no Gamma values enter this route at all.
* ``f32_unit_quadrature`` integrates the Euler representation
  ``int_0^1 t**(a3-1) (1-t)**(-a3) 2F1(a1, a2; b1; t) dt / (Gamma(a3) Gamma(1-a3))``
  with tanh-sinh quadrature, evaluating 2F1 near ``t = 1`` through the
  connection formula.

``f32_unit(..., method="both")`` intersects the two balls and raises
``InconsistencyError`` if they are disjoint.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

from .ball import BigReal, as_rational
from .errors import DivergenceError, DomainError, InconsistencyError, PrecisionError
from .gamma import GUARD_BITS, gamma_signed, rgamma_signed
from .tanhsinh import cutoff, exp_fixed, node

# inflation applied to level-to-level differences of the quadrature
QUAD_SAFETY_BITS = 8
QUAD_MAX_LEVEL = 12
# maximum number of directly summed terms before giving up
SERIES_TERM_BUDGET = 20000


class Method(str, enum.Enum):
    SERIES = "series"
    QUADRATURE = "quadrature"
    BOTH = "both"


def _is_nonpositive_int(x: Fraction) -> bool:
    return x <= 0 and x.denominator == 1


@dataclass(frozen=True)
class HypParams32:
    """Parameters of 3F2(a1, a2, a3; b1, b2; x)."""

    a1: Fraction
    a2: Fraction
    a3: Fraction
    b1: Fraction = Fraction(1)
    b2: Fraction = Fraction(1)

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "b1", "b2"):
            object.__setattr__(self, name, as_rational(getattr(self, name)))
        if _is_nonpositive_int(self.b1) or _is_nonpositive_int(self.b2):
            raise DomainError("lower parameters must avoid 0, -1, -2, ...")

    @classmethod
    def of(cls, *values) -> HypParams32:
        return cls(*(as_rational(v) for v in values))

    @property
    def upper(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.a1, self.a2, self.a3)

    @property
    def lower(self) -> tuple[Fraction, Fraction]:
        return (self.b1, self.b2)

    @property
    def margin(self) -> Fraction:
        """b1 + b2 - a1 - a2 - a3; the unit-argument series converges iff positive."""
        return self.b1 + self.b2 - self.a1 - self.a2 - self.a3

    def terminates(self) -> bool:
        return any(_is_nonpositive_int(a) for a in self.upper)


# ---------------------------------------------------------------------------
# 2F1


def _common_den(values: Iterable[Fraction]) -> int:
    d = 1
    for v in values:
        d = math.lcm(d, v.denominator)
    return d


def _f21_series_fixed(a: Fraction, b: Fraction, c: Fraction, x: int, W: int) -> tuple[int, float]:
    """Sum 2F1(a, b; c; x) for fixed-point ``0 <= x < 2**W`` (fast for x <= 1/2).

    Returns ``(value, err)`` with ``err`` an upper bound in units of ``2**-W``
    covering truncation and every floor division.
    """
    D = _common_den((a, b, c))
    A, B, C = int(a * D), int(b * D), int(c * D)
    one = 1 << W
    xf = x / one
    alpha, beta, gamma_ = abs(float(a)), abs(float(b)), abs(float(c))
    term = one
    total = one
    term_err = 0.0
    err = 0.0
    n = 0
    while True:
        num = (n * D + A) * (n * D + B)
        den = (n * D + C) * (n + 1) * D
        if num == 0:
            break
        ratio = abs(num / den) * xf
        term = (term * num * x) // (den << W)
        term_err = term_err * ratio * (1 + 1e-12) + 1.0
        total += term
        err += term_err
        n += 1
        if n > gamma_ + 1:
            rho = xf * (1 + alpha / n) * (1 + beta / n) / (1 - gamma_ / n)
            if rho < 1:
                bound = (abs(term) + term_err) * rho / (1 - rho)
                if bound < 4.0:
                    err += bound
                    break
        if n > SERIES_TERM_BUDGET:
            raise PrecisionError("2F1 series did not converge within the term budget")
    return total, err + 1.0


def _connection_coefficients(a: Fraction, b: Fraction, c: Fraction, prec: int) -> tuple[BigReal, BigReal]:
    """Coefficients of 2F1 at x in terms of the two series at 1 - x."""
    cab = c - a - b
    if cab.denominator == 1:
        raise DomainError("connection formula degenerates when c - a - b is an integer")
    g_c = gamma_signed(c, prec)
    first = g_c * gamma_signed(cab, prec) * rgamma_signed(c - a, prec) * rgamma_signed(c - b, prec)
    second = g_c * gamma_signed(-cab, prec) * rgamma_signed(a, prec) * rgamma_signed(b, prec)
    return first, second


def _f21_exact_arg(a: Fraction, b: Fraction, c: Fraction, x: Fraction, prec: int) -> BigReal:
    wp = prec + GUARD_BITS
    if x == 0:
        return BigReal.exact(1, prec)
    if x == 1:
        cab = c - a - b
        if cab <= 0:
            raise DomainError("2F1 at x = 1 diverges unless c - a - b > 0")
        value = (
            gamma_signed(c, wp)
            * gamma_signed(cab, wp)
            * rgamma_signed(c - a, wp)
            * rgamma_signed(c - b, wp)
        )
        return value.rounded(prec)
    W = wp + 16
    if x <= Fraction(1, 2) or (c - a - b).denominator == 1:
        xf = (x.numerator << W) // x.denominator
        # floor(x * 2**W) is below x; account with one extra unit in the argument
        value, err = _f21_series_fixed(a, b, c, xf, W)
        hi, _ = _f21_series_fixed(a, b, c, xf + 1, W)
        err += abs(hi - value)
        return BigReal.from_fixed(value, W, err, prec)
    y = 1 - x
    first, second = _connection_coefficients(a, b, c, wp)
    yb = BigReal.exact(y, wp)
    cab = c - a - b
    part1 = _f21_exact_arg(a, b, a + b - c + 1, y, wp)
    part2 = _f21_exact_arg(c - a, c - b, cab + 1, y, wp)
    value = first * part1 + second * (yb.log() * cab).exp() * part2
    return value.rounded(prec)


def f21(a, b, c, x, prec_bits: int) -> BigReal:
    """Gauss 2F1(a, b; c; x) for rational parameters and 0 <= x <= 1.

    ``x`` may be an exact rational or a ``BigReal``.  A ball with non-zero
    radius is handled for positive parameters, where 2F1 is increasing on
    [0, 1), by evaluating at both endpoints.
    """
    a, b, c = as_rational(a), as_rational(b), as_rational(c)
    if _is_nonpositive_int(c):
        raise DomainError("c must not be a non-positive integer")
    if isinstance(x, BigReal):
        if x.rad_fraction() == 0:
            x = x.mid_fraction()
        else:
            if min(a, b, c) <= 0:
                raise DomainError("ball arguments need positive parameters")
            lo = max(Fraction(0), x.mid_fraction() - x.rad_fraction())
            hi = x.mid_fraction() + x.rad_fraction()
            if hi > 1:
                raise DomainError("2F1 argument ball extends past 1")
            return f21(a, b, c, lo, prec_bits).union(f21(a, b, c, hi, prec_bits))
    x = as_rational(x)
    if x < 0 or x > 1:
        raise DomainError("f21 supports 0 <= x <= 1 only")
    return _f21_exact_arg(a, b, c, x, int(prec_bits))


# ---------------------------------------------------------------------------
# 3F2 at unit argument: direct series plus asymptotic tail


def _term_ratio_ints(params: HypParams32):
    D = _common_den((*params.upper, *params.lower))
    ups = [int(a * D) for a in params.upper]
    lows = [int(b * D) for b in params.lower]
    return D, ups, lows


def _direct_terms(params: HypParams32, W: int, start: int, stop: int, term: int, term_err: float):
    """Advance the fixed-point term from index ``start`` to ``stop``.

    Returns ``(partial_sum, term_at_stop, sum_err, term_err)``; errors are in
    units of ``2**-W`` and bound every floor division.
    """
    D, (A1, A2, A3), (B1, B2) = _term_ratio_ints(params)
    total = 0
    err = 0.0
    for n in range(start, stop):
        total += term
        err += term_err
        nd = n * D
        num = (nd + A1) * (nd + A2) * (nd + A3)
        den = (nd + B1) * (nd + B2) * (n + 1) * D
        term = (term * num) // den
        term_err = term_err * abs(num / den) * (1 + 1e-12) + 1.0
    return total, term, err, term_err


def _q_series(params: HypParams32, L: int, W: int) -> list[int]:
    """Fixed-point coefficients of prod(1 + a_i u) / prod(1 + b_j u) up to u**L."""
    one = 1 << W
    q = [one] + [0] * L
    for a in params.upper:
        p, d = a.numerator, a.denominator
        for k in range(L, 0, -1):
            q[k] += (q[k - 1] * p) // d
    for b in params.lower:
        p, d = b.numerator, b.denominator
        for k in range(1, L + 1):
            q[k] -= (q[k - 1] * p) // d
    return q


def _binom_neg(j: int, l: int) -> int:
    """binomial(-j, l)."""
    if j == 0:
        return 1 if l == 0 else 0
    c = math.comb(j + l - 1, l)
    return -c if l & 1 else c


def tail_coefficients(params: HypParams32, count: int, W: int, scale_at: int | None = None,
                      tol: int | None = None) -> list[int]:
    """Fixed-point ``c_0 .. c_{count-1}`` of the tail expansion.

    The tail ``T(M) = sum_{n >= M} t_n`` satisfies ``T(M) - T(M+1) = t_M``.
    Writing ``T(M) = t_M M S(1/M)`` and ``t_{M+1} (M+1) / t_M = M q(1/M)``
    gives ``S(u) - q(u) S(u / (1 + u)) = u``, which fixes the coefficients
    of ``S`` one at a time: ``(n + s) c_n = P_{n+1} + q_1 P_n + sum_{l>=2} q_l St_{n+1-l}``.

    With ``scale_at=M`` and ``tol`` given, generation stops once two
    consecutive scaled terms ``|c_j| / M**j`` are at most ``tol``.
    """
    s = params.margin
    if s <= 0:
        raise DivergenceError("tail expansion needs a positive convergence margin")
    q = _q_series(params, count + 2, W)
    one = 1 << W
    c = [(one * s.denominator) // s.numerator]
    st_full = [c[0]]
    small_run = 0
    power = 1
    for n in range(1, count):
        p_next = sum(c[j] * _binom_neg(j, n + 1 - j) for j in range(n))
        p_cur = sum(c[j] * _binom_neg(j, n - j) for j in range(n))
        acc = p_next + ((q[1] * p_cur) >> W)
        for l in range(2, n + 2):
            acc += (q[l] * st_full[n + 1 - l]) >> W
        cn = (acc * s.denominator) // (n * s.denominator + s.numerator)
        c.append(cn)
        st_full.append(p_cur + cn)
        if scale_at is not None:
            power *= scale_at
            small_run = small_run + 1 if abs(cn) // power <= tol else 0
            if small_run >= 3:
                break
    return c


def _scaled_sum(coeffs: list[int], M: int, tol: int) -> tuple[int, int] | None:
    """Truncated ``sum_j c_j M**-j`` and the size of the first omitted terms.

    Summation stops after two consecutive terms at most ``tol``; ``None`` is
    returned if that never happens (the cutoff ``M`` is too small).
    """
    total = 0
    scale = 1
    small_run = 0
    for j, cj in enumerate(coeffs):
        v = cj // scale if cj >= 0 else -((-cj) // scale)
        if small_run >= 2:
            nxt = coeffs[j + 1] // (scale * M) if j + 1 < len(coeffs) else v
            return total, abs(v) + abs(nxt)
        total += v
        small_run = small_run + 1 if abs(v) <= tol else 0
        scale *= M
    return None


def _terminating_sum(params: HypParams32) -> Fraction:
    total = Fraction(0)
    term = Fraction(1)
    n = 0
    while term != 0:
        total += term
        ratio = Fraction(1)
        for a in params.upper:
            ratio *= a + n
        for b in params.lower:
            ratio /= b + n
        term *= ratio / (n + 1)
        n += 1
    return total


@lru_cache(maxsize=4096)
def _series_cached(params: HypParams32, prec: int) -> BigReal:
    if params.terminates():
        return BigReal.exact(_terminating_sum(params), prec)
    s = params.margin
    if s <= 0:
        raise DivergenceError(f"3F2 at unit argument diverges: margin {s} <= 0")
    wp = prec + GUARD_BITS
    W = wp + 64
    one = 1 << W
    # c_0 = 1/s dominates the scaled tail sum
    tol = max(one // s.numerator * s.denominator, one) >> (wp + 8)
    big = max(abs(float(v)) for v in (*params.upper, *params.lower))
    M = max(12, math.ceil(0.12 * wp)) + math.ceil(4 * big)
    while True:
        J = 8 * M + 16
        extra = 2 * J
        raw = tail_coefficients(params, J, W + extra, scale_at=M, tol=tol << extra)
        coeffs = [cj >> extra if cj >= 0 else -((-cj) >> extra) for cj in raw]
        found = _scaled_sum(coeffs, M, tol)
        if found is not None:
            break
        M = int(M * 1.5) + 4
        if M > SERIES_TERM_BUDGET:
            raise PrecisionError("3F2 tail expansion did not reach the target")
    tail_scaled, omitted = found

    partial, t_M, err_sum, err_t = _direct_terms(params, W, 0, M, one, 0.0)
    tail = (t_M * M * tail_scaled) >> W

    # re-expand at a larger cutoff; disagreement is folded into the radius
    M2 = M + (M + 1) // 2
    more, t_M2, _, _ = _direct_terms(params, W, M, M2, t_M, err_t)
    found2 = _scaled_sum(coeffs, M2, tol)
    tail_b = found2[0] if found2 is not None else tail_scaled
    tail2 = more + ((t_M2 * M2 * tail_b) >> W)
    discrepancy = abs(tail - tail2)

    remainder = (abs(t_M) * M * (omitted + 1)) >> W
    err_units = err_sum + err_t * M * (abs(tail_scaled) / one + 1) + 16 * remainder + 4 * discrepancy + 8
    return BigReal.from_fixed(partial + tail, W, err_units, prec)


def f32_unit_series(params: HypParams32, prec_bits: int) -> BigReal:
    """3F2(a1, a2, a3; b1, b2; 1) by direct summation plus the asymptotic tail."""
    if not params.terminates() and params.margin <= 0:
        raise DivergenceError(f"3F2 at unit argument diverges: margin {params.margin} <= 0")
    return _series_cached(params, int(prec_bits))


# ---------------------------------------------------------------------------
# 3F2 at unit argument: Euler integral by tanh-sinh


def _quadrature_layout(params: HypParams32) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """Reorder parameters into (a1, a2, a3, b1) with b2 = 1 and 0 < a3 < 1."""
    if params.b2 == 1:
        b1 = params.b1
    elif params.b1 == 1:
        b1 = params.b2
    else:
        raise DomainError("quadrature route needs a lower parameter equal to 1")
    ups = list(params.upper)
    if not 0 < ups[2] < 1:
        for i in (0, 1):
            if 0 < ups[i] < 1:
                ups[i], ups[2] = ups[2], ups[i]
                break
        else:
            raise DomainError("quadrature route needs an upper parameter in (0, 1)")
    return ups[0], ups[1], ups[2], b1


def _fixed_of(ball: BigReal, W: int) -> tuple[int, float]:
    mid = ball.mid_fraction()
    value = (mid.numerator << W) // mid.denominator
    err = float(ball.rad_fraction() * (1 << W)) + 1.0
    return value, err


@lru_cache(maxsize=4096)
def _quadrature_cached(params: HypParams32, prec: int) -> BigReal:
    wp = prec + GUARD_BITS
    s = params.margin
    if s <= 0:
        raise DivergenceError(f"3F2 at unit argument diverges: margin {s} <= 0")
    a1, a2, a3, c = _quadrature_layout(params)
    if _is_nonpositive_int(c):
        raise DomainError("lower parameter must avoid 0, -1, -2, ...")
    W = wp + 40
    one = 1 << W
    cab = c - a1 - a2
    if cab.denominator == 1:
        # logarithmic case of the connection formula; never met by trace parameters
        raise DomainError("quadrature route needs b1 - a1 - a2 non-integral")
    first, second = _connection_coefficients(a1, a2, c, W)
    A_fx, A_err = _fixed_of(first, W)
    B_fx, B_err = _fixed_of(second, W)
    scale = 1.0 + abs(A_fx / one) + abs(B_fx / one)

    lam_left = float(a3)
    lam_a = float(1 - a3)
    lam_b = float(1 - a3 + cab)
    U_left = cutoff(lam_left, 0.0, W)
    U_right = cutoff(lam_a, math.log(2 + abs(A_fx / one)), W)
    if second.mid_fraction() != 0:
        U_right = max(U_right, cutoff(lam_b, math.log(2 + abs(B_fx / one)), W))

    p3, q3 = a3.numerator, a3.denominator
    right_a = 1 - a3
    right_b = 1 - a3 + cab
    series_right_a = (a1, a2, a1 + a2 - c + 1)
    series_right_b = (c - a1, c - a2, cab + 1)

    node_err = [0.0]

    def integrand(k: int, level: int) -> int:
        nd = node(k, level, W)
        if k <= 0:
            expo = (nd.log_t * p3) // q3 + (nd.log_y * right_a.numerator) // right_a.denominator
            w = exp_fixed(expo, W)
            if w == 0:
                return 0
            F, ferr = _f21_series_fixed(a1, a2, c, nd.t, W)
            ww = (nd.weight * w) >> W
            node_err[0] += (ferr + 4) * (ww / one + 1)
            return (ww * F) >> W
        base = (nd.log_t * p3) // q3
        wa = exp_fixed(base + (nd.log_y * right_a.numerator) // right_a.denominator, W)
        wb = exp_fixed(base + (nd.log_y * right_b.numerator) // right_b.denominator, W)
        total = 0
        if wa:
            F1, e1 = _f21_series_fixed(*series_right_a, nd.y, W)
            total += (((wa * A_fx) >> W) * F1) >> W
            node_err[0] += (e1 * abs(A_fx / one) + A_err * abs(F1 / one) + 4) * (nd.weight * wa / one / one + 1)
        if wb and B_fx:
            F2, e2 = _f21_series_fixed(*series_right_b, nd.y, W)
            total += (((wb * B_fx) >> W) * F2) >> W
            node_err[0] += (e2 * abs(B_fx / one) + B_err * abs(F2 / one) + 4) * (nd.weight * wb / one / one + 1)
        return (nd.weight * total) >> W

    # level 0: h = 1
    K_left = int(U_left)
    K_right = int(U_right)
    acc = sum(integrand(k, 0) for k in range(-K_left, K_right + 1))
    previous = acc
    nodes = K_left + K_right + 1
    estimate = None
    for level in range(1, QUAD_MAX_LEVEL + 1):
        h_den = 1 << level
        lo = -int(U_left * h_den)
        hi = int(U_right * h_den)
        start = lo if lo % 2 else lo + 1
        for k in range(start, hi + 1, 2):
            acc += integrand(k, level)
            nodes += 1
        current = acc >> level
        diff = abs(current - previous)
        previous = current
        if level >= 3 and (diff << QUAD_SAFETY_BITS) <= (abs(current) >> wp) + 1:
            estimate = (current, diff)
            break
    rounding = (node_err[0] + nodes * 8) * scale
    if estimate is None:
        current, diff = previous, diff
        best = BigReal.from_fixed(current, W, (diff << QUAD_SAFETY_BITS) + rounding, prec)
        raise PrecisionError("tanh-sinh quadrature did not converge", best)
    current, diff = estimate
    integral = BigReal.from_fixed(current, W, (diff << QUAD_SAFETY_BITS) + rounding + 16, wp)
    normaliser = rgamma_signed(a3, wp) * rgamma_signed(1 - a3, wp)
    return (integral * normaliser).rounded(prec)


def f32_unit_quadrature(params: HypParams32, prec_bits: int) -> BigReal:
    """3F2(a1, a2, a3; b1, 1; 1) from the Euler integral over 2F1(a1, a2; b1; t)."""
    return _quadrature_cached(params, int(prec_bits))


def f32_unit(params: HypParams32, prec_bits: int, method: Method | str = Method.BOTH) -> BigReal:
    """3F2 at unit argument by the selected route; ``both`` intersects the two balls."""
    method = Method(method)
    if method is Method.SERIES:
        return f32_unit_series(params, prec_bits)
    if method is Method.QUADRATURE:
        return f32_unit_quadrature(params, prec_bits)
    series = f32_unit_series(params, prec_bits)
    quad = f32_unit_quadrature(params, prec_bits)
    if not series.overlaps(quad):
        raise InconsistencyError(f"series {series!r} and quadrature {quad!r} disagree for {params}", series, quad)
    return series.intersect(quad)
