"""Exact arithmetic for the quotient Fermat curves v^N = u (1 - u)^m.

Everything here is integer arithmetic: primality, the cube roots of unity
mod N, the admissible index set and cyclotomic periods in Z[zeta_N].
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import IndexSetError, NotPrime, WrongResidueClass

# Deterministic Miller-Rabin witnesses, valid for every n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def validate_N(N: int) -> int:
    """Return ``N`` if it is a prime congruent to 1 mod 3.

    >>> validate_N(7)
    7
    """
    N = int(N)
    if not is_prime(N):
        raise NotPrime(f"N={N} is not prime")
    if N % 3 != 1:
        raise WrongResidueClass(f"N={N} is {N % 3} mod 3; no nontrivial cube root of unity exists")
    return N


def find_m(N: int) -> tuple[int, int]:
    """Both roots of x^2 + x + 1 mod N, ascending.

    >>> find_m(13)
    (3, 9)
    """
    N = validate_N(N)
    roots = [x for x in range(2, N - 1) if (x * x + x + 1) % N == 0]
    if len(roots) != 2:  # pragma: no cover - impossible for valid N
        raise WrongResidueClass(f"expected two roots mod {N}, found {roots}")
    return roots[0], roots[1]


def valid_primes(max_n: int, min_n: int = 7) -> list[int]:
    """Primes p with min_n <= p <= max_n and p = 1 mod 3."""
    return [p for p in range(max(min_n, 7), max_n + 1) if p % 3 == 1 and is_prime(p)]


def rep(a: int, N: int) -> int:
    """Representative of a mod N in {1, ..., N-1} (a must be nonzero mod N)."""
    r = a % N
    if r == 0:
        raise ValueError(f"{a} is 0 mod {N}")
    return r


@dataclass(frozen=True)
class CurveParams:
    N: int
    m: int

    def __post_init__(self):
        validate_N(self.N)
        if not 1 < self.m < self.N - 1 or (self.m * self.m + self.m + 1) % self.N:
            raise WrongResidueClass(f"m={self.m} is not a root of x^2+x+1 mod {self.N}")

    @classmethod
    def canonical(cls, N: int, choice: str = "small") -> CurveParams:
        small, large = find_m(N)
        if choice not in ("small", "large"):
            raise ValueError(f"unknown m choice {choice!r}")
        return cls(N, small if choice == "small" else large)

    @property
    def m_sq(self) -> int:
        return self.m * self.m % self.N

    @property
    def triple(self) -> tuple[int, int, int]:
        return (1, self.m, self.m_sq)


@dataclass(frozen=True, order=True)
class AdmissibleIndex:
    h: int
    t2: int
    t3: int

    @property
    def t1(self) -> int:
        return self.h

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.h, self.t2, self.t3)


def admissible_set(N: int, m: int) -> list[AdmissibleIndex]:
    """All h in (0, N) with h + <hm> + <hm^2> = N, ascending.

    >>> [a.h for a in admissible_set(7, 2)]
    [1, 2, 4]
    """
    curve = CurveParams(N, m)
    out = []
    for h in range(1, N):
        t2 = h * curve.m % N
        t3 = h * curve.m_sq % N
        if h + t2 + t3 == N:
            out.append(AdmissibleIndex(h, t2, t3))
    return out


@dataclass(frozen=True)
class CyclotomicInteger:
    """Element of Z[zeta_N] in the power basis 1, zeta, ..., zeta^(N-2)."""

    N: int
    coeffs: tuple[int, ...] = field(default=())

    def __post_init__(self):
        c = tuple(int(x) for x in self.coeffs)
        if len(c) < self.N - 1:
            c = c + (0,) * (self.N - 1 - len(c))
        elif len(c) > self.N - 1:
            raise ValueError("use CyclotomicInteger.from_exponents for unreduced input")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_exponents(cls, N: int, terms: Iterable[tuple[int, int]]) -> CyclotomicInteger:
        """Build sum c * zeta^e from (e, c) pairs, reducing exponents mod N."""
        full = [0] * N
        for e, c in terms:
            full[e % N] += c
        return cls._reduce(N, full)

    @classmethod
    def zeta_power(cls, N: int, e: int) -> CyclotomicInteger:
        return cls.from_exponents(N, [(e, 1)])

    @classmethod
    def _reduce(cls, N: int, full: Sequence[int]) -> CyclotomicInteger:
        # zeta^(N-1) = -(1 + zeta + ... + zeta^(N-2))
        top = full[N - 1]
        return cls(N, tuple(full[i] - top for i in range(N - 1)))

    def _check(self, other: CyclotomicInteger) -> None:
        if not isinstance(other, CyclotomicInteger) or other.N != self.N:
            raise TypeError("operands must share N")

    def __add__(self, other: CyclotomicInteger) -> CyclotomicInteger:
        self._check(other)
        return CyclotomicInteger(self.N, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> CyclotomicInteger:
        return CyclotomicInteger(self.N, tuple(-a for a in self.coeffs))

    def __sub__(self, other: CyclotomicInteger) -> CyclotomicInteger:
        return self + (-other)

    def __mul__(self, other) -> CyclotomicInteger:
        if isinstance(other, int):
            return CyclotomicInteger(self.N, tuple(a * other for a in self.coeffs))
        self._check(other)
        N = self.N
        full = [0] * N
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        full[(i + j) % N] += a * b
        return CyclotomicInteger._reduce(N, full)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def evaluate(self) -> complex:
        z = cmath.exp(2j * cmath.pi / self.N)
        return sum(c * z**i for i, c in enumerate(self.coeffs))

    def __str__(self) -> str:
        parts = []
        for i, c in enumerate(self.coeffs):
            if c:
                parts.append(f"{c}" if i == 0 else f"{c}*z^{i}")
        return " + ".join(parts) if parts else "0"


def period(a: int, b: int, i: int, j: int, N: int) -> CyclotomicInteger:
    """(1 - zeta^a)(1 - zeta^b) zeta^(ai + bj) as an exact element of Z[zeta_N]."""
    if a % N == 0 or b % N == 0 or (a + b) % N == 0:
        raise IndexSetError(f"(a, b) = ({a}, {b}) is outside the index set mod {N}")
    e = a * i + b * j
    # expand (1 - z^a)(1 - z^b) z^e into four monomials
    return CyclotomicInteger.from_exponents(N, [(e, 1), (e + a, -1), (e + b, -1), (e + a + b, 1)])


__all__ = [
    "is_prime",
    "validate_N",
    "find_m",
    "valid_primes",
    "rep",
    "CurveParams",
    "AdmissibleIndex",
    "admissible_set",
    "CyclotomicInteger",
    "period",
]
