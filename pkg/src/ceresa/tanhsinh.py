"""Tanh-sinh (double exponential) nodes on [0, 1] in fixed point.

The substitution is ``t = 1 / (1 + exp(-pi sinh u))`` so that both ``t`` and
``1 - t`` are available without cancellation, together with their logarithms.
Endpoint singularities of the form ``t**(p-1) (1-t)**(q-1)`` become
double-exponentially decaying weights in ``u``.

Nodes are cached by ``(u, W)``, where ``u = k / 2**level`` and ``W`` is the
number of fractional bits, so successive levels reuse earlier evaluations.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple

from mpmath.libmp import (
    from_man_exp,
    mpf_add,
    mpf_cosh_sinh,
    mpf_div,
    mpf_exp,
    mpf_log,
    mpf_mul,
    mpf_neg,
    mpf_pi,
    fone,
    to_fixed,
)


class Node(NamedTuple):
    t: int  # t * 2**W
    y: int  # (1 - t) * 2**W
    log_t: int  # log(t) * 2**W
    log_y: int  # log(1 - t) * 2**W
    weight: int  # pi * cosh(u) * 2**W


@lru_cache(maxsize=1 << 17)
def node(k: int, level: int, W: int) -> Node:
    """Data for ``u = k / 2**level``; ``weight`` is ``pi cosh(u)`` in fixed point.

    dt/du = pi cosh(u) t (1 - t), so integrands written as
    ``t**p (1-t)**q F(t)`` pick up the factor ``t (1 - t)`` in the exponents.
    """
    wp = W + 20
    u = from_man_exp(k, -level)
    cosh_u, sinh_u = mpf_cosh_sinh(u, wp)
    pi = mpf_pi(wp)
    psh = mpf_mul(pi, sinh_u, wp)
    # e = exp(-pi |sinh u|); the small one of t, 1 - t equals e / (1 + e)
    neg = psh[0] == 1
    mag = mpf_neg(psh) if neg else psh
    e = mpf_exp(mpf_neg(mag), wp)
    one_plus = mpf_add(fone, e, wp)
    small = mpf_div(e, one_plus, wp)
    large = mpf_div(fone, one_plus, wp)
    log_large = mpf_neg(mpf_log(one_plus, wp))
    log_small = mpf_add(mpf_neg(mag), log_large, wp)
    if neg:
        t, y, lt, ly = small, large, log_small, log_large
    else:
        t, y, lt, ly = large, small, log_large, log_small
    weight = mpf_mul(pi, cosh_u, wp)
    return Node(to_fixed(t, W), to_fixed(y, W), to_fixed(lt, W), to_fixed(ly, W), to_fixed(weight, W))


def cutoff(decay: float, coef_log: float, W: int) -> float:
    """Smallest ``U`` where ``pi cosh(U) exp(-decay pi sinh U) e**coef_log`` drops below ``2**-W``."""
    if decay <= 0:
        raise ValueError("decay rate must be positive")
    need = W * math.log(2.0) + 10.0 + max(coef_log, 0.0)
    U = 1.0
    for _ in range(8):
        U = math.asinh((need + math.log(math.pi * math.cosh(U))) / (decay * math.pi))
    return U + 0.25


def exp_fixed(e_fx: int, W: int) -> int:
    """exp of a fixed-point number, returned in fixed point (0 on underflow)."""
    if e_fx < -(W + 8) * 0.6931471805599453 * (1 << W):
        return 0
    return to_fixed(mpf_exp(from_man_exp(e_fx, -W), W + 8), W)


__all__ = ["Node", "node", "cutoff", "exp_fixed"]
