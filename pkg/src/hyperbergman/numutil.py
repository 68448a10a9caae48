"""Shared numeric helpers: overflow-guarded hyperbolics, stable arccosh,
panelized Gauss-Legendre nodes, divisor-bound tail estimates, small number
theory."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

# beyond this argument sinh/cosh are replaced by 0.5*exp(|x|); the dropped
# e^{-|x|} term is below 1e-26 relative
_ASYMPTOTIC_ARG = 30.0
_EXP_OVERFLOW = 709.0


def sinh_safe(x: float) -> float:
    ax = abs(x)
    if ax <= _ASYMPTOTIC_ARG:
        return math.sinh(x)
    if ax >= _EXP_OVERFLOW:
        return math.copysign(math.inf, x)
    return math.copysign(0.5 * math.exp(ax), x)


def cosh_safe(x: float) -> float:
    ax = abs(x)
    if ax <= _ASYMPTOTIC_ARG:
        return math.cosh(x)
    if ax >= _EXP_OVERFLOW:
        return math.inf
    return 0.5 * math.exp(ax)


def acosh1p(t: float) -> float:
    """arccosh(1 + t) for t >= 0, accurate for t near 0.

    math.acosh(x) loses half the significant digits when x - 1 is tiny
    because x*x - 1 cancels; feeding the offset t directly avoids that.
    """
    if t < 0:
        if t > -1e-12:
            t = 0.0
        else:
            raise ValueError(f"acosh1p needs t >= 0, got {t}")
    return math.log1p(t + math.sqrt(t * (t + 2.0)))


def gauss_legendre_panels(a: float, b: float, panels: int, order: int):
    """Gauss-Legendre nodes/weights on [a, b] split into equal panels."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    nodes = []
    weights = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(half * x + 0.5 * (hi + lo))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def divisor_counts(m: int) -> np.ndarray:
    """d(n) for n = 1..m (index 0 unused)."""
    d = np.zeros(m + 1, dtype=np.int64)
    for k in range(1, m + 1):
        d[k::k] += 1
    return d


def qexp_tail_bound(m: int, y: float) -> float:
    """Upper bound for |sum_{n>m} a_n e^{2 pi i n z}| when |a_n| <= d(n) sqrt(n).

    Uses d(n) sqrt(n) <= n^{3/2} and (1 + k/(m+1))^{3/2} <= e^{1.5 k/(m+1)}:
        tail <= x^{m+1} (m+1)^{3/2} / (1 - x e^{1.5/(m+1)}),  x = e^{-2 pi y}.
    Returns inf when the geometric comparison fails (x too close to 1).
    """
    if y <= 0:
        return math.inf
    log_x = -2.0 * math.pi * y
    growth = math.exp(log_x + 1.5 / (m + 1))
    if growth >= 1.0:
        return math.inf
    log_tail = (m + 1) * log_x + 1.5 * math.log(m + 1) - math.log1p(-growth)
    if log_tail < -744.0:
        return 0.0
    return math.exp(log_tail)


def genus_x0_prime(p: int) -> int:
    """Genus of the modular curve of level a prime p (= dim of the weight-2
    cusp form space).

    g = 1 + mu/12 - nu2/4 - nu3/3 - nu_inf/2 with index mu = p + 1, two cusps,
    and elliptic counts nu2, nu3 determined by p mod 4 and p mod 3.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p == 2:
        nu2, nu3 = 1, 0
    elif p == 3:
        nu2, nu3 = 0, 1
    else:
        nu2 = 2 if p % 4 == 1 else 0
        nu3 = 2 if p % 3 == 1 else 0
    g = 1 + Fraction(p + 1, 12) - Fraction(nu2, 4) - Fraction(nu3, 3) - 1
    assert g.denominator == 1
    return int(g)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, int(n ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [i for i, v in enumerate(sieve) if v]
