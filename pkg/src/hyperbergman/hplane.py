"""Exact upper-half-plane geometry.

Points z = x + iy with y > 0, real 2x2 unit-determinant matrices acting by
fractional linear transformations, and the hyperbolic distance in the form

    cosh d(z1, z2) = 1 + |z1 - z2|^2 / (2 y1 y2),

which is stable for small separations.  All values are immutable and all
operations are pure, so everything here is safe to share across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegeneratePointError, InvalidTransformError
from .numutil import acosh1p

_DET_TOL = 1e-12
# entries with magnitude below this are treated as exact zeros when picking
# the sign-canonicalization pivot, so that arithmetic drift around a true
# zero cannot flip the representative
_PIVOT_EPS = 1e-9


@dataclass(frozen=True)
class HPoint:
    """Point of the upper half-plane, y strictly positive."""

    x: float
    y: float

    def __post_init__(self):
        if not (self.y > 0.0) or not math.isfinite(self.y) or not math.isfinite(self.x):
            raise DegeneratePointError(f"not an interior half-plane point: {self.x} + i*{self.y}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @staticmethod
    def from_complex(z: complex) -> "HPoint":
        return HPoint(z.real, z.imag)


@dataclass(frozen=True)
class MobiusTransform:
    """Element of PSL(2, R) stored as a sign-canonicalized det-1 matrix.

    Construction renormalizes any positive determinant and flips the global
    sign so the first entry of (a, b, c) that is not a numerical zero is
    positive; matrices that projectively agree therefore compare equal.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not math.isfinite(det) or det <= 0.0:
            raise InvalidTransformError(f"determinant {det} not positive")
        a, b, c, d = self.a, self.b, self.c, self.d
        if abs(det - 1.0) > _DET_TOL:
            s = 1.0 / math.sqrt(det)
            a, b, c, d = a * s, b * s, c * s, d * s
        for pivot in (a, b, c):
            if abs(pivot) > _PIVOT_EPS:
                if pivot < 0.0:
                    a, b, c, d = -a, -b, -c, -d
                break
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    def entries(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    @property
    def trace(self) -> float:
        return self.a + self.d

    def approx_eq(self, other: "MobiusTransform", tol: float = 1e-9) -> bool:
        return max(abs(p - q) for p, q in zip(self.entries(), other.entries())) <= tol


def identity() -> MobiusTransform:
    return MobiusTransform(1.0, 0.0, 0.0, 1.0)


def translation(t: float) -> MobiusTransform:
    return MobiusTransform(1.0, float(t), 0.0, 1.0)


def mobius_apply(t: MobiusTransform, z: HPoint) -> HPoint:
    """Apply z -> (az + b)/(cz + d).

    The image imaginary part is computed as y/|cz+d|^2 rather than through
    complex division; underflow to zero raises DegeneratePointError.
    """
    w = t.c * z.z + t.d
    nsq = w.real * w.real + w.imag * w.imag
    if nsq == 0.0 or not math.isfinite(nsq):
        raise DegeneratePointError("image denominator vanished")
    num = t.a * z.z + t.b
    x_new = (num.real * w.real + num.imag * w.imag) / nsq
    y_new = z.y / nsq
    if y_new == 0.0 or not math.isfinite(y_new):
        raise DegeneratePointError("image imaginary part underflowed")
    return HPoint(x_new, y_new)


def compose(t1: MobiusTransform, t2: MobiusTransform) -> MobiusTransform:
    """Matrix product: compose(s, t) acts as z -> s(t(z))."""
    return MobiusTransform(
        t1.a * t2.a + t1.b * t2.c,
        t1.a * t2.b + t1.b * t2.d,
        t1.c * t2.a + t1.d * t2.c,
        t1.c * t2.b + t1.d * t2.d,
    )


def inverse(t: MobiusTransform) -> MobiusTransform:
    return MobiusTransform(t.d, -t.b, -t.c, t.a)


def cosh_distance(z1: HPoint, z2: HPoint) -> float:
    dx = z1.x - z2.x
    dy = z1.y - z2.y
    return 1.0 + (dx * dx + dy * dy) / (2.0 * z1.y * z2.y)


def hyp_distance(z1: HPoint, z2: HPoint) -> float:
    """Hyperbolic distance, zero iff the points coincide."""
    dx = z1.x - z2.x
    dy = z1.y - z2.y
    t = (dx * dx + dy * dy) / (2.0 * z1.y * z2.y)
    return acosh1p(t)
