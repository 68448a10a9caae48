import math

import numpy as np
import pytest

from hyperbergman.errors import DegeneratePointError, InvalidTransformError
from hyperbergman.hplane import (
    HPoint,
    MobiusTransform,
    compose,
    cosh_distance,
    hyp_distance,
    identity,
    inverse,
    mobius_apply,
    translation,
)


def random_transform(rng) -> MobiusTransform:
    while True:
        a = rng.uniform(-2, 2)
        if abs(a) > 0.1:
            break
    b = rng.uniform(-2, 2)
    c = rng.uniform(-2, 2)
    d = (1.0 + b * c) / a
    return MobiusTransform(a, b, c, d)


def random_point(rng) -> HPoint:
    return HPoint(rng.uniform(-3, 3), math.exp(rng.uniform(-1.5, 1.5)))


class TestMobiusApply:
    def test_identity(self):
        assert mobius_apply(identity(), HPoint(0, 1)) == HPoint(0, 1)

    def test_unit_translation(self):
        z = mobius_apply(MobiusTransform(1, 1, 0, 1), HPoint(0, 1))
        assert (z.x, z.y) == (1.0, 1.0)

    def test_inversion_on_axis(self):
        z = mobius_apply(MobiusTransform(0, -1, 1, 0), HPoint(0, 2))
        assert abs(z.x) < 1e-15 and abs(z.y - 0.5) < 1e-15

    def test_compose_compatibility(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            s, t = random_transform(rng), random_transform(rng)
            z = random_point(rng)
            w1 = mobius_apply(compose(s, t), z)
            w2 = mobius_apply(s, mobius_apply(t, z))
            assert abs(w1.x - w2.x) <= 1e-10 and abs(w1.y - w2.y) <= 1e-10

    def test_underflow_is_degenerate(self):
        t = MobiusTransform(1e8, 0.0, 0.0, 1e-8)
        tiny = HPoint(0.0, 5e-310)
        with pytest.raises(DegeneratePointError):
            mobius_apply(inverse(t), tiny)


class TestGroupOps:
    def test_inverse_is_two_sided(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            t = random_transform(rng)
            assert compose(t, inverse(t)).approx_eq(identity(), 1e-12)
            assert compose(inverse(t), t).approx_eq(identity(), 1e-12)

    def test_identity_neutral(self):
        rng = np.random.default_rng(12)
        t = random_transform(rng)
        assert compose(identity(), t).approx_eq(t, 1e-15)
        assert compose(t, identity()).approx_eq(t, 1e-15)

    def test_translations_add(self):
        assert compose(translation(1), translation(1)).approx_eq(translation(2), 1e-15)

    def test_associativity(self):
        rng = np.random.default_rng(13)
        for _ in range(30):
            a, b, c = (random_transform(rng) for _ in range(3))
            lhs = compose(compose(a, b), c)
            rhs = compose(a, compose(b, c))
            assert lhs.approx_eq(rhs, 1e-12)

    def test_negation_identified(self):
        t = MobiusTransform(1.0, 2.0, 0.5, 2.0)
        assert MobiusTransform(-1.0, -2.0, -0.5, -2.0) == t

    def test_determinant_renormalized(self):
        t = MobiusTransform(2.0, 0.0, 0.0, 2.0)
        assert t.approx_eq(identity(), 1e-15)

    def test_nonpositive_determinant_rejected(self):
        with pytest.raises(InvalidTransformError):
            MobiusTransform(1.0, 0.0, 0.0, -1.0)

    def test_boundary_point_rejected(self):
        with pytest.raises(DegeneratePointError):
            HPoint(0.0, 0.0)
        with pytest.raises(DegeneratePointError):
            HPoint(0.0, -1.0)


class TestDistance:
    def test_coincident(self):
        assert cosh_distance(HPoint(0, 1), HPoint(0, 1)) == 1.0
        assert hyp_distance(HPoint(0, 1), HPoint(0, 1)) == 0.0

    def test_axis_oracle(self):
        # along the imaginary axis: cosh d = cosh(ln(y2/y1)) = (y1/y2 + y2/y1)/2
        assert abs(cosh_distance(HPoint(0, 1), HPoint(0, 2)) - 1.25) < 1e-15
        assert abs(hyp_distance(HPoint(0, 1), HPoint(0, 2)) - math.log(2)) < 1e-15

    def test_horizontal_pair(self):
        # 1 + |z1 - z2|^2 / (2 y1 y2) = 1 + 1/2
        assert abs(cosh_distance(HPoint(0, 1), HPoint(1, 1)) - 1.5) < 1e-15

    def test_symmetry(self):
        rng = np.random.default_rng(17)
        for _ in range(30):
            z1, z2 = random_point(rng), random_point(rng)
            assert cosh_distance(z1, z2) == cosh_distance(z2, z1)
            assert cosh_distance(z1, z2) >= 1.0

    def test_isometry(self):
        rng = np.random.default_rng(19)
        for _ in range(100):
            t = random_transform(rng)
            z1, z2 = random_point(rng), random_point(rng)
            d0 = hyp_distance(z1, z2)
            d1 = hyp_distance(mobius_apply(t, z1), mobius_apply(t, z2))
            assert abs(d0 - d1) <= 1e-10

    def test_triangle_inequality(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            a, b, c = (random_point(rng) for _ in range(3))
            assert hyp_distance(a, c) <= hyp_distance(a, b) + hyp_distance(b, c) + 1e-10

    def test_small_separation_stability(self):
        # arccosh through the offset form stays accurate where the naive
        # arccosh(cosh d) would lose half the digits
        z1 = HPoint(0.0, 1.0)
        z2 = HPoint(1e-9, 1.0)
        assert abs(hyp_distance(z1, z2) - 1e-9) < 1e-18
