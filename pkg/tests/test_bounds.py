import json
import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from hyperbergman.bounds import (
    BoundReport,
    TailBoundParams,
    assemble_bound_chain,
    bx_closed_form,
    jl_tail_bound,
    looser_orbit_bound,
    pointwise_orbit_bound,
)
from hyperbergman.errors import (
    DeltaTooSmallError,
    IncompleteBallError,
    MismatchedBasepointsError,
    NonpositiveRadiusError,
)
from hyperbergman.fuchsian import (
    OrbitBall,
    OrbitRecord,
    SurfaceGeometry,
    count_profile,
    cyclic_test_group,
    enumerate_ball,
    systole,
)
from hyperbergman.hplane import HPoint, identity

I = HPoint(0.0, 1.0)
LN2 = math.log(2.0)


def closed_form_oracle(r):
    """50-digit evaluation of 48/pi + 4/(3 pi sinh^2(r/4))."""
    with mpmath.workdps(50):
        rr = mpmath.mpf(r)
        return float(48 / mpmath.pi + 4 / (3 * mpmath.pi * mpmath.sinh(rr / 4) ** 2))


def identity_ball(radius=50.0):
    rec = OrbitRecord(identity(), 0.0, "")
    return OrbitBall(I, I, radius, (rec,), True)


class TestClosedForm:
    @pytest.mark.parametrize("r", [math.log(3.0), 2.0, 4.0, 10.0])
    def test_against_high_precision(self, r):
        got = bx_closed_form(r)
        want = closed_form_oracle(r)
        assert abs(got - want) <= 1e-12 * abs(want)

    def test_specific_values(self):
        # frozen from the 50-digit oracle
        assert abs(bx_closed_form(math.log(3.0)) - 20.765774401875168) < 1e-12
        assert abs(bx_closed_form(4.0) - 15.586175850011596) < 1e-12

    def test_limit(self):
        assert abs(bx_closed_form(50.0) - 48.0 / math.pi) < 1e-6
        assert abs(bx_closed_form(1e9) - 48.0 / math.pi) < 1e-12

    def test_strictly_decreasing(self):
        rs = np.linspace(0.1, 30.0, 200)
        vals = [bx_closed_form(float(r)) for r in rs]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_nonpositive_radius(self):
        for r in (0.0, -1.0):
            with pytest.raises(NonpositiveRadiusError):
                bx_closed_form(r)


class TestOrbitBounds:
    def test_identity_only_pointwise(self):
        assert abs(pointwise_orbit_bound(identity_ball()) - 4 / (3 * math.pi)) < 1e-15

    def test_identity_only_looser(self):
        assert abs(looser_orbit_bound(identity_ball()) - 16 / (3 * math.pi)) < 1e-15

    def test_cyclic_axis_oracle(self):
        # radius 2.5 ball: identity and t^{+-1} at rho = 2 ln 2;
        # cosh(ln 2) = 1.25
        ball = enumerate_ball(cyclic_test_group(), I, I, 2.5)
        want_pw = 4 / (3 * math.pi) * (1 + 2 * math.exp(-2 * LN2) / 1.25**2)
        assert abs(pointwise_orbit_bound(ball) - want_pw) < 1e-12
        want_loose = 16 / (3 * math.pi) * (1 + 2 * math.exp(-4 * LN2))
        assert abs(looser_orbit_bound(ball) - want_loose) < 1e-12

    def test_monotone_under_more_records(self):
        small = enumerate_ball(cyclic_test_group(), I, I, 2.5)
        large = enumerate_ball(cyclic_test_group(), I, I, 3.0)
        assert pointwise_orbit_bound(large) > pointwise_orbit_bound(small)
        assert looser_orbit_bound(large) > looser_orbit_bound(small)

    def test_looser_dominates_pointwise(self, bolza):
        for radius in (3.3, 4.0):
            ball = enumerate_ball(bolza, I, I, radius)
            assert looser_orbit_bound(ball) >= pointwise_orbit_bound(ball)

    def test_incomplete_ball_rejected(self):
        partial = OrbitBall(I, I, 2.0, (OrbitRecord(identity(), 0.0, ""),), False)
        with pytest.raises(IncompleteBallError):
            pointwise_orbit_bound(partial)

    def test_mismatched_basepoints_rejected(self):
        ball = OrbitBall(I, HPoint(0.0, 2.0), 2.0, (), True)
        with pytest.raises(MismatchedBasepointsError):
            looser_orbit_bound(ball)


class TestTailTerms:
    def test_identity_profile_r2(self):
        profile = count_profile(identity_ball(radius=2.0))
        terms = jl_tail_bound(TailBoundParams(delta=1.5, r=2.0), profile)
        assert abs(terms.truncated_sum - 1.0) < 1e-15
        with mpmath.workdps(50):
            want2 = float(
                mpmath.e ** (-3)
                * mpmath.sinh(1)
                * mpmath.sinh(1.5)
                / mpmath.sinh(0.5) ** 2
            )
            want3 = float(
                1
                / (2 * mpmath.sinh(0.5) ** 2)
                * mpmath.quad(
                    lambda x: mpmath.e ** (-2 * x) * mpmath.sinh(x + 1), [1.5, mpmath.inf]
                )
            )
        assert abs(terms.boundary_term - want2) <= 1e-14 * want2
        assert abs(terms.tail_integral - want3) <= 1e-12 * want3

    def test_closed_form_vs_adaptive_quadrature(self):
        rng = np.random.default_rng(41)
        for _ in range(20):
            r = float(rng.uniform(0.2, 8.0))
            delta = float(rng.uniform(r / 2 + 0.05, r / 2 + 4.0))
            terms = jl_tail_bound(
                TailBoundParams(delta=delta, r=r), count_profile(identity_ball(max(delta, 1.0)))
            )
            # e^{-2x} sinh(x + r/2) written overflow-free for the quad probes
            integral, err = quad(
                lambda x: 0.5 * (math.exp(r / 2 - x) - math.exp(-r / 2 - 3 * x)),
                delta,
                np.inf,
            )
            want = integral / (2 * math.sinh(r / 4) ** 2)
            assert abs(terms.tail_integral - want) <= 1e-9 * abs(want) + 10 * err

    def test_relaxation_constants(self):
        # at delta = 3r/4 the scaled second and third terms stay below
        # 128/(3 pi) and 4/(3 pi sinh^2(r/4))
        scale = 16 / (3 * math.pi)
        for r in np.linspace(0.2, 10.0, 60):
            r = float(r)
            terms = jl_tail_bound(
                TailBoundParams(delta=0.75 * r, r=r),
                count_profile(identity_ball(max(1.0, 0.75 * r))),
            )
            assert scale * terms.boundary_term <= 128 / (3 * math.pi) + 1e-12
            assert scale * terms.tail_integral <= 4 / (3 * math.pi * math.sinh(r / 4) ** 2) + 1e-12

    def test_terms_vanish_at_large_r(self):
        terms = jl_tail_bound(
            TailBoundParams(delta=75.0, r=100.0), count_profile(identity_ball(80.0))
        )
        assert terms.boundary_term < 1e-20
        assert terms.tail_integral < 1e-20

    def test_delta_hypothesis(self):
        with pytest.raises(DeltaTooSmallError):
            TailBoundParams(delta=0.5, r=2.0)


class TestAssembledChain:
    def test_identity_only_large_r(self):
        geom = SurfaceGeometry(
            systole=50.0, injectivity_radius=50.0, genus=None, hyp_volume=None, certified=True
        )
        report = assemble_bound_chain(identity_ball(radius=40.0), geom)
        assert abs(report.orbit_sum_bound - 16 / (3 * math.pi)) < 1e-9
        assert abs(report.closed_form_B - 48 / math.pi) < 1e-6
        assert report.margin > 0

    def test_cyclic_chain(self):
        group = cyclic_test_group()
        geom = systole(group, search_radius=3.0)
        ball = enumerate_ball(group, I, I, 0.75 * geom.systole + 1.0)
        report = assemble_bound_chain(ball, geom)
        assert report.pointwise_bound <= report.looser_bound + 1e-12
        assert report.looser_bound <= report.orbit_sum_bound + 1e-12
        assert report.orbit_sum_bound <= report.closed_form_B + 1e-9

    def test_bolza_chain(self, bolza, bolza_geom, bolza_master_ball):
        delta = 0.75 * bolza_geom.systole
        ball = enumerate_ball(bolza, I, I, delta + 1.0)
        report = assemble_bound_chain(ball, bolza_geom)
        assert report.pointwise_bound <= report.looser_bound + 1e-12
        assert report.looser_bound <= report.orbit_sum_bound + 1e-12
        assert report.orbit_sum_bound <= report.closed_form_B + 1e-9
        assert report.margin > 1.0  # generous at this systole

    def test_stress_log3(self):
        # small-radius stress: synthetic surface at r = ln 3 with the
        # identity-only count (worst case below the first shell)
        r = math.log(3.0)
        geom = SurfaceGeometry(
            systole=r, injectivity_radius=r, genus=None, hyp_volume=None, certified=True
        )
        report = assemble_bound_chain(identity_ball(radius=2.0), geom)
        assert report.orbit_sum_bound <= report.closed_form_B
        assert report.margin > 0

    def test_radius_must_cover_delta(self, bolza, bolza_geom):
        ball = enumerate_ball(bolza, I, I, 1.0)
        with pytest.raises(IncompleteBallError):
            assemble_bound_chain(ball, bolza_geom)

    def test_report_serialization(self):
        geom = SurfaceGeometry(
            systole=3.0, injectivity_radius=3.0, genus=None, hyp_volume=None, certified=True
        )
        report = assemble_bound_chain(identity_ball(radius=4.0), geom)
        doc = json.loads(report.to_json())
        assert doc["schema_version"] == 1
        assert set(doc["term_breakdown"]) == {
            "truncated_orbit_sum",
            "boundary_term",
            "tail_integral_term",
        }
        assert doc["assembled_bound"] <= doc["closed_form_bound"]
