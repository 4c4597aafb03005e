"""Shrinkage catalog: encodings, generalized Bayes routes, tail fits."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sure_boundary.core import ProblemDims, constants
from sure_boundary.families import (
    BoundaryPhi,
    GBUnknown,
    Linear,
    Ordering,
    PositivePartJS,
    TailProfile,
    Zero,
    encode_phi_spec,
    make_shrinkage,
    parse_phi_spec,
    phi_gb_identity_saigo4,
    phi_gb_limit,
    phi_gb_unknown,
    phi_gb_unknown_deriv,
    psi_cross_inequality,
    resolve_w_floor,
    tail_profile,
)
from sure_boundary.quadrature import QuadratureConfig

DIMS = ProblemDims(5, 6)
K = constants(DIMS)


class TestSpecEncoding:
    @pytest.mark.parametrize(
        "text,spec",
        [
            ("zero", Zero()),
            ("linear:alpha=0.5", Linear(alpha=0.5)),
            ("jsplus:a=0.375", PositivePartJS(a=0.375)),
            ("boundary:b=1.0", BoundaryPhi(b=1.0)),
            ("gb:a=-2,b=1.0", GBUnknown(a=-2.0, b=1.0)),
        ],
    )
    def test_parse_examples(self, text, spec):
        assert parse_phi_spec(text) == spec

    @settings(max_examples=60, deadline=None)
    @given(
        st.one_of(
            st.just(Zero()),
            st.builds(Linear, alpha=st.floats(min_value=0.0, max_value=1.0)),
            st.builds(PositivePartJS, a=st.floats(min_value=1e-3, max_value=50.0)),
            st.builds(BoundaryPhi, b=st.floats(min_value=0.1, max_value=4.0)),
            st.builds(
                GBUnknown,
                a=st.floats(min_value=-1.9, max_value=2.0),
                b=st.floats(min_value=0.0, max_value=3.0),
            ),
        )
    )
    def test_round_trip(self, spec):
        text = encode_phi_spec(spec)
        assert parse_phi_spec(text) == spec
        assert encode_phi_spec(parse_phi_spec(text)) == text

    def test_malformed_specs_rejected(self):
        for bad in ("nope", "linear", "linear:alpha", "jsplus:b=1", "gb:b=1"):
            with pytest.raises(ValueError):
                parse_phi_spec(bad)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            Linear(alpha=1.5)
        with pytest.raises(ValueError):
            PositivePartJS(a=0.0)
        with pytest.raises(ValueError):
            BoundaryPhi(b=-1.0)
        with pytest.raises(ValueError):
            GBUnknown(a=-5.0, b=1.0).validate_for(DIMS)


ALL_SPECS = [
    Zero(),
    Linear(alpha=0.5),
    PositivePartJS(a=0.375),
    BoundaryPhi(b=0.5),
    BoundaryPhi(b=1.0),
    BoundaryPhi(b=2.0),
    GBUnknown(a=-2.0, b=1.0),
]


class TestNonnegativity:
    @pytest.mark.parametrize("spec", ALL_SPECS, ids=encode_phi_spec)
    def test_zero_at_origin_and_nonnegative(self, spec):
        phi = make_shrinkage(spec, DIMS)
        grid = np.concatenate([[0.0], np.geomspace(1e-8, 1e10, 300)])
        vals = np.asarray(phi.eval(grid))
        assert vals[0] == 0.0
        assert np.all(vals >= 0.0)

    def test_boundary_floor_default_keeps_origin_at_zero(self):
        for b in (0.25, 0.5, 1.0, 2.0, 5.0):
            phi = make_shrinkage(BoundaryPhi(b=b), DIMS)
            assert phi.eval(0.0) == 0.0
        # the crossing cap: floor never exceeds e^2
        assert resolve_w_floor(BoundaryPhi(b=10.0), DIMS) == pytest.approx(math.e**2)

    def test_boundary_explicit_floor_above_crossing_breaks_a1(self):
        # user-chosen floors are honored even when they violate phi(0) = 0
        phi = make_shrinkage(BoundaryPhi(b=1.0, w_floor=math.e**2), DIMS)
        assert phi.eval(0.0) > 0.0


class TestGBUnknown:
    def test_zero_at_w_zero(self):
        assert phi_gb_unknown(-2.0, 1.0, 0.0, DIMS) == 0.0

    def test_a_minus_two_limit_bracket(self):
        for b in (0.5, 1.0, 2.0):
            val = phi_gb_unknown(-2.0, b, 1e8, DIMS)
            assert 0.3 <= val <= 0.375

    def test_a_zero_limit_bracket(self):
        assert phi_gb_limit(0.0, DIMS) == pytest.approx(1.75)
        val = phi_gb_unknown(0.0, 0.0, 1e8, DIMS)
        assert 1.6 <= val <= 1.75

    def test_deriv_against_finite_difference(self):
        for w in (1.0, 10.0, 100.0):
            anal = phi_gb_unknown_deriv(-2.0, 1.0, w, DIMS)
            h = 1e-4 * w
            fd = (
                phi_gb_unknown(-2.0, 1.0, w + h, DIMS)
                - phi_gb_unknown(-2.0, 1.0, w - h, DIMS)
            ) / (2.0 * h)
            assert abs(anal - fd) <= 1e-5 * abs(fd)

    def test_deriv_matches_slope_near_origin(self):
        gaps = []
        for w in (1e-3, 1e-4):
            ratio = phi_gb_unknown(-2.0, 1.0, w, DIMS) / w
            deriv = phi_gb_unknown_deriv(-2.0, 1.0, w, DIMS)
            gaps.append(abs(deriv - ratio))
        assert gaps[1] < gaps[0]
        assert gaps[1] < 1e-4

    def test_deriv_positive_spot(self):
        assert phi_gb_unknown_deriv(-2.0, 1.0, 1.0, DIMS) > 0.0

    def test_monotone_and_bounded_toward_limit(self):
        for a in (-2.0, -1.0, 0.0):
            limit = phi_gb_limit(a, DIMS)
            vals = [phi_gb_unknown(a, 0.0, w, DIMS) for w in np.geomspace(0.1, 1e8, 25)]
            assert all(x < y + 1e-12 for x, y in zip(vals, vals[1:]))
            assert all(v <= limit + 1e-9 for v in vals)

    def test_quadrature_self_consistency(self):
        for a, b, w in [(-2.0, 1.0, 7.0), (-2.0, 0.5, 1e5), (0.0, 2.0, 30.0)]:
            loose = phi_gb_unknown(a, b, w, DIMS, QuadratureConfig(rel_tol=1e-8))
            tight = phi_gb_unknown(a, b, w, DIMS, QuadratureConfig(rel_tol=5e-9))
            assert abs(loose - tight) <= 1e-8 * (1.0 + abs(tight))

    def test_compiled_spline_tracks_exact_route(self):
        phi = make_shrinkage(GBUnknown(a=-2.0, b=1.0), DIMS)
        for w in (1e-4, 0.01, 1.0, 7.3, 100.0, 1e6, 1e8):
            exact = phi_gb_unknown(-2.0, 1.0, w, DIMS)
            assert abs(phi.eval(w) - exact) <= 5e-7 * (1.0 + exact)

    def test_compiled_deriv_consistent_with_compiled_eval(self):
        phi = make_shrinkage(GBUnknown(a=-2.0, b=1.0), DIMS)
        for w in (0.5, 5.0, 500.0):
            h = 1e-6 * w
            fd = (phi.eval(w + h) - phi.eval(w - h)) / (2.0 * h)
            assert abs(phi.deriv(w) - fd) <= 1e-4 * abs(fd)


class TestSaigo4Identity:
    @pytest.mark.parametrize("b", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("w", [1.0, 10.0, 1000.0])
    def test_two_routes_agree(self, b, w):
        lhs = phi_gb_unknown(-2.0, b, w, DIMS)
        rhs = phi_gb_identity_saigo4(b, w, DIMS)
        assert abs(lhs - rhs) <= 1e-8 * (1.0 + abs(lhs))

    def test_b_zero_includes_boundary_term(self):
        for w in (1.0, 100.0):
            lhs = phi_gb_unknown(-2.0, 0.0, w, DIMS)
            rhs = phi_gb_identity_saigo4(0.0, w, DIMS)
            assert abs(lhs - rhs) <= 1e-10 * (1.0 + abs(lhs))

    def test_scaled_tail_gap_near_beta_star(self):
        # (log w)(c_pn - phi) at w = 1e6 within 15% of beta_star for b = 1
        y = math.log(1e6) * (K.c_pn - phi_gb_unknown(-2.0, 1.0, 1e6, DIMS))
        assert abs(y - K.beta_star) <= 0.15 * K.beta_star


class TestTailProfile:
    GRID = np.geomspace(1e3, 1e8, 48)

    def test_boundary_phi_exact_fit(self):
        phi = make_shrinkage(BoundaryPhi(b=1.0), DIMS)
        prof = tail_profile(phi, DIMS, self.GRID)
        assert prof.b_hat == pytest.approx(1.0, abs=1e-6)
        assert prof.fit_quality < 1e-6

    def test_gb_tail_coefficient(self):
        phi = make_shrinkage(GBUnknown(a=-2.0, b=1.0), DIMS)
        prof = tail_profile(phi, DIMS, self.GRID)
        assert 0.85 <= prof.b_hat <= 1.15

    def test_linear_is_unbounded(self):
        phi = make_shrinkage(Linear(alpha=0.5), DIMS)
        prof = tail_profile(phi, DIMS, self.GRID)
        assert math.isinf(prof.phi_limit)
        assert prof.b_hat is None

    def test_jsplus_at_c_pn_fits_zero_coefficient(self):
        phi = make_shrinkage(PositivePartJS(a=K.c_pn), DIMS)
        prof = tail_profile(phi, DIMS, self.GRID)
        assert prof.phi_limit == pytest.approx(K.c_pn)
        assert abs(prof.b_hat) < 1e-9

    def test_far_from_critical_level_has_no_fit(self):
        phi = make_shrinkage(PositivePartJS(a=5.0), DIMS)
        prof = tail_profile(phi, DIMS, self.GRID)
        assert prof.phi_limit == pytest.approx(5.0)
        assert prof.b_hat is None

    def test_grid_preconditions(self):
        phi = make_shrinkage(Zero(), DIMS)
        with pytest.raises(ValueError):
            tail_profile(phi, DIMS, np.geomspace(1e3, 1e8, 10))
        with pytest.raises(ValueError):
            tail_profile(phi, DIMS, np.geomspace(1e4, 1e8, 30))
        with pytest.raises(ValueError):
            tail_profile(phi, DIMS, np.geomspace(1e3, 1e6, 30))


class TestCrossInequality:
    def test_equal_at_same_coefficient(self):
        assert psi_cross_inequality(1.0, 1.0, 100.0, DIMS) is Ordering.EQUAL

    def test_larger_b_shrinks_less(self):
        # (log y)^2 / (log y)^1 is non-decreasing -> phi_{-2,2} <= phi_{-2,1}
        assert psi_cross_inequality(2.0, 1.0, 100.0, DIMS) is Ordering.LESS

    def test_ordering_invariant_across_w(self):
        for w in (10.0, 1e3, 1e5):
            assert psi_cross_inequality(2.0, 1.0, w, DIMS) is Ordering.LESS
            assert psi_cross_inequality(0.5, 1.0, w, DIMS) is Ordering.GREATER
