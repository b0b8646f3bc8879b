import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsl.errors import DomainError
from tsl.series import (
    CoefficientSeries,
    ShiftParams,
    apply_shift,
    apply_shift_power,
    evaluate,
    weight,
)

ALPHAS = (-1.0, -0.5, 0.0, 0.5, 1.0, 2.0)


def series_of(*coeffs):
    return CoefficientSeries(np.array(coeffs, dtype=np.complex128))


class TestWeight:
    def test_base(self):
        assert weight(1, 2.0) == 4.0

    def test_zero_exponent(self):
        for n in (1, 2, 17, 1000):
            assert weight(n, 0.0) == 1.0

    def test_negative_exponent(self):
        assert weight(3, -1.0) == 0.75

    def test_rejects_zero_index(self):
        with pytest.raises(DomainError):
            weight(0, 1.0)


class TestApplyShift:
    def test_unweighted_backward_shift(self):
        out = apply_shift(series_of(0, 1), ShiftParams(0.0))
        assert out.max_degree == 0
        assert out.coefficients[0] == 1

    def test_constant_maps_to_zero(self):
        out = apply_shift(series_of(5), ShiftParams(1.7))
        assert out.max_degree == 0
        assert out.coefficients[0] == 0

    def test_weighted_square(self):
        out = apply_shift(series_of(0, 0, 1), ShiftParams(1.0))
        np.testing.assert_allclose(out.coefficients, [0, 1.5])

    def test_degree_drops_by_one(self):
        out = apply_shift(series_of(1, 2, 3, 4), ShiftParams(0.3))
        assert out.max_degree == 2


class TestShiftPower:
    def test_monomial_telescopes(self):
        z5 = series_of(0, 0, 0, 0, 0, 1)
        out = apply_shift_power(z5, 5, ShiftParams(1.0))
        np.testing.assert_allclose(out.coefficients, [6.0])

    def test_zero_power_is_identity(self):
        s = series_of(1, 2j, 3)
        assert apply_shift_power(s, 0, ShiftParams(0.5)) is s

    def test_power_past_degree_gives_zero(self):
        out = apply_shift_power(series_of(1, 2), 7, ShiftParams(1.0))
        assert out.max_degree == 0 and out.coefficients[0] == 0

    def test_matches_iterated_single_steps(self):
        rng = np.random.Generator(np.random.PCG64(7))
        coeffs = rng.standard_normal(65) + 1j * rng.standard_normal(65)
        s = CoefficientSeries(coeffs)
        for alpha in ALPHAS:
            params = ShiftParams(alpha)
            stepped = s
            for n in range(1, 33):
                stepped = apply_shift(stepped, params)
                closed = apply_shift_power(s, n, params)
                diff = np.abs(closed.coefficients - stepped.coefficients)
                scale = np.maximum(np.abs(closed.coefficients), 1e-300)
                assert float((diff / scale).max()) < 1e-12

    def test_evaluation_compatibility(self):
        rng = np.random.Generator(np.random.PCG64(11))
        coeffs = rng.standard_normal(33) + 1j * rng.standard_normal(33)
        s = CoefficientSeries(coeffs)
        for alpha in ALPHAS:
            for n in (0, 1, 5, 20):
                got = evaluate(apply_shift_power(s, n, ShiftParams(alpha)), 0)
                want = coeffs[n] * (n + 1.0) ** alpha
                assert abs(got - want) <= 1e-12 * max(1.0, abs(want))


class TestEvaluate:
    def test_half(self):
        assert evaluate(series_of(1, 1), 0.5) == 1.5

    def test_at_zero_returns_constant(self):
        assert evaluate(series_of(3.5, 1, 2, 9), 0) == 3.5

    def test_at_i(self):
        assert evaluate(series_of(1, 2, 3), 1j) == pytest.approx(-2 + 2j)

    def test_long_series_path(self):
        rng = np.random.Generator(np.random.PCG64(3))
        coeffs = rng.standard_normal(200)
        s = CoefficientSeries(coeffs.astype(np.complex128))
        z = 0.37 + 0.2j
        want = sum(c * z**j for j, c in enumerate(coeffs))
        assert abs(evaluate(s, z) - want) < 1e-10


@st.composite
def small_series(draw):
    n = draw(st.integers(min_value=1, max_value=12))
    vals = draw(
        st.lists(
            st.tuples(
                st.floats(-5, 5, allow_nan=False), st.floats(-5, 5, allow_nan=False)
            ),
            min_size=n,
            max_size=n,
        )
    )
    return CoefficientSeries(np.array([complex(a, b) for a, b in vals]))


class TestProperties:
    @settings(max_examples=80, derandomize=True)
    @given(s=small_series(), t=small_series(), alpha=st.sampled_from(ALPHAS))
    def test_linearity(self, s, t, alpha):
        n = max(s.max_degree, t.max_degree) + 1
        a = np.zeros(n, dtype=np.complex128)
        a[: len(s.coefficients)] = s.coefficients
        b = np.zeros(n, dtype=np.complex128)
        b[: len(t.coefficients)] = t.coefficients
        params = ShiftParams(alpha)
        lhs = apply_shift(CoefficientSeries(a + b), params).coefficients
        rhs = (
            apply_shift(CoefficientSeries(a), params).coefficients
            + apply_shift(CoefficientSeries(b), params).coefficients
        )
        np.testing.assert_allclose(lhs, rhs, atol=1e-14 * max(1.0, float(np.abs(rhs).max())))

    @settings(max_examples=60, derandomize=True)
    @given(s=small_series(), n=st.integers(0, 8), alpha=st.sampled_from(ALPHAS))
    def test_closed_form_matches_iteration(self, s, n, alpha):
        params = ShiftParams(alpha)
        stepped = s
        for _ in range(n):
            stepped = apply_shift(stepped, params)
        closed = apply_shift_power(s, n, params)
        np.testing.assert_allclose(
            closed.coefficients, stepped.coefficients, rtol=1e-12, atol=1e-12
        )


class TestInvariantsAndJson:
    def test_rejects_nan(self):
        with pytest.raises(DomainError):
            CoefficientSeries(np.array([np.nan + 0j]))

    def test_rejects_empty(self):
        with pytest.raises(DomainError):
            CoefficientSeries(np.array([], dtype=np.complex128))

    def test_length_tracks_degree(self):
        s = series_of(1, 0, 0)  # trailing zeros preserved
        assert s.max_degree == 2

    def test_immutable(self):
        s = series_of(1, 2)
        with pytest.raises(ValueError):
            s.coefficients[0] = 9

    def test_json_round_trip(self):
        s = series_of(1 + 2j, -0.5, 0)
        obj = s.to_json_obj()
        assert obj["max_degree"] == 2
        assert obj["coefficients"][0] == [1.0, 2.0]
        back = CoefficientSeries.from_json_obj(obj)
        np.testing.assert_array_equal(back.coefficients, s.coefficients)

    def test_json_rejects_degree_mismatch(self):
        with pytest.raises(DomainError):
            CoefficientSeries.from_json_obj({"max_degree": 5, "coefficients": [[1, 0]]})
