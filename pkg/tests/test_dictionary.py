import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from robust_koopman import dictionary as dct
from robust_koopman.errors import ConfigError, DimensionError

finite = st.floats(-50, 50, allow_nan=False)


def test_linear_is_identity_lift():
    np.testing.assert_array_equal(dct.linear(2).evaluate([1.0, 2.0]), [1, 2])


def test_fourier_at_zero_is_all_ones():
    np.testing.assert_array_equal(dct.fourier(1, 1, 0).evaluate([0.0]), [1, 1, 1])


def test_fourier_at_pi_alternates():
    d = dct.fourier(2, 10, 1)
    assert d.feature_dim == 21
    k = np.arange(-10, 11)
    np.testing.assert_allclose(d.evaluate([0.3, np.pi]), (-1.0) ** k, atol=1e-12)


def test_fourier_ascending_frequency():
    z = dct.fourier(1, 2, 0).evaluate([0.4])
    np.testing.assert_allclose(np.angle(z), 0.4 * np.arange(-2, 3), atol=1e-12)


def test_batch_linear_identity():
    np.testing.assert_array_equal(dct.linear(2).evaluate_batch([[1, 0], [0, 1]]), np.eye(2))


def test_batch_empty():
    assert dct.fourier(1, 3, 0).evaluate_batch(np.empty((0, 1))).shape == (0, 7)


def test_fourier_batch_unit_modulus(rng):
    Z = dct.fourier(1, 2, 0).evaluate_batch(rng.uniform(-10, 10, (5, 1)))
    np.testing.assert_allclose(np.abs(Z), 1.0)


def test_monomial_graded_lex():
    np.testing.assert_array_equal(dct.monomial(2, 2).evaluate([2.0, 3.0]), [1, 2, 3, 4, 6, 9])


def test_monomial_degree_one_is_constant_plus_linear(rng):
    X = rng.standard_normal((6, 3))
    Z = dct.monomial(3, 1).evaluate_batch(X)
    np.testing.assert_array_equal(Z[:, 0], 1)
    np.testing.assert_array_equal(Z[:, 1:], dct.linear(3).evaluate_batch(X))


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        dct.linear(3).evaluate([1.0, 2.0])
    with pytest.raises(DimensionError):
        dct.linear(2).evaluate_batch(np.ones((3, 3)))


def test_invalid_construction():
    with pytest.raises(ConfigError):
        dct.fourier(2, 3, 2)
    with pytest.raises(ConfigError):
        dct.Dictionary("x", "wavelet", 2)


@pytest.mark.parametrize("text,kind,k", [("linear", "linear", 3), ("fourier:4:1", "fourier", 9), ("monomial:2", "monomial", 10)])
def test_parse_spec(text, kind, k):
    d = dct.parse_spec(text, 3)
    assert d.kind == kind and d.feature_dim == k


@pytest.mark.parametrize("text", ["", "fourier:4", "monomial:x", "poly:2"])
def test_parse_spec_rejects(text):
    with pytest.raises(ConfigError):
        dct.parse_spec(text, 3)


def test_describe_round_trip():
    d = dct.fourier(2, 10, 1)
    assert dct.Dictionary.from_description(d.describe()) == d


@settings(max_examples=50, deadline=None)
@given(x=arrays(float, st.tuples(st.integers(1, 6), st.just(2)), elements=finite), n=st.integers(0, 6))
def test_fourier_unit_modulus_property(x, n):
    np.testing.assert_allclose(np.abs(dct.fourier(2, n, 1).evaluate_batch(x)), 1.0, rtol=1e-12)


@settings(max_examples=50, deadline=None)
@given(x=arrays(float, st.tuples(st.integers(1, 6), st.just(3)), elements=finite))
@pytest.mark.parametrize("d", [dct.linear(3), dct.fourier(3, 3, 2), dct.monomial(3, 3)])
def test_batch_equals_rows(d, x):
    Z = d.evaluate_batch(x)
    for m in range(x.shape[0]):
        np.testing.assert_array_equal(Z[m], d.evaluate(x[m]))
