import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tfrw.errors import InvalidArgumentError, QuadratureError
from tfrw.profiles import (Gaussian, Lorentzian, NearDelta, Tabulated, evaluate, l2_norm,
                           matched_profile, profile_from_dict, profile_to_dict)


def test_lorentzian_value_at_centre():
    assert evaluate(Lorentzian(1.0, 1.0, 10.0), 10.0) == pytest.approx(2j, abs=1e-15)


def test_lorentzian_conjugates_amplitude():
    p = Lorentzian(1 + 2j, 2.0, 0.0)
    assert p(0.0) == pytest.approx(1j * (1 - 2j) / 1.0)


def test_gaussian_peak():
    assert evaluate(Gaussian(0.7 - 0.1j, 0.3, 4.0), 4.0) == pytest.approx(0.7 - 0.1j)


def test_tabulated_zero_outside():
    p = Tabulated([0.0, 1.0, 2.0], [1.0, 2j, 3.0])
    assert p(-0.1) == 0
    assert p(2.5) == 0
    assert p(0.5) == pytest.approx(0.5 + 1j)


def test_vectorized_evaluation():
    p = Lorentzian(1.0, 1.0, 10.0)
    w = np.linspace(0, 20, 7)
    np.testing.assert_allclose(p(w), [p(x) for x in w], rtol=1e-15)


@pytest.mark.parametrize("bad", [dict(linewidth=0.0), dict(linewidth=-1.0),
                                 dict(linewidth=float("inf"))])
def test_lorentzian_rejects_linewidth(bad):
    with pytest.raises(InvalidArgumentError):
        Lorentzian(1.0, center=0.0, **bad)


def test_near_delta_rejects_zero_width():
    with pytest.raises(InvalidArgumentError):
        NearDelta(10.0, 0.0)


def test_tabulated_must_be_sorted():
    with pytest.raises(InvalidArgumentError):
        Tabulated([0.0, 2.0, 1.0], [1, 1, 1])


class TestNorms:
    def test_unit_lorentzian(self):
        assert l2_norm(Lorentzian(1.0, 1.0, 10.0)) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-8)

    def test_normalized_lorentzian(self):
        G = 0.37
        assert l2_norm(Lorentzian(math.sqrt(G / (2 * math.pi)), G, 3.0)) == pytest.approx(1.0, rel=1e-8)

    def test_near_delta_is_unit_norm(self):
        assert l2_norm(NearDelta(10.0, 1e-3)) == pytest.approx(1.0, rel=1e-8)

    def test_gaussian_norm(self):
        # integral of exp(-w^2 / (2 s^2)) is s sqrt(2 pi)
        s = 0.4
        assert l2_norm(Gaussian(1.0, s, 2.0)) ** 2 == pytest.approx(s * math.sqrt(2 * math.pi),
                                                                    rel=1e-9)

    def test_homogeneity(self):
        p = Lorentzian(1.0, 1.0, 10.0)
        assert l2_norm(Lorentzian(2.0, 1.0, 10.0)) == pytest.approx(2 * l2_norm(p), rel=1e-9)

    def test_tabulated_triangle(self):
        # integral of a unit triangle squared over [-1, 1] is 2/3
        p = Tabulated([-1.0, 0.0, 1.0], [0.0, 1.0, 0.0])
        assert l2_norm(p) ** 2 == pytest.approx(2 / 3, rel=1e-9)

    def test_non_finite_tabulated(self):
        with pytest.raises(QuadratureError):
            l2_norm(Tabulated([0.0, 1.0], [1.0, np.inf]))


class TestMatched:
    def test_identity(self):
        f = Lorentzian(1.0, 1.0, 10.0)
        assert matched_profile(f, 1.0) == f

    def test_lorentzian_halved(self):
        g = matched_profile(Lorentzian(1.0, 1.0, 10.0), 2.0)
        assert isinstance(g, Lorentzian)
        assert (g.center, g.linewidth) == (5.0, 0.5)

    @pytest.mark.parametrize("f", [Lorentzian(1 + 1j, 0.8, 7.0), Gaussian(1.0, 0.5, 3.0),
                                   NearDelta(4.0, 0.01),
                                   Tabulated([1.0, 2.0, 3.0], [0.0, 1j, 0.0])])
    @pytest.mark.parametrize("s", [0.3, 1.7, 4.0])
    def test_definition(self, f, s):
        g = matched_profile(f, s)
        w = np.linspace(-2, 12, 57) / s
        np.testing.assert_allclose(g(w), math.sqrt(s) * f(s * w), rtol=1e-12, atol=1e-15)

    def test_rejects_bad_scale(self):
        with pytest.raises(InvalidArgumentError):
            matched_profile(Lorentzian(), 0.0)


@given(s=st.floats(0.1, 10.0), G=st.floats(0.05, 5.0), c=st.floats(-20, 20))
def test_matching_preserves_norm(s, G, c):
    f = Lorentzian(0.3 - 0.2j, G, c)
    assert l2_norm(matched_profile(f, s)) == pytest.approx(l2_norm(f), rel=1e-8)


@given(s=st.floats(0.1, 10.0), sigma=st.floats(0.05, 5.0))
def test_gaussian_matching_preserves_norm(s, sigma):
    f = Gaussian(1.0, sigma, 1.0)
    assert l2_norm(matched_profile(f, s)) == pytest.approx(l2_norm(f), rel=1e-8)


@pytest.mark.parametrize("p", [Lorentzian(1 - 1j, 0.5, 3.0), NearDelta(10.0, 0.01),
                               Gaussian(2j, 0.2, -1.0),
                               Tabulated([0.0, 1.0], [1.0, 2 - 1j])])
def test_dict_round_trip(p):
    q = profile_from_dict(profile_to_dict(p))
    w = np.linspace(-3, 12, 31)
    np.testing.assert_array_equal(q(w), p(w))


def test_unknown_kind():
    with pytest.raises(InvalidArgumentError, match="unknown profile kind"):
        profile_from_dict({"kind": "sinc"})
