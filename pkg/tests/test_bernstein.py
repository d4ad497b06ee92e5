from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from bdchoquet.bernstein import (
    BernsteinPolynomial,
    basis_simplex,
    bernstein_basis_1d,
    classical_bernstein,
    classical_genuine,
    durrmeyer_borel,
    enumerate_multi_indices,
    grid_for,
    multinomial,
)
from bdchoquet.capacities import Dirac, DistortedLebesgue, Distortion, LebesgueBorel
from bdchoquet.exceptions import StrictPositivityError

XS = np.linspace(0, 1, 101)


def quad_durrmeyer(f, n, x):
    """Independent oracle: Lebesgue Durrmeyer coefficients by scipy quadrature."""
    c = [
        integrate.quad(lambda t: f(t) * t**k * (1 - t) ** (n - k), 0, 1, epsabs=1e-14)[0]
        / integrate.quad(lambda t: t**k * (1 - t) ** (n - k), 0, 1, epsabs=1e-14)[0]
        for k in range(n + 1)
    ]
    return sum(ck * comb(n, k) * x**k * (1 - x) ** (n - k) for k, ck in enumerate(c))


def quad_genuine(f, n, x):
    c = [f(0.0)]
    for k in range(1, n):
        w = lambda t: t ** (k - 1) * (1 - t) ** (n - k - 1)  # noqa: E731
        c.append(integrate.quad(lambda t: f(t) * w(t), 0, 1)[0] / integrate.quad(w, 0, 1)[0])
    c.append(f(1.0))
    return sum(ck * comb(n, k) * x**k * (1 - x) ** (n - k) for k, ck in enumerate(c))


class TestMultiIndices:
    def test_examples(self):
        assert enumerate_multi_indices(1, 1) == ((1, 0), (0, 1))
        assert len(enumerate_multi_indices(2, 2)) == 6
        assert [a[1] for a in enumerate_multi_indices(5, 1)] == list(range(6))

    @pytest.mark.parametrize("n,d", [(1, 2), (4, 2), (7, 1), (10, 2)])
    def test_count_unique_sum(self, n, d):
        idx = enumerate_multi_indices(n, d)
        assert len(idx) == len(set(idx)) == comb(n + d, d)
        assert all(sum(a) == n and min(a) >= 0 for a in idx)
        assert list(idx) == sorted(idx, key=lambda a: a[1:])

    def test_rejects(self):
        with pytest.raises(ValueError):
            enumerate_multi_indices(3, 3)
        with pytest.raises(ValueError):
            enumerate_multi_indices(0, 1)

    def test_multinomial(self):
        assert multinomial((1, 1, 0)) == 2
        assert multinomial((2, 3, 1)) == 60


class TestBasis:
    def test_examples(self):
        assert bernstein_basis_1d(2, 1, 0.5) == 0.5
        assert sum(bernstein_basis_1d(10, k, 0.3) for k in range(11)) == pytest.approx(1, abs=1e-12)
        B, P = basis_simplex((1, 1, 0), (0.2, 0.3))
        assert B == pytest.approx(0.2, abs=1e-15) and P == pytest.approx(0.1, abs=1e-15)

    def test_zero_power_convention(self):
        assert bernstein_basis_1d(5, 0, 0.0) == 1.0
        assert bernstein_basis_1d(5, 5, 1.0) == 1.0
        assert bernstein_basis_1d(80, 0, 0.0) == 1.0
        assert bernstein_basis_1d(80, 80, 1.0) == 1.0

    def test_rejects_k_above_n(self):
        with pytest.raises(ValueError):
            bernstein_basis_1d(3, 4, 0.5)

    @pytest.mark.parametrize("n", [1, 2, 7, 50, 51, 128, 256])
    def test_partition_of_unity(self, n):
        vals = np.stack([bernstein_basis_1d(n, k, XS) for k in range(n + 1)])
        assert vals.min() >= 0
        assert np.max(np.abs(vals.sum(axis=0) - 1)) < 1e-12

    def test_log_space_matches_direct(self):
        for k in (0, 10, 30, 60):
            direct = comb(60, k) * XS**k * (1 - XS) ** (60 - k)
            np.testing.assert_allclose(bernstein_basis_1d(60, k, XS), direct, rtol=1e-11, atol=1e-300)

    @pytest.mark.parametrize("n", [1, 3, 8])
    def test_simplex_partition(self, n):
        g = np.linspace(0, 1, 21)
        pts = np.array([(a, b) for a in g for b in g if a + b <= 1 + 1e-12])
        tot = sum(basis_simplex(a, pts)[0] for a in enumerate_multi_indices(n, 2))
        assert np.max(np.abs(tot - 1)) < 1e-12


class TestClassical:
    def test_bernstein_examples(self):
        assert classical_bernstein(lambda t: t, 5, 0.3) == pytest.approx(0.3, abs=1e-15)
        assert classical_bernstein(lambda t: t**2, 2, 0.5) == pytest.approx(0.375, abs=1e-15)
        np.testing.assert_allclose(classical_bernstein(lambda t: 0 * t + 2.5, 9, XS), 2.5, atol=1e-14)

    def test_bernstein_t2_closed_form(self):
        for n in (1, 4, 17):
            np.testing.assert_allclose(
                classical_bernstein(lambda t: t**2, n, XS), XS**2 + XS * (1 - XS) / n, atol=1e-14
            )

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 40), st.floats(0.1, 3.0))
    def test_convex_above(self, n, a):
        f = lambda t: np.exp(a * t)  # noqa: E731
        x = XS[1:-1]
        assert np.all(classical_bernstein(f, n, x) >= f(x) - 1e-13)

    def test_genuine_examples(self):
        assert classical_genuine(lambda t: np.ones_like(t), 4, 0.3) == pytest.approx(1, abs=1e-12)
        assert classical_genuine(lambda t: t, 4, 0.25) == pytest.approx(0.25, abs=2e-6)
        with pytest.raises(ValueError):
            classical_genuine(lambda t: t, 1, 0.5)

    @pytest.mark.parametrize("n", [2, 5, 9])
    def test_genuine_vs_oracle(self, n):
        f = lambda t: np.exp(t) * np.sin(3 * t) + 1  # noqa: E731
        x = np.linspace(0, 1, 11)
        np.testing.assert_allclose(classical_genuine(f, n, x), [quad_genuine(f, n, v) for v in x], atol=2e-6)

    @pytest.mark.parametrize("n", [1, 4, 10])
    def test_durrmeyer_vs_oracle(self, n):
        f = lambda t: np.abs(t - 0.3) + t**3  # noqa: E731
        x = np.linspace(0, 1, 11)
        got = durrmeyer_borel(f, n, x, LebesgueBorel())
        np.testing.assert_allclose(got, [quad_durrmeyer(f, n, v) for v in x], atol=2e-6)

    def test_durrmeyer_constant(self):
        assert durrmeyer_borel(lambda t: 0 * t + 1, 6, 0.4, LebesgueBorel()) == pytest.approx(1, abs=1e-13)

    def test_durrmeyer_rejects(self):
        with pytest.raises(ValueError):
            durrmeyer_borel(lambda t: t, 3, 0.5, DistortedLebesgue(Distortion.sqrt()))
        # Dirac at 0 gives zero denominators for k >= 1
        with pytest.raises(StrictPositivityError):
            durrmeyer_borel(lambda t: t, 3, 0.5, Dirac(0.0))


def test_grid_for():
    assert grid_for(2) == 2048 and grid_for(3) == 2049 and grid_for(64) == 2048
    for n in (1, 5, 7, 33, 100, 3000):
        M = grid_for(n)
        assert M % n == 0 and M >= 2048 and M - n < 2048


class TestBernsteinPolynomial:
    def test_derivative_matches_finite_difference(self):
        g = BernsteinPolynomial.of(lambda t: np.sin(3 * t), 12)
        h = 1e-6
        x = np.linspace(0.1, 0.9, 9)
        np.testing.assert_allclose(g.derivative(x), (g(x + h) - g(x - h)) / (2 * h), atol=1e-7)

    def test_derivative_bound(self):
        g = BernsteinPolynomial.of(lambda t: t**2, 8)
        fine = np.linspace(0, 1, 4001)
        assert g.derivative_bound() >= np.max(np.abs(g.derivative(fine))) - 1e-12
        # exact for t^2: B_m(t^2)' = 2x + (1 - 2x)/m, max at x = 1
        assert g.derivative_bound() == pytest.approx(2 - 1 / 8)
