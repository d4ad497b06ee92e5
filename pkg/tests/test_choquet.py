import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from bdchoquet.capacities import (
    Dirac,
    DistortedLebesgue,
    Distortion,
    LebesgueBorel,
    Possibility,
    Scaled,
    UnimodalDistribution,
)
from bdchoquet.choquet import (
    BetaQuadrature,
    SampledFunction1D,
    SampledFunctionSimplex,
    SortedLevels,
    beta_quadrature,
    choquet_integral,
    lp_choquet_functional,
    ordinary_integral,
    property_suite,
)
from bdchoquet.exceptions import ConvergenceWarning
from bdchoquet.sets import IntervalSet, SimplexCellSet, canonicalize

SQRT = DistortedLebesgue(Distortion.sqrt())
SIN = DistortedLebesgue(Distortion.sin())
LEB = LebesgueBorel()
BUMP42 = Possibility(UnimodalDistribution.bump(4, 2))
CAPS = [LEB, SQRT, SIN, DistortedLebesgue(Distortion.power(0.5)), BUMP42, Dirac(0.37), Scaled(SIN, 0.5)]
FULL = IntervalSet.full()


def oracle_distorted(gamma, f_inv_tail, top):
    """int_0^top gamma(m{f >= beta}) dbeta for continuous increasing f (scipy oracle)."""
    return integrate.quad(lambda b: gamma(f_inv_tail(b)), 0.0, top, epsabs=1e-13)[0]


# oracle values, frozen
TWO_THIRDS = oracle_distorted(np.sqrt, lambda b: 1 - b, 1.0)
ONE_MINUS_COS1 = oracle_distorted(np.sin, lambda b: 1 - b, 1.0)


def test_frozen_oracles():
    assert TWO_THIRDS == pytest.approx(2 / 3, abs=1e-12)
    assert ONE_MINUS_COS1 == pytest.approx(1 - np.cos(1.0), abs=1e-12)


def test_identity_sqrt():
    f = SampledFunction1D.from_callable(lambda t: t)
    assert choquet_integral(f, FULL, SQRT) == pytest.approx(TWO_THIRDS, abs=1e-6)


def test_lp_sin():
    f = SampledFunction1D.from_callable(lambda t: t)
    assert lp_choquet_functional(f, SIN, 1) == pytest.approx(ONE_MINUS_COS1, abs=1e-6)


def test_lp_trivial():
    zero = SampledFunction1D.from_callable(lambda t: 0 * t, 64)
    one = SampledFunction1D.from_callable(lambda t: 1 + 0 * t, 64)
    for p in (1, 2, 3.5):
        assert lp_choquet_functional(zero, SQRT, p) == 0.0
        assert lp_choquet_functional(one, SQRT, p) == pytest.approx(1.0, abs=1e-15)
        assert lp_choquet_functional(one, SIN, p) == pytest.approx(np.sin(1.0) ** (1 / p), abs=1e-15)
    with pytest.raises(ValueError):
        lp_choquet_functional(one, SIN, 0.5)


@pytest.mark.parametrize("c", CAPS, ids=lambda c: c.describe())
def test_constant_one_gives_measure(c):
    one = SampledFunction1D.from_callable(lambda t: np.ones_like(t), 256)
    for A in (FULL, canonicalize([(0.1, 0.3), (0.5, 0.55)]), IntervalSet.empty()):
        assert choquet_integral(one, A, c) == pytest.approx(c.measure(A), abs=1e-14)


def test_bump_E21():
    f = SampledFunction1D.from_callable(lambda t: t * (1 - t))
    P = Possibility(UnimodalDistribution.bump(2, 1))
    assert choquet_integral(f, FULL, P) == pytest.approx(0.25, abs=1e-15)
    assert choquet_integral(f, FULL, P, BetaQuadrature()) == pytest.approx(0.25, rel=1e-6)


def test_empty_set_is_zero():
    f = SampledFunction1D.from_callable(lambda t: t - 0.5, 64)
    assert choquet_integral(f, IntervalSet.empty(), SQRT) == 0.0
    assert choquet_integral(f, IntervalSet.empty(), SQRT, BetaQuadrature()) == 0.0


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        SampledFunction1D.from_values([0.0, np.inf, 1.0])
    with pytest.raises(ValueError):
        SampledFunction1D.from_values([0.0])


def test_negative_integrand_two_terms():
    # f = t - 1 on [0,1] against sqrt(m): second term only.
    # int_{-1}^0 (sqrt(m{t - 1 >= b}) - 1) db = int_{-1}^0 (sqrt(-b) - 1) db = 2/3 - 1
    f = SampledFunction1D.from_callable(lambda t: t - 1.0)
    assert choquet_integral(f, FULL, SQRT) == pytest.approx(-1 / 3, abs=1e-6)
    # all-negative on a subset still sees the gap (max f, 0]
    A = IntervalSet([(0.0, 0.5)])
    shifted = SampledFunction1D.from_callable(lambda t: t)
    assert choquet_integral(f, A, SQRT) == pytest.approx(
        choquet_integral(shifted, A, SQRT) - SQRT(A), abs=1e-12
    )


def test_dirac_point_value():
    f = SampledFunction1D.from_callable(lambda t: np.exp(t), 1000)
    assert choquet_integral(f, FULL, Dirac(0.25)) == pytest.approx(np.exp(0.25), rel=1e-14)
    assert ordinary_integral(f, FULL, Dirac(0.25)) == pytest.approx(np.exp(0.25), rel=1e-14)


def test_lebesgue_is_trapezoid():
    f = SampledFunction1D.from_callable(np.exp, 100)
    t = np.linspace(0, 1, 101)
    assert choquet_integral(f, FULL, LEB) == pytest.approx(np.trapezoid(np.exp(t), t), rel=1e-14)


def test_midpoint_mode():
    f = SampledFunction1D.from_callable(lambda t: t**2, 512, mode="midpoint")
    assert choquet_integral(f, FULL, LEB) == pytest.approx(1 / 3, abs=1e-6)
    g = SampledFunction1D.from_callable(lambda t: t**2, 512, mode="node-average")
    assert choquet_integral(g, FULL, LEB) == pytest.approx(1 / 3, abs=1e-5)


def test_beta_steps_validation():
    for bad in (8, 24):
        with pytest.raises(ValueError):
            BetaQuadrature(steps=bad)


def test_beta_warns_when_capped():
    f = SampledFunction1D.from_cells(np.random.default_rng(0).random(64))
    with pytest.warns(ConvergenceWarning):
        choquet_integral(f, FULL, SQRT, BetaQuadrature(max_steps=64))
    res = beta_quadrature(f, FULL, SQRT, BetaQuadrature(max_steps=64))
    assert not res.converged and res.steps == 64


@pytest.mark.parametrize("c", CAPS, ids=lambda c: c.describe())
def test_methods_agree(c):
    rng = np.random.default_rng(11)
    for signed in (False, True):
        vals = rng.random(2048) - (0.4 if signed else 0.0)
        f = SampledFunction1D.from_cells(vals)
        for A in (FULL, canonicalize([(0.05, 0.4), (0.6, 0.9)])):
            exact = choquet_integral(f, A, c, SortedLevels())
            with warnings.catch_warnings():
                # step integrands converge at O(h); residual <= h/2 * variation
                warnings.simplefilter("ignore", ConvergenceWarning)
                approx = choquet_integral(f, A, c, BetaQuadrature())
            assert approx == pytest.approx(exact, abs=2e-6)


def test_beta_no_false_convergence():
    # two doublings can agree exactly while both miss the single Dirac jump
    vals = np.random.default_rng(11).random(2048)
    f = SampledFunction1D.from_cells(vals)
    c = Dirac(0.37)
    exact = choquet_integral(f, FULL, c)
    res = beta_quadrature(f, FULL, c)
    assert abs(res.value - exact) <= res.error_bound + 1e-12
    assert res.error_bound < 1e-6


def test_beta_exact_for_flat_levels():
    # mu(F_beta) is constant on [0, max f]: zero variation, converges at once
    f = SampledFunction1D.from_callable(lambda t: t**3 * (1 - t) ** 2)
    res = beta_quadrature(f, FULL, Possibility(UnimodalDistribution.bump(5, 3)))
    assert res.converged and res.error_bound == 0.0


@pytest.mark.parametrize("c", [LEB, Scaled(LEB, 2.0), Dirac(0.5)], ids=lambda c: c.describe())
def test_additive_fast_path(c):
    rng = np.random.default_rng(5)
    for _ in range(20):
        f = SampledFunction1D.from_cells(rng.normal(size=300))
        A = canonicalize(np.sort(rng.random((2, 2)), axis=1))
        assert choquet_integral(f, A, c) == pytest.approx(ordinary_integral(f, A, c), abs=1e-9)


cells = st.lists(st.floats(-2, 2, allow_nan=False), min_size=2, max_size=40)


@settings(max_examples=150, deadline=None)
@given(cells, st.floats(0, 5), st.floats(-3, 3))
def test_homogeneity_translation_hyp(vals, a, c0):
    f = SampledFunction1D.from_cells(vals)
    A = canonicalize([(0.1, 0.7)])
    base = choquet_integral(f, A, SIN)
    assert choquet_integral(f * a, A, SIN) == pytest.approx(a * base, abs=1e-9)
    assert choquet_integral(f + c0, A, SIN) == pytest.approx(base + c0 * SIN(A), abs=1e-9)


@settings(max_examples=150, deadline=None)
@given(cells, st.integers(0, 2**31))
def test_subadditive_and_monotone_hyp(vals, seed):
    rng = np.random.default_rng(seed)
    f = SampledFunction1D.from_cells(vals)
    g = SampledFunction1D.from_cells(rng.normal(size=len(vals)))
    for c in (SQRT, BUMP42):
        assert choquet_integral(f + g, FULL, c) <= choquet_integral(f, FULL, c) + choquet_integral(g, FULL, c) + 1e-9
        assert choquet_integral(f, FULL, c) <= choquet_integral(f + abs(g), FULL, c) + 1e-9


@pytest.mark.parametrize("c", [SQRT, SIN, BUMP42, LEB], ids=lambda c: c.describe())
def test_property_suite(c):
    res = property_suite(c, seed=3, trials=100)
    assert {"homogeneity", "translation", "monotone_in_f", "monotone_in_set", "constant_one"} <= set(res)
    assert "subadditive_in_f" in res
    assert ("additive_reduction" in res) == c.additive
    for name, r in res.items():
        assert r.passed, (name, r.worst, r.record)


def test_homogeneity_zero():
    f = SampledFunction1D.from_callable(np.exp, 64)
    assert choquet_integral(f * 0.0, FULL, SQRT) == 0.0


def test_lebesgue_subadditivity_is_equality():
    rng = np.random.default_rng(2)
    f = SampledFunction1D.from_cells(rng.random(128))
    g = SampledFunction1D.from_cells(rng.random(128))
    lhs = choquet_integral(f + g, FULL, LEB)
    assert lhs == pytest.approx(choquet_integral(f, FULL, LEB) + choquet_integral(g, FULL, LEB), abs=1e-12)


class TestSimplex:
    def test_area_integral(self):
        F = SampledFunctionSimplex.from_callable(lambda a, b: a + b, 64)
        full = SimplexCellSet.full(64)
        # exact on centroids: int (x1 + x2) over S^2 = 1/3
        assert choquet_integral(F, full, LEB) == pytest.approx(1 / 3, abs=1e-12)
        assert choquet_integral(F, None, LEB) == pytest.approx(1 / 3, abs=1e-12)

    def test_constant_one(self):
        F = SampledFunctionSimplex.from_callable(lambda a, b: 1 + 0 * a, 16)
        A = SimplexCellSet(16, range(0, 256, 3))
        assert choquet_integral(F, A, SQRT) == pytest.approx(SQRT(A), abs=1e-15)

    def test_methods_agree(self):
        F = SampledFunctionSimplex.from_callable(lambda a, b: a * a + 0.3 * b, 16)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            q = choquet_integral(F, None, SQRT, BetaQuadrature())
        assert q == pytest.approx(choquet_integral(F, None, SQRT), abs=2e-6)
