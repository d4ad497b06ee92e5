import numpy as np
import pytest
from scipy import integrate, optimize

from bdchoquet.bernstein import classical_bernstein, classical_genuine, durrmeyer_borel
from bdchoquet.capacities import Dirac, DistortedLebesgue, Distortion, LebesgueBorel, Possibility, UnimodalDistribution
from bdchoquet.choquet import SampledFunction1D, SampledFunctionSimplex
from bdchoquet.exceptions import ConfigurationError, StrictPositivityError
from bdchoquet.operators import (
    AllDirac,
    Constant,
    GenuineFamily,
    MixedDiracTail,
    PerIndex,
    PossibilityFamily,
    TwoMeasure,
    XDependent,
    dbar,
    dn_possibility,
    dn_single_mu,
    dstar,
    dtilde,
    genuine_u,
    mn_gamma,
    mstar,
)

SQRT = DistortedLebesgue(Distortion.sqrt())
SIN = DistortedLebesgue(Distortion.sin())
LEB = LebesgueBorel()
XS = np.linspace(0, 1, 101)

e0 = lambda t: np.ones_like(np.asarray(t, dtype=float))  # noqa: E731
e1 = lambda t: np.asarray(t, dtype=float) * 1.0  # noqa: E731
sq = lambda t: np.asarray(t, dtype=float) ** 2  # noqa: E731


def distorted_power_oracle(gamma, p, q=1.0):
    """(C) int t^p d gamma(m) over [0, 1] = int_0^1 gamma(1 - beta^(1/p)) dbeta (scipy)."""
    return integrate.quad(lambda b: gamma(1 - b ** (1 / p)), 0, 1, epsabs=1e-14)[0]


ALL_OPS = [
    ("possibility", lambda f, n, x: dn_possibility(f, n, x).value),
    ("single-sqrt", lambda f, n, x: dn_single_mu(f, n, x, SQRT).value),
    ("dbar-sin", lambda f, n, x: dbar(f, n, x, LEB, SIN).value),
    ("dtilde-sin", lambda f, n, x: dtilde(f, n, x, LEB, SIN).value),
    ("dstar-sin", lambda f, n, x: dstar(f, n, x, LEB, SIN).value),
    ("dirac-tail", lambda f, n, x: mn_gamma(f, n, x, MixedDiracTail(SQRT)).value),
    ("genuine-u", lambda f, n, x: genuine_u(f, n, x, GenuineFamily(Dirac(0.0), SQRT, LEB)).value),
]


@pytest.mark.parametrize("name,op", ALL_OPS, ids=[o[0] for o in ALL_OPS])
@pytest.mark.parametrize("n", [2, 5, 16])
def test_reproduces_constants(name, op, n):
    np.testing.assert_allclose(op(e0, n, XS), 1.0, atol=1e-12)


@pytest.mark.parametrize("name,op", ALL_OPS, ids=[o[0] for o in ALL_OPS])
def test_monotone_homogeneous_subadditive(name, op):
    rng = np.random.default_rng(4)
    n = 6
    M = 2048 - 2048 % n + n
    for _ in range(3):
        f = SampledFunction1D.from_values(rng.random(M + 1))
        g = SampledFunction1D.from_values(rng.random(M + 1))
        vf, vg = op(f, n, XS), op(g, n, XS)
        assert np.all(vf <= op(f + g, n, XS) + 1e-9)
        np.testing.assert_allclose(op(f * 2.5, n, XS), 2.5 * vf, atol=1e-9)
        assert np.all(op(f + g, n, XS) <= vf + vg + 1e-9)


class TestMnGamma:
    @pytest.mark.parametrize("n", [1, 3, 10])
    def test_all_dirac_is_bernstein(self, n):
        f = lambda t: np.exp(t) + np.abs(t - 0.4)  # noqa: E731
        np.testing.assert_allclose(mn_gamma(f, n, XS, AllDirac()).value, classical_bernstein(f, n, XS), atol=1e-13)

    def test_constant_lebesgue_midpoint(self):
        assert mn_gamma(e1, 2, 0.5, Constant(LEB)).value == pytest.approx(0.5, abs=1e-12)
        assert mn_gamma(e1, 2, 0.5, Constant(LEB)).value == pytest.approx(durrmeyer_borel(e1, 2, 0.5, LEB), abs=1e-12)

    def test_x_dependent_family(self):
        fam = XDependent(lambda n, a, x: Dirac(a[1] / n))
        out = mn_gamma(sq, 4, XS[:7], fam)
        np.testing.assert_allclose(out.value, classical_bernstein(sq, 4, XS[:7]), atol=1e-13)
        assert out.coefficients.shape == (7, 5)

    def test_per_index(self):
        fam = PerIndex(2, (LEB, SQRT, Dirac(1.0)))
        out = mn_gamma(e1, 2, 1.0, fam)
        assert out.value == pytest.approx(1.0, abs=1e-12)
        with pytest.raises(ConfigurationError):
            PerIndex(2, (LEB,))
        with pytest.raises(ConfigurationError):
            mn_gamma(e1, 3, 0.5, fam)

    def test_strict_positivity_guard_names_alpha(self):
        with pytest.raises(StrictPositivityError, match=r"alpha=\(1, 1\)"):
            mn_gamma(e1, 2, 0.5, Constant(Dirac(0.0)))

    def test_rejects_negative_f(self):
        with pytest.raises(ValueError, match="mstar"):
            mn_gamma(lambda t: t - 1, 2, 0.5, Constant(LEB))

    def test_simplex_e0_and_durrmeyer(self):
        F = SampledFunctionSimplex.from_callable(lambda a, b: a, 64)
        one = F.with_func(lambda a, b: 1 + 0 * a)
        pts = np.array([(0.2, 0.3), (0.0, 0.0), (0.5, 0.5), (1.0, 0.0)])
        np.testing.assert_allclose(mn_gamma(one, 3, pts, Constant(SQRT)).value, 1.0, atol=1e-12)
        # [DERIVED] simplex Durrmeyer: coefficient (alpha_1 + 1)/(n + 3), so D_n(x1) = (n x1 + 1)/(n + 3)
        for n in (2, 4):
            got = mn_gamma(F, n, pts, Constant(LEB)).value
            np.testing.assert_allclose(got, (n * pts[:, 0] + 1) / (n + 3), atol=1e-4)

    def test_simplex_rejects_1d_family(self):
        F = SampledFunctionSimplex.from_callable(lambda a, b: a + b, 8)
        with pytest.raises(ConfigurationError):
            mn_gamma(F, 2, (0.2, 0.2), PossibilityFamily())


class TestPossibility:
    @pytest.mark.parametrize("n", [1, 4, 9])
    def test_denominators_are_E(self, n):
        k = np.arange(n + 1)
        E = np.array([float(i) ** i * float(n - i) ** (n - i) / n**n for i in k])
        np.testing.assert_allclose(dn_possibility(e1, n, 0.3).denominators, E, rtol=1e-12)

    def test_E42(self):
        assert dn_possibility(e1, 4, 0.5).denominators[2] == pytest.approx(1 / 16, rel=1e-14)

    def test_endpoint_value_matches_oracle(self):
        # [DERIVED] (C) int t(1-t)^2 dP_{lambda_{2,0}}: level sets of g = t(1-t)^2 are
        # intervals [a(b), c(b)]; lambda_{2,0} = (1-t)^2 is decreasing, so P(F_b) = (1 - a(b))^2.
        g = lambda t: t * (1 - t) ** 2  # noqa: E731
        top = 4 / 27

        def lower_end(b):
            return optimize.brentq(lambda t: g(t) - b, 0.0, 1 / 3, xtol=1e-15)

        oracle = integrate.quad(lambda b: (1 - lower_end(b)) ** 2, 0, top, epsabs=1e-13, limit=200)[0]
        out = dn_possibility(e1, 2, np.array([0.0, 1.0]))
        assert out.value[0] == pytest.approx(oracle, abs=2e-6)
        assert out.value[0] == pytest.approx(out.numerators[0] / 1.0, abs=1e-15)
        assert out.value[1] == pytest.approx(out.numerators[2] / out.denominators[2], abs=1e-15)


class TestTwoMeasure:
    @pytest.mark.parametrize("op", [dbar, dtilde, dstar])
    def test_lebesgue_pair_is_durrmeyer(self, op):
        for n in (2, 7):
            np.testing.assert_allclose(op(sq, n, XS, LEB, LEB).value, durrmeyer_borel(sq, n, XS, LEB), atol=2e-6)

    def test_dbar_sin_tail_coefficient(self):
        # [DERIVED] c_n = (C) int t^3 d sin(m) / (C) int t^2 d sin(m) for f = e1, n = 2
        num = distorted_power_oracle(np.sin, 3)
        den = distorted_power_oracle(np.sin, 2)
        out = dbar(e1, 2, 1.0, LEB, SIN)
        assert out.value == pytest.approx(num / den, abs=2e-6)
        assert out.c_n == out.value

    def test_dtilde_example(self):
        # at x = 1 only the k = 2 delta-term survives: int t * t^2 / int t^2 = (1/4)/(1/3)
        oracle = integrate.quad(lambda t: t**3, 0, 1)[0] / integrate.quad(lambda t: t**2, 0, 1)[0]
        got = dtilde(e1, 2, 1.0, LEB, SQRT, check_dominance=False).value
        assert got == pytest.approx(oracle, abs=2e-6)
        assert got == pytest.approx(0.75, abs=2e-6)

    def test_dominance_enforced(self):
        for op in (dbar, dtilde, dstar):
            with pytest.raises(ConfigurationError, match="not dominated"):
                op(e1, 2, 0.5, LEB, SQRT)
        with pytest.raises(ConfigurationError, match="additive"):
            TwoMeasure(SIN, SIN)
        with pytest.raises(ConfigurationError):
            TwoMeasure(LEB, SIN, ("1",))

    def test_terms_placement(self):
        fam = TwoMeasure(LEB, SIN, ("0", "n"))
        assert fam.capacity(4, (4, 0)) is SIN and fam.capacity(4, (0, 4)) is SIN
        assert fam.capacity(4, (2, 2)) is LEB


class TestMstar:
    def test_constant(self):
        assert mstar(lambda t: 0 * t - 0.7, -0.7, 3, 0.4, Constant(SQRT)) == pytest.approx(-0.7, abs=1e-12)

    def test_dirac_shift_is_bernstein(self):
        f = lambda t: t - 0.5  # noqa: E731
        np.testing.assert_allclose(mstar(f, -0.5, 5, XS, AllDirac()), classical_bernstein(f, 5, XS), atol=1e-13)

    def test_zero_shift(self):
        got = mstar(sq, 0.0, 4, XS, PossibilityFamily())
        np.testing.assert_allclose(got, dn_possibility(sq, 4, XS).value, atol=1e-15)

    def test_rejects_bad_bound(self):
        with pytest.raises(ValueError):
            mstar(lambda t: t - 1, -0.5, 3, 0.5, AllDirac())


class TestGenuine:
    FAM = GenuineFamily(Dirac(0.0), SQRT, LEB)

    def test_cn_increasing_below_f1(self):
        for f in (e1, sq, lambda t: np.expm1(t)):
            out = genuine_u(f, 6, 0.5, self.FAM)
            assert out.c_n < float(f(1.0))

    def test_cn_16_21(self):
        # [DERIVED] (C) int t^4 d sqrt(m) / (C) int t^2 d sqrt(m) = (128/315) / (8/15)
        num, den = distorted_power_oracle(np.sqrt, 4), distorted_power_oracle(np.sqrt, 2)
        assert num == pytest.approx(128 / 315, abs=1e-12) and den == pytest.approx(8 / 15, abs=1e-12)
        f = SampledFunction1D.from_callable(sq, 2**14)
        out = genuine_u(f, 2, 0.5, self.FAM)
        assert out.c_n == pytest.approx(num / den, abs=1e-6)
        assert out.numerators[2] == pytest.approx(num, abs=1e-6)
        assert out.denominators[2] == pytest.approx(den, abs=1e-6)

    @pytest.mark.parametrize("n", [2, 5, 12])
    def test_difference_identity(self, n):
        f = lambda t: np.exp(t) - 0.5 * t  # noqa: E731
        fs = SampledFunction1D.from_callable(f, 2048 - 2048 % n + n)
        out = genuine_u(fs, n, XS, self.FAM)
        G = classical_genuine(fs, n, XS)
        np.testing.assert_allclose(out.value - G, XS**n * (out.c_n - float(f(1.0))), atol=1e-9)

    def test_middle_list_and_validation(self):
        fam = GenuineFamily(Dirac(0.0), LEB, [LEB, SIN, SQRT])
        assert genuine_u(e0, 4, 0.3, fam).value == pytest.approx(1.0, abs=1e-12)
        with pytest.raises(ConfigurationError):
            genuine_u(e0, 5, 0.3, fam)
        with pytest.raises(ValueError):
            genuine_u(e0, 1, 0.3, fam)


class TestDiracTail:
    @pytest.mark.parametrize("mu", [SQRT, SIN], ids=["sqrt", "sin"])
    @pytest.mark.parametrize("n", [2, 8, 32])
    def test_identity(self, mu, n):
        f = lambda t: t**2 + 0.1 * np.sin(5 * t) + 0.2  # noqa: E731
        out = mn_gamma(f, n, XS, MixedDiracTail(mu))
        B = classical_bernstein(f, n, XS)
        np.testing.assert_allclose(out.value - B, XS**n * (out.c_n - float(f(1.0))), atol=1e-9)


class TestSingleMu:
    def test_lebesgue_is_durrmeyer(self):
        np.testing.assert_allclose(dn_single_mu(sq, 6, XS, LEB).value, durrmeyer_borel(sq, 6, XS, LEB), atol=1e-12)

    def test_sqrt_convergence_trend(self):
        err = [np.max(np.abs(dn_single_mu(e1, n, XS, SQRT).value - XS)) for n in (16, 64)]
        assert err[1] < err[0]
