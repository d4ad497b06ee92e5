"""Bernstein-Durrmeyer-Choquet operators parameterized by a capacity family.

Every operator has the shape  sum_alpha c(alpha) B_alpha(x)  with

    c(alpha) = (C) int f P_alpha d mu_alpha / (C) int P_alpha d mu_alpha,

where mu_alpha comes from a :class:`CapacityFamily`.  For x-independent families
the coefficients are computed once and the operator is evaluated at any number
of points.  Integrals against additive capacities use ordinary quadrature; all
others go through :func:`choquet_integral`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .bernstein import (
    DENOMINATOR_GUARD,
    _basis_matrix,
    basis_simplex,
    bernstein_basis_1d,
    enumerate_multi_indices,
    multinomial,
    sample_1d,
)
from .capacities import Capacity, Dirac, Possibility, UnimodalDistribution, check_dominance
from .choquet import SampledFunction1D, SampledFunctionSimplex, choquet_integral, ordinary_integral
from .exceptions import ConfigurationError, StrictPositivityError

__all__ = [
    "CapacityFamily",
    "Constant",
    "GenuineFamily",
    "MixedDiracTail",
    "OperatorOutput",
    "PerIndex",
    "PossibilityFamily",
    "TwoMeasure",
    "XDependent",
    "dbar",
    "dn_possibility",
    "dn_single_mu",
    "dstar",
    "dtilde",
    "genuine_u",
    "mn_gamma",
    "mstar",
]

NONNEG_TOL = 1e-12


# ---------------------------------------------------------------------------
# capacity families


class CapacityFamily:
    """Maps (n, alpha, x) to the capacity used for the alpha-th coefficient."""

    x_dependent = False
    dims: tuple[int, ...] = (1, 2)

    def capacity(self, n: int, alpha: tuple, x=None) -> Capacity:
        raise NotImplementedError

    def describe(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class Constant(CapacityFamily):
    mu: Capacity

    def capacity(self, n, alpha, x=None):
        return self.mu

    def describe(self):
        return f"constant({self.mu.describe()})"


@dataclass(frozen=True)
class PerIndex(CapacityFamily):
    """Explicit capacities in enumeration order of the multi-indices with |alpha| = n."""

    n: int
    members: tuple
    d: int = 1

    def __post_init__(self):
        if len(self.members) != len(enumerate_multi_indices(self.n, self.d)):
            raise ConfigurationError("PerIndex needs one capacity per multi-index")

    def capacity(self, n, alpha, x=None):
        if n != self.n:
            raise ConfigurationError(f"family was built for n={self.n}, asked for n={n}")
        return self.members[enumerate_multi_indices(self.n, self.d).index(tuple(alpha))]

    def describe(self):
        return f"per-index(n={self.n})"


@dataclass(frozen=True)
class PossibilityFamily(CapacityFamily):
    """P_{lambda_{n,k}} for k = 0..n."""

    dims = (1,)

    def capacity(self, n, alpha, x=None):
        return Possibility(UnimodalDistribution.bump(n, alpha[1]))

    def describe(self):
        return "possibility"


@dataclass(frozen=True)
class MixedDiracTail(CapacityFamily):
    """Dirac at k/n for k < n and ``mu`` for k = n."""

    mu: Capacity
    dims = (1,)

    def capacity(self, n, alpha, x=None):
        k = alpha[1]
        return self.mu if k == n else Dirac(k / n)

    def describe(self):
        return f"dirac-tail({self.mu.describe()})"


@dataclass(frozen=True)
class AllDirac(CapacityFamily):
    """Dirac at k/n for every k; reproduces the classical Bernstein operator."""

    dims = (1,)

    def capacity(self, n, alpha, x=None):
        return Dirac(alpha[1] / n)

    def describe(self):
        return "all-dirac"


@dataclass(frozen=True)
class TwoMeasure(CapacityFamily):
    """Additive ``delta`` everywhere except the indices in ``choquet_at`` (subset of {"0", "n"}), which use ``mu``.

    The dominance mu <= delta is spot-checked on construction.
    """

    delta: Capacity
    mu: Capacity
    choquet_at: tuple = ("n",)
    check: bool = True
    dims = (1,)

    def __post_init__(self):
        if not self.delta.additive:
            raise ConfigurationError(f"delta must be additive, got {self.delta.describe()}")
        if not set(self.choquet_at) <= {"0", "n"}:
            raise ConfigurationError("choquet_at must be a subset of {'0', 'n'}")
        if self.check:
            bad = check_dominance(self.mu, self.delta)
            if bad is not None:
                raise ConfigurationError(
                    f"{self.mu.describe()} is not dominated by {self.delta.describe()}: "
                    f"mu={bad['mu']:.6g} > delta={bad['delta']:.6g} on {bad['A']}"
                )

    def capacity(self, n, alpha, x=None):
        k = alpha[1]
        if (k == 0 and "0" in self.choquet_at) or (k == n and "n" in self.choquet_at):
            return self.mu
        return self.delta

    def describe(self):
        return f"two-measure({self.delta.describe()},{self.mu.describe()},{'+'.join(self.choquet_at)})"


@dataclass(frozen=True)
class GenuineFamily:
    """nu_0 and nu_n for the endpoint terms and the middle capacities for p_{n-2,k-1}.

    ``middle`` is one capacity (used for all k) or a sequence of n - 1 capacities.
    """

    nu0: Capacity
    nun: Capacity
    middle: Capacity | Sequence[Capacity]

    def middle_capacity(self, n: int, k: int) -> Capacity:
        if isinstance(self.middle, Capacity):
            return self.middle
        if len(self.middle) != n - 1:
            raise ConfigurationError(f"genuine family needs {n - 1} middle capacities, got {len(self.middle)}")
        return self.middle[k - 1]

    def describe(self):
        mid = self.middle.describe() if isinstance(self.middle, Capacity) else "per-index"
        return f"genuine({self.nu0.describe()},{mid},{self.nun.describe()})"


@dataclass(frozen=True)
class XDependent(CapacityFamily):
    """Family given by a callable (n, alpha, x) -> Capacity; re-evaluated at every x."""

    fn: Callable = field(compare=False)
    x_dependent = True

    def capacity(self, n, alpha, x=None):
        return self.fn(n, tuple(alpha), x)


# ---------------------------------------------------------------------------
# output


@dataclass
class OperatorOutput:
    """Operator value(s) with the coefficient data behind them.

    For x-independent families ``coefficients``, ``numerators`` and
    ``denominators`` are 1-D arrays in multi-index order; numerators and
    denominators are the Choquet integrals against P_alpha (not B_alpha).  For
    x-dependent families they carry one row per evaluation point.
    """

    value: float | np.ndarray
    coefficients: np.ndarray
    numerators: np.ndarray
    denominators: np.ndarray
    alphas: tuple

    @property
    def c_n(self) -> float:
        """Coefficient of the top index (alpha = (0, n)), the Choquet tail term of several operators."""
        return float(np.asarray(self.coefficients)[..., -1].ravel()[0])


# ---------------------------------------------------------------------------
# internals


def _integral(f, c: Capacity) -> float:
    if c.additive:
        return ordinary_integral(f, None, c)
    return choquet_integral(f, None, c)


def _check_nonneg(fs) -> None:
    lo = min(float(np.min(fs.cells)), float(np.min(getattr(fs, "nodes", fs.cells))))
    if lo < -NONNEG_TOL:
        raise ValueError(f"integrand takes negative values (min {lo:.3g}); use mstar for lower-bounded f")


def _grid_key(fs) -> tuple:
    if isinstance(fs, SampledFunction1D):
        return ("1d", fs.M, fs.mode)
    return ("simplex", fs.N)


@lru_cache(maxsize=1024)
def _weight(grid_key: tuple, weight_key: tuple):
    """Sampled weight: ("P", alpha) is P_alpha, ("p", m, j) is p_{m,j}."""
    if weight_key[0] == "p":
        _, m, j = weight_key
        return SampledFunction1D.from_callable(lambda t: bernstein_basis_1d(m, j, t), grid_key[1], grid_key[2])
    alpha = weight_key[1]
    if grid_key[0] == "1d":
        n, k = sum(alpha), alpha[1]
        return SampledFunction1D.from_callable(lambda t: t**k * (1.0 - t) ** (n - k), grid_key[1], grid_key[2])
    return SampledFunctionSimplex.from_callable(
        lambda a, b: basis_simplex(alpha, np.stack([a, b], axis=-1))[1], grid_key[1]
    )


@lru_cache(maxsize=8192)
def _cached_denominator(grid_key: tuple, weight_key: tuple, c: Capacity) -> float:
    return _integral(_weight(grid_key, weight_key), c)


def _denominator(grid_key, weight_key, c) -> float:
    try:
        return _cached_denominator(grid_key, weight_key, c)
    except TypeError:  # unhashable capacity
        return _integral(_weight(grid_key, weight_key), c)


def _coefficient(fs, weight_key: tuple, c: Capacity, alpha, scale: float) -> tuple[float, float, float]:
    """(coefficient, numerator, denominator); the guard applies to the B_alpha-scaled denominator."""
    key = _grid_key(fs)
    den = _denominator(key, weight_key, c)
    if not scale * den > DENOMINATOR_GUARD:
        raise StrictPositivityError(alpha, scale * den)
    num = _integral(fs * _weight(key, weight_key), c)
    coef = num / den
    if isinstance(c, Dirac):
        # the ratio is f at the point; report that value instead of its rounded quotient
        fp = _integral(fs, c)
        if abs(coef - fp) <= 8 * np.finfo(float).eps * max(abs(fp), 1.0):
            coef = fp
    return coef, num, den


def _as_points(x, d: int) -> tuple[np.ndarray, bool]:
    """Flatten evaluation points; returns (points, scalar_input)."""
    x = np.asarray(x, dtype=float)
    if d == 1:
        scalar = x.ndim == 0
        pts = np.atleast_1d(x)
        if np.any(pts < 0) or np.any(pts > 1):
            raise ValueError("x must lie in [0, 1]")
        return pts, scalar
    scalar = x.ndim == 1
    pts = np.atleast_2d(x)
    if pts.shape[-1] != 2:
        raise ValueError("simplex points need two coordinates")
    if np.any(pts < -1e-15) or np.any(pts.sum(axis=1) > 1 + 1e-12):
        raise ValueError("x must lie in S^2")
    return pts, scalar


def _basis_at(alphas, pts, d: int) -> np.ndarray:
    """Matrix of B_alpha(x): rows alpha, columns points."""
    if d == 1:
        return _basis_matrix(len(alphas) - 1, pts)
    return np.stack([basis_simplex(a, pts)[0] for a in alphas])


def _sample(f, n: int):
    if isinstance(f, (SampledFunction1D, SampledFunctionSimplex)):
        return f
    return sample_1d(f, n)


def _family_coefficients(fs, n, fam: CapacityFamily, d: int, x=None):
    alphas = enumerate_multi_indices(n, d)
    coef, nums, dens = (np.empty(len(alphas)) for _ in range(3))
    for i, a in enumerate(alphas):
        coef[i], nums[i], dens[i] = _coefficient(fs, ("P", a), fam.capacity(n, a, x), a, multinomial(a))
    return alphas, coef, nums, dens


def _finish(value: np.ndarray, scalar: bool):
    return float(value[0]) if scalar else value


# ---------------------------------------------------------------------------
# operators


def mn_gamma(f, n: int, x, family: CapacityFamily) -> OperatorOutput:
    """M_{n,Gamma}(f)(x) for f on [0, 1] (SampledFunction1D or callable) or on S^2."""
    fs = _sample(f, n)
    d = 2 if isinstance(fs, SampledFunctionSimplex) else 1
    if d not in family.dims:
        raise ConfigurationError(f"{family.describe()} is not defined for d={d}")
    _check_nonneg(fs)
    pts, scalar = _as_points(x, d)
    if not family.x_dependent:
        alphas, coef, nums, dens = _family_coefficients(fs, n, family, d)
        value = coef @ _basis_at(alphas, pts, d)
        return OperatorOutput(_finish(value, scalar), coef, nums, dens, alphas)
    rows = [_family_coefficients(fs, n, family, d, p if d == 2 else float(p)) for p in pts]
    alphas = rows[0][0]
    coef = np.stack([r[1] for r in rows])
    basis = _basis_at(alphas, pts, d)
    value = np.einsum("ia,ai->i", coef, basis)
    return OperatorOutput(
        _finish(value, scalar), coef, np.stack([r[2] for r in rows]), np.stack([r[3] for r in rows]), alphas
    )


def dn_possibility(f, n: int, x) -> OperatorOutput:
    """Operator with the possibility family P_{lambda_{n,k}}; denominators equal E_{n,k}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return mn_gamma(f, n, x, PossibilityFamily())


def dbar(f, n: int, x, delta: Capacity, mu: Capacity, check_dominance: bool = True) -> OperatorOutput:
    """Ordinary delta-integrals for k < n and the Choquet mu-term at k = n.

    Raises ConfigurationError when mu <= delta fails on a probe set, unless
    ``check_dominance`` is False (the operator itself is still well defined).
    """
    return mn_gamma(f, n, x, TwoMeasure(delta, mu, ("n",), check_dominance))


def dtilde(f, n: int, x, delta: Capacity, mu: Capacity, check_dominance: bool = True) -> OperatorOutput:
    """Choquet mu-term at k = 0, ordinary delta-integrals for k >= 1."""
    return mn_gamma(f, n, x, TwoMeasure(delta, mu, ("0",), check_dominance))


def dstar(f, n: int, x, delta: Capacity, mu: Capacity, check_dominance: bool = True) -> OperatorOutput:
    """Choquet mu-terms at k = 0 and k = n, ordinary delta-integrals in between."""
    return mn_gamma(f, n, x, TwoMeasure(delta, mu, ("0", "n"), check_dominance))


def dn_single_mu(f, n: int, x, mu: Capacity) -> OperatorOutput:
    """Durrmeyer shape with one capacity for every k."""
    return mn_gamma(f, n, x, Constant(mu))


def mstar(f, m_lower: float, n: int, x, family: CapacityFamily):
    """M_n(f - m)(x) + m for f bounded below by m."""
    fs = _sample(f, n)
    lo = min(float(np.min(fs.cells)), float(np.min(getattr(fs, "nodes", fs.cells))))
    if lo < m_lower - NONNEG_TOL:
        raise ValueError(f"f drops below the declared lower bound: min {lo:.6g} < {m_lower:.6g}")
    out = mn_gamma(fs - m_lower, n, x, family).value
    return out + m_lower


def genuine_u(f, n: int, x, family: GenuineFamily) -> OperatorOutput:
    """Genuine Durrmeyer-Choquet operator U_n: Choquet endpoint terms, p_{n-2,k-1} middle weights."""
    if n < 2:
        raise ValueError("genuine operator needs n >= 2")
    fs = _sample(f, n)
    if not isinstance(fs, SampledFunction1D):
        raise ConfigurationError("genuine_u is defined on [0, 1] only")
    _check_nonneg(fs)
    pts, scalar = _as_points(x, 1)
    alphas = enumerate_multi_indices(n, 1)
    coef, nums, dens = (np.empty(n + 1) for _ in range(3))
    for k in range(n + 1):
        if k == 0:
            c, wkey = family.nu0, ("P", alphas[0])
        elif k == n:
            c, wkey = family.nun, ("P", alphas[n])
        else:
            c, wkey = family.middle_capacity(n, k), ("p", n - 2, k - 1)
        coef[k], nums[k], dens[k] = _coefficient(fs, wkey, c, alphas[k], 1.0)
    value = coef @ _basis_matrix(n, pts)
    return OperatorOutput(_finish(value, scalar), coef, nums, dens, alphas)
