"""Bernstein bases on [0, 1] and S^2, and the classical comparison operators."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial
from typing import Callable

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from .capacities import Capacity
from .exceptions import StrictPositivityError

__all__ = [
    "BernsteinPolynomial",
    "DENOMINATOR_GUARD",
    "basis_simplex",
    "bernstein_basis_1d",
    "classical_bernstein",
    "classical_genuine",
    "durrmeyer_borel",
    "enumerate_multi_indices",
    "grid_for",
    "multinomial",
    "sample_1d",
]

DENOMINATOR_GUARD = 1e-14
LOG_SPACE_ABOVE = 50
DEFAULT_GRID = 2048


@lru_cache(maxsize=64)
def enumerate_multi_indices(n: int, d: int) -> tuple[tuple[int, ...], ...]:
    """All alpha = (alpha_0, ..., alpha_d) with |alpha| = n, lexicographic in (alpha_1, ..., alpha_d).

    For d = 1 this lists (n - k, k) for k = 0..n.
    """
    if d not in (1, 2):
        raise ValueError(f"only d in {{1, 2}} is supported, got d={d}")
    if n < 1:
        raise ValueError("n must be >= 1")
    if d == 1:
        return tuple((n - k, k) for k in range(n + 1))
    return tuple((n - a1 - a2, a1, a2) for a1 in range(n + 1) for a2 in range(n - a1 + 1))


def multinomial(alpha) -> int:
    out = factorial(sum(alpha))
    for a in alpha:
        out //= factorial(a)
    return out


def bernstein_basis_1d(n: int, k: int, x):
    """p_{n,k}(x) = C(n, k) x^k (1 - x)^(n - k), with 0^0 = 1."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    x = np.asarray(x, dtype=float)
    if n > LOG_SPACE_ABOVE:
        logc = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
        return np.exp(logc + xlogy(k, x) + xlog1py(n - k, -x))
    return comb(n, k) * x**k * (1.0 - x) ** (n - k)


def _basis_matrix(n: int, x) -> np.ndarray:
    """Rows k = 0..n of p_{n,k}(x) for a 1-D array x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return np.stack([bernstein_basis_1d(n, k, x) for k in range(n + 1)])


def basis_simplex(alpha, x) -> tuple[np.ndarray, np.ndarray]:
    """(B_alpha(x), P_alpha(x)) on S^2; ``x`` has shape (..., 2)."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != 3 or min(alpha) < 0:
        raise ValueError("simplex multi-index needs three nonnegative components")
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    x0 = np.maximum(1.0 - x1 - x2, 0.0)
    P = x0 ** alpha[0] * x1 ** alpha[1] * x2 ** alpha[2]
    return multinomial(alpha) * P, P


def grid_for(n: int, minimum: int = DEFAULT_GRID) -> int:
    """Smallest multiple of n that is >= minimum, so every k/n is a grid node."""
    return -(-minimum // n) * n


def sample_1d(f, n: int = 1, M: int | None = None, mode: str = "node"):
    from .choquet import SampledFunction1D

    if isinstance(f, SampledFunction1D):
        return f
    if not callable(f):
        raise TypeError("f must be a SampledFunction1D or a callable")
    return SampledFunction1D.from_callable(f, M or grid_for(n), mode)


def classical_bernstein(f: Callable, n: int, x):
    """B_n(f)(x) = sum_k p_{n,k}(x) f(k/n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    vals = np.asarray(f(np.arange(n + 1) / n), dtype=float) * np.ones(n + 1)
    out = vals @ _basis_matrix(n, x)
    return float(out[0]) if np.ndim(x) == 0 else out


def _ratio(num: float, den: float, alpha) -> float:
    if not den > DENOMINATOR_GUARD:
        raise StrictPositivityError(alpha, den)
    return num / den


def genuine_coefficients(f, n: int, M: int | None = None) -> np.ndarray:
    """Coefficients of G_n: f(0), Lebesgue ratios against p_{n-2,k-1}, f(1)."""
    from .capacities import LebesgueBorel
    from .choquet import SampledFunction1D, ordinary_integral

    if n < 2:
        raise ValueError("genuine operator needs n >= 2")
    fs = sample_1d(f, n, M)
    leb = LebesgueBorel()
    coef = np.empty(n + 1)
    coef[0], coef[n] = float(fs(0.0)), float(fs(1.0))
    for k in range(1, n):
        w = SampledFunction1D.from_callable(lambda t, k=k: bernstein_basis_1d(n - 2, k - 1, t), fs.M, fs.mode)
        coef[k] = _ratio(ordinary_integral(fs * w, None, leb), ordinary_integral(w, None, leb), (n - k, k))
    return coef


def classical_genuine(f, n: int, x, M: int | None = None):
    """Genuine Bernstein-Durrmeyer operator G_n(f)(x) with Lebesgue inner coefficients."""
    out = genuine_coefficients(f, n, M) @ _basis_matrix(n, x)
    return float(out[0]) if np.ndim(x) == 0 else out


def durrmeyer_coefficients(f, n: int, delta: Capacity, M: int | None = None) -> np.ndarray:
    from .choquet import SampledFunction1D, ordinary_integral

    if not delta.additive:
        raise ValueError("durrmeyer_borel needs an additive capacity")
    fs = sample_1d(f, n, M)
    coef = np.empty(n + 1)
    for k in range(n + 1):
        w = SampledFunction1D.from_callable(lambda t, k=k: bernstein_basis_1d(n, k, t), fs.M, fs.mode)
        coef[k] = _ratio(ordinary_integral(fs * w, None, delta), ordinary_integral(w, None, delta), (n - k, k))
    return coef


def durrmeyer_borel(f, n: int, x, delta: Capacity, M: int | None = None):
    """Classical Durrmeyer operator with all integrals taken against the additive ``delta``."""
    out = durrmeyer_coefficients(f, n, delta, M) @ _basis_matrix(n, x)
    return float(out[0]) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class BernsteinPolynomial:
    """g = B_m(f) on [0, 1], stored by its coefficients b_k = f(k/m)."""

    coefficients: np.ndarray

    @classmethod
    def of(cls, f: Callable, m: int) -> BernsteinPolynomial:
        b = np.asarray(f(np.arange(m + 1) / m), dtype=float) * np.ones(m + 1)
        return cls(b)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        out = self.coefficients @ _basis_matrix(self.degree, x)
        return float(out[0]) if np.ndim(x) == 0 else out

    def derivative(self, x):
        """g'(x) = m sum_k (b_{k+1} - b_k) p_{m-1,k}(x)."""
        m = self.degree
        diff = m * np.diff(self.coefficients)
        out = diff @ _basis_matrix(m - 1, x)
        return float(out[0]) if np.ndim(x) == 0 else out

    def derivative_bound(self) -> float:
        """m max_k |b_{k+1} - b_k|, an upper bound for sup |g'| (partition of unity)."""
        return float(self.degree * np.max(np.abs(np.diff(self.coefficients))))
