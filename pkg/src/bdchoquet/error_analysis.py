"""Moduli of continuity, K-functional upper bounds and machine checks of the error estimates.

Every check returns a :class:`BoundReport`.  The K-functionals are infima over
all C^1 functions; here they are bounded from above over a Bernstein smoothing
ladder, so a passing check with the upper bound is a valid (weaker) instance of
the estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import mpmath
import numpy as np

from .bernstein import BernsteinPolynomial, genuine_coefficients, grid_for
from .capacities import Capacity, Dirac, LebesgueBorel
from .choquet import SampledFunction1D, SampledFunctionSimplex, lp_choquet_functional
from .exceptions import ConfigurationError
from .operators import (
    CapacityFamily,
    GenuineFamily,
    MixedDiracTail,
    TwoMeasure,
    dn_possibility,
    genuine_u,
    mn_gamma,
)

__all__ = [
    "BoundReport",
    "ImprovementReport",
    "SandwichReport",
    "SmoothingLadder",
    "delta_n",
    "improvement_check",
    "k_upper",
    "kbar_upper",
    "lemma42_bruteforce",
    "lemma42_sup",
    "modulus_of_continuity",
    "sandwich",
    "thm31i_check",
    "thm31i_sweep",
    "thm31ii_check",
    "thm33_check",
    "thm34_check",
    "thm41_bound",
    "thm41_sweep",
]

REL_SLACK = 1e-6
DEGENERATE_TOL = 1e-9
MODULUS_GRID = 8192
SIMPLEX_LATTICE = 64
PROBE_TOL = 1e-10


@dataclass
class BoundReport:
    theorem: str
    x: float | tuple | str
    lhs: float
    rhs: float
    tolerance: float
    meta: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        if self.rhs == 0.0 and self.meta.get("degenerate"):
            return self.lhs <= DEGENERATE_TOL
        return self.margin >= -self.tolerance

    def row(self) -> dict:
        return {
            "theorem": self.theorem,
            "n": self.meta.get("n", ""),
            "x": self.x,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "passed": self.passed,
        }


def _slack(rhs: float) -> float:
    return REL_SLACK * (1.0 + abs(rhs))


# ---------------------------------------------------------------------------
# modulus of continuity


@lru_cache(maxsize=64)
def _lag_table_1d(f: Callable, G: int) -> np.ndarray:
    """w[L] = max_i |f(t_{i+L}) - f(t_i)| on t_i = i/G, made nondecreasing in L."""
    v = np.asarray(f(np.linspace(0.0, 1.0, G + 1)), dtype=float) * np.ones(G + 1)
    w = np.zeros(G + 1)
    for L in range(1, G + 1):
        w[L] = np.max(np.abs(v[L:] - v[:-L]))
    return np.maximum.accumulate(w)


@lru_cache(maxsize=16)
def _lag_table_simplex(f: Callable, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Sorted pair distances on the K-lattice of S^2 and the running max of |f| differences."""
    i, j = np.meshgrid(np.arange(K + 1), np.arange(K + 1), indexing="ij")
    keep = i + j <= K
    p = np.stack([i[keep], j[keep]], axis=1) / K
    v = np.asarray(f(p[:, 0], p[:, 1]), dtype=float) * np.ones(len(p))
    a, b = np.triu_indices(len(p), k=1)
    dist = np.hypot(p[a, 0] - p[b, 0], p[a, 1] - p[b, 1])
    diff = np.abs(v[a] - v[b])
    order = np.argsort(dist, kind="stable")
    return dist[order], np.maximum.accumulate(diff[order])


def _callable_of(f) -> Callable:
    if isinstance(f, (SampledFunction1D, SampledFunctionSimplex)):
        if f.func is None:
            if isinstance(f, SampledFunction1D):
                return f.__call__
            raise TypeError("modulus on the simplex needs a pointwise-evaluable function")
        return f.func
    return f


def modulus_of_continuity(f, delta: float, domain: str = "interval", grid: int | None = None) -> float:
    """omega_1(f; delta): sup |f(t) - f(x)| over lattice pairs with ||t - x|| <= delta.

    ``domain`` is "interval" ([0, 1], grid of ``grid`` cells, default 8192) or
    "simplex" (S^2, lattice with ``grid`` points per edge, default 64).
    """
    if not delta >= 0:
        raise ValueError("delta must be >= 0")
    fn = _callable_of(f)
    if domain == "interval":
        G = grid or MODULUS_GRID
        table = _lag_table_1d(fn, G)
        L = min(int(np.floor(delta * G + 1e-9)), G)
        return float(table[L])
    if domain == "simplex":
        dist, cm = _lag_table_simplex(fn, grid or SIMPLEX_LATTICE)
        idx = int(np.searchsorted(dist, delta + 1e-12, side="right")) - 1
        return float(cm[idx]) if idx >= 0 else 0.0
    raise ValueError(f"unknown domain {domain!r}")


# ---------------------------------------------------------------------------
# Lemma: critical points of |t - x| t^k (1 - t)^(n - k)


def lemma42_sup(n: int, k: int, x: float) -> tuple[float, float, float]:
    """(t1, t2, A_{n,k}(x)) from the roots of (n+1)t^2 - (nx+k+1)t + kx = 0."""
    if n < 2 or not 0 <= k <= n:
        raise ValueError("need n >= 2 and 0 <= k <= n")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    b = n * x + k + 1
    disc = b * b - 4 * k * x * (n + 1)
    r = np.sqrt(disc)
    t1 = (b - r) / (2 * (n + 1))
    t2 = (b + r) / (2 * (n + 1))
    # Clamp rounding noise; the exact roots satisfy 0 <= t1 <= x <= t2 <= 1.
    t1, t2 = min(max(t1, 0.0), x), max(min(t2, 1.0), x)

    def H(t):
        return abs(t - x) * t**k * (1.0 - t) ** (n - k)

    return float(t1), float(t2), float(max(H(t2), H(t1)))


def lemma42_discriminant(n: int, k: int, x: float) -> float:
    return (n * x + k + 1) ** 2 - 4 * k * x * (n + 1)


def lemma42_bruteforce(n: int, k: int, x: float, points: int = 100_000) -> float:
    t = np.linspace(0.0, 1.0, points)
    return float(np.max(np.abs(t - x) * t**k * (1.0 - t) ** (n - k)))


# ---------------------------------------------------------------------------
# operator plumbing shared by the checks


def _sample(f, n: int, M: int | None = None) -> SampledFunction1D:
    if isinstance(f, SampledFunction1D):
        return f
    return SampledFunction1D.from_callable(f, M or grid_for(n))


def _phi(fs: SampledFunction1D, x: float) -> SampledFunction1D:
    return fs.with_func(lambda t: np.abs(t - x))


def _meta(**kw) -> dict:
    return {k: v for k, v in kw.items() if v is not None}


# ---------------------------------------------------------------------------
# pointwise estimate for M_n


def thm31i_check(f, n: int, x, family: CapacityFamily, M: int | None = None) -> BoundReport:
    """|M(f)(x) - f(x)| <= 2 omega_1(f; M(phi_x)(x)).

    ``f`` is a callable on [0, 1] or (x1, x2) -> value on S^2 (pass a
    :class:`SampledFunctionSimplex` for the latter), or a sampled function.
    """
    if isinstance(f, SampledFunctionSimplex):
        xs = np.asarray(x, dtype=float)
        lhs = abs(mn_gamma(f, n, xs, family).value - float(f(xs[0], xs[1])))
        phi = f.with_func(lambda a, b: np.hypot(a - xs[0], b - xs[1]))
        arg = mn_gamma(phi, n, xs, family).value
        rhs = 2.0 * modulus_of_continuity(f, arg, "simplex")
        xlab = (float(xs[0]), float(xs[1]))
    else:
        fs = _sample(f, n, M)
        x = float(x)
        lhs = abs(mn_gamma(fs, n, x, family).value - float(fs(x)))
        arg = mn_gamma(_phi(fs, x), n, x, family).value
        rhs = 2.0 * modulus_of_continuity(fs, arg, "interval", 4 * fs.M)
        xlab = x
    return BoundReport(
        "thm-3.1i", xlab, float(lhs), float(rhs), _slack(rhs),
        _meta(n=n, family=family.describe(), delta=float(arg), degenerate=arg == 0.0 or None),
    )


def thm31i_sweep(f, ns: Sequence[int], xs, family: CapacityFamily, **kw) -> list[BoundReport]:
    return [thm31i_check(f, n, x, family, **kw) for n in ns for x in xs]


def simplex_points(K: int) -> np.ndarray:
    """Lattice points (i/K, j/K) with i + j <= K."""
    return np.array([(i / K, j / K) for i in range(K + 1) for j in range(K + 1 - i)])


# ---------------------------------------------------------------------------
# uniform estimate with the K-functional


@dataclass(frozen=True)
class SmoothingLadder:
    """Orders m for the candidates g = B_m(f) bounding the K-functionals from above."""

    orders: tuple = (4, 8, 16, 32, 64, 128, 256)
    check_points: int = 4097

    def __post_init__(self):
        if not self.orders or min(self.orders) < 1:
            raise ValueError("ladder orders must be positive")

    def candidates(self, f: Callable) -> list[BernsteinPolynomial]:
        out = [BernsteinPolynomial.of(f, m) for m in self.orders]
        # A Bernstein polynomial is itself C^1 with a known derivative bound.
        return [f, *out] if isinstance(f, BernsteinPolynomial) else out

    def sup_distance(self, f: Callable, g: BernsteinPolynomial) -> float:
        t = np.linspace(0.0, 1.0, self.check_points)
        return float(np.max(np.abs(np.asarray(f(t), dtype=float) - g(t))))


DEFAULT_LADDER = SmoothingLadder()


def k_upper(f: Callable, t: float, ladder: SmoothingLadder = DEFAULT_LADDER) -> float:
    """min over the ladder of ||f - g||_C + t ||g'||_C (derivative bound from the coefficients)."""
    fn = _callable_of(f)
    return min(ladder.sup_distance(fn, g) + t * g.derivative_bound() for g in ladder.candidates(fn))


def _check_x_independent(family: CapacityFamily) -> None:
    if family.x_dependent:
        raise ConfigurationError("the uniform estimate needs an x-independent family")


def delta_n(n: int, family: CapacityFamily, d: int = 1, points: int = 101, M: int | None = None, N: int = 32) -> float:
    """Delta_n = sum_i sup_x M(|t_i - x_i|)(x), sup over an evaluation grid."""
    _check_x_independent(family)
    if d == 1:
        fs = SampledFunction1D.from_callable(lambda t: t, M or grid_for(n))
        return max(mn_gamma(_phi(fs, x), n, x, family).value for x in np.linspace(0.0, 1.0, points))
    if d == 2:
        K = max(int(round((np.sqrt(8 * points + 1) - 3) / 2)), 1)
        total = 0.0
        for i in range(2):
            best = 0.0
            for p in simplex_points(K):
                g = SampledFunctionSimplex.from_callable(lambda a, b, i=i, p=p: np.abs((a, b)[i] - p[i]), N)
                best = max(best, mn_gamma(g, n, p, family).value)
            total += best
        return total
    raise ValueError("d must be 1 or 2")


def thm31ii_check(
    f, n: int, family: CapacityFamily, ladder: SmoothingLadder = DEFAULT_LADDER, points: int = 101,
    M: int | None = None,
) -> BoundReport:
    """||M(f) - f||_C <= 2 k_upper(f; Delta_n / 2) on [0, 1]."""
    _check_x_independent(family)
    if isinstance(f, SampledFunctionSimplex):
        raise NotImplementedError("uniform estimate check is implemented for d = 1")
    fs = _sample(f, n, M)
    xs = np.linspace(0.0, 1.0, points)
    lhs = float(np.max(np.abs(mn_gamma(fs, n, xs, family).value - fs(xs))))
    dn = delta_n(n, family, 1, points, fs.M)
    rhs = 2.0 * k_upper(fs, dn / 2.0, ladder)
    return BoundReport("thm-3.1ii", "uniform", lhs, rhs, _slack(rhs), _meta(n=n, family=family.describe(), delta_n=dn))


# ---------------------------------------------------------------------------
# L^p_mu estimates with the K-bar functional


@dataclass
class SandwichReport:
    """Per-candidate terms of 2 K(f; t/2)_mu <= Kbar(f; t) <= 2 K(f; t)_delta."""

    orders: tuple
    lower: np.ndarray  # 2 (||f - g||_mu + t/2 ||g'||)
    kbar: np.ndarray  # ||f - g||_mu + ||f - g||_delta + t ||g'||
    upper: np.ndarray  # 2 (||f - g||_delta + t ||g'||)

    @property
    def passed(self) -> bool:
        tol = 1e-12 * (1 + np.abs(self.upper))
        return bool(np.all(self.lower <= self.kbar + tol) and np.all(self.kbar <= self.upper + tol))


def _lp_terms(f, t: float, mu: Capacity, delta: Capacity, p: float, ladder: SmoothingLadder, M: int):
    fn = _callable_of(f)
    fs = SampledFunction1D.from_callable(fn, M)
    a, b, dg = [], [], []
    for g in ladder.candidates(fn):
        diff = abs(fs - fs.with_func(g.__call__))
        a.append(lp_choquet_functional(diff, mu, p))
        b.append(lp_choquet_functional(diff, delta, p))
        dg.append(g.derivative_bound())
    return np.array(a), np.array(b), np.array(dg)


def kbar_upper(
    f, t: float, mu: Capacity, delta: Capacity, p: float = 1.0,
    ladder: SmoothingLadder = DEFAULT_LADDER, M: int = 2048,
) -> float:
    """min over the ladder of ||f - g||_{L^p_mu} + ||f - g||_{L^p_delta} + t ||g'||_C."""
    if not p >= 1:
        raise ValueError("p must be >= 1")
    a, b, dg = _lp_terms(f, t, mu, delta, p, ladder, M)
    return float(np.min(a + b + t * dg))


def sandwich(
    f, t: float, mu: Capacity, delta: Capacity, p: float = 1.0,
    ladder: SmoothingLadder = DEFAULT_LADDER, M: int = 2048,
) -> SandwichReport:
    a, b, dg = _lp_terms(f, t, mu, delta, p, ladder, M)
    return SandwichReport(ladder.orders, 2 * a + t * dg, a + b + t * dg, 2 * (b + t * dg))


@lru_cache(maxsize=64)
def _h_values(n: int, family: TwoMeasure, M: int, M_out: int) -> np.ndarray:
    """h(x) = D(phi_x)(x) at the nodes of the outer grid."""
    base = SampledFunction1D.from_callable(lambda t: t, M)
    xs = np.linspace(0.0, 1.0, M_out + 1)
    return np.array([mn_gamma(_phi(base, x), n, x, family).value for x in xs])


def _lp_check(
    tag: str, f, n: int, delta: Capacity, mu: Capacity, p: float, choquet_at: tuple, factor: float,
    ladder: SmoothingLadder, M: int | None, M_out: int,
) -> BoundReport:
    if not p >= 1:
        raise ValueError("p must be >= 1")
    family = TwoMeasure(delta, mu, choquet_at)  # raises ConfigurationError without mu <= delta
    fn = _callable_of(f)
    M = M or grid_for(n)
    fs = SampledFunction1D.from_callable(fn, M)
    xs = np.linspace(0.0, 1.0, M_out + 1)
    err = np.abs(mn_gamma(fs, n, xs, family).value - fs(xs))
    lhs = lp_choquet_functional(SampledFunction1D.from_values(err), mu, p)
    h = SampledFunction1D.from_values(_h_values(n, family, M, M_out))
    t = lp_choquet_functional(h, mu, p) / factor
    rhs = factor * kbar_upper(fn, t, mu, delta, p, ladder, M)
    return BoundReport(
        tag, "uniform", float(lhs), float(rhs), _slack(rhs),
        _meta(n=n, p=p, family=family.describe(), t=float(t)),
    )


def thm33_check(
    f, n: int, delta: Capacity, mu: Capacity, ladder: SmoothingLadder = DEFAULT_LADDER,
    M: int | None = None, M_out: int = 256, operator: str = "dbar",
) -> BoundReport:
    """||f - D(f)||_{L^1_mu} <= 2 Kbar(f; ||h||_{L^1_mu} / 2) with h(x) = D(phi_x)(x)."""
    return thm34_check(f, n, delta, mu, 1.0, ladder, M, M_out, operator, _tag="thm-3.3")


_OPERATOR_TERMS = {"dbar": (("n",), 2.0), "dtilde": (("0",), 2.0), "dstar": (("0", "n"), 3.0)}


def thm34_check(
    f, n: int, delta: Capacity, mu: Capacity, p: float = 2.0, ladder: SmoothingLadder = DEFAULT_LADDER,
    M: int | None = None, M_out: int = 256, operator: str = "dbar", _tag: str = "thm-3.4",
) -> BoundReport:
    """L^p_mu version; ``operator="dstar"`` uses the constant 3 in place of 2."""
    if operator not in _OPERATOR_TERMS:
        raise ConfigurationError(f"unknown operator {operator!r}")
    choquet_at, factor = _OPERATOR_TERMS[operator]
    tag = _tag if operator == "dbar" else f"{_tag}-{operator}"
    return _lp_check(tag, f, n, delta, mu, p, choquet_at, factor, ladder, M, M_out)


# ---------------------------------------------------------------------------
# concrete estimate for the possibility operator


def thm41_delta(n: int, x):
    x = np.asarray(x, dtype=float)
    return ((1 + np.sqrt(2)) * np.sqrt(x * (1 - x)) + np.sqrt(2) * np.sqrt(x)) / np.sqrt(n) + 1.0 / n


def thm41_bound(f, n: int, x, M: int | None = None) -> BoundReport | list[BoundReport]:
    """|D_n(f)(x) - f(x)| <= 2 omega_1(f; ((1+sqrt2) sqrt(x(1-x)) + sqrt2 sqrt x)/sqrt n + 1/n)."""
    if n < 2:
        raise ValueError("the estimate needs n >= 2")
    fs = _sample(f, n, M)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    vals = np.atleast_1d(dn_possibility(fs, n, xs).value)
    reports = []
    for xi, v in zip(xs, vals):
        lhs = abs(float(v) - float(fs(xi)))
        rhs = 2.0 * modulus_of_continuity(fs, float(thm41_delta(n, xi)), "interval", 4 * fs.M)
        reports.append(BoundReport("thm-4.1", float(xi), lhs, rhs, _slack(rhs), _meta(n=n)))
    return reports[0] if np.ndim(x) == 0 else reports


def thm41_sweep(f, ns: Sequence[int], xs) -> list[BoundReport]:
    return [r for n in ns for r in thm41_bound(f, n, np.asarray(xs, dtype=float))]


# ---------------------------------------------------------------------------
# improvement over the classical operators


@dataclass
class ImprovementReport:
    n: int
    capacity: str
    genuine: bool
    c_n: float
    f1: float
    classical_above: bool  # B_n(f) - f > 0 (or G_n) on every interior point
    cn_below: bool  # c_n < f(1)
    improved: bool  # |D - f| < max{|B - f|, x^n |c_n - f(1)|} on every interior point
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.classical_above and self.cn_below and self.improved


def convexity_probe(f: Callable, points: int = 1025) -> None:
    """Reject f unless its grid differences show strict convexity and strict increase."""
    t = np.linspace(0.0, 1.0, points)
    v = np.asarray(f(t), dtype=float) * np.ones(points)
    d1, d2 = np.diff(v), np.diff(v, 2)
    if np.any(v < 0):
        raise ConfigurationError("f must be nonnegative")
    if np.min(d1) <= PROBE_TOL:
        i = int(np.argmin(d1))
        raise ConfigurationError(f"f is not strictly increasing: first difference {d1[i]:.3g} at t={t[i]:.4g}")
    if np.min(d2) <= PROBE_TOL:
        i = int(np.argmin(d2))
        raise ConfigurationError(f"f is not strictly convex: second difference {d2[i]:.3g} at t={t[i + 1]:.4g}")


def improvement_check(
    f: Callable, n: int, mu: Capacity, genuine: bool = False, xs=None, M: int | None = None, dps: int = 120,
) -> ImprovementReport:
    """Sign structure behind the improvement of the Dirac-tail (or genuine) operator over B_n (or G_n).

    The comparison is evaluated in mpmath from the float coefficients, since
    x^n |c_n - f(1)| is far below double resolution near x = 0.
    """
    convexity_probe(f)
    if xs is None:
        xs = np.round(np.arange(1, 100) / 100, 2)
    fs = _sample(f, n, M)
    if genuine:
        coef = genuine_u(fs, n, 0.5, GenuineFamily(Dirac(0.0), mu, LebesgueBorel())).coefficients
        classical = genuine_coefficients(fs, n)
    else:
        coef = mn_gamma(fs, n, 0.5, MixedDiracTail(mu)).coefficients
        if fs.mode == "node" and fs.M % n == 0:
            # exact node values; interpolating at a rounded k/n would add an ulp of noise
            classical = np.asarray(fs.nodes[:: fs.M // n], dtype=float)
        else:
            classical = np.asarray(fs(np.arange(n + 1) / n), dtype=float)
    c_n, f1 = float(coef[-1]), float(fs(1.0))
    failures = []
    above = improved = True
    with mpmath.workdps(dps):
        cm = [mpmath.mpf(float(c)) for c in coef]
        bm = [mpmath.mpf(float(c)) for c in classical]
        for x in xs:
            xm = mpmath.mpf(float(x))
            basis = [mpmath.binomial(n, k) * xm**k * (1 - xm) ** (n - k) for k in range(n + 1)]
            fx = mpmath.mpf(float(fs(float(x))))
            d_err = mpmath.fsum(b * c for b, c in zip(basis, cm)) - fx
            b_err = mpmath.fsum(b * c for b, c in zip(basis, bm)) - fx
            tail = xm**n * abs(cm[-1] - bm[-1])
            if not b_err > 0:
                above = False
                failures.append(("classical_above", float(x), float(b_err)))
            if not abs(d_err) < max(abs(b_err), tail):
                improved = False
                failures.append(("improved", float(x), float(abs(d_err) - max(abs(b_err), tail))))
    return ImprovementReport(n, mu.describe(), genuine, c_n, f1, above, c_n < f1, improved, failures)
