"""Choquet integrals of grid-sampled integrands.

A sampled function is piecewise constant on closed grid cells, so each of its
level sets is a finite union of cells and any capacity evaluates it exactly.
Two algorithms are provided:

* :class:`SortedLevels` sorts the cell values and sums
  ``(v_j - v_{j-1}) * mu({f >= v_j} & A)`` using nested prefix measures.
* :class:`BetaQuadrature` applies the midpoint rule to
  ``beta -> mu({f >= beta} & A)``, building every level set from scratch.

Negative values are handled by the second term of the definition,
``int_{-inf}^0 [mu(F_beta & A) - mu(A)] d beta``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .capacities import Capacity, Dirac, DistortedLebesgue, LebesgueBorel, Scaled
from .exceptions import ConvergenceWarning
from .sets import CellPieces, IntervalPieces, IntervalSet, SimplexCellSet, simplex_grid

__all__ = [
    "BetaQuadrature",
    "QuadratureResult",
    "SampledFunction1D",
    "SampledFunctionSimplex",
    "SortedLevels",
    "beta_quadrature",
    "choquet_integral",
    "lp_choquet_functional",
    "ordinary_integral",
    "property_suite",
]

CELL_MODES = ("node", "midpoint", "node-average")


# ---------------------------------------------------------------------------
# sampled functions


@dataclass(frozen=True, eq=False)
class SampledFunction1D:
    """Function on [0, 1] sampled on the uniform grid t_i = i / M.

    ``mode`` fixes the piecewise-constant reading used for integration:

    * ``node``: M + 1 cells centred on the nodes (half cells at 0 and 1), each
      carrying its node value.  Lebesgue integrals reduce to the trapezoid
      rule and a point mass at a node sees the exact node value.
    * ``midpoint``: M cells [t_i, t_{i+1}] carrying f at the cell centre.
    * ``node-average``: M cells carrying the mean of their two node values.
    """

    nodes: np.ndarray
    cells: np.ndarray
    mode: str = "node"
    func: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.mode not in CELL_MODES:
            raise ValueError(f"unknown cell mode {self.mode!r}")
        if len(self.nodes) < 2:
            raise ValueError("need at least two nodes (M >= 1)")
        if not (np.all(np.isfinite(self.nodes)) and np.all(np.isfinite(self.cells))):
            raise ValueError("sampled values must be finite")
        expected = len(self.nodes) if self.mode == "node" else len(self.nodes) - 1
        if len(self.cells) != expected:
            raise ValueError("cell values do not match the grid")
        self.nodes.setflags(write=False)
        self.cells.setflags(write=False)

    @classmethod
    def from_callable(cls, func: Callable, M: int = 2048, mode: str = "node") -> SampledFunction1D:
        t = np.linspace(0.0, 1.0, M + 1)
        nodes = np.asarray(func(t), dtype=float) * np.ones_like(t)
        if mode == "midpoint":
            cells = np.asarray(func((t[:-1] + t[1:]) / 2), dtype=float) * np.ones(M)
        else:
            cells = _cells_from_nodes(nodes, mode)
        return cls(nodes, cells, mode, func)

    @classmethod
    def from_values(cls, nodes, mode: str = "node") -> SampledFunction1D:
        nodes = np.array(nodes, dtype=float)
        if mode == "midpoint":
            raise ValueError("midpoint mode needs the function, not only node values")
        return cls(nodes, _cells_from_nodes(nodes, mode), mode)

    @classmethod
    def from_cells(cls, cells, mode: str = "midpoint") -> SampledFunction1D:
        """Build directly from cell values (random test integrands)."""
        cells = np.array(cells, dtype=float)
        if mode == "node":
            return cls(cells.copy(), cells, mode)
        nodes = np.empty(len(cells) + 1)
        nodes[1:-1] = (cells[:-1] + cells[1:]) / 2
        nodes[0], nodes[-1] = cells[0], cells[-1]
        return cls(nodes, cells, mode)

    @property
    def M(self) -> int:
        return len(self.nodes) - 1

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.M + 1)

    @property
    def edges(self) -> np.ndarray:
        return cell_edges(self.M, self.mode)

    @property
    def nonneg(self) -> bool:
        return bool(self.nodes.min() >= 0 and self.cells.min() >= 0)

    def __call__(self, t):
        if self.func is not None:
            return np.asarray(self.func(t), dtype=float)
        return np.interp(t, self.grid, self.nodes)

    def with_func(self, func: Callable) -> SampledFunction1D:
        """Sample another function on the same grid and in the same mode."""
        return SampledFunction1D.from_callable(func, self.M, self.mode)

    # Pointwise arithmetic on the grid.  For node-average the cell values of a
    # derived function are re-averaged from its node values.
    def _derive(self, op: Callable, other=None) -> SampledFunction1D:
        if other is None:
            nodes = op(self.nodes)
            cells = op(self.cells) if self.mode == "midpoint" else None
            func = (lambda t, f=self.func: op(f(t))) if self.func is not None else None
        else:
            if isinstance(other, SampledFunction1D):
                if other.M != self.M or other.mode != self.mode:
                    raise ValueError("sampled functions live on different grids")
                nodes = op(self.nodes, other.nodes)
                cells = op(self.cells, other.cells) if self.mode == "midpoint" else None
                if self.func is not None and other.func is not None:
                    func = lambda t, f=self.func, g=other.func: op(f(t), g(t))  # noqa: E731
                else:
                    func = None
            else:
                c = float(other)
                nodes = op(self.nodes, c)
                cells = op(self.cells, c) if self.mode == "midpoint" else None
                func = (lambda t, f=self.func: op(f(t), c)) if self.func is not None else None
        nodes = np.asarray(nodes, dtype=float)
        if cells is None:
            cells = _cells_from_nodes(nodes, self.mode)
        return SampledFunction1D(nodes, np.asarray(cells, dtype=float), self.mode, func)

    def __add__(self, other):
        return self._derive(np.add, other)

    __radd__ = __add__

    def __sub__(self, other):
        return self._derive(np.subtract, other)

    def __mul__(self, other):
        return self._derive(np.multiply, other)

    __rmul__ = __mul__

    def __neg__(self):
        return self._derive(np.negative)

    def __abs__(self):
        return self._derive(np.abs)

    def __pow__(self, p: float):
        return self._derive(lambda v: np.power(v, p))


def cell_edges(M: int, mode: str) -> np.ndarray:
    t = np.linspace(0.0, 1.0, M + 1)
    if mode == "node":
        return np.concatenate([[0.0], (t[:-1] + t[1:]) / 2, [1.0]])
    return t


def _cells_from_nodes(nodes: np.ndarray, mode: str) -> np.ndarray:
    if mode == "node":
        return nodes.copy()
    if mode == "node-average":
        return (nodes[:-1] + nodes[1:]) / 2
    raise ValueError("midpoint cell values cannot be recovered from nodes")


@dataclass(frozen=True, eq=False)
class SampledFunctionSimplex:
    """Function on S^2, one value per triangle of the uniform N-subdivision (at its centroid)."""

    N: int
    cells: np.ndarray
    func: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.cells) != self.N * self.N:
            raise ValueError("need one value per simplex cell")
        if not np.all(np.isfinite(self.cells)):
            raise ValueError("sampled values must be finite")
        self.cells.setflags(write=False)

    @classmethod
    def from_callable(cls, func: Callable, N: int = 64) -> SampledFunctionSimplex:
        c = simplex_grid(N).centroids
        vals = np.asarray(func(c[:, 0], c[:, 1]), dtype=float) * np.ones(len(c))
        return cls(N, vals, func)

    @property
    def nonneg(self) -> bool:
        return bool(self.cells.min() >= 0)

    def __call__(self, x1, x2):
        if self.func is None:
            raise TypeError("cell-only simplex function is not evaluable pointwise")
        return np.asarray(self.func(x1, x2), dtype=float)

    def with_func(self, func: Callable) -> SampledFunctionSimplex:
        return SampledFunctionSimplex.from_callable(func, self.N)

    def _derive(self, op, other=None):
        if other is None:
            cells = op(self.cells)
            func = (lambda a, b, f=self.func: op(f(a, b))) if self.func is not None else None
        elif isinstance(other, SampledFunctionSimplex):
            if other.N != self.N:
                raise ValueError("sampled functions live on different grids")
            cells = op(self.cells, other.cells)
            func = None
            if self.func is not None and other.func is not None:
                func = lambda a, b, f=self.func, g=other.func: op(f(a, b), g(a, b))  # noqa: E731
        else:
            c = float(other)
            cells = op(self.cells, c)
            func = (lambda a, b, f=self.func: op(f(a, b), c)) if self.func is not None else None
        return SampledFunctionSimplex(self.N, np.asarray(cells, dtype=float), func)

    def __add__(self, other):
        return self._derive(np.add, other)

    __radd__ = __add__

    def __sub__(self, other):
        return self._derive(np.subtract, other)

    def __mul__(self, other):
        return self._derive(np.multiply, other)

    __rmul__ = __mul__

    def __abs__(self):
        return self._derive(np.abs)

    def __pow__(self, p: float):
        return self._derive(lambda v: np.power(v, p))


# ---------------------------------------------------------------------------
# integration methods


@dataclass(frozen=True)
class SortedLevels:
    pass


@dataclass(frozen=True)
class BetaQuadrature:
    steps: int = 16
    tol: float = 1e-8
    max_steps: int = 2**20

    def __post_init__(self):
        if self.steps < 16 or self.steps & (self.steps - 1):
            raise ValueError("steps must be a power of two >= 16")
        if self.max_steps < self.steps:
            raise ValueError("max_steps must be >= steps")


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    steps: int
    converged: bool
    last_change: float
    error_bound: float = 0.0


def _pieces(f, A):
    """Split A along the grid cells of f.  Returns (pieces, values)."""
    if isinstance(f, SampledFunction1D):
        edges = f.edges
        if A is None:
            return IntervalPieces(edges[:-1], edges[1:]), f.cells
        if not isinstance(A, IntervalSet):
            raise TypeError("a function on [0, 1] integrates over an IntervalSet")
        n_cells = len(edges) - 1
        starts, ends, vals = [], [], []
        for a, b in A:
            # Closed cells meeting [a, b]: right edge >= a and left edge <= b.
            i0 = max(int(np.searchsorted(edges, a, side="left")) - 1, 0)
            i1 = min(int(np.searchsorted(edges, b, side="right")) - 1, n_cells - 1)
            idx = np.arange(i0, i1 + 1)
            starts.append(np.maximum(edges[idx], a))
            ends.append(np.minimum(edges[idx + 1], b))
            vals.append(f.cells[idx])
        if not starts:
            return IntervalPieces(np.empty(0), np.empty(0)), np.empty(0)
        return IntervalPieces(np.concatenate(starts), np.concatenate(ends)), np.concatenate(vals)
    if isinstance(f, SampledFunctionSimplex):
        if A is None:
            ids = np.arange(f.N * f.N)
        else:
            if not isinstance(A, SimplexCellSet) or A.N != f.N:
                raise TypeError("a simplex function integrates over a SimplexCellSet of the same resolution")
            ids = A.ids
        return CellPieces(f.N, ids), f.cells[ids]
    raise TypeError(f"unsupported integrand type {type(f).__name__}")


def _combine_levels(levels: np.ndarray, S: np.ndarray, mu_A: float) -> float:
    """Definition of the Choquet integral for a step function of beta.

    ``levels`` ascending distinct values u_1 < ... < u_q and S_j = mu({f >= u_j} & A).
    For beta in (u_{j-1}, u_j] the level set is {f >= u_j}.
    """
    # Sentinel: on (u_q, 0] the level set is empty, which matters when f < 0 on A.
    levels = np.append(levels, max(levels[-1], 0.0))
    S = np.append(S, 0.0)
    pos_hi = np.maximum(levels, 0.0)
    pos_lo = np.concatenate([[0.0], pos_hi[:-1]])
    positive = np.sum((pos_hi - pos_lo) * S)
    neg_hi = np.minimum(levels, 0.0)
    # j = 1 contributes mu(A) - mu(A) = 0 on (-inf, u_1].
    negative = np.sum((neg_hi[1:] - neg_hi[:-1]) * (S[1:] - mu_A))
    return float(positive + negative)


def _sorted_levels(f, A, c: Capacity) -> float:
    pieces, values = _pieces(f, A)
    if len(values) == 0:
        return 0.0
    order = np.argsort(-values, kind="stable")
    desc = values[order]
    prefix = c.prefix_measures(pieces.take(order))
    # For each distinct value, the set {f >= v} is the prefix ending at its last occurrence.
    last = np.flatnonzero(np.append(desc[1:] != desc[:-1], True))
    levels = desc[last][::-1]
    S = prefix[last][::-1]
    return _combine_levels(levels, S, prefix[-1])


def beta_quadrature(f, A, c: Capacity, method: BetaQuadrature = BetaQuadrature()) -> QuadratureResult:
    """Midpoint rule in beta with doubling until successive estimates agree.

    Agreement of two doublings alone is not trusted: on step integrands both
    sums can miss a jump identically.  For monotone capacities beta -> mu(F_beta)
    is monotone, so the midpoint error is at most h/2 times its variation, and
    convergence also requires that bound below ``tol``.
    """
    pieces, values = _pieces(f, A)
    if len(values) == 0:
        return QuadratureResult(0.0, 0, True, 0.0)
    levels = np.unique(values)
    cache: dict[int, float] = {}

    def mu_level(j: int) -> float:
        if j not in cache:
            if j >= len(levels):
                cache[j] = 0.0
            else:
                cache[j] = c.measure(pieces.to_set(values >= levels[j]))
        return cache[j]

    mu_A = c.measure(pieces.to_set())
    lo, hi = min(0.0, float(levels[0])), max(0.0, float(levels[-1]))

    def estimate(N: int) -> float:
        total = 0.0
        for a, b, shift in ((0.0, hi, 0.0), (lo, 0.0, mu_A)):
            if b <= a:
                continue
            h = (b - a) / N
            beta = a + (np.arange(N) + 0.5) * h
            # mu(F_beta) only changes when beta crosses a value of f.
            idx = np.searchsorted(levels, beta, side="left")
            uniq, counts = np.unique(idx, return_counts=True)
            vals = np.array([mu_level(int(j)) for j in uniq])
            total += h * float(np.sum(counts * (vals - shift)))
        return total

    variation = max(mu_A - mu_level(len(levels) - 1), 0.0) if c.monotone else np.inf

    def bound(N: int) -> float:
        return 0.5 * (hi - lo) / N * variation if variation and hi > lo else 0.0

    N = method.steps
    prev = estimate(N)
    change = np.inf
    while N < method.max_steps:
        N *= 2
        cur = estimate(N)
        change = abs(cur - prev)
        prev = cur
        if change < method.tol and bound(N) < method.tol:
            return QuadratureResult(cur, N, True, change, bound(N))
    return QuadratureResult(prev, N, False, change, bound(N))


def choquet_integral(f, A, c: Capacity, method=None) -> float:
    """(C) int_A f d c.  ``A=None`` means the whole domain of ``f``."""
    if method is None or isinstance(method, SortedLevels):
        return _sorted_levels(f, A, c)
    if isinstance(method, BetaQuadrature):
        res = beta_quadrature(f, A, c, method)
        if not res.converged:
            warnings.warn(
                f"beta quadrature stopped at {res.steps} steps; last change {res.last_change:.2e}, "
                f"error bound {res.error_bound:.2e}, tol {method.tol:.0e}",
                ConvergenceWarning,
                stacklevel=2,
            )
        return res.value
    raise TypeError(f"unknown integration method {method!r}")


def ordinary_integral(f, A, c: Capacity) -> float:
    """Ordinary (additive) integral of the piecewise-constant f against an additive capacity."""
    if not c.additive:
        raise ValueError(f"{c.describe()} is not additive")
    if isinstance(c, Scaled):
        return c.factor * ordinary_integral(f, A, c.base)
    pieces, values = _pieces(f, A)
    if len(values) == 0:
        return 0.0
    if isinstance(c, LebesgueBorel) or (isinstance(c, DistortedLebesgue) and c.distortion.kind == "identity"):
        sizes = pieces.lengths if isinstance(pieces, IntervalPieces) else pieces.areas
        return float(np.dot(values, sizes))
    if isinstance(c, Dirac):
        if isinstance(pieces, IntervalPieces):
            x = float(c.point)
            hit = (pieces.starts <= x) & (x <= pieces.ends)
        else:
            hit = np.isin(pieces.ids, simplex_grid(pieces.N).cells_containing(c.point))
        # Closed cells: a point on a shared edge sees the larger neighbouring value.
        return float(values[hit].max()) if hit.any() else 0.0
    raise NotImplementedError(f"no ordinary quadrature for {c.describe()}")


def lp_choquet_functional(f, c: Capacity, p: float = 1.0, A=None) -> float:
    """((C) int |f|^p dc)^(1/p).  Not a norm for nonadditive c."""
    if not p >= 1:
        raise ValueError("p must be >= 1")
    val = choquet_integral(abs(f) ** p, A, c)
    return max(val, 0.0) ** (1.0 / p)


def lp_ordinary(f, c: Capacity, p: float = 1.0, A=None) -> float:
    if not p >= 1:
        raise ValueError("p must be >= 1")
    return max(ordinary_integral(abs(f) ** p, A, c), 0.0) ** (1.0 / p)


# ---------------------------------------------------------------------------
# randomized property suite


@dataclass
class PropertyResult:
    name: str
    checked: int = 0
    failures: int = 0
    worst: float = 0.0  # largest violation seen (<= 0 means none)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, violation: float, tol: float) -> None:
        self.checked += 1
        self.worst = max(self.worst, violation) if self.checked > 1 else violation
        if violation > tol:
            self.failures += 1


def property_suite(
    c: Capacity, seed: int = 0, trials: int = 500, M: int = 256, tol: float = 1e-9
) -> dict[str, PropertyResult]:
    """Randomized checks of the basic Choquet integral identities and inequalities.

    Integrands are random cell-constant functions on an M-cell midpoint grid;
    sets are random interval unions.  All integrals use SortedLevels.
    """
    from .capacities import random_interval_set

    if not c.monotone:
        raise ValueError("property suite needs a monotone capacity")
    rng = np.random.default_rng(seed)
    names = [
        "homogeneity",
        "translation",
        "monotone_in_f",
        "monotone_in_set",
        "subadditive_in_set",
        "constant_one",
    ]
    if c.submodular:
        names.append("subadditive_in_f")
    if c.additive:
        names.append("additive_reduction")
    results = {k: PropertyResult(k) for k in names}

    def rand_f(signed: bool) -> SampledFunction1D:
        vals = rng.random(M) * rng.uniform(0.1, 3.0)
        if signed:
            vals -= rng.uniform(0.0, 3.0)
        # Repeated values exercise tie handling.
        vals = np.where(rng.random(M) < 0.2, np.round(vals, 1), vals)
        return SampledFunction1D.from_cells(vals, mode="midpoint")

    ci = choquet_integral
    for _ in range(trials):
        A = random_interval_set(rng)
        muA = c.measure(A)
        f, g = rand_f(True), rand_f(True)
        fp = rand_f(False)

        a = float(rng.choice([0.0, rng.uniform(0, 5)]))
        If = ci(f, A, c)
        results["homogeneity"].record(abs(ci(f * a, A, c) - a * If), tol)

        c0 = float(rng.uniform(-3, 3))
        results["translation"].record(abs(ci(f + c0, A, c) - (If + c0 * muA)), tol)

        bump = SampledFunction1D.from_cells(np.abs(rng.normal(size=M)), mode="midpoint")
        results["monotone_in_f"].record(If - ci(f + bump, A, c), tol)

        B = A | random_interval_set(rng)
        IpA, IpB = ci(fp, A, c), ci(fp, B, c)
        results["monotone_in_set"].record(IpA - IpB, tol)
        D = random_interval_set(rng)
        results["subadditive_in_set"].record(ci(fp, A | D, c) - IpA - ci(fp, D, c), tol)

        one = SampledFunction1D.from_cells(np.ones(M), mode="midpoint")
        results["constant_one"].record(abs(ci(one, A, c) - muA), tol)

        if "subadditive_in_f" in results:
            results["subadditive_in_f"].record(ci(f + g, A, c) - If - ci(g, A, c), tol)
        if "additive_reduction" in results:
            results["additive_reduction"].record(abs(If - ordinary_integral(f, A, c)), tol)
    return results
