"""Capacities (monotone set functions) on interval unions and simplex cell sets.

Structural flags are declared per variant.  :func:`check_structure` collects
randomized evidence for them; it cannot prove them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import xlog1py, xlogy

from .sets import (
    CellPieces,
    IntervalPieces,
    IntervalSet,
    SimplexCellSet,
    canonicalize,
    set_intersection,
    set_union,
    simplex_grid,
)

__all__ = [
    "Capacity",
    "Dirac",
    "DistortedLebesgue",
    "Distortion",
    "LebesgueBorel",
    "Possibility",
    "Scaled",
    "StructureReport",
    "UnimodalDistribution",
    "bernstein_bump_max",
    "check_structure",
    "measure",
]

STRUCTURE_TOL = 1e-12


# ---------------------------------------------------------------------------
# distortions


_DISTORTIONS = {
    "sqrt": np.sqrt,
    "sin": np.sin,
    "identity": lambda u: np.asarray(u, dtype=float) * 1.0,
}


@dataclass(frozen=True)
class Distortion:
    """Increasing function gamma on [0, 1] with gamma(0) = 0.

    Built-in kinds are concave.  ``custom`` exists for negative controls and
    carries its own ``concave`` declaration.
    """

    kind: str
    p: float = 1.0
    fn: Callable | None = field(default=None, repr=False)
    name: str | None = None
    concave: bool = True

    def __post_init__(self):
        if self.kind == "power":
            if not (0.0 < self.p <= 1.0):
                raise ValueError(f"power distortion needs 0 < p <= 1, got {self.p}")
        elif self.kind == "custom":
            if self.fn is None:
                raise ValueError("custom distortion needs a function")
        elif self.kind not in _DISTORTIONS:
            raise ValueError(f"unknown distortion kind {self.kind!r}")

    @classmethod
    def sqrt(cls) -> Distortion:
        return cls("sqrt")

    @classmethod
    def sin(cls) -> Distortion:
        return cls("sin")

    @classmethod
    def identity(cls) -> Distortion:
        return cls("identity")

    @classmethod
    def power(cls, p: float) -> Distortion:
        return cls("power", p=p)

    @classmethod
    def custom(cls, fn: Callable, name: str, concave: bool = False) -> Distortion:
        return cls("custom", fn=fn, name=name, concave=concave)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "power":
            return u**self.p
        if self.kind == "custom":
            return np.asarray(self.fn(u), dtype=float)
        return _DISTORTIONS[self.kind](u)

    @property
    def label(self) -> str:
        if self.kind == "power":
            return f"power({self.p:g})"
        if self.kind == "custom":
            return self.name or "custom"
        return self.kind


# ---------------------------------------------------------------------------
# possibility distributions


def bernstein_bump_max(n: int, k: int) -> float:
    """max over [0,1] of t^k (1-t)^(n-k), i.e. k^k n^-n (n-k)^(n-k) with 0^0 = 1."""
    if not 0 <= k <= n or n < 1:
        raise ValueError("need n >= 1 and 0 <= k <= n")
    return (k / n) ** k * ((n - k) / n) ** (n - k)


@dataclass(frozen=True)
class UnimodalDistribution:
    """Possibility distribution on [0, 1] (sup = 1).

    ``bump``: lambda(t) = t^k (1-t)^(n-k) / E_{n,k}, mode k/n.
    ``tabulated``: values at uniform nodes (piecewise-linear in between), or one
    value per cell of a simplex grid when ``layout == "simplex-cells"``.
    """

    kind: str
    n: int = 0
    k: int = 0
    values: tuple = ()
    layout: str = "nodes"

    def __post_init__(self):
        if self.kind == "bump":
            if self.n < 1 or not 0 <= self.k <= self.n:
                raise ValueError("bump needs n >= 1 and 0 <= k <= n")
        elif self.kind == "tabulated":
            v = np.asarray(self.values, dtype=float)
            if v.size < 1 or np.any(v < 0) or np.any(v > 1 + 1e-12):
                raise ValueError("tabulated possibility values must lie in [0, 1]")
            if abs(v.max() - 1.0) > 1e-12:
                raise ValueError("tabulated possibility distribution must attain sup 1")
            if self.layout == "nodes" and v.size < 2:
                raise ValueError("node layout needs at least two values")
            if self.layout not in ("nodes", "simplex-cells"):
                raise ValueError(f"unknown layout {self.layout!r}")
        else:
            raise ValueError(f"unknown distribution kind {self.kind!r}")

    @classmethod
    def bump(cls, n: int, k: int) -> UnimodalDistribution:
        return cls("bump", n=n, k=k)

    @classmethod
    def tabulated(cls, values, layout: str = "nodes") -> UnimodalDistribution:
        return cls("tabulated", values=tuple(float(v) for v in np.ravel(values)), layout=layout)

    @property
    def mode(self) -> float:
        if self.kind == "bump":
            return self.k / self.n
        v = np.asarray(self.values)
        return float(np.argmax(v) / (len(v) - 1))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "bump":
            n, k = self.n, self.k
            m = k / n
            log_ratio = xlogy(k, t) - xlogy(k, m) + xlog1py(n - k, -t) - xlog1py(n - k, -m)
            return np.exp(log_ratio)
        if self.layout != "nodes":
            raise TypeError("cell-tabulated distribution is not evaluable pointwise on [0, 1]")
        v = np.asarray(self.values)
        return np.interp(t, np.linspace(0.0, 1.0, len(v)), v)

    def sup_on_intervals(self, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
        """Exact sup of lambda over each closed interval [starts[i], ends[i]]."""
        if self.kind == "bump":
            return self(np.clip(self.mode, starts, ends))
        if self.layout != "nodes":
            raise TypeError("cell-tabulated distribution has no interval sups")
        v = np.asarray(self.values)
        G = len(v) - 1
        out = np.maximum(self(starts), self(ends))
        # Interior nodes strictly inside (a, b): max of a node-value range.
        lo = np.floor(np.asarray(starts) * G).astype(int) + 1
        hi = np.ceil(np.asarray(ends) * G).astype(int) - 1
        for i in np.flatnonzero(hi >= lo):
            out[i] = max(out[i], v[lo[i] : hi[i] + 1].max())
        return out

    def sup_on_cells(self, ids: np.ndarray) -> np.ndarray:
        if self.kind != "tabulated" or self.layout != "simplex-cells":
            raise TypeError("only cell-tabulated distributions can be evaluated on simplex cells")
        return np.asarray(self.values)[ids]

    @property
    def label(self) -> str:
        if self.kind == "bump":
            return f"bump({self.n},{self.k})"
        return f"tabulated[{len(self.values)}]"


# ---------------------------------------------------------------------------
# capacities


class Capacity:
    """Base class.  Subclasses implement ``_measure_intervals`` / ``_measure_cells``."""

    monotone = True
    submodular = True
    additive = False
    normalized = True
    strictly_positive = True

    def measure(self, A) -> float:
        if isinstance(A, IntervalSet):
            if A.is_empty():
                return 0.0
            return float(self._measure_intervals(A))
        if isinstance(A, SimplexCellSet):
            if A.is_empty():
                return 0.0
            return float(self._measure_cells(A))
        raise TypeError(f"cannot measure {type(A).__name__}; expected IntervalSet or SimplexCellSet")

    __call__ = measure

    def prefix_measures(self, pieces) -> np.ndarray:
        """Measures of the unions of the first 1, 2, ..., len(pieces) pieces.

        Generic fallback: rebuild each prefix set from scratch.
        """
        out = np.empty(len(pieces))
        mask = np.zeros(len(pieces), dtype=bool)
        for i in range(len(pieces)):
            mask[i] = True
            out[i] = self.measure(pieces.to_set(mask))
        return out

    def _measure_intervals(self, A: IntervalSet) -> float:
        raise TypeError(f"{self.describe()} is not defined on [0, 1]")

    def _measure_cells(self, A: SimplexCellSet) -> float:
        raise TypeError(f"{self.describe()} is not defined on the simplex")

    def describe(self) -> str:
        return type(self).__name__

    def flags(self) -> dict[str, bool]:
        return {
            "monotone": self.monotone,
            "submodular": self.submodular,
            "additive": self.additive,
            "normalized": self.normalized,
            "strictly_positive": self.strictly_positive,
        }


@dataclass(frozen=True)
class LebesgueBorel(Capacity):
    """Lebesgue measure (length on [0, 1], area on S^2)."""

    additive = True

    def _measure_intervals(self, A):
        return A.length

    def _measure_cells(self, A):
        return A.area

    def prefix_measures(self, pieces):
        sizes = pieces.lengths if isinstance(pieces, IntervalPieces) else pieces.areas
        return np.cumsum(sizes)

    def describe(self):
        return "lebesgue"


@dataclass(frozen=True)
class DistortedLebesgue(Capacity):
    """mu(A) = gamma(m(A)) with m the Lebesgue length/area."""

    distortion: Distortion

    @property
    def submodular(self):
        return self.distortion.concave

    @property
    def additive(self):
        return self.distortion.kind == "identity"

    @property
    def normalized(self):
        # On [0, 1]; on S^2 the total mass is gamma(1/2).
        return bool(abs(float(self.distortion(1.0)) - 1.0) < 1e-15)

    def _measure_intervals(self, A):
        return self.distortion(min(A.length, 1.0))

    def _measure_cells(self, A):
        return self.distortion(min(A.area, 0.5))

    def prefix_measures(self, pieces):
        if isinstance(pieces, IntervalPieces):
            total = np.minimum(np.cumsum(pieces.lengths), 1.0)
        else:
            total = np.minimum(np.cumsum(pieces.areas), 0.5)
        return self.distortion(total)

    def describe(self):
        return f"{self.distortion.label}-lebesgue"


@dataclass(frozen=True)
class Possibility(Capacity):
    """P_lambda(A) = sup of lambda over A."""

    distribution: UnimodalDistribution

    @property
    def strictly_positive(self):
        d = self.distribution
        if d.kind == "bump":
            return True
        v = np.asarray(d.values)
        # A zero on a whole cell (two adjacent zero nodes, or a zero cell) kills positivity.
        if d.layout == "simplex-cells":
            return bool(np.all(v > 0))
        return not bool(np.any((v[1:] == 0) & (v[:-1] == 0)))

    def _measure_intervals(self, A):
        return float(np.max(self.distribution.sup_on_intervals(A.starts, A.ends)))

    def _measure_cells(self, A):
        return float(np.max(self.distribution.sup_on_cells(A.ids)))

    def prefix_measures(self, pieces):
        if isinstance(pieces, IntervalPieces):
            sups = self.distribution.sup_on_intervals(pieces.starts, pieces.ends)
        else:
            sups = self.distribution.sup_on_cells(pieces.ids)
        return np.maximum.accumulate(sups)

    def describe(self):
        return f"possibility-{self.distribution.label}"


@dataclass(frozen=True)
class Dirac(Capacity):
    """Unit point mass.  Additive but not strictly positive."""

    point: float | tuple

    additive = True
    strictly_positive = False

    def _measure_intervals(self, A):
        return 1.0 if A.contains(float(self.point)) else 0.0

    def _measure_cells(self, A):
        return 1.0 if A.contains(self.point) else 0.0

    def prefix_measures(self, pieces):
        if isinstance(pieces, IntervalPieces):
            x = float(self.point)
            hit = (pieces.starts <= x) & (x <= pieces.ends)
        else:
            hit = np.isin(pieces.ids, simplex_grid(pieces.N).cells_containing(self.point))
        return np.logical_or.accumulate(hit).astype(float)

    def describe(self):
        if isinstance(self.point, tuple):
            return "dirac(" + ",".join(f"{p:g}" for p in self.point) + ")"
        return f"dirac({self.point:g})"


@dataclass(frozen=True)
class Scaled(Capacity):
    """factor * base."""

    base: Capacity
    factor: float

    def __post_init__(self):
        if not self.factor >= 0:
            raise ValueError("scale factor must be >= 0")

    @property
    def monotone(self):
        return self.base.monotone

    @property
    def submodular(self):
        return self.base.submodular

    @property
    def additive(self):
        return self.base.additive

    @property
    def normalized(self):
        return self.base.normalized and self.factor == 1.0

    @property
    def strictly_positive(self):
        return self.base.strictly_positive and self.factor > 0

    def _measure_intervals(self, A):
        return self.factor * self.base.measure(A)

    def _measure_cells(self, A):
        return self.factor * self.base.measure(A)

    def prefix_measures(self, pieces):
        return self.factor * self.base.prefix_measures(pieces)

    def describe(self):
        return f"{self.factor:g}*{self.base.describe()}"


def measure(c: Capacity, A) -> float:
    return c.measure(A)


# ---------------------------------------------------------------------------
# structural checks


@dataclass
class StructureReport:
    capacity: str
    trials: int
    monotone_ok: bool
    submodular_ok: bool
    counterexample: dict | None = None


def random_interval_set(rng: np.random.Generator, max_intervals: int = 4) -> IntervalSet:
    k = int(rng.integers(0, max_intervals + 1))
    if k == 0:
        return IntervalSet.empty()
    pts = rng.random((k, 2))
    # Snap some endpoints to a coarse lattice so touching/adjacent cases occur.
    snap = rng.random((k, 2)) < 0.3
    pts = np.where(snap, np.round(pts * 8) / 8, pts)
    pts.sort(axis=1)
    return canonicalize(pts)


def random_cell_set(rng: np.random.Generator, N: int) -> SimplexCellSet:
    size = int(rng.integers(0, N * N + 1))
    return SimplexCellSet(N, rng.choice(N * N, size=size, replace=False))


def check_structure(
    c: Capacity, trials: int = 1000, seed: int = 0, simplex_N: int | None = None
) -> StructureReport:
    """Spot-check monotonicity (nested pairs) and submodularity (arbitrary pairs)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    if simplex_N is None:
        draw = lambda: random_interval_set(rng)  # noqa: E731
    else:
        draw = lambda: random_cell_set(rng, simplex_N)  # noqa: E731

    monotone_ok = submodular_ok = True
    counterexample = None
    for _ in range(trials):
        A, B = draw(), draw()
        nested = set_union(A, B)
        mA, mB, mNested = c.measure(A), c.measure(B), c.measure(nested)
        if monotone_ok and mA > mNested + STRUCTURE_TOL:
            monotone_ok = False
            counterexample = counterexample or {
                "property": "monotone", "A": A, "B": nested, "mu_A": mA, "mu_B": mNested,
            }
        mInter = c.measure(set_intersection(A, B))
        lhs, rhs = mNested + mInter, mA + mB
        if submodular_ok and lhs > rhs + STRUCTURE_TOL:
            submodular_ok = False
            counterexample = counterexample or {
                "property": "submodular", "A": A, "B": B, "lhs": lhs, "rhs": rhs,
            }
    return StructureReport(c.describe(), trials, monotone_ok, submodular_ok, counterexample)


def check_dominance(mu: Capacity, delta: Capacity, trials: int = 200, seed: int = 0) -> dict | None:
    """First random set with mu(A) > delta(A), or None."""
    rng = np.random.default_rng(seed)
    probes = [IntervalSet.full()] + [canonicalize([(0.0, 2.0**-j)]) for j in range(1, 30)]
    for A in probes + [random_interval_set(rng) for _ in range(trials)]:
        a, b = mu.measure(A), delta.measure(A)
        if a > b + STRUCTURE_TOL:
            return {"A": A, "mu": a, "delta": b}
    return None
