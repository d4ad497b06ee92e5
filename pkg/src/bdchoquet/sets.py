"""Canonical finite unions of closed cells on [0, 1] and on the 2-simplex.

Every level set of a grid-sampled function is a finite union of closed grid
cells, so these two classes are all the measurable sets the library needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

__all__ = [
    "CellPieces",
    "IntervalPieces",
    "IntervalSet",
    "SimplexCellSet",
    "SimplexGrid",
    "canonicalize",
    "set_union",
    "set_intersection",
    "simplex_grid",
]


class IntervalSet:
    """Finite union of closed intervals in [0, 1], kept in canonical form.

    Canonical means sorted by left endpoint, pairwise disjoint, and with no two
    intervals touching (``b_i < a_{i+1}``).  The constructor rejects anything
    else; use :func:`canonicalize` to build a set from raw intervals.
    """

    __slots__ = ("_starts", "_ends")

    def __init__(self, intervals: Iterable[tuple[float, float]] = ()):
        arr = np.asarray(list(intervals), dtype=float).reshape(-1, 2)
        starts, ends = arr[:, 0].copy(), arr[:, 1].copy()
        _validate_bounds(starts, ends)
        if len(starts) > 1 and np.any(starts[1:] <= ends[:-1]):
            raise ValueError("intervals are not canonical (unsorted, overlapping or touching)")
        self._set_arrays(starts, ends)

    @classmethod
    def _from_arrays(cls, starts: np.ndarray, ends: np.ndarray) -> IntervalSet:
        # Caller guarantees canonical form.
        obj = cls.__new__(cls)
        obj._set_arrays(np.asarray(starts, float), np.asarray(ends, float))
        return obj

    def _set_arrays(self, starts, ends):
        starts.setflags(write=False)
        ends.setflags(write=False)
        self._starts = starts
        self._ends = ends

    @classmethod
    def empty(cls) -> IntervalSet:
        return cls._from_arrays(np.empty(0), np.empty(0))

    @classmethod
    def full(cls) -> IntervalSet:
        return cls._from_arrays(np.array([0.0]), np.array([1.0]))

    @property
    def starts(self) -> np.ndarray:
        return self._starts

    @property
    def ends(self) -> np.ndarray:
        return self._ends

    @property
    def length(self) -> float:
        return float(np.sum(self._ends - self._starts))

    def is_empty(self) -> bool:
        return len(self._starts) == 0

    def contains(self, x: float) -> bool:
        return bool(np.any((self._starts <= x) & (x <= self._ends)))

    def issubset(self, other: IntervalSet) -> bool:
        return set_intersection(self, other) == self

    def union(self, other: IntervalSet) -> IntervalSet:
        return set_union(self, other)

    def intersection(self, other: IntervalSet) -> IntervalSet:
        return set_intersection(self, other)

    __or__ = union
    __and__ = intersection

    def __iter__(self) -> Iterator[tuple[float, float]]:
        return iter(zip(self._starts.tolist(), self._ends.tolist()))

    def __len__(self) -> int:
        return len(self._starts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return np.array_equal(self._starts, other._starts) and np.array_equal(self._ends, other._ends)

    def __hash__(self) -> int:
        return hash((self._starts.tobytes(), self._ends.tobytes()))

    def __repr__(self) -> str:
        body = ", ".join(f"[{a:g}, {b:g}]" for a, b in self)
        return f"IntervalSet({body or 'empty'})"


def _validate_bounds(starts: np.ndarray, ends: np.ndarray) -> None:
    if not (np.all(np.isfinite(starts)) and np.all(np.isfinite(ends))):
        raise ValueError("interval endpoints must be finite")
    if np.any(starts > ends):
        raise ValueError("reversed interval: left endpoint exceeds right endpoint")
    if np.any(starts < 0.0) or np.any(ends > 1.0):
        raise ValueError("intervals must lie inside [0, 1]")


def _merge_sorted(starts: np.ndarray, ends: np.ndarray) -> IntervalSet:
    """Merge closed intervals already sorted by left endpoint."""
    if len(starts) == 0:
        return IntervalSet.empty()
    reach = np.maximum.accumulate(ends)
    new_group = np.empty(len(starts), dtype=bool)
    new_group[0] = True
    new_group[1:] = starts[1:] > reach[:-1]
    first = np.flatnonzero(new_group)
    last = np.append(first[1:] - 1, len(starts) - 1)
    return IntervalSet._from_arrays(starts[first], reach[last])


def canonicalize(intervals) -> IntervalSet:
    """Sort and merge raw closed intervals; touching intervals are merged."""
    if isinstance(intervals, IntervalSet):
        return intervals
    arr = np.asarray(list(intervals), dtype=float).reshape(-1, 2)
    starts, ends = arr[:, 0], arr[:, 1]
    _validate_bounds(starts, ends)
    order = np.lexsort((ends, starts))
    return _merge_sorted(starts[order], ends[order])


def _intervals_from_arrays(starts: np.ndarray, ends: np.ndarray) -> IntervalSet:
    order = np.lexsort((ends, starts))
    return _merge_sorted(np.asarray(starts, float)[order], np.asarray(ends, float)[order])


def set_union(a, b):
    if isinstance(a, SimplexCellSet):
        return a.union(b)
    return _intervals_from_arrays(np.concatenate([a.starts, b.starts]), np.concatenate([a.ends, b.ends]))


def set_intersection(a, b):
    if isinstance(a, SimplexCellSet):
        return a.intersection(b)
    out_s, out_e = [], []
    i = j = 0
    sa, ea, sb, eb = a.starts, a.ends, b.starts, b.ends
    while i < len(sa) and j < len(sb):
        lo = max(sa[i], sb[j])
        hi = min(ea[i], eb[j])
        if lo <= hi:
            out_s.append(lo)
            out_e.append(hi)
        if ea[i] < eb[j]:
            i += 1
        else:
            j += 1
    # Pieces of two canonical sets never touch each other, but re-merge anyway.
    return _intervals_from_arrays(np.array(out_s), np.array(out_e))


@dataclass(frozen=True)
class SimplexGrid:
    """Uniform subdivision of S^2 = {x1, x2 >= 0, x1 + x2 <= 1} into N^2 triangles.

    Cell ids run over the "upward" triangles (i, j), i + j <= N - 1, followed by
    the "downward" triangles (i, j), i + j <= N - 2.  Every triangle has area
    1 / (2 N^2).
    """

    N: int
    vertices: np.ndarray  # (N^2, 3, 2)
    centroids: np.ndarray  # (N^2, 2)

    @property
    def n_cells(self) -> int:
        return self.N * self.N

    @property
    def cell_area(self) -> float:
        return 0.5 / (self.N * self.N)

    def cells_containing(self, point, tol: float = 1e-12) -> np.ndarray:
        """Ids of the closed triangles containing ``point``."""
        p = np.asarray(point, float)
        v0, v1, v2 = self.vertices[:, 0], self.vertices[:, 1], self.vertices[:, 2]
        d1, d2 = v1 - v0, v2 - v0
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        r = p - v0
        l1 = (r[:, 0] * d2[:, 1] - r[:, 1] * d2[:, 0]) / det
        l2 = (d1[:, 0] * r[:, 1] - d1[:, 1] * r[:, 0]) / det
        inside = (l1 >= -tol) & (l2 >= -tol) & (l1 + l2 <= 1 + tol)
        return np.flatnonzero(inside)


@lru_cache(maxsize=16)
def simplex_grid(N: int) -> SimplexGrid:
    if N < 1:
        raise ValueError("simplex resolution N must be >= 1")
    h = 1.0 / N
    verts = []
    for i in range(N):
        for j in range(N - i):
            verts.append([(i, j), (i + 1, j), (i, j + 1)])
    for i in range(N):
        for j in range(N - 1 - i):
            verts.append([(i + 1, j), (i, j + 1), (i + 1, j + 1)])
    v = np.asarray(verts, dtype=float) * h
    v.setflags(write=False)
    c = v.mean(axis=1)
    c.setflags(write=False)
    return SimplexGrid(N=N, vertices=v, centroids=c)


class SimplexCellSet:
    """Union of closed triangles of the uniform N-subdivision of S^2."""

    __slots__ = ("N", "_ids")

    def __init__(self, N: int, ids: Iterable[int] = ()):
        arr = np.unique(np.asarray(list(ids) if not isinstance(ids, np.ndarray) else ids, dtype=np.int64))
        if N < 1:
            raise ValueError("N must be >= 1")
        if arr.size and (arr[0] < 0 or arr[-1] >= N * N):
            raise ValueError(f"cell ids must lie in [0, {N * N})")
        arr.setflags(write=False)
        self.N = N
        self._ids = arr

    @classmethod
    def full(cls, N: int) -> SimplexCellSet:
        return cls(N, np.arange(N * N))

    @property
    def ids(self) -> np.ndarray:
        return self._ids

    @property
    def area(self) -> float:
        return len(self._ids) * 0.5 / (self.N * self.N)

    def is_empty(self) -> bool:
        return len(self._ids) == 0

    def _check(self, other: SimplexCellSet) -> None:
        if not isinstance(other, SimplexCellSet) or other.N != self.N:
            raise ValueError("cell sets must share the same resolution")

    def union(self, other: SimplexCellSet) -> SimplexCellSet:
        self._check(other)
        return SimplexCellSet(self.N, np.union1d(self._ids, other._ids))

    def intersection(self, other: SimplexCellSet) -> SimplexCellSet:
        self._check(other)
        return SimplexCellSet(self.N, np.intersect1d(self._ids, other._ids))

    __or__ = union
    __and__ = intersection

    def issubset(self, other: SimplexCellSet) -> bool:
        self._check(other)
        return bool(np.all(np.isin(self._ids, other._ids)))

    def contains(self, point) -> bool:
        hits = simplex_grid(self.N).cells_containing(point)
        return bool(np.any(np.isin(hits, self._ids)))

    def __len__(self) -> int:
        return len(self._ids)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SimplexCellSet):
            return NotImplemented
        return self.N == other.N and np.array_equal(self._ids, other._ids)

    def __hash__(self) -> int:
        return hash((self.N, self._ids.tobytes()))

    def __repr__(self) -> str:
        return f"SimplexCellSet(N={self.N}, cells={len(self._ids)})"


@dataclass(frozen=True)
class IntervalPieces:
    """Ordered list of closed intervals whose union is some set of interest.

    Unlike :class:`IntervalSet` the pieces may touch (neighbouring grid cells);
    the order is significant for prefix evaluations.
    """

    starts: np.ndarray
    ends: np.ndarray

    def __len__(self) -> int:
        return len(self.starts)

    @property
    def lengths(self) -> np.ndarray:
        return self.ends - self.starts

    def take(self, idx) -> IntervalPieces:
        return IntervalPieces(self.starts[idx], self.ends[idx])

    def to_set(self, mask=None) -> IntervalSet:
        if mask is None:
            return _intervals_from_arrays(self.starts, self.ends)
        return _intervals_from_arrays(self.starts[mask], self.ends[mask])


@dataclass(frozen=True)
class CellPieces:
    """Ordered list of simplex cell ids (no duplicates)."""

    N: int
    ids: np.ndarray

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def areas(self) -> np.ndarray:
        return np.full(len(self.ids), 0.5 / (self.N * self.N))

    def take(self, idx) -> CellPieces:
        return CellPieces(self.N, self.ids[idx])

    def to_set(self, mask=None) -> SimplexCellSet:
        ids = self.ids if mask is None else self.ids[mask]
        return SimplexCellSet(self.N, ids)
