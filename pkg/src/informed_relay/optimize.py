"""Grid-plus-refinement search for low-dimensional max and max-min problems.

Objectives take one array per coordinate, ``f(x0, x1, ...)``, and must
broadcast: grid scans pass open meshes, so a term that depends on a single
coordinate is computed once per grid line rather than once per grid point.
Infeasible points are skipped (scored ``-inf``), never projected onto the
feasible set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

# cap on grid points evaluated per vectorized call
_CHUNK_POINTS = 400_000


class InfeasibleError(ValueError):
    """No grid point satisfied the feasibility predicate."""


class NonFiniteObjectiveError(ArithmeticError):
    """The objective returned NaN or +inf at a feasible point."""


@dataclass(frozen=True)
class GridSpec:
    """Resolution and refinement policy of a grid search.

    Each round after the coarse scan re-grids a window ``refine_shrink`` times
    the previous one, centred on the incumbent and kept inside the box.
    """

    coarse_points: int = 101
    refine_rounds: int = 3
    refine_shrink: float = 0.1

    def __post_init__(self):
        if int(self.coarse_points) != self.coarse_points or self.coarse_points < 3:
            raise ValueError(f"coarse_points must be an integer >= 3, got {self.coarse_points!r}")
        if int(self.refine_rounds) != self.refine_rounds or self.refine_rounds < 0:
            raise ValueError(f"refine_rounds must be an integer >= 0, got {self.refine_rounds!r}")
        if not 0.0 < self.refine_shrink < 1.0:
            raise ValueError(f"refine_shrink must lie in (0, 1), got {self.refine_shrink!r}")

    def final_pitch(self, width: float) -> float:
        """Grid spacing of the last refinement round for an axis of ``width``."""
        return width * self.refine_shrink**self.refine_rounds / (self.coarse_points - 1)


@dataclass(frozen=True)
class BoundResult:
    """A rate in bits per channel use with the parameters that achieve it.

    ``grid_tolerance`` is the reported uncertainty of ``rate``; heuristic
    searches without a grid report 0.
    """

    rate: float
    argmax: dict[str, Any]
    evaluations: int
    grid_tolerance: float
    details: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class SearchResult:
    value: float
    argmax: np.ndarray
    evaluations: int
    pitch: np.ndarray
    tolerance: float


@dataclass(frozen=True)
class MaximinResult:
    value: float
    outer_argmax: np.ndarray
    inner_argmax: np.ndarray
    term1: float
    term2: float
    evaluations: int
    tolerance: float

    @property
    def argmax(self) -> np.ndarray:
        return np.concatenate([self.outer_argmax, self.inner_argmax])


def _as_boxes(boxes: Sequence[Sequence[float]]) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(boxes, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] != 2:
        raise ValueError("boxes must be a non-empty list of [lo, hi] pairs")
    if not np.all(np.isfinite(arr)):
        raise ValueError("box limits must be finite")
    if np.any(arr[:, 0] > arr[:, 1]):
        raise ValueError("every box needs lo <= hi")
    return arr[:, 0].copy(), arr[:, 1].copy()


def _check_finite(vals: np.ndarray) -> None:
    bad = np.isnan(vals) | (vals == np.inf)
    if np.any(bad):
        raise NonFiniteObjectiveError(
            f"objective returned a non-finite value at {int(bad.sum())} feasible point(s)"
        )


def _open_mesh(axes: np.ndarray) -> list[np.ndarray]:
    """``(B, d, n)`` axis values -> d arrays shaped ``(B, 1, .., n, .., 1)``."""
    B, d, n = axes.shape
    mesh = []
    for k in range(d):
        shape = [B] + [1] * d
        shape[k + 1] = n
        mesh.append(axes[:, k, :].reshape(shape))
    return mesh


def _batched_search(
    func: Callable[[list[np.ndarray]], np.ndarray],
    lo: np.ndarray,
    hi: np.ndarray,
    grid: GridSpec,
) -> tuple[np.ndarray, np.ndarray, int, np.ndarray, np.ndarray]:
    """Solve ``B`` independent box problems at once.

    ``func`` receives one coordinate array per axis, leading axis ``B``, and
    returns values of the broadcast shape with ``-inf`` at infeasible points.
    ``lo``/``hi`` have shape ``(B, d)``. Returns best values, argmax,
    evaluations per problem, final pitch and the neighbour-variation
    tolerance.
    """
    B, d = lo.shape
    n = grid.coarse_points
    grid_shape = (B,) + (n,) * d
    t = np.linspace(0.0, 1.0, n)
    rows = np.arange(B)

    best_val = np.full(B, -np.inf)
    best_x = lo.copy()
    win_lo, win_hi = lo.copy(), hi.copy()
    evals = 0
    for rnd in range(grid.refine_rounds + 1):
        axes = win_lo[:, :, None] + (win_hi - win_lo)[:, :, None] * t
        axes[:, :, -1] = win_hi
        vals = np.broadcast_to(func(_open_mesh(axes)), grid_shape).reshape(B, -1)
        evals += n**d
        _check_finite(vals)
        j = np.argmax(vals, axis=1)  # first maximizer = lexicographically smallest
        v = vals[rows, j]
        pos = np.unravel_index(j, (n,) * d)
        x = np.stack([axes[rows, k, pos[k]] for k in range(d)], axis=-1)
        better = v > best_val
        best_val = np.where(better, v, best_val)
        best_x = np.where(better[:, None], x, best_x)
        if rnd < grid.refine_rounds:
            w = (win_hi - win_lo) * grid.refine_shrink
            win_lo = np.clip(best_x - w / 2.0, lo, hi - w)
            win_hi = np.minimum(win_lo + w, hi)

    pitch = (win_hi - win_lo) / (n - 1)
    offsets = np.concatenate([np.eye(d), -np.eye(d)])  # (2d, d)
    nb = np.clip(best_x[:, None, :] + offsets[None] * pitch[:, None, :], lo[:, None], hi[:, None])
    nv = np.broadcast_to(func([nb[..., k] for k in range(d)]), (B, 2 * d))
    evals += 2 * d
    _check_finite(nv)
    ok = np.isfinite(nv) & np.isfinite(best_val)[:, None]
    with np.errstate(invalid="ignore"):
        tol = np.where(ok, np.abs(nv - best_val[:, None]), 0.0).max(axis=1)
    return best_val, best_x, evals, pitch, tol


def _masked_eval(objective, feasible, coords: Sequence[np.ndarray]) -> np.ndarray:
    """Evaluate ``objective`` on the broadcast grid, feasible points only."""
    shape = np.broadcast_shapes(*(c.shape for c in coords))
    if feasible is None:
        return np.broadcast_to(np.asarray(objective(*coords), dtype=float), shape)
    mask = np.broadcast_to(np.asarray(feasible(*coords), dtype=bool), shape)
    out = np.full(shape, -np.inf)
    if np.any(mask):
        pts = [np.broadcast_to(c, shape)[mask] for c in coords]
        out[mask] = np.asarray(objective(*pts), dtype=float)
    return out


def _at(func: Callable[..., np.ndarray], point: Sequence[float]) -> float:
    return float(np.asarray(func(*(np.array([a]) for a in point)), dtype=float).reshape(-1)[0])


def maximize(
    objective: Callable[..., np.ndarray],
    boxes: Sequence[Sequence[float]],
    feasible: Optional[Callable[..., np.ndarray]] = None,
    grid: GridSpec = GridSpec(),
) -> SearchResult:
    """Maximize ``objective(x0, x1, ...)`` over a box.

    Only points where ``feasible`` holds reach the objective. The reported
    value is the objective re-evaluated at the returned argmax. Ties go to the
    lexicographically smallest grid point.
    """
    lo, hi = _as_boxes(boxes)
    best, x, evals, pitch, tol = _batched_search(
        lambda coords: _masked_eval(objective, feasible, coords), lo[None], hi[None], grid
    )
    if not np.isfinite(best[0]):
        raise InfeasibleError("no feasible grid point")
    argmax = x[0]
    return SearchResult(_at(objective, argmax), argmax, evals + 1, pitch[0], float(tol[0]))


def maximin(
    outer_boxes: Sequence[Sequence[float]],
    inner_boxes: Sequence[Sequence[float]],
    term1: Optional[Callable[..., np.ndarray]],
    term2: Callable[..., np.ndarray],
    feasible: Optional[Callable[..., np.ndarray]] = None,
    grid: GridSpec = GridSpec(),
) -> MaximinResult:
    """Solve ``max_o min{term1(*o), max_i term2(*o, *i)}``.

    The inner maximum is resolved for every outer point before the min is
    taken; ``feasible(*o, *i)`` restricts the inner problem. An outer point
    whose inner problem has no feasible point scores ``-inf``. With
    ``term1=None`` this is a plain nested ``max_o max_i``, which resolves
    ridges of a non-smooth objective far better than a joint grid.
    """
    olo, ohi = _as_boxes(outer_boxes)
    ilo, ihi = _as_boxes(inner_boxes)
    d_o, d_i = olo.size, ilo.size
    chunk = max(1, _CHUNK_POINTS // grid.coarse_points**d_i)
    evals = 0

    def inner(outer: np.ndarray):
        """Inner solves for outer points ``(P, d_o)``."""
        nonlocal evals
        P = outer.shape[0]
        vals, xs, tols = np.empty(P), np.empty((P, d_i)), np.empty(P)
        for s in range(0, P, chunk):
            o = outer[s : s + chunk]
            b = o.shape[0]

            def func(coords, o=o, b=b):
                oc = [o[:, k].reshape((b,) + (1,) * (coords[0].ndim - 1)) for k in range(d_o)]
                return _masked_eval(term2, feasible, oc + list(coords))

            v, x, e, _, tl = _batched_search(func, np.tile(ilo, (b, 1)), np.tile(ihi, (b, 1)), grid)
            vals[s : s + b], xs[s : s + b], tols[s : s + b] = v, x, tl
            evals += e * b
        return vals, xs, tols

    def outer_func(coords):
        nonlocal evals
        shape = np.broadcast_shapes(*(c.shape for c in coords))
        flat = np.stack([np.broadcast_to(c, shape).reshape(-1) for c in coords], axis=-1)
        t2, _, _ = inner(flat)
        if term1 is None:
            t1 = np.inf
        else:
            t1 = np.asarray(term1(*flat.T), dtype=float)
            evals += flat.shape[0]
        out = np.where(np.isfinite(t2), np.minimum(t1, t2), -np.inf)
        return out.reshape(shape)

    best, ox, _, _, otol = _batched_search(outer_func, olo[None], ohi[None], grid)
    if not np.isfinite(best[0]):
        raise InfeasibleError("no outer point has a feasible inner problem")
    o_star = ox[0]
    _, i_star, itol = inner(o_star[None])
    t1 = math.inf if term1 is None else _at(term1, o_star)
    t2 = _at(term2, [*o_star, *i_star[0]])
    evals += 2
    return MaximinResult(
        value=min(t1, t2),
        outer_argmax=o_star,
        inner_argmax=i_star[0],
        term1=t1,
        term2=t2,
        evaluations=evals,
        tolerance=float(otol[0] + itol[0]),
    )
