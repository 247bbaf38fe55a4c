"""Discrete memoryless relay channel with the state known at the relay.

Bounds are evaluated exactly on dense joint pmfs and maximized by
coordinate-wise hill climbing over the factor simplices. Array layouts:

====================  =====================================
kernel                ``W[x1, x2, s, y2, y3]``
LowerFactorization    ``p_u1[u1]``, ``p_x1_u1[u1, x1]``,
                      ``p_u2_u1s[u1, s, u2]``,
                      ``p_x2_u1u2s[u1, u2, s, x2]``
UpperFactorization    ``p_x1[x1]`` or ``p_x1[s, x1]``,
                      ``p_x2_x1s[x1, s, x2]``
====================  =====================================
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Literal, Optional, Sequence

import numpy as np

from .information import JointPmf, mutual_information
from .optimize import BoundResult

log = logging.getLogger(__name__)

PMF_TOL = 1e-12
DEGRADED_TOL = 1e-9
STEP_SCHEDULE = (0.5, 0.25, 0.1, 0.05)

Mode = Literal["lower", "upper", "trivial"]

LOWER_AXES = ("s", "u1", "u2", "x1", "x2", "y2", "y3")
UPPER_AXES = ("s", "x1", "x2", "y2", "y3")
_KERNEL_AXES = ("x1", "x2", "s")
_SIZE_KEYS = ("S", "X1", "X2", "Y2", "Y3")


class SpecError(ValueError):
    """Malformed or non-stochastic channel description."""


def _check_stochastic(name: str, arr: np.ndarray, axis_names: Sequence[str], tol: float = PMF_TOL) -> None:
    """Every slice along the last axis must be a pmf; errors name the cell."""
    if not np.all(np.isfinite(arr)):
        raise SpecError(f"{name} has non-finite entries")
    neg = np.argwhere(arr < 0)
    if neg.size:
        cell = ", ".join(f"{n}={i}" for n, i in zip(list(axis_names) + ["out"], neg[0]))
        raise SpecError(f"{name}[{cell}] is negative ({arr[tuple(neg[0])]!r})")
    sums = arr.sum(axis=-1)
    bad = np.argwhere(np.abs(sums - 1.0) > tol)
    if bad.size:
        idx = tuple(bad[0])
        cell = ", ".join(f"{n}={i}" for n, i in zip(axis_names, idx))
        where = f"[{cell}]" if cell else ""
        raise SpecError(f"{name}{where} sums to {sums[idx]!r}, expected 1")


@dataclass(frozen=True)
class DiscreteChannelSpec:
    """State pmf ``Q_S`` and transition kernel ``W(y2, y3 | x1, x2, s)``."""

    state_pmf: np.ndarray
    kernel: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.state_pmf, dtype=float)
        w = np.asarray(self.kernel, dtype=float)
        if q.ndim != 1 or w.ndim != 5:
            raise SpecError("state_pmf must be 1-D and kernel 5-D (x1, x2, s, y2, y3)")
        if w.shape[2] != q.shape[0]:
            raise SpecError(f"kernel has {w.shape[2]} states but state_pmf has {q.shape[0]}")
        if min(w.shape) < 1:
            raise SpecError("alphabets must be non-empty")
        _check_stochastic("state_pmf", q, ())
        _check_stochastic("kernel", w.reshape(w.shape[:3] + (-1,)), _KERNEL_AXES)
        object.__setattr__(self, "state_pmf", q)
        object.__setattr__(self, "kernel", w)

    @property
    def sizes(self) -> dict[str, int]:
        nx1, nx2, ns, ny2, ny3 = self.kernel.shape
        return {"S": ns, "X1": nx1, "X2": nx2, "Y2": ny2, "Y3": ny3}

    def cardinality_bounds(self) -> tuple[int, int]:
        """Largest auxiliary alphabets the lower bound ever needs."""
        base = self.sizes["S"] * self.sizes["X1"] * self.sizes["X2"]
        return base + 1, (base + 1) * base

    @classmethod
    def from_dict(cls, doc: dict) -> "DiscreteChannelSpec":
        if not isinstance(doc, dict):
            raise SpecError("channel document must be a JSON object")
        for key in ("alphabet_sizes", "state_pmf", "kernel"):
            if key not in doc:
                raise SpecError(f"missing field {key!r}")
        sizes = doc["alphabet_sizes"]
        if not isinstance(sizes, dict):
            raise SpecError("field 'alphabet_sizes' must be an object")
        dims = []
        for k in _SIZE_KEYS:
            v = sizes.get(k)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise SpecError(f"field 'alphabet_sizes.{k}' must be a positive integer, got {v!r}")
            dims.append(v)
        ns, nx1, nx2, ny2, ny3 = dims
        try:
            q = np.asarray(doc["state_pmf"], dtype=float)
            w = np.asarray(doc["kernel"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise SpecError(f"probability arrays must be flat lists of numbers: {exc}") from None
        if q.shape != (ns,):
            raise SpecError(f"field 'state_pmf' needs {ns} entries, got shape {q.shape}")
        need = nx1 * nx2 * ns * ny2 * ny3
        if w.shape != (need,):
            raise SpecError(f"field 'kernel' needs {need} entries (x1, x2, s, y2, y3 row-major), got shape {w.shape}")
        return cls(q, w.reshape(nx1, nx2, ns, ny2, ny3))

    @classmethod
    def from_json(cls, text: str) -> "DiscreteChannelSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON: {exc}") from None
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path: str | Path) -> "DiscreteChannelSpec":
        return cls.from_json(Path(path).read_text())

    def to_dict(self) -> dict:
        return {
            "alphabet_sizes": self.sizes,
            "state_pmf": self.state_pmf.tolist(),
            "kernel": self.kernel.ravel().tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class LowerFactorization:
    p_u1: np.ndarray
    p_x1_u1: np.ndarray
    p_u2_u1s: np.ndarray
    p_x2_u1u2s: np.ndarray

    def __post_init__(self):
        for name, axes in (
            ("p_u1", ()),
            ("p_x1_u1", ("u1",)),
            ("p_u2_u1s", ("u1", "s")),
            ("p_x2_u1u2s", ("u1", "u2", "s")),
        ):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != len(axes) + 1:
                raise ValueError(f"{name} must have {len(axes) + 1} axes, got {arr.ndim}")
            _check_stochastic(name, arr, axes)
            object.__setattr__(self, name, arr)
        nu1, nu2 = self.p_u1.shape[0], self.p_u2_u1s.shape[2]
        if self.p_x1_u1.shape[0] != nu1 or self.p_u2_u1s.shape[0] != nu1:
            raise ValueError("inconsistent |U1| across factors")
        if self.p_x2_u1u2s.shape[:3] != (nu1, nu2, self.p_u2_u1s.shape[1]):
            raise ValueError("p_x2_u1u2s must be indexed [u1, u2, s, x2]")

    @classmethod
    def trusted(cls, *blocks: np.ndarray) -> "LowerFactorization":
        """Wrap already-validated arrays without re-checking them."""
        obj = object.__new__(cls)
        for name, arr in zip(("p_u1", "p_x1_u1", "p_u2_u1s", "p_x2_u1u2s"), blocks):
            object.__setattr__(obj, name, arr)
        return obj

    @property
    def aux_sizes(self) -> tuple[int, int]:
        return self.p_u1.shape[0], self.p_u2_u1s.shape[2]

    def blocks(self) -> list[np.ndarray]:
        return [self.p_u1, self.p_x1_u1, self.p_u2_u1s, self.p_x2_u1u2s]

    @classmethod
    def random(cls, spec: DiscreteChannelSpec, n_u1: int, n_u2: int, rng: np.random.Generator) -> "LowerFactorization":
        sz = spec.sizes
        shapes = [(n_u1,), (n_u1, sz["X1"]), (n_u1, sz["S"], n_u2), (n_u1, n_u2, sz["S"], sz["X2"])]
        return cls(*(_dirichlet(rng, s) for s in shapes))


@dataclass(frozen=True)
class UpperFactorization:
    """``p_x1`` is ``[x1]`` for the informed-relay bound and ``[s, x1]`` for
    the bound that also informs the source."""

    p_x1: np.ndarray
    p_x2_x1s: np.ndarray

    def __post_init__(self):
        p1 = np.asarray(self.p_x1, dtype=float)
        p2 = np.asarray(self.p_x2_x1s, dtype=float)
        if p1.ndim not in (1, 2) or p2.ndim != 3:
            raise ValueError("p_x1 must be [x1] or [s, x1]; p_x2_x1s must be [x1, s, x2]")
        _check_stochastic("p_x1", p1, () if p1.ndim == 1 else ("s",))
        _check_stochastic("p_x2_x1s", p2, ("x1", "s"))
        if p1.shape[-1] != p2.shape[0]:
            raise ValueError("inconsistent |X1| across factors")
        object.__setattr__(self, "p_x1", p1)
        object.__setattr__(self, "p_x2_x1s", p2)

    @classmethod
    def trusted(cls, p_x1: np.ndarray, p_x2_x1s: np.ndarray) -> "UpperFactorization":
        obj = object.__new__(cls)
        object.__setattr__(obj, "p_x1", p_x1)
        object.__setattr__(obj, "p_x2_x1s", p_x2_x1s)
        return obj

    @property
    def state_aware_source(self) -> bool:
        return self.p_x1.ndim == 2

    def blocks(self) -> list[np.ndarray]:
        return [self.p_x1, self.p_x2_x1s]

    @classmethod
    def random(cls, spec: DiscreteChannelSpec, rng: np.random.Generator, state_aware_source: bool = False) -> "UpperFactorization":
        sz = spec.sizes
        shape1 = (sz["S"], sz["X1"]) if state_aware_source else (sz["X1"],)
        return cls(_dirichlet(rng, shape1), _dirichlet(rng, (sz["X1"], sz["S"], sz["X2"])))


def _dirichlet(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return rng.dirichlet(np.ones(shape[-1]), size=shape[:-1])


# -- joint measures ----------------------------------------------------------


def _lower_tensor(spec: DiscreteChannelSpec, f: LowerFactorization) -> np.ndarray:
    return np.einsum(
        "s,a,ax,asb,absz,xzsyv->sabxzyv",
        spec.state_pmf, f.p_u1, f.p_x1_u1, f.p_u2_u1s, f.p_x2_u1u2s, spec.kernel,
    )


def _upper_tensor(spec: DiscreteChannelSpec, f: UpperFactorization) -> np.ndarray:
    sub = "sx" if f.state_aware_source else "x"
    return np.einsum(f"s,{sub},xsz,xzsyv->sxzyv", spec.state_pmf, f.p_x1, f.p_x2_x1s, spec.kernel)


def build_joint_lower(spec: DiscreteChannelSpec, f: LowerFactorization) -> JointPmf:
    """Joint pmf over ``(s, u1, u2, x1, x2, y2, y3)``."""
    sz = spec.sizes
    if f.p_x1_u1.shape[1] != sz["X1"] or f.p_u2_u1s.shape[1] != sz["S"] or f.p_x2_u1u2s.shape[3] != sz["X2"]:
        raise ValueError(f"factorization does not match channel alphabets {sz}")
    return JointPmf(_lower_tensor(spec, f), LOWER_AXES)


def build_joint_upper(spec: DiscreteChannelSpec, f: UpperFactorization) -> JointPmf:
    """Joint pmf over ``(s, x1, x2, y2, y3)``."""
    sz = spec.sizes
    if f.p_x1.shape[-1] != sz["X1"] or f.p_x2_x1s.shape[1:] != (sz["S"], sz["X2"]):
        raise ValueError(f"factorization does not match channel alphabets {sz}")
    if f.state_aware_source and f.p_x1.shape[0] != sz["S"]:
        raise ValueError("state-aware p_x1 must be indexed [s, x1]")
    return JointPmf(_upper_tensor(spec, f), UPPER_AXES)


# -- bound evaluators ----------------------------------------------------------


def _lower_terms(j: JointPmf) -> tuple[float, float]:
    relay = mutual_information(j, "x1", "y2", ("s", "u1"))
    dest = mutual_information(j, ("x1", "u1", "u2"), "y3") - mutual_information(j, "u2", "s", "u1")
    return relay, dest


def lower_terms(spec: DiscreteChannelSpec, f: LowerFactorization) -> tuple[float, float]:
    """Relay decoding rate and destination rate net of the binning cost."""
    return _lower_terms(build_joint_lower(spec, f))


def dm_lower_eval(spec: DiscreteChannelSpec, f: LowerFactorization) -> float:
    """Achievable rate of one factorization; may be negative."""
    return min(lower_terms(spec, f))


def upper_terms(spec: DiscreteChannelSpec, f: UpperFactorization, degraded: bool = False) -> tuple[float, float, float]:
    """Broadcast cut, multiple-access cut and the state penalty I(X1;S|Y3)."""
    return _upper_terms(build_joint_upper(spec, f), degraded)


def _upper_terms(j: JointPmf, degraded: bool) -> tuple[float, float, float]:
    if degraded:
        first = mutual_information(j, "x1", "y2", ("s", "x2"))
    else:
        first = mutual_information(j, "x1", ("y2", "y3"), ("s", "x2"))
    mac = mutual_information(j, ("x1", "x2"), "y3", "s")
    penalty = mutual_information(j, "x1", "s", "y3")
    return first, mac, penalty


def dm_upper_eval(spec: DiscreteChannelSpec, f: UpperFactorization, degraded: bool = False) -> float:
    """Converse bound of one factorization.

    ``degraded`` selects the relay-only first cut, valid for physically
    degraded channels.
    """
    if f.state_aware_source:
        raise ValueError("the informed-relay bound needs p_x1 independent of the state")
    first, mac, penalty = upper_terms(spec, f, degraded)
    return min(first, mac - penalty)


def dm_trivial_upper_eval(spec: DiscreteChannelSpec, f: UpperFactorization) -> float:
    """Cut-set bound with the state known everywhere; ``p_x1`` may depend on s."""
    return _trivial_value(build_joint_upper(spec, f))


def _trivial_value(j: JointPmf) -> float:
    return min(
        mutual_information(j, "x1", ("y2", "y3"), ("s", "x2")),
        mutual_information(j, ("x1", "x2"), "y3", "s"),
    )


def is_degraded(spec: DiscreteChannelSpec, tol: float = DEGRADED_TOL) -> bool:
    """Whether ``W = W(y2|x1,x2,s) W'(y3|y2,x2,s)`` for some x1-free ``W'``."""
    w = spec.kernel
    w2 = w.sum(axis=-1)  # (x1, x2, s, y2)
    wt = w2.sum(axis=0)
    # x1-mixture of the conditionals; cells with zero mass impose nothing
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = np.where(wt[..., None] > 0, w.sum(axis=0) / wt[..., None], 0.0)
    return bool(np.all(np.abs(w - w2[..., None] * cond[None]) <= tol))


# -- search --------------------------------------------------------------------


def _moved(v: np.ndarray, k: int, toward: bool, step: float) -> Optional[np.ndarray]:
    """Shift mass of one simplex slice toward (or away from) vertex ``k``."""
    w = v.copy()
    if toward:
        w[k] += step
    else:
        w[k] = max(w[k] - step, 0.0)
    total = w.sum()
    if total <= 0:
        return None
    w /= total
    return None if np.array_equal(w, v) else w


def _hill_climb(
    blocks: list[np.ndarray],
    objective: Callable[[list[np.ndarray]], float],
    schedule: Sequence[float],
    max_passes: int,
) -> tuple[list[np.ndarray], float, int]:
    """Coordinate ascent on a product of simplices.

    A move re-normalizes one slice after shifting mass toward or away from a
    vertex. When no single move helps, pairs of moves are tried: the bounds
    are minima of two terms and single moves stall on the ridge where the
    terms cross.
    """
    blocks = [b.copy() for b in blocks]
    moves = [
        (bi, idx, k, toward)
        for bi, b in enumerate(blocks)
        if b.shape[-1] > 1
        for idx in np.ndindex(b.shape[:-1])
        for k in range(b.shape[-1])
        for toward in (True, False)
    ]
    best = objective(blocks)
    evals = 1

    def attempt(chain, step) -> bool:
        nonlocal best, evals
        saved = []
        for bi, idx, k, toward in chain:
            v = blocks[bi][idx]
            w = _moved(v, k, toward, step)
            if w is None:
                break
            saved.append((bi, idx, v.copy()))
            blocks[bi][idx] = w
        else:
            val = objective(blocks)
            evals += 1
            if val > best + 1e-13:
                best = val
                return True
        for bi, idx, v in reversed(saved):
            blocks[bi][idx] = v
        return False

    for step in schedule:
        for _ in range(max_passes):
            if any([attempt([m], step) for m in moves]):
                continue
            paired = False
            for i, m1 in enumerate(moves):
                for m2 in moves[i + 1 :]:
                    if m1[:3] != m2[:3] and attempt([m1, m2], step):
                        paired = True
            if not paired:
                break
    return blocks, best, evals


def dm_search(
    spec: DiscreteChannelSpec,
    mode: Mode = "lower",
    restarts: int = 8,
    aux_sizes: Optional[tuple[int, int]] = None,
    seed: int = 0,
    degraded: bool = False,
    full_cardinality: bool = False,
    schedule: Sequence[float] = STEP_SCHEDULE,
    max_passes: int = 50,
) -> BoundResult:
    """Best bound value found by random-restart hill climbing.

    The value is what the best factorization achieves, so it never exceeds
    the true maximum. ``aux_sizes`` defaults to ``(2, 2)`` for the lower bound;
    ``full_cardinality`` uses the sizes that provably suffice instead, which
    is only practical for tiny alphabets. Each restart draws from its own
    child of ``SeedSequence(seed)``, so results depend only on the inputs.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    if mode not in ("lower", "upper", "trivial"):
        raise ValueError(f"unknown mode {mode!r}")
    if full_cardinality:
        aux_sizes = spec.cardinality_bounds()
    n_u1, n_u2 = aux_sizes or (2, 2)
    if mode == "lower" and (n_u1 < 1 or n_u2 < 1):
        raise ValueError("auxiliary alphabets must be non-empty")

    # hill-climbing moves keep every slice normalized, so scoring skips validation
    if mode == "lower":
        make = lambda rng: LowerFactorization.random(spec, n_u1, n_u2, rng).blocks()
        build = lambda bl: LowerFactorization(*bl)
        score = lambda bl: min(_lower_terms(JointPmf.trusted(_lower_tensor(spec, LowerFactorization.trusted(*bl)), LOWER_AXES)))
    elif mode == "upper":
        make = lambda rng: UpperFactorization.random(spec, rng).blocks()
        build = lambda bl: UpperFactorization(*bl)

        def score(bl):
            first, mac, penalty = _upper_terms(JointPmf.trusted(_upper_tensor(spec, UpperFactorization.trusted(*bl)), UPPER_AXES), degraded)
            return min(first, mac - penalty)
    else:
        make = lambda rng: UpperFactorization.random(spec, rng, state_aware_source=True).blocks()
        build = lambda bl: UpperFactorization(*bl)
        score = lambda bl: _trivial_value(JointPmf.trusted(_upper_tensor(spec, UpperFactorization.trusted(*bl)), UPPER_AXES))

    best_val, best_blocks, total = -math.inf, None, 0
    values = []
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        blocks, val, evals = _hill_climb(make(rng), score, schedule, max_passes)
        total += evals
        values.append(val)
        if val > best_val:
            best_val, best_blocks = val, blocks
    log.debug("dm_search %s restarts=%d values=%s", mode, restarts, values)
    return BoundResult(
        rate=max(best_val, 0.0),
        argmax={"factorization": build(best_blocks)},
        evaluations=total,
        grid_tolerance=0.0,
        details={"raw_value": best_val, "restart_values": values, "aux_sizes": (n_u1, n_u2) if mode == "lower" else None},
    )
