"""Closed-form rate expressions for the Gaussian relay channel whose additive
state is known non-causally at the relay only.

Channel model::

    Y2 = X1 + S + Z2
    Y3 = X1 + X2 + S + Z3          (general)
    Y3 = X2 + Y2 + Z3'             (physically degraded, var(Z3') = N3 - N2)

All rates are in bits per channel use. Evaluators accept scalars or numpy
arrays and broadcast; the bound functions wrap them in grid searches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Optional

import numpy as np

from .optimize import BoundResult, GridSpec, maximin, maximize

# accepted round-off when checking rho12^2 + rho2s^2 <= 1
_DISC_SLACK = 1e-12

STRONG_STATE_RATIO = 1e6


@dataclass(frozen=True)
class ChannelParams:
    """Powers and noise variances (linear scale) of the Gaussian model.

    With ``degraded`` set the destination sees a noisier copy of the relay
    output, which presumes ``n3 >= n2``. That is not enforced: the low-SNR
    end of the usual sweeps runs with ``n2 > n3`` and the formulas stay
    well defined there.
    """

    p1: float
    p2: float
    q: float
    n2: float
    n3: float
    degraded: bool = False

    def __post_init__(self):
        for name in ("p1", "p2", "q", "n2", "n3"):
            v = getattr(self, name)
            if not isinstance(v, (int, float, np.floating, np.integer)) or isinstance(v, bool):
                raise TypeError(f"{name} must be a real number, got {v!r}")
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            if v < 0:
                raise ValueError(f"{name} must be non-negative, got {v!r}")
            object.__setattr__(self, name, float(v))
        for name in ("n2", "n3"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")

    @classmethod
    def from_db(cls, p1: float, p2: float, q: float, n2: float, n3: float, degraded: bool = False) -> "ChannelParams":
        """Build from values given in dB (``10*log10(linear)``)."""
        lin = [10.0 ** (v / 10.0) for v in (p1, p2, q, n2, n3)]
        return cls(*lin, degraded=degraded)

    def with_(self, **changes: Any) -> "ChannelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class LowerParams:
    """Parameters of the codeword-splitting / generalized DPC scheme.

    ``rho12`` correlates the source input with the cooperative part of the
    relay input, ``theta`` is the relay power fraction given to the DPC part,
    and ``rho2s`` correlates the DPC part with the state.
    """

    rho12: float
    theta: float
    rho2s: float

    def __post_init__(self):
        _check_box("rho12", self.rho12, 0.0, 1.0)
        _check_box("theta", self.theta, 0.0, 1.0)
        _check_box("rho2s", self.rho2s, -1.0, 0.0)

    def sigma12(self, ch: ChannelParams) -> float:
        """E[X1 X2], carried entirely by the cooperative part."""
        return self.rho12 * math.sqrt((1.0 - self.theta) * ch.p1 * ch.p2)

    def sigma2s(self, ch: ChannelParams) -> float:
        """E[X2 S], carried entirely by the DPC part."""
        return self.rho2s * math.sqrt(self.theta * ch.p2 * ch.q)


@dataclass(frozen=True)
class UpperParams:
    rho12: float
    rho2s: float

    def __post_init__(self):
        _check_box("rho12", self.rho12, 0.0, 1.0)
        _check_box("rho2s", self.rho2s, -1.0, 0.0)
        if self.rho12**2 + self.rho2s**2 > 1.0 + _DISC_SLACK:
            raise ValueError(f"rho12^2 + rho2s^2 must not exceed 1, got {self.rho12**2 + self.rho2s**2!r}")


@dataclass(frozen=True)
class ExtremeCase:
    name: str
    capacity: float


def _half_log2(x):
    return 0.5 * np.log2(1.0 + x)


def _check_box(name: str, value, lo: float, hi: float) -> None:
    arr = np.asarray(value, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < lo) or np.any(arr > hi):
        raise ValueError(f"{name} must lie in [{lo:g}, {hi:g}], got {value!r}")


def _check_disc(rho12, rho2s) -> None:
    if np.any(np.asarray(rho12) ** 2 + np.asarray(rho2s) ** 2 > 1.0 + _DISC_SLACK):
        raise ValueError("parameters violate rho12^2 + rho2s^2 <= 1")


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


# -- lower bound -------------------------------------------------------------


def lower_term1(ch: ChannelParams, rho12):
    """Rate at which the relay decodes the source given the cooperative part."""
    _check_box("rho12", rho12, 0.0, 1.0)
    rho12 = np.asarray(rho12, dtype=float)
    return _scalar(_half_log2(ch.p1 * (1.0 - rho12**2) / ch.n2))


def _lower_term2(ch: ChannelParams, rho12, theta, rho2s):
    tbar = 1.0 - theta
    num = ch.p1 + tbar * ch.p2 + 2.0 * math.sqrt(ch.p1 * ch.p2) * rho12 * np.sqrt(tbar)
    den = theta * ch.p2 + ch.q + ch.n3 + 2.0 * math.sqrt(ch.p2 * ch.q) * rho2s * np.sqrt(theta)
    if np.any(den <= 0):
        raise ArithmeticError("non-positive interference-plus-noise power in lower_term2")
    return 0.5 * np.log2((1.0 + num / den) * (1.0 + theta * ch.p2 * (1.0 - rho2s**2) / ch.n3))


def lower_term2(ch: ChannelParams, rho12, theta, rho2s):
    """Multiple-access sum rate at the destination under generalized DPC.

    The first log treats the DPC part and the residual state as noise; the
    second is the Costa-type rate of the DPC part with the state removed.
    """
    _check_box("rho12", rho12, 0.0, 1.0)
    _check_box("theta", theta, 0.0, 1.0)
    _check_box("rho2s", rho2s, -1.0, 0.0)
    return _scalar(
        _lower_term2(
            ch,
            np.asarray(rho12, dtype=float),
            np.asarray(theta, dtype=float),
            np.asarray(rho2s, dtype=float),
        )
    )


def alpha_opt(ch: ChannelParams, theta, rho2s):
    """Inflation factor of the DPC auxiliary ``U2 = X2~ + alpha * S``.

    Reduces to Costa's ``P/(P+N)`` at ``rho2s = 0``. Undefined without state.
    """
    if ch.q == 0:
        raise ValueError("alpha_opt is undefined for q = 0 (no state to precode against)")
    _check_box("theta", theta, 0.0, 1.0)
    _check_box("rho2s", rho2s, -1.0, 0.0)
    theta = np.asarray(theta, dtype=float)
    rho2s = np.asarray(rho2s, dtype=float)
    pe = theta * ch.p2 * (1.0 - rho2s**2)
    r = np.sqrt(theta * ch.p2 / ch.q)
    return _scalar(pe / (pe + ch.n3) * (1.0 + rho2s * r) - rho2s * r)


def lower_bound(ch: ChannelParams, grid: GridSpec = GridSpec()) -> BoundResult:
    """Achievable rate of codeword splitting with generalized DPC at the relay.

    ``max_rho12 min{term1, max_{theta, rho2s} term2}``, inner maximum first.
    """
    res = maximin(
        outer_boxes=[(0.0, 1.0)],
        inner_boxes=[(0.0, 1.0), (-1.0, 0.0)],
        term1=lambda r12: _half_log2(ch.p1 * (1.0 - r12**2) / ch.n2),
        term2=lambda r12, th, r2s: _lower_term2(ch, r12, th, r2s),
        grid=grid,
    )
    rho12, (theta, rho2s) = float(res.outer_argmax[0]), res.inner_argmax.tolist()
    return BoundResult(
        rate=res.value,
        argmax={"rho12p": rho12, "theta": theta, "rho2sp": rho2s},
        evaluations=res.evaluations,
        grid_tolerance=res.tolerance,
        details={"term1": res.term1, "term2": res.term2},
    )


# -- upper bounds ------------------------------------------------------------


def _upper_term1_general(ch: ChannelParams, rho12, rho2s):
    den = 1.0 - rho2s**2
    if np.any((rho12 > 0) & (den <= 0)):
        raise ValueError("rho12 > 0 requires rho2s^2 < 1")
    ratio = np.divide(rho12**2, den, out=np.zeros(np.broadcast(rho12, den).shape), where=den > 0)
    ratio = np.minimum(ratio, 1.0)
    return _half_log2(ch.p1 * (1.0 - ratio) * (1.0 / ch.n2 + 1.0 / ch.n3))


def _upper_term1_degraded(ch: ChannelParams, rho12, rho2s):
    den = 1.0 - rho2s**2
    if np.any((rho12 > 0) & (den <= 0)):
        raise ValueError("rho12 > 0 requires rho2s^2 < 1")
    num = np.maximum(1.0 - rho12**2 - rho2s**2, 0.0)
    # the feasible-set limit as rho2s^2 -> 1 (rho12 = 0) is 1
    ratio = np.divide(num, den, out=np.ones(np.broadcast(num, den).shape), where=den > 0)
    ratio = np.minimum(ratio, 1.0)
    return _half_log2(ch.p1 * ratio / ch.n2)


def _upper_term2(ch: ChannelParams, rho12, rho2s):
    free = np.maximum(1.0 - rho12**2 - rho2s**2, 0.0)
    sp1, sp2, sq = math.sqrt(ch.p1), math.sqrt(ch.p2), math.sqrt(ch.q)
    num = (sp1 + rho12 * sp2) ** 2
    den = ch.p2 * free + (sq + rho2s * sp2) ** 2 + ch.n3
    return _half_log2(num / den) + _half_log2(ch.p2 * free / ch.n3)


def _check_upper(rho12, rho2s):
    _check_box("rho12", rho12, 0.0, 1.0)
    _check_box("rho2s", rho2s, -1.0, 0.0)
    _check_disc(rho12, rho2s)
    return np.asarray(rho12, dtype=float), np.asarray(rho2s, dtype=float)


def upper_term1_general(ch: ChannelParams, rho12, rho2s):
    """Broadcast cut from the source, general model.

    ``rho12^2 / (1 - rho2s^2)`` is taken as 0 when ``rho12 = 0``.
    """
    return _scalar(_upper_term1_general(ch, *_check_upper(rho12, rho2s)))


def upper_term1_degraded(ch: ChannelParams, rho12, rho2s):
    """Source-to-relay cut, physically degraded model.

    At ``rho2s^2 = 1`` (which forces ``rho12 = 0``) the SNR is ``P1/N2``.
    """
    return _scalar(_upper_term1_degraded(ch, *_check_upper(rho12, rho2s)))


def upper_term2(ch: ChannelParams, rho12, rho2s):
    """Multiple-access cut into the destination with the state penalty."""
    return _scalar(_upper_term2(ch, *_check_upper(rho12, rho2s)))


def _disc(r12, r2s):
    return r12**2 + r2s**2 <= 1.0


def upper_bound(ch: ChannelParams, grid: GridSpec = GridSpec()) -> BoundResult:
    """Converse bound; uses the degraded first term when ``ch.degraded``.

    Searched as ``max_rho2s max_rho12`` over the disc so that the ridge where
    the two terms cross is tracked by 1-D refinements.
    """
    first = _upper_term1_degraded if ch.degraded else _upper_term1_general

    def objective(r2s, r12):
        return np.minimum(first(ch, r12, r2s), _upper_term2(ch, r12, r2s))

    res = maximin(
        outer_boxes=[(-1.0, 0.0)],
        inner_boxes=[(0.0, 1.0)],
        term1=None,
        term2=objective,
        feasible=lambda r2s, r12: r12**2 + r2s**2 <= 1.0,
        grid=grid,
    )
    rho2s, rho12 = float(res.outer_argmax[0]), float(res.inner_argmax[0])
    return BoundResult(
        rate=res.value,
        argmax={"rho12": rho12, "rho2s": rho2s},
        evaluations=res.evaluations,
        grid_tolerance=res.tolerance,
        details={
            "term1": float(first(ch, rho12, rho2s)),
            "term2": float(_upper_term2(ch, rho12, rho2s)),
        },
    )


def _equiv_term2(ch: ChannelParams, kappa, rho):
    k2 = kappa**2 * (1.0 - rho**2)
    free = np.maximum(1.0 - k2 - rho**2, 0.0)
    num = ch.p1 + k2 * ch.p2 + 2.0 * kappa * np.sqrt(1.0 - rho**2) * math.sqrt(ch.p1 * ch.p2)
    den = ch.p2 * (1.0 - k2) + ch.q + 2.0 * rho * math.sqrt(ch.p2 * ch.q) + ch.n3
    return _half_log2(ch.p2 * free / ch.n3) + _half_log2(num / den)


def upper_bound_degraded_equiv(ch: ChannelParams, grid: GridSpec = GridSpec()) -> BoundResult:
    """Degraded upper bound in the ``kappa = rho12 / sqrt(1 - rho2s^2)`` form.

    The box ``kappa in [0, 1]``, ``rho in [-1, 0]`` replaces the disc
    constraint, which makes it a plain nested max-min.
    """
    if not ch.degraded:
        raise ValueError("upper_bound_degraded_equiv requires a degraded channel")
    res = maximin(
        outer_boxes=[(0.0, 1.0)],
        inner_boxes=[(-1.0, 0.0)],
        term1=lambda k: _half_log2(ch.p1 * (1.0 - k**2) / ch.n2),
        term2=lambda k, r: _equiv_term2(ch, k, r),
        grid=grid,
    )
    kappa, rho = float(res.outer_argmax[0]), float(res.inner_argmax[0])
    return BoundResult(
        rate=res.value,
        argmax={"kappa": kappa, "rho": rho},
        evaluations=res.evaluations,
        grid_tolerance=res.tolerance,
        details={"term1": res.term1, "term2": res.term2},
    )


# -- reference curves and special cases ---------------------------------------


def _df_search(first, second, grid: GridSpec) -> tuple[float, float, int, float]:
    res = maximize(lambda b: np.minimum(first(b), second(b)), [(0.0, 1.0)], grid=grid)
    return res.value, float(res.argmax[0]), res.evaluations, res.tolerance


def degraded_df_capacity(ch: ChannelParams, grid: GridSpec = GridSpec()) -> BoundResult:
    """Capacity of the state-free degraded relay channel (1-D search over beta)."""
    cross = math.sqrt(ch.p1 * ch.p2)
    value, beta, evals, tol = _df_search(
        lambda b: _half_log2(ch.p1 * (1.0 - b**2) / ch.n2),
        lambda b: _half_log2((ch.p1 + ch.p2 + 2.0 * b * cross) / ch.n3),
        grid,
    )
    return BoundResult(value, {"beta": beta}, evals, tol)


def trivial_upper_bound(ch: ChannelParams, grid: GridSpec = GridSpec()) -> BoundResult:
    """Cut-set bound when every node knows the state.

    The state is then removable everywhere, leaving the state-free bound. The
    general model's first cut combines both receivers.
    """
    cross = math.sqrt(ch.p1 * ch.p2)
    gain = 1.0 / ch.n2 if ch.degraded else 1.0 / ch.n2 + 1.0 / ch.n3
    value, beta, evals, tol = _df_search(
        lambda b: _half_log2(ch.p1 * (1.0 - b**2) * gain),
        lambda b: _half_log2((ch.p1 + ch.p2 + 2.0 * b * cross) / ch.n3),
        grid,
    )
    return BoundResult(value, {"beta": beta}, evals, tol)


def trivial_lower_bound(ch: ChannelParams, grid: GridSpec = GridSpec()) -> BoundResult:
    """Decode-and-forward rate treating the state as extra Gaussian noise."""
    cross = math.sqrt(ch.p1 * ch.p2)
    value, beta, evals, tol = _df_search(
        lambda b: _half_log2(ch.p1 * (1.0 - b**2) / (ch.n2 + ch.q)),
        lambda b: _half_log2((ch.p1 + ch.p2 + 2.0 * b * cross) / (ch.n3 + ch.q)),
        grid,
    )
    return BoundResult(value, {"beta": beta}, evals, tol)


def capacity_condition_threshold(ch: ChannelParams, grid: GridSpec = GridSpec()) -> float:
    """Relay noise level at and above which capacity is ``0.5*log2(1 + P1/N2)``.

    Maximizes over the state correlation ``zeta in [-1, 0]``; ``ch.n2`` is
    not used.
    """
    cross = math.sqrt(ch.p2 * ch.q)

    def f(z):
        inner = ch.p2 + ch.q + ch.n3 + 2.0 * z * cross
        num = ch.p1 * ch.n3 * inner
        den = ch.p1 * ch.n3 + ch.p2 * (1.0 - z**2) * (ch.p1 + inner)
        if ch.p1 == 0:
            return np.zeros_like(z)
        return num / den

    return maximize(f, [(-1.0, 0.0)], grid=grid).value


def interference_free_capacity(ch: ChannelParams) -> float:
    return float(_half_log2(ch.p1 / ch.n2))


def capacity_known(ch: ChannelParams, grid: GridSpec = GridSpec()) -> Optional[float]:
    """Capacity when the relay noise is above the threshold, else None."""
    if ch.n2 >= capacity_condition_threshold(ch, grid):
        return interference_free_capacity(ch)
    return None


def extreme_cases(
    ch: ChannelParams,
    grid: GridSpec = GridSpec(),
    strong_ratio: float = STRONG_STATE_RATIO,
) -> Optional[ExtremeCase]:
    """Capacity in the no-state, silent-relay and overwhelming-state limits.

    ``q >= strong_ratio * max(p1, p2, n2, n3)`` stands in for ``q -> inf``.
    Returns None when no case applies.
    """
    if ch.q == 0:
        return ExtremeCase("no_state", degraded_df_capacity(ch, grid).rate)
    if ch.p2 == 0:
        return ExtremeCase("zero_relay_power", float(_half_log2(ch.p1 / (ch.q + ch.n3))))
    if ch.q >= strong_ratio * max(ch.p1, ch.p2, ch.n2, ch.n3):
        rate = min(float(_half_log2(ch.p1 / ch.n2)), float(_half_log2(ch.p2 / ch.n3)))
        return ExtremeCase("strong_state", rate)
    return None
