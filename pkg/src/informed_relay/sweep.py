"""Rate curves versus one channel parameter, written as CSV or SVG."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import gaussian as g
from .optimize import BoundResult, GridSpec

BOUND_ORDER = ("lower", "upper", "upper_equiv", "trivial_lower", "trivial_upper")
ARGMAX_COLUMNS = ("theta", "rho12p", "rho2sp")
AXES = ("snr", "p1", "p2", "q", "n2", "n3")

BOUND_FUNCS: dict[str, Callable[[g.ChannelParams, GridSpec], BoundResult]] = {
    "lower": g.lower_bound,
    "upper": g.upper_bound,
    "upper_equiv": g.upper_bound_degraded_equiv,
    "trivial_lower": g.trivial_lower_bound,
    "trivial_upper": g.trivial_upper_bound,
}


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def fmt(x: float) -> str:
    return f"{x:.12g}"


@dataclass(frozen=True)
class SweepSpec:
    """One swept axis over ``[lo_db, hi_db]`` with the other constants fixed.

    Fixed values are linear. ``axis="snr"`` varies ``n2`` so that
    ``P1/N2`` takes the axis value; any other axis name sets that parameter
    directly from its dB value. ``bounds=None`` selects every bound that
    applies to the model.
    """

    p1: float = 10.0
    p2: float = 10.0
    q: float = 10.0
    n2: float = 10.0
    n3: float = 10.0
    degraded: bool = False
    axis: str = "snr"
    lo_db: float = -10.0
    hi_db: float = 30.0
    points: int = 50
    bounds: Optional[tuple[str, ...]] = None
    emit: str = "csv"

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not self.lo_db < self.hi_db:
            raise ValueError(f"need lo_db < hi_db, got {self.lo_db} and {self.hi_db}")
        if self.points < 2:
            raise ValueError(f"points must be at least 2, got {self.points}")
        if self.bounds is None:
            object.__setattr__(self, "bounds", tuple(b for b in BOUND_ORDER if self.degraded or b != "upper_equiv"))
        unknown = [b for b in self.bounds if b not in BOUND_ORDER]
        if unknown or not self.bounds:
            raise ValueError(f"bounds must be a non-empty subset of {BOUND_ORDER}, got {self.bounds}")
        if "upper_equiv" in self.bounds and not self.degraded:
            raise ValueError("upper_equiv is defined for the degraded model only")
        if self.emit not in ("csv", "svg", "both"):
            raise ValueError(f"emit must be csv, svg or both, got {self.emit!r}")
        # canonical column order whatever order the caller listed them in
        object.__setattr__(self, "bounds", tuple(b for b in BOUND_ORDER if b in self.bounds))

    @property
    def axis_column(self) -> str:
        return f"{self.axis}_dB"

    def axis_values(self) -> np.ndarray:
        return np.linspace(self.lo_db, self.hi_db, self.points)

    def channel_at(self, x_db: float) -> g.ChannelParams:
        vals = {"p1": self.p1, "p2": self.p2, "q": self.q, "n2": self.n2, "n3": self.n3}
        if self.axis == "snr":
            vals["n2"] = self.p1 / db_to_linear(x_db)
        else:
            vals[self.axis] = db_to_linear(x_db)
        return g.ChannelParams(**vals, degraded=self.degraded)

    def columns(self) -> list[str]:
        cols = [self.axis_column, *self.bounds]
        if "lower" in self.bounds:
            cols += ARGMAX_COLUMNS
        return cols


@dataclass
class SweepRow:
    x_db: float
    rates: dict[str, float]
    lower_argmax: Optional[dict[str, float]] = None
    tolerances: dict[str, float] = field(default_factory=dict)

    def values(self, spec: SweepSpec) -> list[float]:
        out = [self.x_db] + [self.rates[b] for b in spec.bounds]
        if self.lower_argmax is not None:
            out += [self.lower_argmax[c] for c in ARGMAX_COLUMNS]
        return out


def compute_row(spec: SweepSpec, x_db: float, grid: GridSpec) -> SweepRow:
    ch = spec.channel_at(x_db)
    rates, tols, argmax = {}, {}, None
    for name in spec.bounds:
        res = BOUND_FUNCS[name](ch, grid)
        rates[name], tols[name] = res.rate, res.grid_tolerance
        if name == "lower":
            argmax = dict(res.argmax)
    return SweepRow(float(x_db), rates, argmax, tols)


def run_sweep(spec: SweepSpec, grid: GridSpec = GridSpec(), workers: int = 1) -> list[SweepRow]:
    """Evaluate every axis point; rows come back in axis order."""
    xs = [float(x) for x in spec.axis_values()]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(compute_row, [spec] * len(xs), xs, [grid] * len(xs)))
    return [compute_row(spec, x, grid) for x in xs]


def threshold_point(spec: SweepSpec, grid: GridSpec = GridSpec()) -> Optional[tuple[float, float]]:
    """SNR (dB) and rate where the interference-free capacity starts to hold.

    Only meaningful on the degraded SNR sweep; None elsewhere.
    """
    if spec.axis != "snr" or not spec.degraded or spec.p1 == 0:
        return None
    thr = g.capacity_condition_threshold(spec.channel_at(spec.lo_db), grid)
    if thr <= 0:
        return None
    return linear_to_db(spec.p1 / thr), 0.5 * math.log2(1.0 + spec.p1 / thr)


def to_csv(spec: SweepSpec, rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(spec.columns())
    for r in rows:
        w.writerow([fmt(v) for v in r.values(spec)])
    return buf.getvalue()


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader]
    return header, np.array(data, dtype=float).reshape(len(data), len(header))


# -- SVG -------------------------------------------------------------------------

_W, _H = 800, 600
_LEFT, _RIGHT, _TOP, _BOTTOM = 80, 190, 40, 70
_COLORS = {
    "lower": "#1f77b4",
    "upper": "#d62728",
    "upper_equiv": "#ff7f0e",
    "trivial_lower": "#2ca02c",
    "trivial_upper": "#9467bd",
}
_DASH = {"upper_equiv": "6,4", "trivial_lower": "2,3", "trivial_upper": "2,3"}


def _nice_ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    span = hi - lo if hi > lo else 1.0
    raw = span / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * span:
        ticks.append(round(t, 10))
        t += step
    return ticks


def _star(cx: float, cy: float, r: float) -> str:
    pts = []
    for i in range(10):
        rad = r if i % 2 == 0 else r * 0.4
        a = -math.pi / 2 + i * math.pi / 5
        pts.append(f"{cx + rad * math.cos(a):.2f},{cy + rad * math.sin(a):.2f}")
    return " ".join(pts)


def to_svg(spec: SweepSpec, rows: Sequence[SweepRow], marker: Optional[tuple[float, float]] = None) -> str:
    """Line chart with one polyline per bound and an optional star marker."""
    xs = [r.x_db for r in rows]
    ys = [r.rates[b] for r in rows for b in spec.bounds]
    if marker is not None:
        ys.append(marker[1])
    x0, x1 = spec.lo_db, spec.hi_db
    y0, y1 = 0.0, max(ys) * 1.05 if ys and max(ys) > 0 else 1.0
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM

    def sx(x: float) -> float:
        return _LEFT + (x - x0) / (x1 - x0) * pw

    def sy(y: float) -> float:
        return _TOP + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_W} {_H}" width="{_W}" height="{_H}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_LEFT}" y="{_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _nice_ticks(x0, x1):
        out.append(f'<line x1="{sx(t):.2f}" y1="{_TOP + ph}" x2="{sx(t):.2f}" y2="{_TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{sx(t):.2f}" y="{_TOP + ph + 20}" text-anchor="middle">{t:g}</text>')
    for t in _nice_ticks(y0, y1):
        out.append(f'<line x1="{_LEFT - 5}" y1="{sy(t):.2f}" x2="{_LEFT}" y2="{sy(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{_LEFT - 8}" y="{sy(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    xlabel = "SNR P1/N2 [dB]" if spec.axis == "snr" else f"{spec.axis.upper()} [dB]"
    out.append(f'<text x="{_LEFT + pw / 2:.1f}" y="{_H - 20}" text-anchor="middle">{xlabel}</text>')
    out.append(
        f'<text x="20" y="{_TOP + ph / 2:.1f}" text-anchor="middle" transform="rotate(-90 20 {_TOP + ph / 2:.1f})">rate [bits/channel use]</text>'
    )
    for i, b in enumerate(spec.bounds):
        pts = " ".join(f"{sx(x):.2f},{sy(r.rates[b]):.2f}" for x, r in zip(xs, rows))
        dash = f' stroke-dasharray="{_DASH[b]}"' if b in _DASH else ""
        out.append(f'<polyline class="bound" data-bound="{b}" fill="none" stroke="{_COLORS[b]}" stroke-width="2"{dash} points="{pts}"/>')
        ly = _TOP + 20 + 22 * i
        lx = _W - _RIGHT + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 30}" y2="{ly}" stroke="{_COLORS[b]}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 38}" y="{ly + 4}">{b}</text>')
    if marker is not None and x0 <= marker[0] <= x1:
        out.append(f'<polygon class="threshold" points="{_star(sx(marker[0]), sy(marker[1]), 9)}" fill="black"/>')
        ly = _TOP + 20 + 22 * len(spec.bounds)
        lx = _W - _RIGHT + 15
        out.append(f'<polygon points="{_star(lx + 15, ly, 7)}" fill="black"/>')
        out.append(f'<text x="{lx + 38}" y="{ly + 4}">capacity threshold</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_outputs(spec: SweepSpec, rows: Sequence[SweepRow], out: str | Path, grid: GridSpec = GridSpec()) -> list[Path]:
    """Write CSV and/or SVG next to ``out`` (suffix replaced per format)."""
    out = Path(out)
    written = []
    if spec.emit in ("csv", "both"):
        path = out.with_suffix(".csv")
        path.write_text(to_csv(spec, rows))
        written.append(path)
    if spec.emit in ("svg", "both"):
        path = out.with_suffix(".svg")
        path.write_text(to_svg(spec, rows, threshold_point(spec, grid)))
        written.append(path)
    return written
