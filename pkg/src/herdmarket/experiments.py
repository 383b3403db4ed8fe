"""Single runs, ensembles over parameter grids, and scripted-news scenarios."""

from __future__ import annotations

import csv
import itertools
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .analytics import RunStatistics, extremal_runs, run_statistics
from .news import NewsSpec, ScriptedEntry
from .params import ConfigError, ModelParams
from .simulation import Simulation, TimeSeries

log = logging.getLogger(__name__)

SWEEPABLE = ("c1_max", "c2_max", "alpha")
WORKERS_ENV = "HERDMARKET_WORKERS"


def run_single(
    params: ModelParams,
    news: Optional[NewsSpec] = None,
    acf_max_lag: int = 100,
    **histogram_edges,
) -> tuple[TimeSeries, RunStatistics]:
    sim = Simulation(params, news)
    ts = sim.run()
    return ts, run_statistics(ts.after(params.burn_in), acf_max_lag, **histogram_edges)


# -- ensembles -----------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    base: ModelParams
    axis1: tuple[str, tuple[float, ...]]
    axis2: Optional[tuple[str, tuple[float, ...]]] = None
    n_realizations: int = 20
    seed_base: int = 0

    def __post_init__(self):
        axes = [self.axis1] + ([self.axis2] if self.axis2 is not None else [])
        for name, values in axes:
            if name not in SWEEPABLE:
                raise ConfigError("sweep.axis", f"parameter {name!r} is not one of {SWEEPABLE}")
            if len(values) == 0:
                raise ConfigError("sweep.axis", f"axis {name!r} has no values")
        if self.axis2 is not None and self.axis2[0] == self.axis1[0]:
            raise ConfigError("sweep.axis2", "must differ from axis1")
        object.__setattr__(self, "axis1", (self.axis1[0], tuple(float(v) for v in self.axis1[1])))
        if self.axis2 is not None:
            object.__setattr__(self, "axis2", (self.axis2[0], tuple(float(v) for v in self.axis2[1])))
        if isinstance(self.n_realizations, bool) or not isinstance(self.n_realizations, int) or self.n_realizations < 1:
            raise ConfigError("sweep.n_realizations", "must be a positive integer")
        if not isinstance(self.seed_base, int) or self.seed_base < 0:
            raise ConfigError("sweep.seed_base", "must be a nonnegative integer")

    def grid(self) -> list[dict[str, float]]:
        """Parameter overrides for each grid point, axis1 varying slowest."""
        if self.axis2 is None:
            return [{self.axis1[0]: v} for v in self.axis1[1]]
        return [
            {self.axis1[0]: a, self.axis2[0]: b}
            for a, b in itertools.product(self.axis1[1], self.axis2[1])
        ]

    def params_for(self, point: int, realization: int) -> ModelParams:
        return self.base.with_(**self.grid()[point], seed=self.seed_base + realization)


@dataclass(frozen=True)
class RealizationResult:
    point: int
    realization: int
    seed: int
    max_mean_k: float
    max_drawdown: float
    max_drawup: float
    ok: bool = True
    error: str = ""
    mean_k: Optional[np.ndarray] = field(default=None, compare=False)


@dataclass(frozen=True)
class PointSummary:
    overrides: dict
    n_realizations: int
    complete: bool
    mean_max_mean_k: float
    std_max_mean_k: float
    mean_max_drawdown: float
    std_max_drawdown: float
    mean_max_drawup: float
    std_max_drawup: float


@dataclass(frozen=True)
class SweepResult:
    axis1: str
    axis2: Optional[str]
    points: tuple[PointSummary, ...]
    n_realizations: int

    def curve(self, quantity: str = "mean_max_mean_k", **fixed) -> list[tuple[float, float]]:
        """(axis1 value, quantity) pairs, optionally at fixed axis2 value."""
        out = []
        for p in self.points:
            if all(p.overrides.get(k) == v for k, v in fixed.items()):
                out.append((p.overrides[self.axis1], getattr(p, quantity)))
        return out

    def point(self, **overrides) -> PointSummary:
        for p in self.points:
            if all(p.overrides.get(k) == v for k, v in overrides.items()):
                return p
        raise KeyError(overrides)


def summarize_realization(ts: TimeSeries, burn_in: int) -> tuple[float, float, float]:
    ts = ts.after(burn_in)
    dd, du = extremal_runs(ts.returns)
    return float(ts.mean_k.max()), dd, du


def _run_job(spec: SweepSpec, point: int, realization: int, keep_mean_k: bool) -> RealizationResult:
    params = spec.params_for(point, realization)
    ts = Simulation(params).run()
    mk, dd, du = summarize_realization(ts, params.burn_in)
    trace = ts.after(params.burn_in).mean_k.copy() if keep_mean_k else None
    return RealizationResult(point, realization, params.seed, mk, dd, du, mean_k=trace)


def _attempt(spec, point, realization, keep_mean_k) -> RealizationResult:
    """Run one job, retrying once before recording a failure."""
    last = ""
    for _ in range(2):
        try:
            return _run_job(spec, point, realization, keep_mean_k)
        except Exception as exc:  # noqa: BLE001 - one bad realization must not poison the sweep
            last = f"{type(exc).__name__}: {exc}"
            log.warning("realization %d at point %d failed: %s", realization, point, last)
    nan = float("nan")
    return RealizationResult(point, realization, spec.seed_base + realization, nan, nan, nan, ok=False, error=last)


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(WORKERS_ENV, f"must be a positive integer, got {env!r}") from None
        if n < 1:
            raise ConfigError(WORKERS_ENV, f"must be a positive integer, got {env!r}")
        return n
    return os.cpu_count() or 1


REALIZATION_COLUMNS = ("point", "realization", "seed", "max_mean_k", "max_drawdown", "max_drawup", "ok", "error")


def _fmt(x: float) -> str:
    return format(x, ".17g")


class RealizationLog:
    """Append-only CSV of completed realizations, one row each."""

    def __init__(self, path: Path):
        self.path = Path(path)

    def read(self) -> list[RealizationResult]:
        if not self.path.exists():
            return []
        with self.path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        return [
            RealizationResult(
                point=int(r["point"]),
                realization=int(r["realization"]),
                seed=int(r["seed"]),
                max_mean_k=float(r["max_mean_k"]),
                max_drawdown=float(r["max_drawdown"]),
                max_drawup=float(r["max_drawup"]),
                ok=r["ok"] == "1",
                error=r["error"],
            )
            for r in rows
        ]

    def append(self, res: RealizationResult) -> None:
        new = not self.path.exists()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if new:
                w.writerow(REALIZATION_COLUMNS)
            w.writerow(
                [res.point, res.realization, res.seed, _fmt(res.max_mean_k), _fmt(res.max_drawdown),
                 _fmt(res.max_drawup), int(res.ok), res.error]
            )
            fh.flush()


def run_ensemble(
    spec: SweepSpec,
    results_path: Optional[Path] = None,
    workers: Optional[int] = None,
    order: Optional[Sequence[tuple[int, int]]] = None,
    keep_mean_k: bool = False,
    on_result: Optional[Callable[[RealizationResult], None]] = None,
) -> SweepResult:
    """Run every (grid point, realization) job and aggregate.

    With ``results_path`` each finished realization is appended to a CSV and
    jobs already recorded there as successful are skipped, so an interrupted
    sweep resumes where it stopped. ``order`` permutes job execution (the
    result does not depend on it).
    """
    n_points = len(spec.grid())
    jobs = order if order is not None else [
        (p, r) for p in range(n_points) for r in range(spec.n_realizations)
    ]
    logbook = RealizationLog(results_path) if results_path is not None else None
    done: dict[tuple[int, int], RealizationResult] = {}
    if logbook is not None:
        for res in logbook.read():
            if res.ok and res.point < n_points and res.realization < spec.n_realizations:
                done[(res.point, res.realization)] = res
    pending = [j for j in jobs if j not in done]
    if keep_mean_k and done:
        # cached rows carry no traces; recompute those to honor keep_mean_k
        pending = list(jobs)
        done = {}

    def record(res: RealizationResult):
        done[(res.point, res.realization)] = res
        if logbook is not None:
            logbook.append(res)
        if on_result is not None:
            on_result(res)

    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(pending) <= 1:
        for p, r in pending:
            record(_attempt(spec, p, r, keep_mean_k))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_attempt, spec, p, r, keep_mean_k) for p, r in pending]
            for fut in as_completed(futures):
                record(fut.result())

    return aggregate(spec, done.values())


def aggregate(spec: SweepSpec, results) -> SweepResult:
    """Fold realization results into per-point summaries; order-independent."""
    by_point: dict[int, list[RealizationResult]] = {}
    for res in results:
        by_point.setdefault(res.point, []).append(res)
    points = []
    for idx, overrides in enumerate(spec.grid()):
        rows = sorted(by_point.get(idx, []), key=lambda r: r.realization)
        good = [r for r in rows if r.ok]
        complete = len(good) == spec.n_realizations
        stats = []
        for name in ("max_mean_k", "max_drawdown", "max_drawup"):
            vals = np.array([getattr(r, name) for r in good], dtype=float)
            if vals.size == 0:
                stats += [math.nan, math.nan]
            else:
                stats += [float(vals.mean()), float(vals.std(ddof=1)) if vals.size > 1 else 0.0]
        points.append(PointSummary(dict(overrides), len(good), complete, *stats))
    return SweepResult(
        axis1=spec.axis1[0],
        axis2=spec.axis2[0] if spec.axis2 else None,
        points=tuple(points),
        n_realizations=spec.n_realizations,
    )


# -- transition location ---------------------------------------------------------


@dataclass(frozen=True)
class Transition:
    c1_star: float
    width: float
    found: bool = True
    note: str = ""


def _crossing(x: np.ndarray, y: np.ndarray, level: float) -> Optional[float]:
    """First upward crossing of ``level``, linearly interpolated."""
    for i in range(len(x) - 1):
        if y[i] < level <= y[i + 1]:
            return float(x[i] + (level - y[i]) * (x[i + 1] - x[i]) / (y[i + 1] - y[i]))
        if y[i] == level and (i == 0 or y[i - 1] < level):
            return float(x[i])
    return None


def detect_transition(curve: Sequence[tuple[float, float]]) -> Transition:
    """Locate the jump of an order parameter along C1.

    The low and high plateaus are the means of the two lowest-C1 and two
    highest-C1 points; the transition is where the curve first crosses the
    midpoint, and its width is the distance between the 25% and 75% crossings.
    """
    pts = sorted(curve)
    if len(pts) < 4:
        return Transition(math.nan, math.nan, False, "need at least 4 points")
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts], dtype=float)
    low = y[:2].mean()
    high = y[-2:].mean()
    if not high > low:
        return Transition(math.nan, math.nan, False, "no transition in range")
    mid = _crossing(x, y, low + 0.5 * (high - low))
    q1 = _crossing(x, y, low + 0.25 * (high - low))
    q3 = _crossing(x, y, low + 0.75 * (high - low))
    if mid is None or q1 is None or q3 is None:
        return Transition(math.nan, math.nan, False, "no transition in range")
    return Transition(mid, q3 - q1)


# -- scripted-news scenarios ---------------------------------------------------


@dataclass(frozen=True)
class StreakDiagnostics:
    streak_start: int
    streak_end: int
    responded: bool
    peak_step: int
    peak_abs_u: float
    baseline_abs_u: float
    efold_time: float
    fit_window: int
    price_excursion: float
    excursion_persistence: int


def scenario_streak(
    params: ModelParams,
    streak: ScriptedEntry,
    horizon: int = 200,
    fit_window: Optional[int] = None,
) -> tuple[TimeSeries, StreakDiagnostics]:
    """Inject a run of same-signed news and measure the response of u and the price.

    The streak counts as a response when |u| right after it exceeds every
    |u| in the preceding memory window. The |u| peak is searched from the
    streak start to one memory time after its end; the e-folding time comes
    from a least-squares line through log|u| over ``fit_window`` steps after
    the peak (default: two memory times). Price excursion and its persistence
    are measured over ``horizon`` steps after the streak.
    """
    start, end = streak.start_step, streak.end_step
    n_steps = max(params.n_steps, end + horizon)
    memory = 1.0 / abs(math.log(params.alpha))
    if fit_window is None:
        fit_window = int(round(2 * memory))
    ts = Simulation(params.with_(n_steps=n_steps), NewsSpec((streak,))).run()

    t = ts.t.astype(int)
    abs_u = np.abs(ts.u)
    # u(start) still reflects pre-streak news; u(end+1) is the first value built on the whole streak
    pre = (t >= start - int(round(memory))) & (t <= start)
    baseline = float(abs_u[pre].max()) if pre.any() else 0.0
    after_i = np.flatnonzero(t == end + 1)
    responded = bool(after_i.size) and abs_u[after_i[0]] > baseline
    search = np.flatnonzero((t >= start) & (t <= end + int(round(memory))))
    peak_i = int(search[np.argmax(abs_u[search])])
    peak_abs = float(abs_u[peak_i])
    w_idx = np.flatnonzero((t >= start) & (t <= end + horizon))

    efold = math.nan
    if responded:
        seg = abs_u[peak_i : peak_i + fit_window + 1]
        seg_t = t[peak_i : peak_i + fit_window + 1]
        keep = seg > 0
        if keep.sum() >= 3:
            slope = np.polyfit(seg_t[keep], np.log(seg[keep]), 1)[0]
            efold = -1.0 / slope if slope < 0 else math.inf

    # price excursion relative to the last pre-streak price
    ref_i = np.flatnonzero(t == start - 1)
    ref = ts.log_price[ref_i[0]] if ref_i.size else math.log(params.initial_price)
    dev = np.abs(ts.log_price[w_idx] - ref)
    excursion = float(dev.max())
    above = w_idx[dev >= 0.5 * excursion] if excursion > 0 else np.array([], int)
    persistence = int(t[above[-1]] - end) if above.size else 0

    diag = StreakDiagnostics(
        streak_start=start,
        streak_end=end,
        responded=bool(responded),
        peak_step=int(t[peak_i]),
        peak_abs_u=peak_abs,
        baseline_abs_u=baseline,
        efold_time=efold,
        fit_window=fit_window,
        price_excursion=excursion,
        excursion_persistence=max(persistence, 0),
    )
    return ts, diag
