"""Run configuration files and CSV output.

Config files are JSON objects; every section and field is optional and
unknown keys are rejected::

    {
      "model": {"n_agents": 2500, "c1_max": 1.0, "lambda": 0.25, ...},
      "news": {"kind": "scripted", "entries": [{"start_step": 800, "values": [-1.0, -1.0]}]},
      "output_dir": "out",
      "emit": {"timeseries": true, "stats": true},
      "histogram": {"return_edges": [...], "mean_k_edges": [...]},
      "acf_max_lag": 100,
      "sweep": {"axis1": {"name": "c1_max", "values": [0, 1, 2]}, "n_realizations": 20, "seed_base": 0},
      "scenario": {"horizon": 200}
    }
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .analytics import DEFAULT_MEAN_K_EDGES, DEFAULT_RETURN_EDGES, Histogram, RunStatistics
from .experiments import PointSummary, SweepResult, SweepSpec
from .news import NewsSpec, ScriptedEntry
from .params import PARAM_NAMES, ConfigError, ModelParams
from .simulation import TimeSeries

TIMESERIES_HEADER = ("t", "price", "log_price", "return", "news", "u", "mean_k", "activity", "total_cash", "total_stocks")

# JSON key -> ModelParams field
_MODEL_KEYS = {("lambda" if n == "lambda_" else n): n for n in PARAM_NAMES}
_TOP_KEYS = {"model", "news", "output_dir", "emit", "histogram", "acf_max_lag", "sweep", "scenario"}


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams = field(default_factory=ModelParams)
    news: NewsSpec = field(default_factory=NewsSpec)
    output_dir: str = "out"
    emit_timeseries: bool = True
    emit_stats: bool = True
    return_edges: tuple[float, ...] = DEFAULT_RETURN_EDGES
    mean_k_edges: tuple[float, ...] = DEFAULT_MEAN_K_EDGES
    acf_max_lag: int = 100
    sweep: Optional[SweepSpec] = None
    scenario_horizon: int = 200

    def histogram_edges(self) -> dict:
        return {"return_edges": self.return_edges, "mean_k_edges": self.mean_k_edges}


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(where, "must be a JSON object")
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}.{unknown[0]}" if where else unknown[0], "unknown field")


def _edges(value, name):
    if not isinstance(value, list) or len(value) < 2:
        raise ConfigError(name, "must be a list of at least two numbers")
    try:
        out = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(name, "must contain only numbers") from None
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError(name, "must be strictly increasing")
    return out


def parse_config(obj: dict) -> RunConfig:
    _check_keys(obj, _TOP_KEYS, "")
    model = obj.get("model", {})
    _check_keys(model, _MODEL_KEYS, "model")
    try:
        params = ModelParams(**{_MODEL_KEYS[k]: v for k, v in model.items()})
    except ConfigError as exc:
        key = "lambda" if exc.field == "lambda_" else exc.field
        raise ConfigError(f"model.{key}", str(exc).split(": ", 1)[-1]) from None
    except TypeError as exc:
        raise ConfigError("model", str(exc)) from None

    news = obj.get("news", {"kind": "gaussian"})
    _check_keys(news, {"kind", "entries"}, "news")
    kind = news.get("kind", "gaussian")
    if kind == "gaussian":
        if news.get("entries"):
            raise ConfigError("news.entries", "only allowed for kind 'scripted'")
        news_spec = NewsSpec()
    elif kind == "scripted":
        entries = news.get("entries")
        if not isinstance(entries, list) or not entries:
            raise ConfigError("news.entries", "scripted news needs a nonempty list of entries")
        parsed = []
        for i, e in enumerate(entries):
            _check_keys(e, {"start_step", "values"}, f"news.entries[{i}]")
            start, values = e.get("start_step"), e.get("values")
            if isinstance(start, bool) or not isinstance(start, int) or start < 1:
                raise ConfigError(f"news.entries[{i}].start_step", "must be an integer >= 1")
            if not isinstance(values, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in values
            ):
                raise ConfigError(f"news.entries[{i}].values", "must be a list of finite numbers")
            parsed.append(ScriptedEntry(start, tuple(values)))
        news_spec = NewsSpec(tuple(parsed))
    else:
        raise ConfigError("news.kind", f"must be 'gaussian' or 'scripted', got {kind!r}")

    output_dir = obj.get("output_dir", "out")
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigError("output_dir", "must be a nonempty string")

    emit = obj.get("emit", {})
    _check_keys(emit, {"timeseries", "stats"}, "emit")
    for k, v in emit.items():
        if not isinstance(v, bool):
            raise ConfigError(f"emit.{k}", "must be true or false")

    hist = obj.get("histogram", {})
    _check_keys(hist, {"return_edges", "mean_k_edges"}, "histogram")
    return_edges = _edges(hist["return_edges"], "histogram.return_edges") if "return_edges" in hist else DEFAULT_RETURN_EDGES
    mean_k_edges = _edges(hist["mean_k_edges"], "histogram.mean_k_edges") if "mean_k_edges" in hist else DEFAULT_MEAN_K_EDGES

    lag = obj.get("acf_max_lag", 100)
    if isinstance(lag, bool) or not isinstance(lag, int) or lag < 0:
        raise ConfigError("acf_max_lag", "must be a nonnegative integer")

    sweep = None
    if "sweep" in obj:
        sweep = _parse_sweep(obj["sweep"], params)

    scenario = obj.get("scenario", {})
    _check_keys(scenario, {"horizon"}, "scenario")
    horizon = scenario.get("horizon", 200)
    if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
        raise ConfigError("scenario.horizon", "must be a positive integer")

    return RunConfig(
        params=params,
        news=news_spec,
        output_dir=output_dir,
        emit_timeseries=emit.get("timeseries", True),
        emit_stats=emit.get("stats", True),
        return_edges=return_edges,
        mean_k_edges=mean_k_edges,
        acf_max_lag=lag,
        sweep=sweep,
        scenario_horizon=horizon,
    )


def _parse_axis(obj, where):
    _check_keys(obj, {"name", "values"}, where)
    name, values = obj.get("name"), obj.get("values")
    if not isinstance(values, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        raise ConfigError(f"{where}.values", "must be a list of numbers")
    return (name, tuple(float(v) for v in values))


def _parse_sweep(obj, base: ModelParams) -> SweepSpec:
    _check_keys(obj, {"axis1", "axis2", "n_realizations", "seed_base"}, "sweep")
    if "axis1" not in obj:
        raise ConfigError("sweep.axis1", "required")
    axis1 = _parse_axis(obj["axis1"], "sweep.axis1")
    axis2 = _parse_axis(obj["axis2"], "sweep.axis2") if obj.get("axis2") is not None else None
    spec = SweepSpec(
        base=base,
        axis1=axis1,
        axis2=axis2,
        n_realizations=obj.get("n_realizations", 20),
        seed_base=obj.get("seed_base", base.seed),
    )
    # every grid point must itself be a valid model
    for point in spec.grid():
        try:
            base.with_(**point)
        except ConfigError as exc:
            raise ConfigError(f"sweep.{exc.field}", str(exc).split(": ", 1)[-1]) from None
    return spec


def config_to_dict(cfg: RunConfig) -> dict:
    model = {}
    for k, name in _MODEL_KEYS.items():
        model[k] = cfg.params.to_dict()[name]
    if cfg.news.scripted:
        news = {
            "kind": "scripted",
            "entries": [{"start_step": e.start_step, "values": list(e.values)} for e in cfg.news.scripted],
        }
    else:
        news = {"kind": "gaussian"}
    out = {
        "model": model,
        "news": news,
        "output_dir": cfg.output_dir,
        "emit": {"timeseries": cfg.emit_timeseries, "stats": cfg.emit_stats},
        "histogram": {"return_edges": list(cfg.return_edges), "mean_k_edges": list(cfg.mean_k_edges)},
        "acf_max_lag": cfg.acf_max_lag,
        "scenario": {"horizon": cfg.scenario_horizon},
    }
    if cfg.sweep is not None:
        s = cfg.sweep
        out["sweep"] = {
            "axis1": {"name": s.axis1[0], "values": list(s.axis1[1])},
            "axis2": {"name": s.axis2[0], "values": list(s.axis2[1])} if s.axis2 else None,
            "n_realizations": s.n_realizations,
            "seed_base": s.seed_base,
        }
    return out


def dumps_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2) + "\n"


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON: {exc}") from None
    return parse_config(obj)


# -- CSV output ----------------------------------------------------------------


def _fmt(x) -> str:
    return format(float(x), ".17g")


def atomic_write(path, text: str) -> Path:
    """Write ``text`` to a temporary sibling and rename it over ``path``."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OSError(f"writing {path}: {exc}") from exc
    return path


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(r) for r in rows]
    return "\n".join(lines) + "\n"


def emit_timeseries(ts: TimeSeries, path) -> Path:
    rows = ([str(int(row[0]))] + [_fmt(v) for v in row[1:]] for row in ts.data)
    return atomic_write(path, _csv_text(TIMESERIES_HEADER, rows))


def read_timeseries(path) -> TimeSeries:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(header) != TIMESERIES_HEADER:
                raise ValueError(f"{path}: unexpected header {header}")
            data = [[float(v) for v in row] for row in reader]
    except OSError as exc:
        raise OSError(f"reading {path}: {exc}") from exc
    return TimeSeries(np.asarray(data, dtype=float).reshape(-1, len(TIMESERIES_HEADER)))


STATS_HEADER = ("statistic", "index", "value")


def emit_stats(stats: RunStatistics, path) -> Path:
    rows = []
    for name, value in stats.summary().items():
        rows.append((name, "0", _fmt(value)))
    for name, seq in (("return_acf", stats.return_acf), ("vol_acf", stats.vol_acf)):
        rows += [(name, str(i), _fmt(v)) for i, v in enumerate(seq)]
    for name, h in (("return_histogram", stats.return_histogram), ("mean_k_histogram", stats.mean_k_histogram)):
        rows += [(f"{name}_edge", str(i), _fmt(v)) for i, v in enumerate(h.edges)]
        rows += [(f"{name}_mass", str(i), _fmt(v)) for i, v in enumerate(h.mass)]
        rows.append((f"{name}_underflow", "0", _fmt(h.underflow)))
        rows.append((f"{name}_overflow", "0", _fmt(h.overflow)))
    return atomic_write(path, _csv_text(STATS_HEADER, rows))


def read_stats(path) -> RunStatistics:
    table: dict[str, dict[int, float]] = {}
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            table.setdefault(row["statistic"], {})[int(row["index"])] = float(row["value"])

    def seq(name):
        d = table.get(name, {})
        return np.array([d[i] for i in sorted(d)])

    def hist(name):
        return Histogram(
            edges=seq(f"{name}_edge"),
            mass=seq(f"{name}_mass"),
            underflow=table[f"{name}_underflow"][0],
            overflow=table[f"{name}_overflow"][0],
        )

    return RunStatistics(
        max_mean_k=table["max_mean_k"][0],
        max_drawdown=table["max_drawdown"][0],
        max_drawup=table["max_drawup"][0],
        kurtosis=table["kurtosis"][0],
        return_acf=seq("return_acf"),
        vol_acf=seq("vol_acf"),
        return_histogram=hist("return_histogram"),
        mean_k_histogram=hist("mean_k_histogram"),
        n_samples=int(table["n_samples"][0]),
    )


SWEEP_HEADER = (
    "axis1", "axis1_value", "axis2", "axis2_value", "n_target", "n_realizations", "complete",
    "mean_max_mean_k", "std_max_mean_k", "mean_max_drawdown", "std_max_drawdown",
    "mean_max_drawup", "std_max_drawup",
)


def emit_sweep(result: SweepResult, path) -> Path:
    rows = []
    for p in result.points:
        a2 = result.axis2 or ""
        rows.append((
            result.axis1, _fmt(p.overrides[result.axis1]),
            a2, _fmt(p.overrides[a2]) if a2 else "",
            str(result.n_realizations), str(p.n_realizations), "1" if p.complete else "0",
            _fmt(p.mean_max_mean_k), _fmt(p.std_max_mean_k),
            _fmt(p.mean_max_drawdown), _fmt(p.std_max_drawdown),
            _fmt(p.mean_max_drawup), _fmt(p.std_max_drawup),
        ))
    return atomic_write(path, _csv_text(SWEEP_HEADER, rows))


def read_sweep(path) -> SweepResult:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: sweep file has no rows")
    axis1 = rows[0]["axis1"]
    axis2 = rows[0]["axis2"] or None
    points = []
    for r in rows:
        overrides = {axis1: float(r["axis1_value"])}
        if axis2:
            overrides[axis2] = float(r["axis2_value"])
        points.append(PointSummary(
            overrides=overrides,
            n_realizations=int(r["n_realizations"]),
            complete=r["complete"] == "1",
            mean_max_mean_k=float(r["mean_max_mean_k"]),
            std_max_mean_k=float(r["std_max_mean_k"]),
            mean_max_drawdown=float(r["mean_max_drawdown"]),
            std_max_drawdown=float(r["std_max_drawdown"]),
            mean_max_drawup=float(r["mean_max_drawup"]),
            std_max_drawup=float(r["std_max_drawup"]),
        ))
    return SweepResult(axis1=axis1, axis2=axis2, points=tuple(points), n_realizations=int(rows[0]["n_target"]))
