import json
import math

import numpy as np
import pytest

from herdmarket import ModelParams, Simulation, TimeSeries, io
from herdmarket.analytics import run_statistics
from herdmarket.cli import main
from herdmarket.experiments import SweepSpec, run_ensemble
from herdmarket.params import ConfigError


class TestConfig:
    def test_empty_gives_baseline(self):
        cfg = io.parse_config({})
        assert cfg.params == ModelParams()
        p = cfg.params
        assert (p.n_agents, p.lambda_, p.omega_max, p.g, p.alpha) == (2500, 0.25, 2.0, 0.02, 0.95)
        assert (p.c1_max, p.c2_max, p.c3_max) == (1.0, 1.0, 1.0)
        assert cfg.news.kind == "gaussian"

    def test_alpha_out_of_range(self):
        with pytest.raises(ConfigError) as exc:
            io.parse_config({"model": {"alpha": 1.2}})
        assert exc.value.field == "model.alpha"

    @pytest.mark.parametrize(
        "obj,field",
        [
            ({"modle": {}}, "modle"),
            ({"model": {"n_agent": 5}}, "model.n_agent"),
            ({"model": {"lambda": -1}}, "model.lambda"),
            ({"model": {"n_agents": 10}}, "model.n_agents"),
            ({"news": {"kind": "poisson"}}, "news.kind"),
            ({"news": {"kind": "scripted", "entries": []}}, "news.entries"),
            ({"news": {"kind": "scripted", "entries": [{"start_step": 0, "values": [1]}]}}, "news.entries[0].start_step"),
            ({"histogram": {"return_edges": [1, 0]}}, "histogram.return_edges"),
            ({"sweep": {"axis1": {"name": "g", "values": [0.1]}}}, "sweep.axis"),
            ({"sweep": {"axis1": {"name": "alpha", "values": [0.5, 1.5]}}}, "sweep.alpha"),
            ({"acf_max_lag": -1}, "acf_max_lag"),
        ],
    )
    def test_errors_name_the_field(self, obj, field):
        with pytest.raises(ConfigError) as exc:
            io.parse_config(obj)
        assert exc.value.field == field

    def test_round_trip(self):
        obj = {
            "model": {"c1_max": 3.5, "lambda": 0.5, "topology": "random", "n_agents": 300, "seed": 2**63},
            "news": {"kind": "scripted", "entries": [{"start_step": 800, "values": [-1.0, -1.0, 0.25]}]},
            "histogram": {"mean_k_edges": [0, 1, 2]},
            "sweep": {"axis1": {"name": "c1_max", "values": [0, 1]}, "axis2": {"name": "alpha", "values": [0.9]},
                      "n_realizations": 4},
        }
        cfg = io.parse_config(obj)
        again = io.parse_config(json.loads(io.dumps_config(cfg)))
        assert again == cfg
        assert io.dumps_config(again) == io.dumps_config(cfg)

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"model": {"c1_max": 4.0}}))
        assert io.load_config(path).params.c1_max == 4.0


class TestCsv:
    def test_timeseries_header(self, tmp_path):
        ts = Simulation(ModelParams(n_agents=25, n_steps=5)).run()
        path = io.emit_timeseries(ts, tmp_path / "ts.csv")
        lines = path.read_text().split("\n")
        assert lines[0] == "t,price,log_price,return,news,u,mean_k,activity,total_cash,total_stocks"
        assert len(lines) == 7 and lines[-1] == ""
        assert b"\r" not in path.read_bytes()

    def test_timeseries_round_trip_exact(self, tmp_path):
        ts = Simulation(ModelParams(n_agents=25, n_steps=50)).run()
        back = io.read_timeseries(io.emit_timeseries(ts, tmp_path / "ts.csv"))
        assert np.array_equal(back.data, ts.data)

    def test_empty_timeseries(self, tmp_path):
        ts = TimeSeries(np.empty((0, 10)))
        text = io.emit_timeseries(ts, tmp_path / "e.csv").read_text()
        assert text == ",".join(io.TIMESERIES_HEADER) + "\n"

    def test_sweep_round_trip(self, tmp_path):
        spec = SweepSpec(ModelParams(n_agents=49, n_steps=300, burn_in=10), ("c1_max", (1.0, 3.0)),
                         ("c2_max", (0.5, 1.0)), n_realizations=2)
        res = run_ensemble(spec, workers=1)
        assert io.read_sweep(io.emit_sweep(res, tmp_path / "s.csv")) == res

    def test_stats_round_trip(self, tmp_path):
        ts = Simulation(ModelParams(n_agents=100, n_steps=600)).run().after(200)
        stats = run_statistics(ts, acf_max_lag=20)
        back = io.read_stats(io.emit_stats(stats, tmp_path / "st.csv"))
        assert back.summary() == stats.summary()
        assert np.array_equal(back.vol_acf, stats.vol_acf)
        assert np.array_equal(back.mean_k_histogram.mass, stats.mean_k_histogram.mass)

    def test_atomic_write_leaves_no_temp(self, tmp_path):
        io.atomic_write(tmp_path / "a.txt", "x\n")
        io.atomic_write(tmp_path / "a.txt", "y\n")
        assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]
        assert (tmp_path / "a.txt").read_text() == "y\n"


def write_config(tmp_path, obj):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(obj))
    return path


SMALL = {"model": {"n_agents": 100, "n_steps": 400, "burn_in": 50}, "acf_max_lag": 20}


class TestCli:
    def test_simulate_byte_identical(self, tmp_path, capsys):
        cfg = write_config(tmp_path, SMALL)
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
        for name in ("timeseries.csv", "stats.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_seed_and_steps_override(self, tmp_path):
        cfg = write_config(tmp_path, SMALL)
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a"), "--seed", "9", "--steps", "120"]) == 0
        ts = io.read_timeseries(tmp_path / "a" / "timeseries.csv")
        assert len(ts) == 120
        direct = Simulation(io.load_config(cfg).params.with_(seed=9, n_steps=120)).run()
        assert np.array_equal(ts.data, direct.data)

    def test_analyze_reproduces_stats(self, tmp_path):
        cfg = write_config(tmp_path, SMALL)
        main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")])
        assert main(["analyze", str(tmp_path / "a" / "timeseries.csv"), "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
        assert (tmp_path / "a" / "stats.csv").read_bytes() == (tmp_path / "b" / "stats.csv").read_bytes()

    def test_sweep(self, tmp_path):
        obj = dict(SMALL, sweep={"axis1": {"name": "c1_max", "values": [0.0, 2.0]}, "n_realizations": 2})
        cfg = write_config(tmp_path, obj)
        assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "s"), "--workers", "1"]) == 0
        res = io.read_sweep(tmp_path / "s" / "sweep.csv")
        assert len(res.points) == 2 and res.n_realizations == 2
        assert (tmp_path / "s" / "realizations.csv").exists()

    def test_scenario(self, tmp_path):
        obj = dict(SMALL, news={"kind": "scripted", "entries": [{"start_step": 200, "values": [-1.0] * 10}]},
                   scenario={"horizon": 50})
        cfg = write_config(tmp_path, obj)
        assert main(["scenario", "--config", str(cfg), "--out", str(tmp_path / "sc")]) == 0
        diag = json.loads((tmp_path / "sc" / "streak.json").read_text())
        assert diag["streak_start"] == 200 and diag["streak_end"] == 209

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"model": {"alpha": 1.2}})
        assert main(["simulate", "--config", str(cfg)]) == 2
        assert "alpha" in capsys.readouterr().err

    def test_sweep_without_section(self, tmp_path):
        cfg = write_config(tmp_path, SMALL)
        assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 2

    def test_runtime_error_exit_code(self, tmp_path):
        cfg = write_config(tmp_path, SMALL)
        assert main(["analyze", str(tmp_path / "missing.csv"), "--config", str(cfg), "--out", str(tmp_path)]) == 3
