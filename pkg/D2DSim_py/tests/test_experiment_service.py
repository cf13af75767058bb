import logging
import os

import numpy as np
import pandas as pd
import pytest

import services.experiment_service as experiment_service
from core.exceptions import SweepError
from models.experiment import ResultRow
from services.experiment_service import (
    EVAL_STREAM,
    group_rng,
    run_sweep,
    summarize_results,
)
from services.training_service import draw_scenarios, evaluate_policy, olpc_baseline
from utils.config_loader import load_config
from utils.file_storage import read_model, read_results, write_results


def _without_wall_time(rows):
    return [row.model_dump(exclude={"wall_time_s"}) for row in rows]


def _config(small_config, **updates):
    return small_config.model_copy(update=updates)


def test_single_cell_sweep(small_config):
    config = _config(small_config, algorithms=["max_power"])
    rows = run_sweep(config, workers=1)
    assert len(rows) == 1
    row = rows[0]
    assert (row.algorithm, row.d2d_count, row.seed) == ("max_power", 2, 0)
    assert row.system_throughput_bps_hz >= row.d2d_throughput_bps_hz >= 0
    assert _without_wall_time(run_sweep(config, workers=1)) == _without_wall_time(rows)


def test_rows_follow_algorithm_then_grid_order(small_config):
    config = _config(small_config, algorithms=["olpc", "max_power"], d2d_counts=[3, 1], seeds=[1, 0])
    rows = run_sweep(config, workers=1)
    keys = [(row.algorithm, row.d2d_count, row.seed) for row in rows]
    assert keys == [
        ("olpc", 1, 0), ("olpc", 1, 1), ("olpc", 3, 0), ("olpc", 3, 1),
        ("max_power", 1, 0), ("max_power", 1, 1), ("max_power", 3, 0), ("max_power", 3, 1),
    ]


def test_algorithms_share_evaluation_topologies(small_config):
    config = _config(small_config, algorithms=["max_power", "olpc"], seeds=[7])
    rows = {row.algorithm: row for row in run_sweep(config, workers=1)}

    cell_config = config.for_d2d_count(2)
    scenarios = draw_scenarios(cell_config, group_rng(7, 2, EVAL_STREAM), cell_config.env.eval_topologies)
    expected = evaluate_policy(olpc_baseline(cell_config), scenarios, cell_config)
    assert rows["olpc"].system_throughput_bps_hz == expected.system_throughput_bps_hz
    assert rows["olpc"].cue_qos_rate == expected.cue_qos_rate


def test_dqn_sweep_stores_models(small_config, tmp_path):
    config = _config(small_config, algorithms=["dqn"], model_dir=str(tmp_path / "models"))
    rows = run_sweep(config, workers=1)
    assert len(rows) == 1 and rows[0].algorithm == "dqn"
    path = os.path.join(str(tmp_path / "models"), "dqn_d2_s0.json")
    [net] = read_model(path)
    assert net.layer_dims == [4, 16, 16, 4]


def test_sweep_csv_is_reproducible(small_config, tmp_path):
    config = _config(small_config, algorithms=["dqn", "olpc"], seeds=[0, 1])
    first, second = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    write_results(run_sweep(config, workers=1), first)
    write_results(run_sweep(config, workers=1), second)
    a = pd.read_csv(first).drop(columns="wall_time_s")
    b = pd.read_csv(second).drop(columns="wall_time_s")
    pd.testing.assert_frame_equal(a, b)
    assert len(read_results(first)) == 4


def test_failed_cells_do_not_stop_the_sweep(small_config, monkeypatch):
    original = experiment_service.run_algorithm

    def flaky(algorithm, *args, **kwargs):
        if algorithm == "olpc":
            raise RuntimeError("solver exploded")
        return original(algorithm, *args, **kwargs)

    monkeypatch.setattr(experiment_service, "run_algorithm", flaky)
    config = _config(small_config, algorithms=["max_power", "olpc"])
    with pytest.raises(SweepError) as exc_info:
        run_sweep(config, workers=1)
    error = exc_info.value
    assert [f["algorithm"] for f in error.failures] == ["olpc"]
    assert "solver exploded" in error.failures[0]["error"]
    assert [row.algorithm for row in error.rows] == ["max_power"]


def test_worker_count_does_not_change_rows(small_config):
    config = _config(small_config, algorithms=["max_power", "olpc"], d2d_counts=[1, 2], seeds=[0, 1])
    serial = run_sweep(config, workers=1)
    parallel = run_sweep(config, workers=2)
    assert _without_wall_time(parallel) == _without_wall_time(serial)


def test_more_pairs_than_rbs_warns(small_config, caplog):
    config = _config(small_config, algorithms=["max_power"], d2d_counts=[6])
    with caplog.at_level(logging.WARNING):
        rows = run_sweep(config, workers=1)
    assert rows[0].d2d_count == 6
    assert any("exceeds" in record.message for record in caplog.records)


def _result(algorithm, d2d_count, seed, system):
    return ResultRow(
        algorithm=algorithm,
        d2d_count=d2d_count,
        seed=seed,
        system_throughput_bps_hz=system,
        d2d_throughput_bps_hz=system / 10,
        cue_qos_rate=0.5,
        wall_time_s=0.0,
    )


def test_summary_statistics_and_gains():
    rows = [
        _result("olpc", 2, 0, 80.0),
        _result("olpc", 2, 1, 80.0),
        _result("max_power", 2, 0, 100.0),
        _result("max_power", 2, 1, 100.0),
        _result("dqn", 2, 0, 110.0),
        _result("dqn", 2, 1, 130.0),
    ]
    summary = summarize_results(rows)
    assert summary["algorithm"].tolist() == ["dqn", "max_power", "olpc"]
    dqn = summary.iloc[0]
    assert dqn["runs"] == 2
    assert dqn["system_throughput_bps_hz_mean"] == pytest.approx(120.0)
    assert dqn["system_throughput_bps_hz_std"] == pytest.approx(np.std([110.0, 130.0], ddof=1))
    assert dqn["dqn_gain_over_max_power"] == pytest.approx(0.2)
    assert dqn["dqn_gain_over_olpc"] == pytest.approx(0.5)
    assert summary.iloc[1]["system_throughput_bps_hz_std"] == 0.0
    assert np.isnan(summary.iloc[1]["dqn_gain_over_olpc"])


def test_summary_of_no_rows():
    summary = summarize_results([])
    assert summary.empty
    assert "dqn_gain_over_max_power" in summary.columns


DESK_SCALE = os.path.join(os.path.dirname(__file__), "..", "configs", "desk_scale.conf")


@pytest.mark.slow
def test_dqn_protects_cues_better_than_max_power_at_ten_pairs():
    config = load_config(DESK_SCALE).model_copy(
        update={"algorithms": ["dqn", "max_power"], "d2d_counts": [10], "model_dir": None}
    )
    rows = run_sweep(config, workers=1)
    qos = {(row.algorithm, row.seed): row.cue_qos_rate for row in rows}
    wins = sum(qos[("dqn", seed)] > qos[("max_power", seed)] for seed in config.seeds)
    assert len(config.seeds) == 5
    assert wins >= 4
