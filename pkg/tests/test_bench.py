"""Harness: config parsing, aggregation, reproducibility, CSV output."""

import os

import numpy as np
import pytest

from infclip import ExperimentConfig, load_config, moving_average, run_experiment, write_csv, write_meta
from infclip.bench import resolve_policy_params, write_raw
from infclip.environments import ArmEnvironment
from infclip.distributions import experiment_arms
from infclip.exceptions import ConfigError


def test_moving_average_window_one_is_identity():
    x = np.array([3.0, 1.0, 4.0, 1.0, 5.0])
    assert np.array_equal(moving_average(x, 1), x)


def test_moving_average_constant_sequence():
    x = np.full(10, 2.5)
    assert np.allclose(moving_average(x, 4), x)


def test_moving_average_alternating():
    x = np.array([0.0, 1.0, 0.0, 1.0, 0.0, 1.0])
    out = moving_average(x, 2)
    assert np.allclose(out, [0.0, 0.5, 0.5, 0.5, 0.5, 0.5])


def test_moving_average_trailing_alignment():
    x = np.arange(6, dtype=float)
    out = moving_average(x, 3)
    assert out[0] == 0.0 and out[1] == 0.5 and out[2] == 1.0 and out[5] == 4.0
    assert len(out) == len(x)


def _write(tmp_path, text):
    path = tmp_path / "exp.toml"
    path.write_text(text, encoding="utf-8")
    return str(path)


GOOD = """
alphas = [0.5]
horizon = 40
repetitions = 3
base_seed = 11
filter_window = 5

[policies.infclip]

[policies.skipinf]
lambda = 4.0
mu = 0.01
"""


def test_load_config_round_trip(tmp_path):
    cfg = load_config(_write(tmp_path, GOOD))
    assert cfg.alphas == [0.5]
    assert cfg.horizon == 40
    assert cfg.policies["skipinf"]["lambda"] == 4.0
    assert cfg.policies["infclip"] == {}


def test_load_config_unknown_top_key(tmp_path):
    bad = GOOD + "\nhorizont = 3\n"
    with pytest.raises(ConfigError) as err:
        load_config(_write(tmp_path, bad))
    assert "horizont" in str(err.value)


def test_load_config_unknown_policy(tmp_path):
    bad = GOOD + "\n[policies.thompson]\n"
    with pytest.raises(ConfigError) as err:
        load_config(_write(tmp_path, bad))
    assert "thompson" in str(err.value)


def test_load_config_unknown_override(tmp_path):
    bad = GOOD.replace("lambda = 4.0", "lamda = 4.0")
    with pytest.raises(ConfigError) as err:
        load_config(_write(tmp_path, bad))
    assert "lamda" in str(err.value)


def test_load_config_missing_required(tmp_path):
    with pytest.raises(ConfigError) as err:
        load_config(_write(tmp_path, "alphas = [0.5]\n"))
    assert "missing" in str(err.value)


def test_config_rejects_bad_alpha():
    with pytest.raises(ConfigError):
        ExperimentConfig(alphas=[1.5], horizon=10, repetitions=1, base_seed=0)


def test_resolve_policy_params_planner_defaults():
    cfg = ExperimentConfig(alphas=[0.5], horizon=8000, repetitions=1, base_seed=0,
                           policies={"infclip": {}, "skipinf": {}, "robust_ucb": {}})
    env = ArmEnvironment(experiment_arms(0.5))
    params = resolve_policy_params(cfg, 0.5, env)
    assert params["infclip"]["lam"] == params["skipinf"]["lam"]  # shared schedule
    assert params["infclip"]["mu"] == params["skipinf"]["mu"]
    assert params["robust_ucb"]["c"] == 4.0
    assert params["robust_ucb"]["M"] == env.moment_scale


def test_single_rep_single_step_curve():
    cfg = ExperimentConfig(alphas=[0.5], horizon=1, repetitions=1, base_seed=3,
                           policies={"infclip": {}})
    res = run_experiment(cfg)
    curve = res.curves[("infclip", 0.5)]
    assert len(curve.mean_prob_optimal) == 1
    assert curve.std_prob_optimal[0] == 0.0


def test_run_experiment_deterministic_and_thread_invariant(tmp_path):
    cfg = ExperimentConfig(alphas=[0.3], horizon=60, repetitions=6, base_seed=99,
                           policies={"infclip": {}, "skipinf": {"lambda": 5.0}})
    res1 = run_experiment(cfg, threads=1)
    res2 = run_experiment(cfg, threads=3)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(res1, str(p1))
    write_csv(res2, str(p2))
    assert p1.read_bytes() == p2.read_bytes()
    # and a fresh serial rerun is bitwise identical too
    res3 = run_experiment(cfg, threads=1)
    p3 = tmp_path / "c.csv"
    write_csv(res3, str(p3))
    assert p1.read_bytes() == p3.read_bytes()


def test_aggregation_recomputable_from_raw(tmp_path):
    cfg = ExperimentConfig(alphas=[0.5], horizon=50, repetitions=5, base_seed=7,
                           policies={"infclip": {}}, filter_window=4)
    res = run_experiment(cfg, keep_raw=True)
    probs = res.raw[("infclip", 0.5)]
    curve = res.curves[("infclip", 0.5)]
    assert np.max(np.abs(probs.mean(axis=0) - curve.mean_prob_optimal)) < 1e-12
    assert np.max(np.abs(probs.std(axis=0, ddof=1) - curve.std_prob_optimal)) < 1e-12
    filt = moving_average(probs.mean(axis=0), 4)
    assert np.max(np.abs(filt - curve.filtered_mean)) < 1e-12


def test_csv_schema_and_meta(tmp_path):
    cfg = ExperimentConfig(alphas=[0.5], horizon=5, repetitions=2, base_seed=1,
                           policies={"infclip": {}})
    res = run_experiment(cfg)
    csv_path = tmp_path / "out.csv"
    write_csv(res, str(csv_path))
    lines = csv_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "algo,alpha,seed_base,t,mean_prob_optimal,std_prob_optimal,mean_cum_regret"
    assert len(lines) == 1 + 5
    first = lines[1].split(",")
    assert first[0] == "infclip" and first[3] == "1"

    meta_path = tmp_path / "out.meta.json"
    write_meta(res, str(meta_path))
    import json

    meta = json.loads(meta_path.read_text())
    assert meta["config"]["horizon"] == 5
    assert "planner_lambda" in meta["planner"]["0.5"]


def test_raw_dump_written(tmp_path):
    cfg = ExperimentConfig(alphas=[0.5], horizon=5, repetitions=2, base_seed=1,
                           policies={"infclip": {}}, dump_raw=True)
    res = run_experiment(cfg)
    paths = write_raw(res, str(tmp_path))
    assert len(paths) == 1 and os.path.exists(paths[0])
    arr = np.load(paths[0])
    assert arr.shape == (2, 5)
