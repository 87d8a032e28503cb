"""Environment contracts: pulls, queries, domains, certification."""

import numpy as np
import pytest

from infclip import (
    ArmEnvironment,
    ConstantAdversary,
    LinearSimplexEnv,
    NormBallEnv,
    PointMass,
    QuadraticBallEnv,
    SignAdversary,
    experiment_arms,
    two_arm_experiment_env,
)
from infclip.exceptions import OutOfDomain
from infclip.rng import SeededRng

from _oracles import mp_log_pareto


def test_point_mass_pull_deterministic():
    env = ArmEnvironment([PointMass(3.0), PointMass(3.1)])
    gen = SeededRng(1).generator
    assert env.pull(0, gen) == 3.0
    assert env.pull(1, gen) == 3.1


def test_known_means_match_independent_quadrature():
    env = two_arm_experiment_env(0.5)
    _, xi_mean = mp_log_pareto(0.5)
    expect = np.array([3.0, 3.1])
    assert np.max(np.abs(env.known_means - expect)) < 1e-6
    # cross-check via the oracle mean and stored betas
    betas = np.array([a.beta for a in env.arms])
    assert np.max(np.abs(betas * xi_mean - expect)) < 1e-6


def test_experiment_pull_means_within_error_band():
    env = two_arm_experiment_env(0.5)
    gen = SeededRng(21, 0).generator
    draws = env.arms[0].sample(gen, 10_000_000)
    se = draws.std() / np.sqrt(draws.size)
    assert abs(draws.mean() - 3.0) < 5 * se


def test_pull_sequences_replay():
    env = two_arm_experiment_env(0.3)
    a = [env.pull(0, SeededRng(5, 5).generator) for _ in range(1)]
    g1, g2 = SeededRng(5, 5).generator, SeededRng(5, 5).generator
    seq1 = [env.pull(t % 2, g1) for t in range(100)]
    seq2 = [env.pull(t % 2, g2) for t in range(100)]
    assert seq1 == seq2


def test_sample_table_shape_and_determinism():
    env = two_arm_experiment_env(0.5)
    rngs = [SeededRng(9, 0), SeededRng(9, 1)]
    t1 = env.sample_table(50, rngs)
    t2 = env.sample_table(50, [SeededRng(9, 0), SeededRng(9, 1)])
    assert t1.shape == (50, 2)
    assert np.array_equal(t1, t2)


def test_linear_env_query_exact_when_noiseless():
    env = LinearSimplexEnv(np.array([1.0, 2.0]), alpha=0.5, tau=0.1)
    env.noise = PointMass(1.0, alpha=0.5)  # degenerate multiplicative factor
    x = np.array([0.5, 0.5])
    val = env.query(x, 0, SeededRng(1).generator)
    assert val == pytest.approx(1.5)


def test_query_rejects_points_outside_enlarged_set():
    env = LinearSimplexEnv(np.array([1.0, 2.0]), alpha=0.5, tau=0.05)
    with pytest.raises(OutOfDomain):
        env.query(np.array([0.8, 0.8]), 0, SeededRng(1).generator)
    # within the tau-enlargement is fine
    env.query(np.array([0.52, 0.52]), 0, SeededRng(1).generator)


def test_adversary_bound_holds_everywhere():
    delta = 0.3
    env = LinearSimplexEnv(np.array([1.0, 2.0]), alpha=0.5, tau=0.1,
                           adversary=SignAdversary(delta))
    env.noise = PointMass(1.0, alpha=0.5)
    gen = SeededRng(2).generator
    for _ in range(500):
        x = gen.dirichlet(np.ones(2))
        noiseless = float(env.c @ x)
        assert abs(env.query(x, 0, gen) - noiseless) <= delta + 1e-12


def test_constant_adversary_at_bound():
    adv = ConstantAdversary(0.25)
    assert adv(np.zeros(3)) == 0.25


def test_linear_env_moment_certification():
    env = LinearSimplexEnv(np.array([0.5, 1.0]), alpha=0.5, tau=0.1)
    gen = SeededRng(31, 0).generator
    x = np.array([0.4, 0.6])
    vals = np.abs(np.asarray(env.noise.sample(gen, 1_000_000)) * float(env.c @ x))
    mc = np.mean(vals ** 1.5)
    assert mc <= env.B ** 1.5 * 1.1


def test_quadratic_env_constants():
    env = QuadraticBallEnv(np.array([0.2, 0.1]), radius=1.0, alpha=0.5, tau=0.1)
    assert env.smooth_L is not None and env.lipschitz_M is None
    assert env.expected_loss(env.b) == 0.0
    assert np.allclose(env.minimizer(), env.b)


def test_norm_env_constants():
    env = NormBallEnv(np.zeros(2), radius=1.0, alpha=0.5, tau=0.1)
    assert env.lipschitz_M is not None
    x = np.array([0.3, 0.4])
    assert env.expected_loss(x) == pytest.approx(0.5)


def test_independence_lag1_of_pit_values():
    env = two_arm_experiment_env(0.5)
    draws = env.arms[0].sample(SeededRng(41, 0).generator, 100_000)
    u = env.arms[0].cdf(draws)
    corr = np.corrcoef(u[:-1], u[1:])[0, 1]
    assert abs(corr) < 3.0 / np.sqrt(draws.size - 1)
