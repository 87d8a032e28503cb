"""Machine-readable verification suites for the testable lemma consequences.

``verify_all`` exercises the named invariants of the clipping, mirror-step,
sphere-estimator and environment modules at two sample budgets: quick (1e4)
for smoke runs, full (1e6) for the real certification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import simplex as smp
from .clipping import clip_lemma_report, clip_scalar, clip_vector, iw_clipped_estimate, qnorm
from .distributions import LogPareto, experiment_arms, log_pareto_normalizer
from .environments import ArmEnvironment, LinearSimplexEnv
from .planners import sigma_q_power
from .rng import SeededRng
from .tsallis import TsallisConfig, omd_step, step_objective
from .zeroth_order import smoothing_gap_check

_LEVELS = {"quick": 10_000, "full": 1_000_000}


@dataclass
class CheckResult:
    name: str
    passed: bool
    observed: float
    bound: float
    detail: str = ""

    def __post_init__(self):
        # numpy scalars sneak in from comparisons; keep the report JSON-clean
        self.passed = bool(self.passed)
        self.observed = float(self.observed)
        self.bound = float(self.bound)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: observed={self.observed:.6g} bound={self.bound:.6g} {self.detail}"


@dataclass
class VerifyReport:
    level: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, *args, **kwargs):
        self.checks.append(CheckResult(*args, **kwargs))

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "passed": self.passed,
            "checks": [vars(c) for c in self.checks],
        }


def _clip_suite(report: VerifyReport, n_samples: int, rng: SeededRng, clip_fn=None):
    # Threshold low enough that the tail is exercised even at the quick
    # sample budget; the acceptance suite separately runs lambda = 100 at 1e6.
    spec = LogPareto(0.5, 1.0)
    lemma = clip_lemma_report(spec, 10.0, n_samples, rng.derive(1), clip_fn=clip_fn)
    for check in lemma.checks:
        report.add(f"clip.{check.name}", check.passed, check.observed, check.bound)

    gen = rng.derive(2).generator
    worst = 0.0
    for _ in range(50):
        n = int(gen.integers(2, 6))
        x = smp.floor_and_renormalize(gen.dirichlet(np.ones(n)))
        losses = gen.pareto(1.2, n) * 3.0
        lam = float(gen.uniform(0.5, 20.0))
        for j in range(n):
            total = sum(x[i] * iw_clipped_estimate(losses[i], i, x, lam).values[j] for i in range(n))
            worst = max(worst, abs(total - clip_scalar(losses[j], lam)))
    report.add("clip.iw_identity", worst <= 1e-12, worst, 1e-12,
               "enumeration identity sum_i x_i ghat(i)[j] = clip(loss_j)")

    worst_norm, worst_dir = 0.0, 0.0
    for _ in range(200):
        n = int(gen.integers(1, 8))
        g = gen.standard_normal(n) * 10 ** gen.uniform(-3, 3)
        lam = float(10 ** gen.uniform(-2, 3))
        q = float(gen.choice([2.0, 3.0, 4.0, np.inf]))
        clipped = clip_vector(g, lam, q)
        norm = qnorm(g, q)
        target = min(norm, lam)
        worst_norm = max(worst_norm, abs(qnorm(clipped, q) - target) / max(target, 1e-300))
        if norm > 0:
            ratios = clipped[g != 0] / g[g != 0]
            if ratios.size:
                t = float(ratios[0])
                worst_dir = max(worst_dir, float(np.max(np.abs(ratios - t))),
                                0.0 if 0.0 < t <= 1.0 + 1e-12 else 1.0)
    report.add("clip.norm_contract", worst_norm <= 1e-12, worst_norm, 1e-12,
               "||clip(g)||_q = min(||g||_q, lambda)")
    report.add("clip.direction", worst_dir <= 1e-12, worst_dir, 1e-12,
               "clip(g) = t*g with one t in (0, 1]")


def _tsallis_suite(report: VerifyReport, rng: SeededRng):
    gen = rng.generator
    worst_sum, worst_resid, worst_scale, worst_mono, worst_obj = 0.0, 0.0, 0.0, 0.0, 0.0
    for _ in range(200):
        n = int(gen.integers(2, 5))
        q = float(gen.choice([0.3, 0.5, 0.8]))
        mu = float(10 ** gen.uniform(-3, 0))
        x = smp.floor_and_renormalize(gen.dirichlet(np.ones(n)))
        g = np.abs(gen.standard_normal(n)) * 10 ** gen.uniform(-1, 2)
        cfg = TsallisConfig(mu=mu, q=q)
        x1, diag = omd_step(x, g, cfg)
        worst_sum = max(worst_sum, abs(x1.sum() - 1.0), 0.0 if x1.min() >= smp.FLOOR * (1 - 1e-12) else 1.0)
        worst_resid = max(worst_resid, diag.residual)
        c = float(10 ** gen.uniform(-2, 2))
        x1b, _ = omd_step(x, g / c, TsallisConfig(mu=mu * c, q=q))
        worst_scale = max(worst_scale, float(np.max(np.abs(x1 - x1b))))
        i = int(gen.integers(n))
        g2 = g.copy()
        g2[i] += float(gen.uniform(0.1, 5.0))
        x2, _ = omd_step(x, g2, cfg)
        worst_mono = max(worst_mono, float(x2[i] - x1[i]))
        # objective at the output must not exceed the objective at probes
        probes = [x] + [smp.floor_and_renormalize(gen.dirichlet(np.ones(n))) for _ in range(5)]
        f1 = step_objective(x1, x, g, cfg)
        worst_obj = max(worst_obj, max(f1 - step_objective(p, x, g, cfg) for p in probes))
    report.add("tsallis.simplex_preservation", worst_sum <= 1e-9, worst_sum, 1e-9)
    report.add("tsallis.dual_residual", worst_resid <= 1e-12, worst_resid, 1e-12)
    report.add("tsallis.scale_identity", worst_scale <= 1e-9, worst_scale, 1e-9,
               "step with (g, mu) equals step with (g/c, mu*c)")
    report.add("tsallis.monotone_response", worst_mono <= 1e-12, worst_mono, 1e-12,
               "raising one estimate never raises that arm's mass")
    report.add("tsallis.objective_descent", worst_obj <= 1e-10, worst_obj, 1e-10,
               "output beats random feasible probes")

    x0 = smp.uniform(3)
    x1, _ = omd_step(x0, np.zeros(3), TsallisConfig(mu=0.1, q=0.5))
    drift = float(np.max(np.abs(x1 - x0)))
    report.add("tsallis.zero_fixed_point", drift <= 1e-12, drift, 1e-12)


def _sphere_suite(report: VerifyReport, n_samples: int, rng: SeededRng):
    gen = rng.generator
    n = 10
    e = gen.standard_normal((n_samples, n))
    e /= np.linalg.norm(e, axis=1, keepdims=True)
    worst_norm = float(np.max(np.abs(np.linalg.norm(e, axis=1) - 1.0)))
    report.add("sphere.unit_norm", worst_norm <= 1e-12, worst_norm, 1e-12)

    r = gen.standard_normal(n) * 3.0
    observed = float(np.mean(np.abs(e @ r)))
    bound = float(np.linalg.norm(r)) / math.sqrt(n) * 1.05
    report.add("sphere.inner_product", observed <= bound, observed, bound,
               "E|<e, r>| <= ||r||_2/sqrt(n) with 5% slack")

    worst = -np.inf
    for _ in range(10_000):
        m = int(gen.integers(1, 6))
        x = gen.standard_normal(m) * 10 ** gen.uniform(-2, 2)
        y = gen.standard_normal(m) * 10 ** gen.uniform(-2, 2)
        qv = float(gen.choice([2.0, 3.0, np.inf]))
        a = float(gen.uniform(0.05, 1.0))
        lhs = qnorm(x - y, qv) ** (a + 1)
        rhs = 2 ** a * qnorm(x, qv) ** (a + 1) + 2 ** a * qnorm(y, qv) ** (a + 1)
        worst = max(worst, lhs - rhs)
    report.add("sphere.jensen_norm", worst <= 1e-9, worst, 1e-9,
               "||x-y||^(a+1) <= 2^a ||x||^(a+1) + 2^a ||y||^(a+1)")


def _estimator_moment_suite(report: VerifyReport, n_samples: int, rng: SeededRng):
    n_samples = min(n_samples, 100_000)
    alpha, tau, qv = 0.5, 0.1, 2.0
    env = LinearSimplexEnv(np.array([0.3, 1.0, 0.6]), alpha, tau)
    n = env.n
    gen = rng.generator
    x = smp.uniform(n)
    e = gen.standard_normal((n_samples, n))
    e /= np.linalg.norm(e, axis=1, keepdims=True)
    xi = np.asarray(env.noise.sample(gen, n_samples))
    base = (x[None, :] + tau * e) @ env.c
    g = (n / tau) * (xi * base)[:, None] * e
    moments = np.sum(np.abs(g) ** qv, axis=1) ** ((alpha + 1) / qv)
    observed = float(moments.mean())
    bound = sigma_q_power(n, qv, alpha, env.B, 0.0, tau) * 1.1
    report.add("zeroth.moment_bound", observed <= bound, observed, bound,
               "mean ||g||_q^(a+1) within the planner's sigma_q bound")


def _smoothing_suite(report: VerifyReport, n_samples: int, rng: SeededRng):
    n_samples = min(n_samples, 20_000)
    n, tau = 4, 0.1
    c = np.array([1.0, -0.5, 2.0, 0.3])

    rep = smoothing_gap_check(lambda x: float(c @ x), tau, n, n_samples, rng.derive(11),
                              lipschitz_M=float(np.linalg.norm(c)), probes=5)
    worst = max(ch.gap - ch.bound for ch in rep.checks)
    report.add("zeroth.smoothing_gap_linear", rep.passed, worst, 0.0,
               "linear loss: gap zero within MC error")

    rep = smoothing_gap_check(lambda x: float(np.linalg.norm(x)), tau, n, n_samples,
                              rng.derive(12), lipschitz_M=1.0, probes=5)
    worst = max(ch.gap - ch.bound for ch in rep.checks)
    report.add("zeroth.smoothing_gap_norm", rep.passed, worst, 0.0,
               "||x||_2: gap within tau*M")

    rep = smoothing_gap_check(lambda x: float(np.dot(x, x)), tau, n, n_samples,
                              rng.derive(13), smooth_L=2.0, probes=5)
    worst = max(ch.gap - ch.bound for ch in rep.checks)
    report.add("zeroth.smoothing_gap_quadratic", rep.passed, worst, 0.0,
               "quadratic: gap within L*tau^2/2")


def _envs_suite(report: VerifyReport, n_samples: int, rng: SeededRng):
    alpha = 0.5
    env = ArmEnvironment(experiment_arms(alpha))
    gap = max(abs(env.known_means[0] - 3.0), abs(env.known_means[1] - 3.1))
    report.add("envs.mean_certification", gap <= 1e-6, gap, 1e-6,
               "arm means hit (3.0, 3.1)")

    gen = rng.derive(21).generator
    count = max(n_samples // 10, 1000)
    worst_support = 0.0
    worst_moment_ratio = 0.0
    for arm in env.arms:
        draws = np.asarray(arm.sample(gen, count))
        worst_support = max(worst_support, float(arm.support_lower() - draws.min()))
        mc = float(np.mean(np.abs(draws) ** (1.0 + arm.alpha)))
        worst_moment_ratio = max(worst_moment_ratio, mc / arm.abs_moment_1p_alpha())
    report.add("envs.support", worst_support <= 0.0, worst_support, 0.0,
               "all draws at or above 2*beta")
    report.add("envs.moment_certification", worst_moment_ratio <= 1.1,
               worst_moment_ratio, 1.1, "MC (1+alpha)-moment within certified bound * 1.1")

    a = env.arms[0].sample(SeededRng(1234, 77).generator, 512)
    b = env.arms[0].sample(SeededRng(1234, 77).generator, 512)
    equal = bool(np.array_equal(a, b))
    report.add("rng.determinism", equal, 0.0 if equal else 1.0, 0.0,
               "identical (seed, stream) replays bitwise")

    # Lag-1 independence on the probability-integral transform of pulls.
    draws = env.arms[0].sample(rng.derive(22).generator, count)
    u = env.arms[0].cdf(draws)
    corr = float(np.corrcoef(u[:-1], u[1:])[0, 1])
    band = 3.0 / math.sqrt(count - 1)
    report.add("envs.lag1_independence", abs(corr) <= band, abs(corr), band)


def verify_all(level: str = "quick", base_seed: int = 20240601, _broken_clip=None) -> VerifyReport:
    """Run every named invariant suite; failures are report entries, not raises.

    ``_broken_clip`` injects a mutated clip operator into the lemma suite so
    mutation tests can confirm the checks actually bite.
    """
    if level not in _LEVELS:
        raise ValueError(f"level must be one of {sorted(_LEVELS)}")
    n_samples = _LEVELS[level]
    rng = SeededRng(base_seed)
    report = VerifyReport(level)
    _clip_suite(report, n_samples, rng.derive(1), clip_fn=_broken_clip)
    _tsallis_suite(report, rng.derive(2))
    _sphere_suite(report, n_samples, rng.derive(3))
    _estimator_moment_suite(report, n_samples, rng.derive(4))
    _smoothing_suite(report, n_samples, rng.derive(5))
    _envs_suite(report, n_samples, rng.derive(6))
    return report
