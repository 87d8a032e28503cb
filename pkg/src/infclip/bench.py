"""Experiment harness: configuration, parallel repetitions, aggregation, CSV.

Reproduces the two-arm study: for each (alpha, policy) pair the harness runs
R independent repetitions, tracks the probability assigned to the optimal arm
at every step, and aggregates mean/std curves (moving-average filtered) plus
mean cumulative pseudo-regret.  Output is a pure function of the config:
seeds derive from (base_seed, alpha index, run index), so neither scheduling
order nor worker count can change a single byte of the CSV.
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .distributions import experiment_arms
from .environments import ArmEnvironment
from .exceptions import ConfigError
from .planners import theorem1_planner
from .policies import InfClipPolicy, RobustUcbPolicy, SkipInfPolicy, run_policy
from .rng import SeededRng

POLICY_IDS = ("infclip", "skipinf", "robust_ucb")
_POLICY_KEYS = {
    "infclip": {"lambda", "mu", "q"},
    "skipinf": {"lambda", "mu", "q"},
    "robust_ucb": {"c"},
}
_TOP_KEYS = {
    "alphas", "horizon", "repetitions", "base_seed", "filter_window",
    "dump_raw", "policies",
}

# Stream-id layout: alpha index in the top 16 bits, a role tag in the next
# 16, run index in the low 32.  Philox keys are (base_seed, stream_id), so
# distinct cells never share a stream.
_TAG_ARM = 0x0100
_TAG_POLICY = 0x0200


def _stream_id(alpha_idx: int, tag: int, run_idx: int) -> int:
    return (alpha_idx << 48) | (tag << 32) | run_idx


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment."""

    alphas: list[float]
    horizon: int
    repetitions: int
    base_seed: int
    policies: dict[str, dict] = field(default_factory=lambda: {"infclip": {}})
    filter_window: int = 30
    dump_raw: bool = False

    def __post_init__(self):
        if self.horizon < 1 or self.repetitions < 1 or self.filter_window < 1:
            raise ConfigError("horizon, repetitions and filter_window must be >= 1")
        for a in self.alphas:
            if not 0.0 < a <= 1.0:
                raise ConfigError(f"alpha {a} outside (0, 1]", field="alphas")
        if not self.policies:
            raise ConfigError("at least one policy is required", field="policies")
        for pid, overrides in self.policies.items():
            if pid not in POLICY_IDS:
                raise ConfigError(f"unknown policy id {pid!r}", field=f"policies.{pid}")
            bad = set(overrides) - _POLICY_KEYS[pid]
            if bad:
                raise ConfigError(
                    f"unknown override keys {sorted(bad)} for policy {pid!r}",
                    field=f"policies.{pid}",
                )


def _find_line(text: str, key: str) -> int | None:
    tail = key.split(".")[-1]
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith(tail) or stripped.startswith(f"[{key}]") or stripped.startswith(f"[policies.{tail}]"):
            return i
    return None


def load_config(path: str) -> ExperimentConfig:
    """Parse and strictly validate a TOML experiment file.

    Unknown keys anywhere are hard errors; silent typos would otherwise
    invalidate a reproduction.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    text = raw.decode("utf-8")
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc

    unknown = set(data) - _TOP_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError("unknown top-level key", field=key, line=_find_line(text, key))

    required = {"alphas", "horizon", "repetitions", "base_seed"}
    missing = required - set(data)
    if missing:
        raise ConfigError(f"missing required keys: {sorted(missing)}")

    policies = data.get("policies", {"infclip": {}})
    if not isinstance(policies, dict) or not all(isinstance(v, dict) for v in policies.values()):
        raise ConfigError("policies must be a table of per-policy override tables",
                          field="policies", line=_find_line(text, "policies"))
    for pid, overrides in policies.items():
        if pid not in POLICY_IDS:
            raise ConfigError(f"unknown policy id {pid!r}",
                              field=f"policies.{pid}", line=_find_line(text, f"policies.{pid}"))
        bad = set(overrides) - _POLICY_KEYS[pid]
        if bad:
            key = sorted(bad)[0]
            raise ConfigError(f"unknown override key {key!r} for policy {pid!r}",
                              field=f"policies.{pid}.{key}", line=_find_line(text, key))

    try:
        return ExperimentConfig(
            alphas=[float(a) for a in data["alphas"]],
            horizon=int(data["horizon"]),
            repetitions=int(data["repetitions"]),
            base_seed=int(data["base_seed"]),
            policies=policies,
            filter_window=int(data.get("filter_window", 30)),
            dump_raw=bool(data.get("dump_raw", False)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed value: {exc}") from exc


def moving_average(curve, window: int) -> np.ndarray:
    """Trailing moving average; output[t] = mean(input[max(0, t-w+1) .. t])."""
    if window < 1:
        raise ValueError("window must be >= 1")
    x = np.asarray(curve, dtype=float)
    if window == 1 or x.size == 0:
        return x.copy()
    csum = np.concatenate(([0.0], np.cumsum(x)))
    t = np.arange(1, x.size + 1)
    lo = np.maximum(t - window, 0)
    return (csum[t] - csum[lo]) / (t - lo)


@dataclass
class AggregateCurve:
    """Across-repetition statistics of the probability-of-optimal-arm path."""

    mean_prob_optimal: np.ndarray
    std_prob_optimal: np.ndarray
    mean_cum_regret: np.ndarray
    filter_window: int

    @property
    def filtered_mean(self) -> np.ndarray:
        return moving_average(self.mean_prob_optimal, self.filter_window)

    @property
    def filtered_std(self) -> np.ndarray:
        return moving_average(self.std_prob_optimal, self.filter_window)


def resolve_policy_params(cfg: ExperimentConfig, alpha: float, env: ArmEnvironment) -> dict:
    """Per-policy constructor arguments with planner defaults filled in.

    The study does not fix the clip level or stepsize, so the defaults come
    from the linear-bandit planner evaluated at the arms' certified moment
    scale; the skipping baseline shares the clipped policy's schedule so the
    comparison isolates clip-vs-skip.
    """
    plan = theorem1_planner(cfg.horizon, alpha, env.n_arms, env.moment_scale)
    resolved = {}
    for pid, overrides in cfg.policies.items():
        if pid in ("infclip", "skipinf"):
            resolved[pid] = {
                "lam": float(overrides.get("lambda", plan.lam)),
                "mu": float(overrides.get("mu", plan.mu)),
                "q": float(overrides.get("q", 0.5)),
            }
        else:
            resolved[pid] = {
                "alpha": alpha,
                "M": env.moment_scale,
                "c": float(overrides.get("c", 4.0)),
            }
    return resolved


def _make_policy(pid: str, params: dict, n_arms: int, rng: SeededRng):
    if pid == "infclip":
        return InfClipPolicy(n_arms, params["lam"], params["mu"], params["q"], rng)
    if pid == "skipinf":
        return SkipInfPolicy(n_arms, params["lam"], params["mu"], params["q"], rng)
    return RobustUcbPolicy(n_arms, params["alpha"], params["M"], params["c"], rng)


def _run_cell(alpha: float, alpha_idx: int, run_idx: int, horizon: int,
              base_seed: int, policy_params: dict) -> dict:
    """One repetition: every policy replayed on one shared loss table."""
    env = ArmEnvironment(experiment_arms(alpha))
    arm_rngs = [SeededRng(base_seed, _stream_id(alpha_idx, _TAG_ARM + arm, run_idx))
                for arm in range(env.n_arms)]
    table = env.sample_table(horizon, arm_rngs)

    out = {}
    for p_idx, (pid, params) in enumerate(sorted(policy_params.items())):
        rng = SeededRng(base_seed, _stream_id(alpha_idx, _TAG_POLICY + p_idx, run_idx))
        policy = _make_policy(pid, params, env.n_arms, rng)
        trace = run_policy(policy, env, horizon, loss_table=table)
        out[pid] = (trace.prob_optimal, trace.cum_pseudo_regret)
    return out


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    curves: dict  # (policy_id, alpha) -> AggregateCurve
    planner_meta: dict  # alpha -> planner/record dict
    raw: dict | None = None  # (policy_id, alpha) -> (R, T) prob-optimal array


def run_experiment(cfg: ExperimentConfig, threads: int = 1, keep_raw: bool = False) -> ExperimentResult:
    """Run the full grid; deterministic for a given config at any thread count."""
    curves = {}
    planner_meta = {}
    raw = {} if (keep_raw or cfg.dump_raw) else None

    for alpha_idx, alpha in enumerate(cfg.alphas):
        env = ArmEnvironment(experiment_arms(alpha))
        params = resolve_policy_params(cfg, alpha, env)
        plan = theorem1_planner(cfg.horizon, alpha, env.n_arms, env.moment_scale)
        planner_meta[alpha] = {
            "alpha": alpha,
            "arm_means": env.known_means.tolist(),
            "moment_scale_M": env.moment_scale,
            "planner_lambda": plan.lam,
            "planner_mu": plan.mu,
            "planner_bound": plan.bound,
            "policy_params": params,
        }

        jobs = [(alpha, alpha_idx, r, cfg.horizon, cfg.base_seed, params)
                for r in range(cfg.repetitions)]
        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                cells = list(pool.map(_run_cell_star, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
        else:
            cells = [_run_cell(*job) for job in jobs]

        for pid in params:
            probs = np.stack([c[pid][0] for c in cells])      # (R, T), run order
            regrets = np.stack([c[pid][1] for c in cells])
            ddof = 1 if cfg.repetitions > 1 else 0
            curve = AggregateCurve(
                mean_prob_optimal=probs.mean(axis=0),
                std_prob_optimal=probs.std(axis=0, ddof=ddof),
                mean_cum_regret=regrets.mean(axis=0),
                filter_window=cfg.filter_window,
            )
            curves[(pid, alpha)] = curve
            if raw is not None:
                raw[(pid, alpha)] = probs

    return ExperimentResult(cfg, curves, planner_meta, raw)


def _run_cell_star(job):
    return _run_cell(*job)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_csv(result: ExperimentResult, path: str) -> None:
    """One flat CSV per experiment; filtered curves, UTF-8, LF line endings."""
    cfg = result.config
    lines = ["algo,alpha,seed_base,t,mean_prob_optimal,std_prob_optimal,mean_cum_regret"]
    for (pid, alpha) in sorted(result.curves):
        curve = result.curves[(pid, alpha)]
        mean_f = curve.filtered_mean
        std_f = curve.filtered_std
        for t in range(len(mean_f)):
            lines.append(
                f"{pid},{_fmt(alpha)},{cfg.base_seed},{t + 1},"
                f"{_fmt(mean_f[t])},{_fmt(std_f[t])},{_fmt(curve.mean_cum_regret[t])}"
            )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_meta(result: ExperimentResult, path: str) -> None:
    cfg = result.config
    meta = {
        "config": {
            "alphas": cfg.alphas,
            "horizon": cfg.horizon,
            "repetitions": cfg.repetitions,
            "base_seed": cfg.base_seed,
            "filter_window": cfg.filter_window,
            "policies": cfg.policies,
        },
        "planner": {str(a): m for a, m in result.planner_meta.items()},
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_raw(result: ExperimentResult, out_dir: str) -> list[str]:
    """Per-run probability traces as .npy files (deterministic bytes)."""
    if result.raw is None:
        return []
    paths = []
    for (pid, alpha), probs in sorted(result.raw.items()):
        path = os.path.join(out_dir, f"raw_{pid}_alpha{alpha:g}.npy")
        np.save(path, probs)
        paths.append(path)
    return paths
