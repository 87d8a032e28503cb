"""Bandit policies behind one select/update interface.

All policies minimize losses.  The clipped forecaster caps large observed
losses at the clip level before importance weighting; the skipping variant
discards them entirely (zero estimate), isolating the clip-vs-skip contrast;
the robust index baseline uses truncated means with a lower-confidence bonus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import simplex
from .clipping import iw_clipped_estimate
from .environments import ArmEnvironment
from .rng import as_generator
from .tsallis import TsallisConfig, omd_step


@dataclass
class PolicyTrace:
    """Per-step record of one policy run plus the terminal pseudo-regret."""

    arms: np.ndarray
    losses: np.ndarray
    prob_optimal: np.ndarray
    cum_loss: np.ndarray
    cum_pseudo_regret: np.ndarray
    optimal_arm: int
    competitor: int

    @property
    def pseudo_regret(self) -> float:
        """Sum of expected losses of chosen arms minus T times the competitor's."""
        return float(self.cum_pseudo_regret[-1])

    def __len__(self) -> int:
        return len(self.arms)


class InfClipPolicy:
    """Clipped implicitly normalized forecaster (mirror descent, Tsallis prox).

    Keeps a distribution over arms, samples the arm to play from it, and
    updates through the implicit-normalization step with the clipped
    importance-weighted loss estimate.
    """

    name = "infclip"

    def __init__(self, n_arms: int, lam: float, mu: float, q: float = 0.5, rng=None):
        if n_arms < 2:
            raise ValueError("need at least two arms")
        self.n_arms = n_arms
        self.lam = float(lam)
        self.cfg = TsallisConfig(mu=mu, q=q)
        self._gen = as_generator(rng) if rng is not None else np.random.default_rng()
        self.reset()

    def reset(self):
        self.x = simplex.uniform(self.n_arms)
        self.updates = 0
        self.informative_updates = 0
        self.last_diagnostics = None

    @property
    def distribution(self) -> np.ndarray:
        return self.x.copy()

    def prob(self, arm: int) -> float:
        return float(self.x[arm])

    def select(self) -> int:
        u = self._gen.random()
        return int(np.searchsorted(np.cumsum(self.x), u))

    def update(self, arm: int, loss: float):
        estimate = iw_clipped_estimate(loss, arm, self.x, self.lam)
        self.x, self.last_diagnostics = omd_step(self.x, estimate.values, self.cfg)
        self.updates += 1
        self.informative_updates += 1


class SkipInfPolicy(InfClipPolicy):
    """Same forecaster, but losses above the threshold are skipped outright.

    A skipped sample contributes the zero estimate, so the distribution is
    left untouched; below the threshold the update path is identical to the
    clipped policy bit for bit.
    """

    name = "skipinf"

    def reset(self):
        super().reset()
        self.skipped = 0

    def update(self, arm: int, loss: float):
        if loss > self.lam:
            self.skipped += 1
            self.updates += 1
            return
        super().update(arm, loss)


class RobustUcbPolicy:
    """Truncated-mean index policy with a lower-confidence exploration bonus.

    Plays each arm once, then the arm minimizing
        mean_i - c * M * (log t^2 / s_i)^(alpha/(1+alpha)),
    where mean_i is the truncated empirical mean: the j-th sample of an arm
    is retained only if its magnitude is at most
    (M^(1+alpha) * j / log t^2)^(1/(1+alpha)), with t the step at which the
    sample arrives.  Retained sums are kept incrementally; the divisor is the
    full pull count.
    """

    name = "robust_ucb"

    def __init__(self, n_arms: int, alpha: float, M: float, c: float = 4.0, rng=None):
        if n_arms < 2:
            raise ValueError("need at least two arms")
        if not 0.0 < alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        self.n_arms = n_arms
        self.alpha = float(alpha)
        self.M = float(M)
        self.c = float(c)
        self.reset()

    def reset(self):
        self.pulls = np.zeros(self.n_arms, dtype=np.int64)
        self.retained_sums = np.zeros(self.n_arms)
        self.total_pulls = 0
        self.truncated = 0

    def indices(self) -> np.ndarray:
        """Current lower-confidence indices (inf for unpulled arms)."""
        t = self.total_pulls + 1
        idx = np.full(self.n_arms, np.inf)
        seen = self.pulls > 0
        if not seen.any() or t < 2:
            return idx
        log_term = 2.0 * math.log(t)
        s = self.pulls[seen]
        means = self.retained_sums[seen] / s
        radius = self.c * self.M * (log_term / s) ** (self.alpha / (1.0 + self.alpha))
        idx[seen] = means - radius
        return idx

    def select(self) -> int:
        unpulled = np.nonzero(self.pulls == 0)[0]
        if unpulled.size:
            return int(unpulled[0])
        return int(np.argmin(self.indices()))

    def prob(self, arm: int) -> float:
        # Selection is deterministic given the history, so the conditional
        # probability of picking any arm is an indicator.
        return 1.0 if self.select() == arm else 0.0

    def update(self, arm: int, loss: float):
        self.total_pulls += 1
        t = self.total_pulls
        self.pulls[arm] += 1
        j = self.pulls[arm]
        if t < 2:
            retained = True
        else:
            log_term = 2.0 * math.log(t)
            threshold = (self.M ** (1.0 + self.alpha) * j / log_term) ** (1.0 / (1.0 + self.alpha))
            retained = abs(loss) <= threshold
        if retained:
            self.retained_sums[arm] += loss
        else:
            self.truncated += 1


def run_policy(
    policy,
    env: ArmEnvironment,
    T: int,
    competitor: int | None = None,
    rng=None,
    loss_table: np.ndarray | None = None,
) -> PolicyTrace:
    """Drive a policy against an arm environment for T steps.

    Losses come from ``loss_table[t, arm]`` when given (shared tables let the
    harness compare policies on identical draws), otherwise from live pulls.
    The pseudo-regret uses the environment's known means; the competitor
    defaults to the best (minimum-mean) arm.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    means = env.known_means
    optimal = int(np.argmin(means))
    competitor = optimal if competitor is None else int(competitor)
    if not 0 <= competitor < env.n_arms:
        raise ValueError(f"competitor {competitor} is not a valid arm")
    gen = as_generator(rng) if rng is not None else None

    arms = np.empty(T, dtype=np.int64)
    losses = np.empty(T)
    prob_opt = np.empty(T)
    for t in range(T):
        prob_opt[t] = policy.prob(optimal)
        arm = policy.select()
        if loss_table is not None:
            loss = float(loss_table[t, arm])
        else:
            loss = env.pull(arm, gen)
        policy.update(arm, loss)
        arms[t] = arm
        losses[t] = loss

    cum_loss = np.cumsum(losses)
    cum_pseudo_regret = np.cumsum(means[arms] - means[competitor])
    return PolicyTrace(
        arms=arms,
        losses=losses,
        prob_optimal=prob_opt,
        cum_loss=cum_loss,
        cum_pseudo_regret=cum_pseudo_regret,
        optimal_arm=optimal,
        competitor=competitor,
    )
