"""Condition-based maintenance toolkit for a unit under gamma degradation.

Simulates a single-unit system whose deterioration grows by gamma-distributed
increments and whose repairs are increasingly imperfect, trains a Double-DQN
agent to pick maintenance actions, and benchmarks it against optimized
conventional policies through renewal-cycle Monte Carlo statistics.
"""

from .agent import (AgentConfig, EpisodeLog, ExplorationSchedule, ReplayBuffer,
                    Transition, ddqn_target, greedy_policy, select_action, train)
from .baselines import (BaselinePolicy, BaselineSpec, OptimizeResult,
                        baseline_decision, optimize_baseline)
from .cases import BUILTIN_CASES, CaseConfig, load_case
from .degradation import (GammaProcessParams, increment_cdf, increment_pdf,
                          increment_shape, increment_survival, sample_increment)
from .environment import (Action, CostParams, Event, MaintenanceEnv, StepOutcome,
                          SystemState, apply_repair, reward, run_episode, step)
from .network import (AdamState, Mlp, adam_step, backward_mse, forward,
                      init_adam, init_mlp, load_mlp, save_mlp, soft_update)
from .rng import (RngStream, TruncNormalParams, sample_gamma, sample_trunc_normal,
                  std_normal_cdf, std_normal_quantile)
from .stats import (IntervalEstimate, RunStatistics, availability_metric,
                    collect_run, confidence_interval, cost_breakdown,
                    cost_per_inspection, cost_rate_plugin, ks_normality,
                    long_run_cost_rate, monte_carlo)

__version__ = "0.1.0"
