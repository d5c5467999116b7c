"""Markov decision process for maintaining a gamma-degrading unit.

The agent observes the pair (current deterioration x, deterioration x_m left
after the most recent maintenance) at each inspection and picks one of three
actions: do nothing, repair, or replace. Repairs are increasingly imperfect:
the post-repair level is a truncated-normal draw on [x_m, x], so each repair
raises the floor the next one can reach. Replacement restores the unit to
as-good-as-new {0, 0}. Once deterioration is at or above the failure
threshold, the environment overrides any request with a corrective
replacement that additionally incurs the downtime cost.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Callable, Iterable, Sequence

import numpy as np

from .degradation import GammaProcessParams, sample_increment
from .rng import RngStream, _trunc_normal_draw

__all__ = [
    "Action",
    "Event",
    "SystemState",
    "CostParams",
    "StepOutcome",
    "reward",
    "apply_repair",
    "step",
    "run_episode",
    "MaintenanceEnv",
    "trace_rows",
    "write_trace_csv",
    "TRACE_COLUMNS",
]


class Action(IntEnum):
    NO_ACTION = 0
    REPAIR = 1
    REPLACE = 2


class Event(str, Enum):
    NONE = "none"
    REPAIR = "repair"
    PREVENTIVE_REPLACEMENT = "preventive_replacement"
    CORRECTIVE_REPLACEMENT = "corrective_replacement"


@dataclass(frozen=True, slots=True)
class SystemState:
    """Deterioration level and the post-maintenance floor, 0 <= x_m <= x."""

    x: float
    x_m: float

    def __post_init__(self):
        if not 0.0 <= self.x_m <= self.x:
            raise ValueError(f"state must satisfy 0 <= x_m <= x, got ({self.x}, {self.x_m})")


@dataclass(frozen=True, slots=True)
class CostParams:
    """Unit costs plus the failure threshold that forces corrective replacement."""

    c_p: float
    c_r: float
    c_down: float
    failure_threshold: float

    def __post_init__(self):
        if min(self.c_p, self.c_r, self.c_down) < 0.0:
            raise ValueError("costs must be nonnegative")
        if self.failure_threshold <= 0.0:
            raise ValueError("failure_threshold must be positive")


@dataclass(frozen=True, slots=True)
class StepOutcome:
    """Everything observed at one inspection step.

    ``state`` is the pre-action inspection state, ``state_after_action`` the
    state right after the executed action (same inspection), ``next_state``
    the state found at the following inspection after degradation resumed.
    """

    state: SystemState
    requested_action: Action
    executed_action: Action
    reward: float
    event: Event
    state_after_action: SystemState
    next_state: SystemState


def reward(action: Action, x_pre: float, costs: CostParams) -> float:
    """Reward (negative cost) of executing ``action`` at deterioration ``x_pre``.

    Replacement at or above the failure threshold is corrective and adds the
    downtime cost. The no-action and repair branches are only reachable below
    the threshold: at failure the environment overrides the request with a
    replacement before pricing it.
    """
    if action == Action.REPLACE:
        if x_pre >= costs.failure_threshold:
            return -costs.c_r - costs.c_down
        return -costs.c_r
    if action == Action.REPAIR:
        return -costs.c_p
    return 0.0


def apply_repair(s: SystemState, rng: RngStream, sigma_mode: str = "sum") -> SystemState:
    """Imperfect repair: sample the post-repair level on [x_m, x].

    The draw is truncated-normal with mean at the interval midpoint; its
    spread is (x_m + x)/6 in the default ``"sum"`` mode or (x - x_m)/6 with
    ``sigma_mode="diff"``. Both coordinates of the result equal the draw, so
    the repair floor becomes the level just reached (memory effect). A
    degenerate interval (x_m == x) leaves the state unchanged.
    """
    if s.x == s.x_m:
        return s
    mu = 0.5 * (s.x_m + s.x)
    if sigma_mode == "sum":
        sigma = (s.x_m + s.x) / 6.0
    elif sigma_mode == "diff":
        sigma = (s.x - s.x_m) / 6.0
    else:
        raise ValueError(f"unknown sigma_mode {sigma_mode!r}")
    x_new = _trunc_normal_draw(mu, sigma, s.x_m, s.x, rng)
    return SystemState(x_new, x_new)


def step(s: SystemState, requested: Action, proc: GammaProcessParams,
         costs: CostParams, rng: RngStream, sigma_mode: str = "sum") -> StepOutcome:
    """Advance one inspection: act on ``s``, then degrade to the next inspection.

    A deterioration at or above the failure threshold forces a corrective
    replacement regardless of the requested action, and the outcome records
    the replacement as the executed action.
    """
    failed = s.x >= costs.failure_threshold
    executed = Action.REPLACE if failed else requested
    r = reward(executed, s.x, costs)
    if executed == Action.NO_ACTION:
        post = s
        event = Event.NONE
    elif executed == Action.REPAIR:
        post = apply_repair(s, rng, sigma_mode)
        event = Event.REPAIR
    else:
        post = SystemState(0.0, 0.0)
        event = Event.CORRECTIVE_REPLACEMENT if failed else Event.PREVENTIVE_REPLACEMENT
    dx = sample_increment(proc, rng)
    nxt = SystemState(post.x + dx, post.x_m)
    return StepOutcome(s, requested, executed, r, event, post, nxt)


def run_episode(policy: Callable[[SystemState], Action], length: int,
                proc: GammaProcessParams, costs: CostParams, rng: RngStream,
                sigma_mode: str = "sum") -> list[StepOutcome]:
    """Simulate ``length`` inspections from a new unit under ``policy``.

    The policy is called with the pre-action state. Stateful policies may
    expose ``reset()`` (called once up front) and ``observe(outcome)``
    (called after every step) to track executed actions, including forced
    corrective replacements.
    """
    if length < 1:
        raise ValueError("episode length must be at least 1")
    reset = getattr(policy, "reset", None)
    if reset is not None:
        reset()
    observe = getattr(policy, "observe", None)
    s = SystemState(0.0, 0.0)
    trace = []
    for _ in range(length):
        out = step(s, policy(s), proc, costs, rng, sigma_mode)
        if observe is not None:
            observe(out)
        trace.append(out)
        s = out.next_state
    return trace


class MaintenanceEnv:
    """Stateful wrapper around :func:`step` for training loops.

    Observations are the bounded encoding (x / L, x_m / L); ``step`` takes an
    action index and reports the executed action so experience always matches
    the realized dynamics. The transition math is inlined for speed but
    consumes random draws in exactly the order of :func:`step`, so seeded
    trajectories agree with the reference path.
    """

    n_actions = 3
    obs_dim = 2

    def __init__(self, proc: GammaProcessParams, costs: CostParams,
                 rng: RngStream, sigma_mode: str = "sum"):
        if sigma_mode not in ("sum", "diff"):
            raise ValueError(f"unknown sigma_mode {sigma_mode!r}")
        self.proc = proc
        self.costs = costs
        self.rng = rng
        self.sigma_mode = sigma_mode
        self._x = 0.0
        self._x_m = 0.0

    @property
    def state(self) -> SystemState:
        return SystemState(self._x, self._x_m)

    def encode(self, s: SystemState) -> np.ndarray:
        scale = 1.0 / self.costs.failure_threshold
        return np.array([s.x * scale, s.x_m * scale])

    def reset(self) -> np.ndarray:
        self._x = 0.0
        self._x_m = 0.0
        return np.zeros(2)

    def step(self, action_index: int) -> tuple[float, int, np.ndarray]:
        costs = self.costs
        x = self._x
        x_m = self._x_m
        if x >= costs.failure_threshold:
            executed = 2
            r = -costs.c_r - costs.c_down
            x_post = x_m_post = 0.0
        elif action_index == 0:
            executed = 0
            r = 0.0
            x_post, x_m_post = x, x_m
        elif action_index == 1:
            executed = 1
            r = -costs.c_p
            if x > x_m:
                span = (x_m + x) if self.sigma_mode == "sum" else (x - x_m)
                x_post = _trunc_normal_draw(0.5 * (x_m + x), span / 6.0,
                                            x_m, x, self.rng)
            else:
                x_post = x
            x_m_post = x_post
        else:
            executed = 2
            r = -costs.c_r
            x_post = x_m_post = 0.0
        self._x = x_post + sample_increment(self.proc, self.rng)
        self._x_m = x_m_post
        scale = 1.0 / costs.failure_threshold
        return r, executed, np.array([self._x * scale, self._x_m * scale])


TRACE_COLUMNS = ("step", "x_pre", "x_m_pre", "requested_action",
                 "executed_action", "reward", "event", "x_post")


def trace_rows(trace: Sequence[StepOutcome]) -> Iterable[tuple]:
    """Rows matching :data:`TRACE_COLUMNS`; steps are 1-indexed and ``x_post``
    is the deterioration right after the executed action."""
    for i, o in enumerate(trace, start=1):
        yield (i, o.state.x, o.state.x_m, o.requested_action.name,
               o.executed_action.name, o.reward, o.event.value,
               o.state_after_action.x)


def write_trace_csv(path, trace: Sequence[StepOutcome], meta: str = "") -> None:
    """Export an episode trace; ``meta`` becomes a leading '#' comment line."""
    with open(path, "w", newline="") as fh:
        if meta:
            fh.write(f"# {meta}\n")
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        w.writerows(trace_rows(trace))
