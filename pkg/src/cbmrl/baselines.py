"""Conventional maintenance policies and a common-random-number optimizer.

Four policy families are provided: run-to-failure (FR), age-periodic repairs
and replacements (Age), deterioration thresholds (TBM), and the union of both
trigger families (ATBM). Parameters are optimized by Monte Carlo evaluation
over parameter grids with shared random streams, so comparisons between grid
points (and nested policy classes) are exact rather than noisy.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from .cases import CaseConfig
from .environment import Action, SystemState
from .stats import IntervalEstimate, cost_per_inspection, monte_carlo

__all__ = [
    "BaselineSpec",
    "BaselinePolicy",
    "OptimizeResult",
    "baseline_decision",
    "optimize_baseline",
    "write_surface_csv",
    "BASELINE_KINDS",
    "NEVER",
]

BASELINE_KINDS = ("fr", "age", "tbm", "atbm")

# Sentinel period meaning "time trigger disabled" (still a legal period >= 1).
NEVER = 10 ** 9


@dataclass(frozen=True, slots=True)
class BaselineSpec:
    """Parameters of one conventional policy; unused fields stay None.

    Thresholds are deterioration levels, periods are inspection counts.
    """

    kind: str
    repair_threshold: float | None = None
    replacement_threshold: float | None = None
    repair_period: int | None = None
    replacement_period: int | None = None

    def __post_init__(self):
        if self.kind not in BASELINE_KINDS:
            raise ValueError(f"unknown baseline kind {self.kind!r}")
        wants_thresholds = self.kind in ("tbm", "atbm")
        wants_periods = self.kind in ("age", "atbm")
        for name, wanted in (("repair_threshold", wants_thresholds),
                             ("replacement_threshold", wants_thresholds),
                             ("repair_period", wants_periods),
                             ("replacement_period", wants_periods)):
            value = getattr(self, name)
            if wanted and value is None:
                raise ValueError(f"{self.kind} policy requires {name}")
            if not wanted and value is not None:
                raise ValueError(f"{self.kind} policy does not take {name}")
        if wants_thresholds:
            if self.repair_threshold < 0.0 or self.replacement_threshold < 0.0:
                raise ValueError("thresholds must be nonnegative")
        if wants_periods:
            if self.repair_period < 1 or self.replacement_period < 1:
                raise ValueError("periods must be at least 1 inspection")


def baseline_decision(spec: BaselineSpec, s: SystemState,
                      steps_since_repair: int,
                      steps_since_replacement: int) -> Action:
    """Action of the policy at one inspection, given the elapsed-step counters.

    Replacement triggers take precedence over repair triggers; FR never acts
    (the environment forces the corrective replacement at failure).
    """
    if steps_since_repair < 0 or steps_since_replacement < 0:
        raise ValueError("counters must be nonnegative")
    if spec.kind == "fr":
        return Action.NO_ACTION
    if spec.kind == "age":
        if steps_since_replacement >= spec.replacement_period:
            return Action.REPLACE
        if steps_since_repair >= spec.repair_period:
            return Action.REPAIR
        return Action.NO_ACTION
    if spec.kind == "tbm":
        if s.x >= spec.replacement_threshold:
            return Action.REPLACE
        if s.x >= spec.repair_threshold:
            return Action.REPAIR
        return Action.NO_ACTION
    # atbm: either trigger family may fire
    if (s.x >= spec.replacement_threshold
            or steps_since_replacement >= spec.replacement_period):
        return Action.REPLACE
    if s.x >= spec.repair_threshold or steps_since_repair >= spec.repair_period:
        return Action.REPAIR
    return Action.NO_ACTION


class BaselinePolicy:
    """Stateful wrapper tracking inspections since the last repair/replacement.

    The repair counter resets on any executed maintenance action, the
    replacement counter only on replacements (including forced corrective
    ones); both count 1 at the first inspection after the action.
    """

    def __init__(self, spec: BaselineSpec):
        self.spec = spec
        self.reset()

    def reset(self) -> None:
        self.steps_since_repair = 1
        self.steps_since_replacement = 1

    def __call__(self, s: SystemState) -> Action:
        return baseline_decision(self.spec, s, self.steps_since_repair,
                                 self.steps_since_replacement)

    def observe(self, outcome) -> None:
        executed = outcome.executed_action
        if executed == Action.REPLACE:
            self.steps_since_repair = 1
            self.steps_since_replacement = 1
        elif executed == Action.REPAIR:
            self.steps_since_repair = 1
            self.steps_since_replacement += 1
        else:
            self.steps_since_repair += 1
            self.steps_since_replacement += 1


@dataclass(frozen=True)
class OptimizeResult:
    best: BaselineSpec
    best_cost: IntervalEstimate
    surface: tuple
    evaluations: int


def _intervention_tiebreak(spec: BaselineSpec) -> tuple:
    # Prefer fewer interventions: larger thresholds, then larger periods.
    return (-(spec.replacement_threshold or 0.0), -(spec.repair_threshold or 0.0),
            -(spec.replacement_period or 0), -(spec.repair_period or 0))


def _threshold_values(case: CaseConfig, step: float) -> list[float]:
    limit = case.failure_threshold
    values = [round(step * k, 10) for k in range(1, int(limit / step + 1e-9) + 1)]
    if not values or values[-1] < limit:
        values.append(limit)
    return values


def _period_values(case: CaseConfig, step: int) -> list[int]:
    # Mean inspections from new until the failure threshold sets the scale.
    t_fail = case.failure_threshold * case.beta / (case.v_coeff * case.delta_t)
    top = max(int(2.5 * t_fail) + 1, 10)
    return list(range(1, top + 1, step))


def _refine_values(center, radius, fine_step, is_period: bool):
    """Fine-resolution values within +- radius of a coarse-pass optimum."""
    lo = center - radius
    hi = center + radius
    if is_period:
        return list(range(max(1, int(lo)), int(hi) + 1))
    k0 = max(1, math.ceil(lo / fine_step - 1e-9))
    out = []
    v = k0 * fine_step
    while v <= hi + 1e-9:
        out.append(round(v, 10))
        v += fine_step
    return out


class _Evaluator:
    """Caches the Monte Carlo cost of each spec; identical specs share random
    streams, so cached values are exact replays."""

    def __init__(self, case, iterations, horizon, master_seed, sigma_mode):
        self.case = case
        self.iterations = iterations
        self.horizon = horizon
        self.master_seed = master_seed
        self.sigma_mode = sigma_mode
        self.cache: dict[BaselineSpec, IntervalEstimate] = {}

    def cost(self, spec: BaselineSpec) -> IntervalEstimate:
        est = self.cache.get(spec)
        if est is None:
            stats = monte_carlo(BaselinePolicy(spec), self.case, self.iterations,
                                self.horizon, self.master_seed, self.sigma_mode)
            est = cost_per_inspection(stats)
            self.cache[spec] = est
        return est

    def best_of(self, specs) -> tuple[BaselineSpec, IntervalEstimate]:
        ranked = [(self.cost(sp).mean, _intervention_tiebreak(sp), sp) for sp in specs]
        ranked.sort(key=lambda t: (t[0], t[1]))
        winner = ranked[0][2]
        return winner, self.cost(winner)


def _tbm_specs(reps, repls):
    return [BaselineSpec("tbm", repair_threshold=r, replacement_threshold=q)
            for q in repls for r in reps if r <= q]


def _age_specs(reps, repls):
    return [BaselineSpec("age", repair_period=r, replacement_period=q)
            for q in repls for r in reps if r <= q]


def optimize_baseline(kind: str, case: CaseConfig, grid: dict | None = None,
                      iterations: int = 40, horizon: int | None = None,
                      master_seed: int = 0, sigma_mode: str = "sum",
                      threshold_step: float = 0.25, period_step: int = 1,
                      seed_specs: list | None = None) -> OptimizeResult:
    """Pick the cheapest parameters of a policy family for one case.

    The objective is the mean cost per inspection over ``iterations`` runs of
    ``horizon`` inspections, with the same random streams for every candidate.
    TBM and Age run a coarse grid pass followed by a local refinement at the
    requested resolution; ATBM starts from the optimized TBM and Age policies
    (embedded with the complementary triggers disabled) and sweeps each of its
    four parameters cyclically until no sweep improves the cost. An explicit
    ``grid`` ({parameter name: iterable of values}) replaces the default
    search for TBM/Age. Ties go to the policy that intervenes less.
    """
    if kind == "fr":
        raise ValueError("fr has no parameters to optimize")
    if kind not in BASELINE_KINDS:
        raise ValueError(f"unknown baseline kind {kind!r}")
    if horizon is None:
        horizon = case.horizon
    ev = _Evaluator(case, iterations, horizon, master_seed, sigma_mode)
    limit = case.failure_threshold

    if kind in ("tbm", "age"):
        make = _tbm_specs if kind == "tbm" else _age_specs
        rep_key = "repair_threshold" if kind == "tbm" else "repair_period"
        repl_key = "replacement_threshold" if kind == "tbm" else "replacement_period"
        if grid is not None:
            if rep_key not in grid or repl_key not in grid:
                raise ValueError(f"{kind} grid needs {rep_key} and {repl_key} values")
            specs = make(list(grid[rep_key]), list(grid[repl_key]))
            if not specs:
                raise ValueError("grid produced no candidate policies")
            if kind == "tbm" and any(sp.replacement_threshold > limit for sp in specs):
                raise ValueError("thresholds must not exceed the failure threshold")
            best, cost = ev.best_of(specs)
        else:
            if kind == "tbm":
                coarse_step = max(threshold_step, 0.5)
                coarse = _threshold_values(case, coarse_step)
                best, cost = ev.best_of(make(coarse, coarse))
                fine_rep = [v for v in _refine_values(best.repair_threshold, coarse_step,
                                                      threshold_step, False) if v <= limit]
                fine_repl = [v for v in _refine_values(best.replacement_threshold, coarse_step,
                                                       threshold_step, False) if v <= limit]
            else:
                coarse_step = max(period_step, 3)
                coarse = _period_values(case, coarse_step)
                best, cost = ev.best_of(make(coarse, coarse))
                fine_rep = _refine_values(best.repair_period, coarse_step,
                                          period_step, True)
                fine_repl = _refine_values(best.replacement_period, coarse_step,
                                           period_step, True)
            best, cost = ev.best_of(make(fine_rep, fine_repl) + [best])
        surface = tuple((sp, est) for sp, est in ev.cache.items())
        return OptimizeResult(best, cost, surface, len(ev.cache))

    # atbm
    if seed_specs is None:
        tbm = optimize_baseline("tbm", case, None, iterations, horizon, master_seed,
                                sigma_mode, threshold_step, period_step).best
        age = optimize_baseline("age", case, None, iterations, horizon, master_seed,
                                sigma_mode, threshold_step, period_step).best
        seed_specs = [tbm, age]
    candidates = []
    for sp in seed_specs:
        if sp.kind == "tbm":
            candidates.append(BaselineSpec(
                "atbm", repair_threshold=sp.repair_threshold,
                replacement_threshold=sp.replacement_threshold,
                repair_period=NEVER, replacement_period=NEVER))
        elif sp.kind == "age":
            candidates.append(BaselineSpec(
                "atbm", repair_threshold=limit, replacement_threshold=limit,
                repair_period=sp.repair_period, replacement_period=sp.replacement_period))
        elif sp.kind == "atbm":
            candidates.append(sp)
    if not candidates:
        raise ValueError("atbm optimization needs at least one seed policy")
    best, cost = ev.best_of(candidates)

    thr_values = _threshold_values(case, threshold_step)
    per_values = _period_values(case, period_step) + [NEVER]
    sweeps = (("replacement_threshold", thr_values),
              ("repair_threshold", thr_values),
              ("replacement_period", per_values),
              ("repair_period", per_values))
    for _ in range(3):
        improved = False
        for name, values in sweeps:
            pool = []
            for v in values:
                fields = {
                    "repair_threshold": best.repair_threshold,
                    "replacement_threshold": best.replacement_threshold,
                    "repair_period": best.repair_period,
                    "replacement_period": best.replacement_period,
                }
                fields[name] = v
                if fields["repair_threshold"] > fields["replacement_threshold"]:
                    continue
                if fields["repair_period"] > fields["replacement_period"]:
                    continue
                pool.append(BaselineSpec("atbm", **fields))
            cand, cand_cost = ev.best_of(pool + [best])
            if cand != best:
                improved = True
                best, cost = cand, cand_cost
        if not improved:
            break
    surface = tuple((sp, est) for sp, est in ev.cache.items())
    return OptimizeResult(best, cost, surface, len(ev.cache))


SURFACE_COLUMNS = ("kind", "repair_threshold", "replacement_threshold",
                   "repair_period", "replacement_period",
                   "mean_cost_rate", "ci_halfwidth")


def write_surface_csv(path, surface, meta: str = "") -> None:
    """Cost surface: one row per evaluated parameter combination."""
    with open(path, "w", newline="") as fh:
        if meta:
            fh.write(f"# {meta}\n")
        w = csv.writer(fh)
        w.writerow(SURFACE_COLUMNS)
        for spec, est in surface:
            w.writerow((spec.kind,
                        "" if spec.repair_threshold is None else spec.repair_threshold,
                        "" if spec.replacement_threshold is None else spec.replacement_threshold,
                        "" if spec.repair_period is None else spec.repair_period,
                        "" if spec.replacement_period is None else spec.replacement_period,
                        est.mean, (est.upper - est.lower) / 2.0))
