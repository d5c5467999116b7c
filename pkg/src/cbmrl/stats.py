"""Monte Carlo evaluation of maintenance policies via renewal-cycle statistics.

A run is one simulated horizon of inspections; its trace is reduced to action
counts, renewal-cycle durations (replacement to just before the next
replacement, trailing incomplete cycle dropped), and total cost. Across
independent runs the module provides normal-theory confidence intervals, the
cycle-normalized cost rate used in the benchmark tables, the plain cost per
inspection, cost shares per action type, an unavailability proxy, and a
Kolmogorov-Smirnov normality check.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .cases import CaseConfig
from .environment import CostParams, Event, StepOutcome, run_episode
from .rng import RngStream, std_normal_cdf, std_normal_quantile

__all__ = [
    "RunStatistics",
    "IntervalEstimate",
    "CostShares",
    "KsResult",
    "collect_run",
    "monte_carlo",
    "confidence_interval",
    "cost_rate_plugin",
    "long_run_cost_rate",
    "cost_per_inspection",
    "cost_breakdown",
    "availability_metric",
    "ks_normality",
    "write_results_csv",
    "summary_row",
    "write_summary_csv",
    "EVAL_STREAM_BASE",
    "RESULTS_COLUMNS",
    "SUMMARY_COLUMNS",
]

# Monte Carlo iteration i draws from stream id EVAL_STREAM_BASE + i, keeping
# evaluation streams disjoint from the trainer's substreams.
EVAL_STREAM_BASE = 1000


@dataclass(frozen=True, slots=True)
class RunStatistics:
    """Counts, complete renewal-cycle durations, and total cost of one run."""

    n_repairs: int
    n_preventive_replacements: int
    n_corrective_replacements: int
    cycle_durations: tuple
    total_cost: float
    horizon: int

    @property
    def n_replacements(self) -> int:
        return self.n_preventive_replacements + self.n_corrective_replacements

    @property
    def mean_cycle(self) -> float:
        if not self.cycle_durations:
            raise ValueError("run contains no complete renewal cycle")
        return sum(self.cycle_durations) / len(self.cycle_durations)


@dataclass(frozen=True, slots=True)
class IntervalEstimate:
    """Normal-theory confidence interval mean +- z * sd / sqrt(n)."""

    mean: float
    sd: float
    lower: float
    upper: float
    n: int


@dataclass(frozen=True, slots=True)
class CostShares:
    preventive_replacements: float
    repairs: float
    corrective_replacements: float


@dataclass(frozen=True, slots=True)
class KsResult:
    statistic: float
    critical_value: float
    passed: bool


def collect_run(trace: list[StepOutcome]) -> RunStatistics:
    """Reduce an episode trace to counts, cycle durations, and total cost."""
    n_p = n_pr = n_cr = 0
    durations = []
    prev_end = 0
    total = 0.0
    for i, out in enumerate(trace, start=1):
        total -= out.reward
        if out.event == Event.REPAIR:
            n_p += 1
        elif out.event == Event.PREVENTIVE_REPLACEMENT:
            n_pr += 1
        elif out.event == Event.CORRECTIVE_REPLACEMENT:
            n_cr += 1
        if out.event in (Event.PREVENTIVE_REPLACEMENT, Event.CORRECTIVE_REPLACEMENT):
            durations.append(i - prev_end)
            prev_end = i
    return RunStatistics(n_p, n_pr, n_cr, tuple(durations), total, len(trace))


def monte_carlo(policy, case: CaseConfig, iterations: int = 200,
                horizon: int = 1000, master_seed: int = 0,
                sigma_mode: str = "sum") -> list[RunStatistics]:
    """Independent evaluation runs of ``policy``, one random stream each.

    Two calls with the same master seed replay identical runs; sharing the
    seed across policies gives common random numbers for comparisons.
    """
    if iterations < 2:
        raise ValueError("need at least 2 iterations for interval estimates")
    proc = case.process()
    costs = case.costs()
    stats = []
    for i in range(iterations):
        rng = RngStream(master_seed, EVAL_STREAM_BASE + i)
        trace = run_episode(policy, horizon, proc, costs, rng, sigma_mode)
        stats.append(collect_run(trace))
    return stats


def confidence_interval(samples, level: float = 0.95) -> IntervalEstimate:
    """Normal-theory interval from i.i.d. samples (sd uses n-1)."""
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("need at least 2 samples for a confidence interval")
    if not 0.0 < level < 1.0:
        raise ValueError("confidence level must lie in (0, 1)")
    mean = float(x.mean())
    sd = float(x.std(ddof=1))
    z = std_normal_quantile(0.5 + level / 2.0)
    half = z * sd / math.sqrt(n)
    return IntervalEstimate(mean, sd, mean - half, mean + half, n)


def cost_rate_plugin(mean_n_p: float, mean_n_pr: float, mean_n_cr: float,
                     mean_cycle: float, costs: CostParams) -> float:
    """Cycle-normalized cost rate from horizon-level mean counts and the mean
    renewal-cycle duration.

    Note the convention: the numerator aggregates costs over the whole
    evaluation horizon while the denominator is one mean cycle length, i.e.
    the rate is expressed per (cycle duration) x (horizon) rather than per
    inspection. Use :func:`cost_per_inspection` for the plain per-inspection
    rate.
    """
    if mean_cycle <= 0.0:
        raise ValueError("mean cycle duration must be positive")
    total = (costs.c_p * mean_n_p + costs.c_r * mean_n_pr
             + (costs.c_r + costs.c_down) * mean_n_cr)
    return total / mean_cycle


def _closed_form_cost(s: RunStatistics, costs: CostParams) -> float:
    return (costs.c_p * s.n_repairs + costs.c_r * s.n_preventive_replacements
            + (costs.c_r + costs.c_down) * s.n_corrective_replacements)


def long_run_cost_rate(stats: list[RunStatistics], costs: CostParams,
                       level: float = 0.95) -> IntervalEstimate:
    """Cycle-normalized cost rate with a confidence interval.

    Each iteration contributes one ratio sample (its closed-form total cost
    over its mean complete-cycle duration); the interval is normal-theory over
    those samples. Runs without a single complete cycle are an error.
    """
    if not stats:
        raise ValueError("no run statistics supplied")
    rates = []
    for s in stats:
        if not s.cycle_durations:
            raise ValueError("every run must contain at least one complete renewal cycle")
        rates.append(_closed_form_cost(s, costs) / s.mean_cycle)
    return confidence_interval(rates, level)


def cost_per_inspection(stats: list[RunStatistics], level: float = 0.95) -> IntervalEstimate:
    """Plain long-run cost rate: total cost over the horizon, per iteration."""
    if not stats:
        raise ValueError("no run statistics supplied")
    return confidence_interval([s.total_cost / s.horizon for s in stats], level)


def cost_breakdown(stats: list[RunStatistics], costs: CostParams) -> CostShares:
    """Fractions of mean total cost due to preventive replacements, repairs,
    and corrective replacements."""
    if not stats:
        raise ValueError("no run statistics supplied")
    n = len(stats)
    c_rep = costs.c_p * sum(s.n_repairs for s in stats) / n
    c_pr = costs.c_r * sum(s.n_preventive_replacements for s in stats) / n
    c_cr = (costs.c_r + costs.c_down) * sum(s.n_corrective_replacements for s in stats) / n
    total = c_rep + c_pr + c_cr
    if total == 0.0:
        return CostShares(0.0, 0.0, 0.0)
    return CostShares(c_pr / total, c_rep / total, c_cr / total)


def availability_metric(stats: list[RunStatistics], costs: CostParams) -> float:
    """Unavailability proxy: mean corrective-replacement count times the
    downtime cost."""
    if not stats:
        raise ValueError("no run statistics supplied")
    mean_ncr = sum(s.n_corrective_replacements for s in stats) / len(stats)
    return mean_ncr * costs.c_down


def ks_normality(samples, alpha: float = 0.05) -> KsResult:
    """One-sample Kolmogorov-Smirnov statistic against a normal fitted by the
    sample mean and sd.

    The pass threshold uses the asymptotic fully-specified critical value
    (1.358/sqrt(n) at 5%); with estimated parameters this is a lenient check
    (the Lilliefors correction would be stricter).
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < 20:
        raise ValueError("need at least 20 samples for the normality check")
    sd = float(x.std(ddof=1))
    if sd == 0.0:
        raise ValueError("degenerate sample: zero standard deviation")
    mean = float(x.mean())
    f = np.array([std_normal_cdf((xi - mean) / sd) for xi in x])
    i = np.arange(1, n + 1)
    d = max(float(np.max(i / n - f)), float(np.max(f - (i - 1) / n)))
    if alpha == 0.05:
        coeff = 1.358
    elif alpha == 0.01:
        coeff = 1.628
    else:
        raise ValueError("supported significance levels: 0.05, 0.01")
    crit = coeff / math.sqrt(n)
    return KsResult(d, crit, d < crit)


RESULTS_COLUMNS = ("iteration", "n_p", "n_pr", "n_cr", "mean_cycle",
                   "total_cost", "cost_rate", "cost_per_inspection")


def write_results_csv(path, stats: list[RunStatistics], costs: CostParams,
                      meta: str = "") -> None:
    """Per-iteration results table; ``cost_rate`` is the cycle-normalized
    convention, blank when the run has no complete cycle."""
    with open(path, "w", newline="") as fh:
        if meta:
            fh.write(f"# {meta}\n")
        w = csv.writer(fh)
        w.writerow(RESULTS_COLUMNS)
        for i, s in enumerate(stats):
            rate = (_closed_form_cost(s, costs) / s.mean_cycle
                    if s.cycle_durations else "")
            w.writerow((i, s.n_repairs, s.n_preventive_replacements,
                        s.n_corrective_replacements,
                        s.mean_cycle if s.cycle_durations else "",
                        s.total_cost, rate, s.total_cost / s.horizon))


SUMMARY_COLUMNS = (
    "case", "policy", "iterations", "horizon",
    "n_p_mean", "n_p_sd", "n_p_lower", "n_p_upper",
    "n_pr_mean", "n_pr_sd", "n_pr_lower", "n_pr_upper",
    "n_cr_mean", "n_cr_sd", "n_cr_lower", "n_cr_upper",
    "cycle_mean", "cycle_sd", "cycle_lower", "cycle_upper",
    "cost_rate_mean", "cost_rate_lower", "cost_rate_upper",
    "cost_per_inspection_mean", "cost_per_inspection_lower", "cost_per_inspection_upper",
    "availability_impact",
)


def summary_row(case: CaseConfig, policy_name: str,
                stats: list[RunStatistics]) -> dict:
    """One summary record in the layout of the benchmark tables."""
    costs = case.costs()
    n_p = confidence_interval([s.n_repairs for s in stats])
    n_pr = confidence_interval([s.n_preventive_replacements for s in stats])
    n_cr = confidence_interval([s.n_corrective_replacements for s in stats])
    cyc = confidence_interval([s.mean_cycle for s in stats])
    rate = long_run_cost_rate(stats, costs)
    per_insp = cost_per_inspection(stats)
    return {
        "case": case.case_id, "policy": policy_name,
        "iterations": len(stats), "horizon": stats[0].horizon,
        "n_p_mean": n_p.mean, "n_p_sd": n_p.sd,
        "n_p_lower": n_p.lower, "n_p_upper": n_p.upper,
        "n_pr_mean": n_pr.mean, "n_pr_sd": n_pr.sd,
        "n_pr_lower": n_pr.lower, "n_pr_upper": n_pr.upper,
        "n_cr_mean": n_cr.mean, "n_cr_sd": n_cr.sd,
        "n_cr_lower": n_cr.lower, "n_cr_upper": n_cr.upper,
        "cycle_mean": cyc.mean, "cycle_sd": cyc.sd,
        "cycle_lower": cyc.lower, "cycle_upper": cyc.upper,
        "cost_rate_mean": rate.mean,
        "cost_rate_lower": rate.lower, "cost_rate_upper": rate.upper,
        "cost_per_inspection_mean": per_insp.mean,
        "cost_per_inspection_lower": per_insp.lower,
        "cost_per_inspection_upper": per_insp.upper,
        "availability_impact": availability_metric(stats, costs),
    }


def write_summary_csv(path, rows: list[dict], meta: str = "") -> None:
    with open(path, "w", newline="") as fh:
        if meta:
            fh.write(f"# {meta}\n")
        w = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow(row)
