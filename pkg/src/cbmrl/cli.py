"""Command-line front end: train, evaluate, optimize, compare, trace.

All commands are deterministic under --seed, default to the baseline case,
and write flat CSV/JSON artifacts whose first line is a '#' comment carrying
the seed and a hash of the effective configuration.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import asdict

from .agent import AgentConfig, greedy_policy, train, write_training_log
from .baselines import (BASELINE_KINDS, BaselinePolicy, BaselineSpec,
                        optimize_baseline, write_surface_csv)
from .cases import BASELINE_CASE_ID, CaseConfig, CaseFormatError, load_case
from .environment import MaintenanceEnv, run_episode, write_trace_csv
from .network import load_mlp, save_mlp
from .rng import RngStream
from .stats import (cost_per_inspection, long_run_cost_rate, monte_carlo,
                    summary_row, write_results_csv, write_summary_csv)

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_MISSING_ARTIFACT = 4


class ValidationError(Exception):
    pass


class MissingArtifactError(Exception):
    pass


def _config_hash(case: CaseConfig, extra: dict) -> str:
    doc = {"case": asdict(case), **extra}
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:12]


def _meta(case: CaseConfig, seed: int, **extra) -> str:
    return f"seed={seed} case={case.case_id} config={_config_hash(case, extra)}"


def _load_spec_file(path) -> BaselineSpec:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise MissingArtifactError(
            f"baseline spec {path} not found; produce it with "
            f"`cbmrl optimize --baseline <kind> --best {path}`") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON at line {exc.lineno}: {exc.msg}") from exc
    try:
        return BaselineSpec(**raw)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _save_spec_file(path, spec: BaselineSpec) -> None:
    doc = {k: v for k, v in asdict(spec).items() if v is not None}
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _policy_from_args(args, case: CaseConfig):
    """Resolve --model / --policy / --spec into (name, policy callable)."""
    chosen = [x for x in (args.model, args.policy, args.spec) if x]
    if len(chosen) != 1:
        raise ValidationError("choose exactly one of --model, --policy, --spec")
    if args.model:
        try:
            net, metadata = load_mlp(args.model)
        except FileNotFoundError as exc:
            raise MissingArtifactError(
                f"model file {args.model} not found; train one with `cbmrl train`") from exc
        trained_on = metadata.get("case_id")
        if trained_on is not None and trained_on != case.case_id:
            print(f"warning: model was trained on case {trained_on}, "
                  f"evaluating on case {case.case_id}", file=sys.stderr)
        return "rl", greedy_policy(net, case.failure_threshold)
    if args.spec:
        spec = _load_spec_file(args.spec)
        _check_thresholds(spec, case)
        return spec.kind, BaselinePolicy(spec)
    kind = args.policy
    if kind not in BASELINE_KINDS:
        raise ValidationError(f"unknown policy kind {kind!r}; valid: {BASELINE_KINDS}")
    fields = {}
    if kind in ("tbm", "atbm"):
        fields["repair_threshold"] = args.repair_threshold
        fields["replacement_threshold"] = args.replacement_threshold
    if kind in ("age", "atbm"):
        fields["repair_period"] = args.repair_period
        fields["replacement_period"] = args.replacement_period
    if any(v is None for v in fields.values()):
        missing = [k for k, v in fields.items() if v is None]
        raise ValidationError(f"{kind} policy needs --" +
                              ", --".join(m.replace('_', '-') for m in missing))
    try:
        spec = BaselineSpec(kind, **fields)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    _check_thresholds(spec, case)
    return kind, BaselinePolicy(spec)


def _check_thresholds(spec: BaselineSpec, case: CaseConfig) -> None:
    for name in ("repair_threshold", "replacement_threshold"):
        value = getattr(spec, name)
        if value is not None and value > case.failure_threshold:
            raise ValidationError(
                f"{name}={value} exceeds the failure threshold {case.failure_threshold}")


def _print_summary(row: dict) -> None:
    print(f"case {row['case']} policy={row['policy']} "
          f"({row['iterations']} iterations x {row['horizon']} inspections)")
    print(f"  {'metric':<26}{'mean':>10}{'sd':>9}{'95% CI':>22}")
    for label, key in (("repairs N_P", "n_p"), ("preventive repl. N_PR", "n_pr"),
                       ("corrective repl. N_CR", "n_cr"), ("cycle duration S", "cycle")):
        print(f"  {label:<26}{row[key + '_mean']:>10.2f}{row[key + '_sd']:>9.2f}"
              f"{row[key + '_lower']:>11.2f}{row[key + '_upper']:>11.2f}")
    print(f"  {'cost rate (per cycle)':<26}{row['cost_rate_mean']:>10.1f}"
          f"{'':>9}{row['cost_rate_lower']:>11.1f}{row['cost_rate_upper']:>11.1f}")
    print(f"  {'cost per inspection':<26}{row['cost_per_inspection_mean']:>10.2f}"
          f"{'':>9}{row['cost_per_inspection_lower']:>11.2f}"
          f"{row['cost_per_inspection_upper']:>11.2f}")
    print(f"  {'availability impact':<26}{row['availability_impact']:>10.1f}")


def cmd_train(args) -> int:
    case = load_case(args.case)
    cfg = AgentConfig(
        max_episodes=args.episodes, episode_length=args.episode_length,
        hidden_sizes=tuple(args.hidden), learn_rate=args.lr, gamma=args.gamma,
        batch_size=args.batch_size, buffer_capacity=args.buffer,
        tau=args.tau, target_update=args.target_update,
        target_update_interval=args.target_update_interval,
        reward_scale=args.reward_scale, seed=args.seed)
    proc, costs = case.process(), case.costs()

    def factory(rng: RngStream):
        return MaintenanceEnv(proc, costs, rng, args.sigma_mode)

    net, logs = train(factory, cfg)
    metadata = {"case_id": case.case_id, "seed": args.seed,
                "episodes": cfg.max_episodes, "episode_length": cfg.episode_length,
                "reward_scale": cfg.reward_scale, "sigma_mode": args.sigma_mode}
    save_mlp(args.out, net, metadata)
    log_path = args.log or (str(args.out) + ".log.csv")
    write_training_log(log_path, logs, _meta(case, args.seed, episodes=cfg.max_episodes))
    print(f"trained {cfg.max_episodes} episodes on case {case.case_id}; "
          f"model -> {args.out}, log -> {log_path}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    case = load_case(args.case)
    if args.iterations < 2:
        raise ValidationError("need --iterations >= 2 for confidence intervals")
    name, policy = _policy_from_args(args, case)
    stats = monte_carlo(policy, case, args.iterations, args.horizon,
                        args.seed, args.sigma_mode)
    row = summary_row(case, name, stats)
    _print_summary(row)
    meta = _meta(case, args.seed, policy=name, iterations=args.iterations,
                 horizon=args.horizon)
    if args.out:
        write_results_csv(args.out, stats, case.costs(), meta)
        print(f"per-iteration results -> {args.out}")
    if args.summary:
        write_summary_csv(args.summary, [row], meta)
        print(f"summary -> {args.summary}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    case = load_case(args.case)
    kind = args.baseline
    if kind == "fr":
        raise ValidationError("fr has no parameters to optimize")
    if kind not in BASELINE_KINDS:
        raise ValidationError(f"unknown baseline kind {kind!r}")
    result = optimize_baseline(kind, case, None, args.iterations, args.horizon,
                               args.seed, args.sigma_mode,
                               args.threshold_step, args.period_step)
    fields = {k: v for k, v in asdict(result.best).items() if v is not None and k != "kind"}
    print(f"best {kind} on case {case.case_id}: {fields} "
          f"cost/inspection {result.best_cost.mean:.2f} "
          f"[{result.best_cost.lower:.2f}, {result.best_cost.upper:.2f}] "
          f"({result.evaluations} candidate policies)")
    meta = _meta(case, args.seed, baseline=kind, iterations=args.iterations)
    if args.out:
        write_surface_csv(args.out, result.surface, meta)
        print(f"cost surface -> {args.out}")
    if args.best:
        _save_spec_file(args.best, result.best)
        print(f"best spec -> {args.best}")
    return EXIT_OK


def cmd_compare(args) -> int:
    case = load_case(args.case)
    try:
        net, metadata = load_mlp(args.model)
    except FileNotFoundError as exc:
        raise MissingArtifactError(
            f"model file {args.model} not found; run `cbmrl train --case "
            f"{case.case_id}` first") from exc
    trained_on = metadata.get("case_id")
    if trained_on is not None and trained_on != case.case_id:
        print(f"warning: model was trained on case {trained_on}, "
              f"comparing on case {case.case_id}", file=sys.stderr)
    policies = {"rl": greedy_policy(net, case.failure_threshold),
                "fr": BaselinePolicy(BaselineSpec("fr"))}
    for kind, path in (("tbm", args.tbm), ("age", args.age), ("atbm", args.atbm)):
        if path is None:
            raise MissingArtifactError(
                f"missing optimized {kind} spec; run `cbmrl optimize --baseline {kind} "
                f"--case {case.case_id} --best {kind}.json` and pass --{kind}")
        spec = _load_spec_file(path)
        if spec.kind != kind:
            raise ValidationError(f"{path}: expected a {kind} spec, found {spec.kind}")
        _check_thresholds(spec, case)
        policies[kind] = BaselinePolicy(spec)

    all_stats = {name: monte_carlo(policy, case, args.iterations, args.horizon,
                                   args.seed, args.sigma_mode)
                 for name, policy in policies.items()}
    per_insp = {name: cost_per_inspection(stats) for name, stats in all_stats.items()}
    cycle_rate = {name: long_run_cost_rate(stats, case.costs())
                  for name, stats in all_stats.items()}
    rl_mean = per_insp["rl"].mean

    meta = _meta(case, args.seed, iterations=args.iterations, horizon=args.horizon)
    if args.out:
        names = list(policies)
        with open(args.out, "w", newline="") as fh:
            fh.write(f"# {meta}\n")
            w = csv.writer(fh)
            w.writerow(["iteration"] + [f"total_cost_{n}" for n in names])
            for i in range(args.iterations):
                w.writerow([i] + [all_stats[n][i].total_cost for n in names])
        print(f"per-iteration cost distributions -> {args.out}")

    print(f"case {case.case_id} comparison "
          f"({args.iterations} iterations x {args.horizon} inspections, "
          f"common random numbers)")
    print(f"  {'policy':<8}{'cost/inspection':>16}{'cycle cost rate':>17}"
          f"{'reduction by rl':>17}")
    rows = []
    for name in policies:
        reduction = 100.0 * (1.0 - rl_mean / per_insp[name].mean)
        rows.append((name, per_insp[name].mean, cycle_rate[name].mean, reduction))
        print(f"  {name:<8}{per_insp[name].mean:>16.2f}{cycle_rate[name].mean:>17.1f}"
              f"{reduction:>16.1f}%")
    if args.reductions:
        with open(args.reductions, "w", newline="") as fh:
            fh.write(f"# {meta}\n")
            w = csv.writer(fh)
            w.writerow(("policy", "cost_per_inspection", "cycle_cost_rate",
                        "rl_reduction_pct"))
            w.writerows(rows)
        print(f"reduction table -> {args.reductions}")
    return EXIT_OK


def cmd_trace(args) -> int:
    case = load_case(args.case)
    name, policy = _policy_from_args(args, case)
    rng = RngStream(args.seed, 0)
    trace = run_episode(policy, args.steps, case.process(), case.costs(),
                        rng, args.sigma_mode)
    meta = _meta(case, args.seed, policy=name, steps=args.steps)
    write_trace_csv(args.out, trace, meta)
    print(f"{args.steps}-inspection {name} trace -> {args.out}")
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--case", default=BASELINE_CASE_ID,
                   help="builtin case id (1-7) or path to a JSON case file")
    p.add_argument("--seed", type=int, default=0, help="master random seed")
    p.add_argument("--sigma-mode", choices=("sum", "diff"), default="sum",
                   help="repair spread rule: (x_m+x)/6 or (x-x_m)/6")


def _add_policy_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", help="trained model JSON file")
    p.add_argument("--policy", help="baseline kind: fr, tbm, age, atbm")
    p.add_argument("--spec", help="baseline spec JSON file")
    p.add_argument("--repair-threshold", type=float)
    p.add_argument("--replacement-threshold", type=float)
    p.add_argument("--repair-period", type=int)
    p.add_argument("--replacement-period", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cbmrl",
        description="Simulate, train, and benchmark maintenance policies for "
                    "a unit degrading by gamma increments with increasingly "
                    "imperfect repairs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a DDQN maintenance agent")
    _add_common(p)
    p.add_argument("--episodes", type=int, default=5000,
                   help="training episodes (study setting: 50000)")
    p.add_argument("--episode-length", type=int, default=500)
    p.add_argument("--hidden", type=int, nargs="+", default=[64, 64])
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--gamma", type=float, default=0.99)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--buffer", type=int, default=10000)
    p.add_argument("--tau", type=float, default=0.001)
    p.add_argument("--target-update", choices=("soft", "hard"), default="soft")
    p.add_argument("--target-update-interval", type=int, default=1000)
    p.add_argument("--reward-scale", type=float, default=1e-3)
    p.add_argument("--out", required=True, help="model output path (JSON)")
    p.add_argument("--log", help="training log CSV (default: <out>.log.csv)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="Monte Carlo evaluation of a policy")
    _add_common(p)
    _add_policy_source(p)
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--horizon", type=int, default=1000)
    p.add_argument("--out", help="per-iteration results CSV")
    p.add_argument("--summary", help="summary CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("optimize", help="grid-optimize a baseline policy")
    _add_common(p)
    p.add_argument("--baseline", required=True, help="tbm, age, or atbm")
    p.add_argument("--iterations", type=int, default=40)
    p.add_argument("--horizon", type=int, default=1000)
    p.add_argument("--threshold-step", type=float, default=0.25)
    p.add_argument("--period-step", type=int, default=1)
    p.add_argument("--out", help="cost-surface CSV")
    p.add_argument("--best", help="write the optimized spec to this JSON file")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("compare", help="compare a trained agent against "
                                       "FR and optimized TBM/Age/ATBM")
    _add_common(p)
    p.add_argument("--model", required=True, help="trained model JSON file")
    p.add_argument("--tbm", help="optimized TBM spec JSON")
    p.add_argument("--age", help="optimized Age spec JSON")
    p.add_argument("--atbm", help="optimized ATBM spec JSON")
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--horizon", type=int, default=1000)
    p.add_argument("--out", help="per-iteration cost distribution CSV")
    p.add_argument("--reductions", help="relative-reduction table CSV")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("trace", help="export one inspection-by-inspection trace")
    _add_common(p)
    _add_policy_source(p)
    p.add_argument("--steps", type=int, default=250)
    p.add_argument("--out", required=True, help="trace CSV path")
    p.set_defaults(func=cmd_trace)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, CaseFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except MissingArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_ARTIFACT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
