"""Command-line front end: train, eval, calibrate, sweep."""

from __future__ import annotations

import argparse
import os
import sys

from .harness import (
    ALGORITHMS,
    ConfigError,
    calibration_report,
    emit_results,
    evaluate,
    load_config,
    load_policy,
    resolve_scenario,
    run_training,
    save_run,
)
from .seeding import CALIBRATE, derive_rng


def _overrides(args) -> dict:
    out = {}
    if getattr(args, "algo", None):
        out["algorithm"] = args.algo
    if getattr(args, "episodes", None) is not None:
        out["episodes"] = args.episodes
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    if getattr(args, "out", None):
        out["output_dir"] = args.out
    return out


def _print_summary(summary) -> None:
    for name, (mean, std) in summary.metrics.items():
        print(f"{name}: mean={mean:.6g} std={std:.6g}")


def cmd_train(args) -> int:
    exp = load_config(args.config, _overrides(args))
    run = run_training(exp)
    summary = evaluate(run.policy, run.scenario, exp.eval_episodes, exp.seed)
    emit_results(run.records, summary, exp.output_dir)
    save_run(run, exp, exp.output_dir)
    final = run.records[-200:]
    mean_final = sum(r.total_reward for r in final) / len(final)
    print(f"trained {exp.algorithm} for {len(run.records)} episodes "
          f"(final-{len(final)} mean reward {mean_final:.4f})")
    print(f"results written to {exp.output_dir}")
    _print_summary(summary)
    return 0


def cmd_eval(args) -> int:
    exp = load_config(args.config, _overrides(args))
    scenario, _ = resolve_scenario(exp)
    policy = load_policy(args.checkpoint, scenario)
    summary = evaluate(policy, scenario, args.episodes, exp.seed)
    _print_summary(summary)
    return 0


def cmd_calibrate(args) -> int:
    exp = load_config(args.config, _overrides(args))
    scenario, info = resolve_scenario(exp)
    report = calibration_report(
        scenario.radio,
        scenario.qos.tolerable_delay_s,
        scenario.data_bits_range,
        derive_rng(exp.seed, CALIBRATE, 1),
    )
    print(f"unit_mode: {info.unit_mode}")
    print(f"demand_scale: {info.demand_scale!r}")
    print(f"d/tau min/median/max: {report.ratio_min:.6g} / {report.ratio_median:.6g} / {report.ratio_max:.6g}")
    print(f"threshold d/tau: {report.threshold_ratio:.6g}")
    print(f"fraction dissatisfied: {report.frac_dissatisfied:.4f}")
    print(f"fraction satisfied: {report.frac_satisfied:.4f}")
    print(f"status: {'DEGENERATE' if report.degenerate else 'OK'}")
    return 0


def cmd_sweep(args) -> int:
    users = [int(u) for u in args.users.split(",")]
    algos = args.algos.split(",")
    for algo in algos:
        if algo not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {algo!r} in --algos")
    base_out = args.out or "sweep_results"
    for n in users:
        for algo in algos:
            overrides = _overrides(args)
            overrides.update({"num_users": n, "algorithm": algo,
                              "output_dir": os.path.join(base_out, f"{algo}_n{n}")})
            exp = load_config(args.config, overrides)
            run = run_training(exp)
            summary = evaluate(run.policy, run.scenario, exp.eval_episodes, exp.seed)
            emit_results(run.records, summary, exp.output_dir)
            save_run(run, exp, exp.output_dir)
            final = run.records[-200:]
            mean_final = sum(r.total_reward for r in final) / len(final)
            print(f"[sweep] users={n} algo={algo} episodes={len(run.records)} "
                  f"final mean reward {mean_final:.4f} -> {exp.output_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chanalloc",
        description="QoS-driven downlink channel allocation: training and evaluation harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train one algorithm and emit metrics CSVs")
    train.add_argument("--config", required=True, help="path to a key=value config file")
    train.add_argument("--algo", choices=ALGORITHMS, help="override the configured algorithm")
    train.add_argument("--episodes", type=int, help="override the number of training episodes")
    train.add_argument("--seed", type=int, help="override the master seed")
    train.add_argument("--out", help="override the output directory")
    train.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval", help="evaluate a saved checkpoint")
    ev.add_argument("--checkpoint", required=True, help="manifest.json or its directory")
    ev.add_argument("--config", required=True)
    ev.add_argument("--episodes", type=int, default=100)
    ev.add_argument("--seed", type=int)
    ev.set_defaults(func=cmd_eval)

    cal = sub.add_parser("calibrate", help="report the d/tau distribution for the configured scenario")
    cal.add_argument("--config", required=True)
    cal.add_argument("--seed", type=int)
    cal.set_defaults(func=cmd_calibrate)

    sweep = sub.add_parser("sweep", help="train a grid of user counts x algorithms")
    sweep.add_argument("--users", required=True, help="comma list, e.g. 4,5,6,7")
    sweep.add_argument("--algos", required=True, help="comma list of algorithm names")
    sweep.add_argument("--config", help="base config file (defaults apply when omitted)")
    sweep.add_argument("--episodes", type=int)
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--out", help="base output directory")
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
