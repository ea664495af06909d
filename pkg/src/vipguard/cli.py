"""Command-line entry points.

    vipguard train <config.json>
    vipguard eval <config.json> --checkpoint <path> [--baseline NAME] [--episodes N]
    vipguard render <trajectory> --out <dir> [--stride N]
    vipguard config validate <config.json>

Exit codes: 0 success, 1 invalid config or failed operation (with a
diagnostic on stderr), 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .checkpoint import load_checkpoint, save_checkpoint
from .config import load_run_config
from .errors import CheckpointError, ConfigError, ControllerError, TrajectoryError
from .evaluate import BASELINE_NAMES, evaluate, make_baseline, policy_controller
from .render import render_trace
from .scenario import scenario_digest
from .trajectory import read_trajectory
from .training import train, training_log_text


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vipguard", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train bodyguards per the config")
    p_train.add_argument("config", help="path to a JSON run config")

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint or baseline")
    p_eval.add_argument("config", help="path to a JSON run config")
    p_eval.add_argument("--checkpoint", help="checkpoint produced by `train`")
    p_eval.add_argument("--baseline", choices=BASELINE_NAMES, help="evaluate a baseline instead")
    p_eval.add_argument("--episodes", type=int, default=None, help="override eval episode count")

    p_render = sub.add_parser("render", help="render trajectory frames to SVG")
    p_render.add_argument("trajectory", help="trajectory file written by the library")
    p_render.add_argument("--out", required=True, help="output directory for frames")
    p_render.add_argument("--stride", type=int, default=1, help="render every k-th step")

    p_config = sub.add_parser("config", help="config utilities")
    config_sub = p_config.add_subparsers(dest="config_command", required=True)
    p_validate = config_sub.add_parser("validate", help="check a config file")
    p_validate.add_argument("path")

    return parser


def _cmd_train(args) -> int:
    cfg = load_run_config(args.config)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    episodes = cfg.train.episodes
    report_every = max(1, episodes // 10) if episodes else 0

    def progress(log):
        if report_every and (log.episode + 1) % report_every == 0:
            print(
                f"episode {log.episode + 1}/{episodes}  "
                f"return {log.mean_return:.3f}  threat {log.cumulative_threat:.3f}",
                file=sys.stderr,
            )

    bundle, logs = train(cfg.scenario, cfg.train, progress=progress)
    checkpoint_path = out_dir / "checkpoint.ckpt"
    log_path = out_dir / "training_log.jsonl"
    save_checkpoint(bundle, checkpoint_path)
    log_path.write_text(training_log_text(logs))
    print(f"checkpoint: {checkpoint_path}")
    print(f"training log: {log_path}")
    return 0


def _cmd_eval(args) -> int:
    cfg = load_run_config(args.config)
    episodes = args.episodes if args.episodes is not None else cfg.eval_episodes
    if args.baseline:
        controller = make_baseline(args.baseline, cfg.scenario)
        name = args.baseline
    else:
        if not args.checkpoint:
            print("eval needs --checkpoint or --baseline", file=sys.stderr)
            return 2
        bundle = load_checkpoint(args.checkpoint, expected_digest=scenario_digest(cfg.scenario))
        controller = policy_controller(bundle)
        name = "policy"
    report = evaluate(cfg.scenario, controller, episodes, cfg.scenario.seed, controller_name=name)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / f"eval_{name}.json"
    report_path.write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    print(
        f"{name}: threat mean {report.threat_mean:.4f} median {report.threat_median:.4f} "
        f"std {report.threat_std:.4f} over {episodes} episodes"
    )
    print(f"report: {report_path}")
    return 0


def _cmd_render(args) -> int:
    trace = read_trajectory(args.trajectory)
    if args.stride < 1:
        print(f"stride must be positive, got {args.stride}", file=sys.stderr)
        return 1
    paths = render_trace(trace, args.out, stride=args.stride)
    print(f"wrote {len(paths)} frames to {args.out}")
    return 0


def _cmd_config_validate(args) -> int:
    load_run_config(args.path)
    print(f"{args.path}: valid")
    return 0


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles usage errors and --help
        return int(exc.code or 0)
    try:
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "render":
            return _cmd_render(args)
        if args.command == "config":
            return _cmd_config_validate(args)
    except (ConfigError, CheckpointError, TrajectoryError, ControllerError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
