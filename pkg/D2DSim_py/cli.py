"""
Command-line entry point.

    python cli.py train --config configs/desk_scale.conf --seed 3 --d2d 4
    python cli.py eval  --algo dqn --model models_store/dqn_d4_s3.json --d2d 4 --seed 3
    python cli.py sweep --config configs/desk_scale.conf --out results.csv
    python cli.py serve

Exit status: 0 on success, 1 on any simulator or I/O error, 2 on usage errors.
"""
import argparse
import logging
import os
import sys
import time
from typing import Any, Dict, List, Optional

from core.config import settings
from core.exceptions import SimulatorError, SweepError
from models.experiment import ALGORITHMS, ExperimentConfig
from services.experiment_service import (
    EVAL_STREAM,
    TRAIN_STREAM,
    group_rng,
    run_sweep,
    summarize_results,
    to_result_row,
)
from services.training_service import (
    draw_scenarios,
    evaluate,
    evaluate_policy,
    max_power_baseline,
    olpc_baseline,
    train,
)
from utils.config_loader import load_config, load_overrides
from utils.file_storage import (
    model_path_for,
    read_model,
    resolve_output_path,
    write_history,
    write_model,
    write_results,
    write_summary,
)

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="d2dsim", description="D2D underlay power-control simulator")
    parser.add_argument(
        "--log-level",
        type=str.upper,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default=None,
        help="Logging level (defaults to LOG_LEVEL from the environment)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser):
        p.add_argument("--config", default=None, help="Experiment config file (key = value lines)")
        p.add_argument("--seed", type=int, default=None, help="Random seed (unsigned 64-bit)")
        p.add_argument("--episodes", type=int, default=None, help="Training episodes")
        p.add_argument("--out", default=None, help="Output path")

    train_p = sub.add_parser("train", help="Train the DQN agents and store the weights")
    add_common(train_p)
    train_p.add_argument("--d2d", type=int, default=None, help="Number of D2D pairs")

    eval_p = sub.add_parser("eval", help="Evaluate one algorithm on held-out topologies")
    add_common(eval_p)
    eval_p.add_argument("--d2d", type=int, default=None, help="Number of D2D pairs")
    eval_p.add_argument("--algo", choices=ALGORITHMS, default="dqn", help="Algorithm to evaluate")
    eval_p.add_argument("--model", default=None, help="Weight file for --algo dqn")

    sweep_p = sub.add_parser("sweep", help="Run every (algorithm, D, seed) cell and write the results CSV")
    add_common(sweep_p)
    sweep_p.add_argument("--d2d", type=int, default=None, help="Sweep a single D value")
    sweep_p.add_argument("--algo", choices=ALGORITHMS, default=None, help="Sweep a single algorithm")
    sweep_p.add_argument("--workers", type=int, default=None, help="Worker processes (defaults to SWEEP_WORKERS)")

    serve_p = sub.add_parser("serve", help="Start the HTTP service")
    serve_p.add_argument("--host", default="0.0.0.0")
    serve_p.add_argument("--port", type=int, default=None)
    return parser


def _load(args: argparse.Namespace, overrides: Dict[str, Any]) -> ExperimentConfig:
    path = args.config or settings.DEFAULT_CONFIG_PATH
    base = load_config(path) if path else None
    if args.episodes is not None:
        overrides["episodes"] = args.episodes
    if args.seed is not None:
        overrides["seeds"] = [args.seed]
    return load_overrides(overrides, base)


def _single_cell(args: argparse.Namespace) -> ExperimentConfig:
    overrides: Dict[str, Any] = {}
    if args.d2d is not None:
        overrides["num_d2d_pairs"] = args.d2d
    return _load(args, overrides)


def cmd_train(args: argparse.Namespace) -> int:
    config = _single_cell(args)
    seed = config.seeds[0]
    d2d_count = config.cell.num_d2d_pairs
    result = train(config, group_rng(seed, d2d_count, TRAIN_STREAM))

    model_path = args.out or model_path_for(d2d_count, seed, config.model_dir)
    write_model(result.networks, model_path, seed=result.seed)
    write_history(result.history, os.path.splitext(model_path)[0] + ".history.csv")
    print(f"model written to {model_path}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    config = _single_cell(args)
    seed = config.seeds[0]
    d2d_count = config.cell.num_d2d_pairs
    scenarios = draw_scenarios(config, group_rng(seed, d2d_count, EVAL_STREAM), config.env.eval_topologies)

    start_time = time.perf_counter()
    if args.algo == "dqn":
        if not args.model:
            raise SimulatorError("eval --algo dqn needs --model <weight file>")
        metrics = evaluate(read_model(args.model), scenarios, config)
    elif args.algo == "max_power":
        metrics = evaluate_policy(max_power_baseline(config), scenarios, config)
    else:
        metrics = evaluate_policy(olpc_baseline(config), scenarios, config)
    row = to_result_row(args.algo, d2d_count, seed, metrics, time.perf_counter() - start_time)

    if args.out:
        write_results([row], resolve_output_path(args.out))
    print(
        f"{row.algorithm} D={row.d2d_count} seed={row.seed}: "
        f"system {row.system_throughput_bps_hz:.6f} bps/Hz, "
        f"d2d {row.d2d_throughput_bps_hz:.6f} bps/Hz, "
        f"CUE QoS {row.cue_qos_rate:.4f}"
    )
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    overrides: Dict[str, Any] = {}
    if args.d2d is not None:
        overrides["d2d_counts"] = [args.d2d]
    if args.algo is not None:
        overrides["algorithms"] = [args.algo]
    if args.out is not None:
        overrides["output_path"] = args.out
    config = _load(args, overrides)
    out_path = resolve_output_path(config.output_path)

    try:
        rows = run_sweep(config, workers=args.workers)
    except SweepError as e:
        # keep the cells that did finish
        write_results(e.rows, out_path)
        raise
    write_results(rows, out_path)
    write_summary(summarize_results(rows), os.path.splitext(out_path)[0] + ".summary.csv")
    print(f"{len(rows)} rows written to {out_path}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn
    from main import app

    uvicorn.run(app, host=args.host, port=args.port or settings.PORT)
    return 0


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "sweep": cmd_sweep, "serve": cmd_serve}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=(args.log_level or settings.LOG_LEVEL).upper())
    try:
        return COMMANDS[args.command](args)
    except (SimulatorError, OSError) as e:
        logger.error(f"❌ {args.command} failed: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
