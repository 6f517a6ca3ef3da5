"""
Entrypoint script for expanding-graph filter experiments.

Generates synthetic node streams, runs the online learners with
hyperparameter selection, audits regret bounds and re-aggregates results.

Usage:
  python graph_experiments.py generate --config configs/synthetic-filter.yml --output data/streams
  python graph_experiments.py run --config configs/synthetic-filter.yml --seed 7
  python graph_experiments.py audit --config configs/audit.yml --seed 7
  python graph_experiments.py report results/synthetic-filter
"""

import argparse
import logging
import sys

from expanding_graph_filters.config_handler.load_configs import load_config_yml
from expanding_graph_filters.models import GraphFilterError
from expanding_graph_filters.pipeline import generate_dataset, report, run_experiment, validate_bounds

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BOUND_VIOLATION = 2

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Online graph-filter learning over expanding graphs")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    subparsers = parser.add_subparsers(dest="command", required=True)

    def common(sub: argparse.ArgumentParser, seed_required: bool = False) -> None:
        sub.add_argument("--config", help="Experiment YAML merged over configs/default.yml")
        sub.add_argument("--seed", type=int, required=seed_required, help="Master seed")
        sub.add_argument("--output", help="Output directory")
        sub.add_argument("--realizations", type=int, help="Number of realizations")
        sub.add_argument("--max-workers", type=int, help="Concurrent runs")

    common(subparsers.add_parser("generate", help="Generate synthetic node streams"))
    common(subparsers.add_parser("run", help="Run experiments"), seed_required=True)
    common(subparsers.add_parser("audit", help="Audit regret bounds"))

    report_parser = subparsers.add_parser("report", help="Re-aggregate per-run CSVs")
    report_parser.add_argument("output_dir", help="Directory written by 'run'")
    return parser


def overrides_from_args(args: argparse.Namespace) -> dict:
    """Command-line flags as a config fragment (the config file wins over them)."""
    overrides: dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.output is not None:
        overrides["output"] = {"base_path": args.output}
    if args.realizations is not None:
        if args.command == "audit":
            overrides["audit"] = {"realizations": args.realizations}
        else:
            overrides["realizations"] = args.realizations
    if args.max_workers is not None:
        overrides["max_workers"] = args.max_workers
    return overrides


def main(argv: list[str] | None = None) -> int:
    """Main entrypoint; returns the process exit code."""
    args = build_parser().parse_args(argv)
    logging.getLogger().setLevel(args.log_level)

    try:
        if args.command == "report":
            df = report(args.output_dir)
            print(f"\n[SUCCESS] Report over {len(df)} dataset/learner pairs written to {args.output_dir}")
            return EXIT_OK

        config = load_config_yml(config_path=args.config, overrides=overrides_from_args(args))
        print(f"Loaded configuration '{config.name}': {len(config.learners)} learners, seed {config.seed}")

        if args.command == "generate":
            output = args.output or config.output.base_path
            paths = generate_dataset(config.data.synthetic, output, config.realizations, config.seed)
            print(f"\n[SUCCESS] Generated {len(paths)} streams under {output}")
            return EXIT_OK

        if args.command == "audit":
            result = validate_bounds(config)
            if result.success:
                print(f"\n[SUCCESS] {len(result.audits)} audited runs within their bounds")
                return EXIT_OK
            if any(not a.passed for a in result.audits):
                for audit in result.audits:
                    if not audit.passed:
                        print(f"[VIOLATION] {audit.learner}/{audit.realization}: {audit.violations} steps, worst t={audit.worst_step}")
                return EXIT_BOUND_VIOLATION
            print(f"\n[FAILED] Audit failed: {result.error}")
            return EXIT_ERROR

        result = run_experiment(config)
        if result.success:
            print(f"\n[SUCCESS] {len(result.runs)} runs, {len(result.files)} files written to {result.output_dir}")
            return EXIT_OK
        print(f"\n[FAILED] Experiment failed: {result.error}")
        return EXIT_ERROR

    except FileNotFoundError as e:
        print(f"File not found: {e}")
        return EXIT_ERROR
    except GraphFilterError as e:
        print(f"Experiment error: {e}")
        return EXIT_ERROR
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
