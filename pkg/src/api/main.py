"""
Command Line Interface
Entry point dispatching the data pipeline, training, evaluation and
verification commands through the service container
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence

from pydantic import BaseModel, ValidationError

from ..application.dto.requests import (
    AggregateRankingsRequest, AggregateRequest, EvaluateRequest, PredictIntentsRequest,
    VerifyTheoremsRequest
)
from ..application.use_cases import (
    AggregateMetricsUseCase, AggregateRankingsUseCase, EvaluateUseCase, GenerateSyntheticUseCase,
    IngestSessionsUseCase, PredictIntentsUseCase, TrainEnsembleUseCase, VerifyTheoremsUseCase
)
from ..config.run_config import RunConfig, load_run_config
from ..config.settings import LoggingSettings, get_settings
from ..domain.exceptions import IntelValidationError
from ..domain.repositories.idataset_repository import ISessionRepository
from ..infrastructure.di.container import ServiceContainer, build_container
from ..infrastructure.repositories.session_repository import JsonlSessionRepository

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    """Bad command line"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def configure_logging(settings: LoggingSettings) -> None:
    logging.basicConfig(level=settings.level.upper(), format=settings.format)
    if settings.file_path:
        handler = logging.FileHandler(settings.file_path, encoding="utf-8")
        handler.setFormatter(logging.Formatter(settings.format))
        logging.getLogger().addHandler(handler)


def _emit(result) -> None:
    if isinstance(result, list):
        payload = [item.model_dump(mode="json") for item in result]
    elif isinstance(result, BaseModel):
        payload = result.model_dump(mode="json")
    else:
        payload = result
    print(json.dumps(payload, indent=2, sort_keys=True))


def _config_args(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--config", required=required, help="YAML run configuration")
    parser.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
        help="Override a configuration field (repeatable)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="intel", description="Intent-aware ranking ensemble")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    _config_args(commands.add_parser("ingest", help="Build sessions from interactions and basic lists"))
    _config_args(commands.add_parser("gen-synthetic", help="Generate a synthetic dataset and its sessions"))
    _config_args(commands.add_parser("train", help="Train the ensemble for every configured seed"))

    evaluate = commands.add_parser("evaluate", help="Evaluate trained checkpoints and baselines")
    _config_args(evaluate)
    evaluate.add_argument("--checkpoint", type=Path, help="Evaluate one checkpoint only")
    evaluate.add_argument("--baselines", nargs="*", help="single:k, borda, rra (default: evaluation.baselines)")
    evaluate.add_argument("--skip-model", action="store_true", help="Evaluate only the baselines")
    evaluate.add_argument("--split", default="test", choices=["validation", "test"])

    aggregate = commands.add_parser("aggregate", help="Rank sessions with an unsupervised aggregation method")
    _config_args(aggregate, required=False)
    aggregate.add_argument("--method", required=True, help="single:k, borda or rra")
    aggregate.add_argument("--in", dest="sessions", type=Path, help="sessions.jsonl (default: data.sessions_path)")
    aggregate.add_argument("--out", type=Path, required=True, help="rankings.jsonl")
    aggregate.add_argument("--split", choices=["train", "validation", "test"])

    metrics = commands.add_parser("aggregate-metrics", help="Mean and std over per-seed metrics.json files")
    metrics.add_argument("--inputs", nargs="+", type=Path, required=True)
    metrics.add_argument("--out", type=Path, required=True)
    metrics.add_argument("--name")
    metrics.add_argument("--comparison", type=Path, help="Optional comparison CSV")

    verify = commands.add_parser("verify-theorems", help="Check the loss decompositions on random instances")
    verify.add_argument("--trials", type=int, default=1000)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--k", dest="model_counts", type=int, nargs="+", default=[2, 3, 5])
    verify.add_argument("--n", dest="max_items", type=int, default=50)
    verify.add_argument("--n-listwise", dest="max_items_listwise", type=int, default=20)
    verify.add_argument("--delta", dest="delta_cap", type=float, default=0.3)
    verify.add_argument("--sweep-steps", type=int, default=11)
    verify.add_argument("--out", type=Path, default=Path("outputs/theorems"), help="Report directory")

    predict = commands.add_parser("predict-intents", help="Write predicted session intents")
    _config_args(predict)
    predict.add_argument("--checkpoint", type=Path)
    predict.add_argument("--split", default="test", choices=["train", "validation", "test"])
    return parser


def _load_config(args: argparse.Namespace) -> Optional[RunConfig]:
    if getattr(args, "config", None) is None:
        return None
    return load_run_config(args.config, args.overrides)


def _run_verify(container: ServiceContainer, args: argparse.Namespace) -> int:
    # a .json target names the report file; its directory holds the report
    output_dir = args.out.parent if args.out.suffix == ".json" else args.out
    request = VerifyTheoremsRequest(
        trials=args.trials,
        seed=args.seed,
        output_dir=output_dir,
        delta_cap=args.delta_cap,
        model_counts=args.model_counts,
        max_items=args.max_items,
        max_items_listwise=args.max_items_listwise,
        sweep_steps=args.sweep_steps,
    )
    report = container.resolve(VerifyTheoremsUseCase).execute(request)
    _emit(report)
    if not report.all_hold:
        logger.error(f"Counterexamples found, see {report.report_path}")
        return EXIT_RUNTIME
    return EXIT_OK


def _run_aggregate(container: ServiceContainer, args: argparse.Namespace) -> int:
    if args.sessions is not None:
        container.register_singleton(ISessionRepository, JsonlSessionRepository(args.sessions))
    request = AggregateRankingsRequest(method=args.method, output=args.out, split=args.split)
    _emit(container.resolve(AggregateRankingsUseCase).execute(request))
    return EXIT_OK


def _run_aggregate_metrics(container: ServiceContainer, args: argparse.Namespace) -> int:
    request = AggregateRequest(inputs=args.inputs, output=args.out, name=args.name, comparison=args.comparison)
    _emit(container.resolve(AggregateMetricsUseCase).execute(request).to_dict())
    return EXIT_OK


def _run_evaluate(container: ServiceContainer, args: argparse.Namespace) -> int:
    baselines = args.baselines if args.baselines is not None else container.config.evaluation.baselines
    request = EvaluateRequest(
        checkpoint=args.checkpoint, baselines=baselines, skip_model=args.skip_model, split=args.split
    )
    _emit(container.resolve(EvaluateUseCase).execute(container.config, request))
    return EXIT_OK


def _run_predict(container: ServiceContainer, args: argparse.Namespace) -> int:
    request = PredictIntentsRequest(checkpoint=args.checkpoint, split=args.split)
    _emit(container.resolve(PredictIntentsUseCase).execute(container.config, request))
    return EXIT_OK


def _simple(use_case: type) -> Callable[[ServiceContainer, argparse.Namespace], int]:
    def run(container: ServiceContainer, args: argparse.Namespace) -> int:
        _emit(container.resolve(use_case).execute(container.config))
        return EXIT_OK
    return run


COMMANDS: Dict[str, Callable[[ServiceContainer, argparse.Namespace], int]] = {
    "ingest": _simple(IngestSessionsUseCase),
    "gen-synthetic": _simple(GenerateSyntheticUseCase),
    "train": _simple(TrainEnsembleUseCase),
    "evaluate": _run_evaluate,
    "aggregate": _run_aggregate,
    "aggregate-metrics": _run_aggregate_metrics,
    "verify-theorems": _run_verify,
    "predict-intents": _run_predict,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; returns 0 on success, 1 on invalid input, 2 on runtime failure"""
    settings = get_settings()
    configure_logging(settings.logging)
    try:
        args = build_parser().parse_args(list(argv) if argv is not None else None)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_VALIDATION
    except SystemExit as e:
        # --help
        return int(e.code or 0)

    try:
        container = build_container(_load_config(args), settings)
        return COMMANDS[args.command](container, args)
    except (IntelValidationError, ValidationError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_VALIDATION
    except Exception as e:
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
