"""Orchestrates experiments: selection, evaluation, sweeps, bound audits and reports."""

import asyncio
import logging
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import duckdb
import numpy as np
import polars as pl

from expanding_graph_filters.config_handler import ExperimentConfig, LearnerConfig, SyntheticConfig
from expanding_graph_filters.datagen import NodeStream, generate_base, generate_stream, load_stream, save_stream
from expanding_graph_filters.learners import comparator_filter, grid_search, hyper_params, run_learner
from expanding_graph_filters.learners.online import HyperParams
from expanding_graph_filters.learners.runner import FIXED_FILTER_KINDS, RunTrace, selection_start, window_nrmse
from expanding_graph_filters.metrics import RegretLedger, audit_regret, comparator_losses, nrmse
from expanding_graph_filters.models import (
    AuditReport,
    ConfigurationError,
    DivergenceError,
    ExperimentResult,
    RunFailure,
    RunResult,
    UndefinedMetricError,
)
from expanding_graph_filters.state import JsonManifestStore, ManifestStore
from expanding_graph_filters.transforms import (
    audit_frame,
    cumulative_regret_frame,
    get_run_path,
    regret_table,
    runs_frame,
    steps_frame,
    summary_table,
    sweep_frame,
)
from expanding_graph_filters.workers import AsyncRunPool, RunExecutor, RunTask
from expanding_graph_filters.writers import CsvWriter, DataWriter

logger = logging.getLogger(__name__)

# SeedSequence tag of learner randomness (datagen uses 0..2)
_LEARNER = 3

BOUND_KIND = {
    "dogf": "deterministic",
    "batch": "deterministic",
    "pretrained": "deterministic",
    "sogf": "stochastic",
    "pcogf": "stochastic",
    "adaogf": "adaptive",
}


@dataclass(eq=False)
class RunPayload:
    stream: NodeStream
    learner: LearnerConfig
    orders: list[int]
    seed: np.random.SeedSequence
    window: float
    eta_sweep: bool = False
    order_grid: list[int] = field(default_factory=list)
    write_steps: bool = True
    tolerance: float = 1e-9


@dataclass(eq=False)
class RunOutcome:
    """A finished run plus the tables it contributes to."""

    result: RunResult
    steps: pl.DataFrame | None
    cumulative: pl.DataFrame
    eta_rows: list[dict]
    order_rows: list[dict]


@dataclass(eq=False)
class AuditOutcome:
    report: AuditReport
    table: pl.DataFrame


def learner_seed(seed: int | None, realization: int, learner_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed or 0, realization, _LEARNER, learner_index])


def load_datasets(config: ExperimentConfig, realization: int) -> list[NodeStream]:
    """Synthetic streams of one realization, then every saved stream."""
    streams = []
    for synthetic in config.data.synthetic:
        if config.seed is not None:
            synthetic = synthetic.model_copy(update={"seed": config.seed})
        streams.append(generate_stream(synthetic, generate_base(synthetic, realization), realization))
    for path in config.data.stream_paths:
        streams.append(load_stream(path))
    return streams


def _sweep_row(task: RunTask, value: float, score: float | None, status: str) -> dict:
    return {
        "dataset": task.dataset,
        "learner": task.learner,
        "realization": task.realization,
        "value": value,
        "test_nrmse": score,
        "status": status,
    }


def _test_nrmse(stream: NodeStream, trace: RunTrace) -> float:
    split = stream.split_index
    return nrmse(trace.predictions[split:], trace.truths[split:])


def _sweep(task: RunTask, payload: RunPayload, params: list[tuple[float, HyperParams]]) -> list[dict]:
    rows = []
    for value, hp in params:
        try:
            trace = run_learner(payload.stream, payload.learner, hp, rng_seed=payload.seed)
            rows.append(_sweep_row(task, value, _test_nrmse(payload.stream, trace), "ok"))
        except DivergenceError:
            rows.append(_sweep_row(task, value, None, "diverged"))
        except UndefinedMetricError:
            rows.append(_sweep_row(task, value, None, "undefined"))
    return rows


def evaluate_run(task: RunTask) -> RunOutcome:
    """Select on the train prefix, evaluate on the test suffix, then sweep.

    Args:
        task: Run identity with a :class:`RunPayload`

    Returns:
        RunOutcome with the RunResult and its table contributions

    Raises:
        DivergenceError: Every grid point or the final run diverged
    """
    payload: RunPayload = task.payload
    stream, learner = payload.stream, payload.learner
    selection, hp = grid_search(stream, learner, payload.orders, payload.window, rng_seed=payload.seed)
    trace = run_learner(stream, learner, hp, rng_seed=payload.seed)

    split = stream.split_index
    train_nrmse = window_nrmse(trace, selection_start(split, payload.window), split)
    test_nrmse = _test_nrmse(stream, trace)

    h_star = comparator_filter(stream, hp.order, hp.mu)
    ledger = RegretLedger(
        trace.online_losses[:split],
        comparator_losses(trace.design_rows[:split], trace.truths[:split], h_star, hp.mu),
    )
    normalized = ledger.normalized

    eta_rows: list[dict] = []
    if payload.eta_sweep and learner.kind not in FIXED_FILTER_KINDS:
        eta_rows = _sweep(task, payload, [(eta, hp.model_copy(update={"eta": eta})) for eta in learner.eta_grid])
    order_rows = _sweep(
        task,
        payload,
        [(float(k), hyper_params(learner, stream, hp.eta, hp.mu, k)) for k in payload.order_grid],
    )

    steps_path = get_run_path(task.dataset, task.learner, task.realization) if payload.write_steps else None
    result = RunResult(
        dataset=task.dataset,
        learner=task.learner,
        realization=task.realization,
        selection=selection,
        steps_path=steps_path,
        n_steps=len(trace),
        train_nrmse=train_nrmse,
        test_nrmse=test_nrmse,
        normalized_regret=float(normalized[-1]) if normalized.size else 0.0,
    )
    logger.info(
        f"  [OK] {task.dataset}/{task.learner}/{task.realization}: "
        f"test NRMSE {test_nrmse:.6g}, normalized regret {result.normalized_regret:.6g}"
    )
    return RunOutcome(
        result=result,
        steps=steps_frame(trace.records) if payload.write_steps else None,
        cumulative=cumulative_regret_frame(task.dataset, task.learner, task.realization, normalized),
        eta_rows=eta_rows,
        order_rows=order_rows,
    )


def _run_tasks(
    config: ExperimentConfig,
    streams: dict[int, list[NodeStream]],
    learners: list[tuple[int, LearnerConfig]],
    dogf_orders: dict[tuple[str, int], int],
) -> list[RunTask]:
    tasks = []
    for realization, realization_streams in streams.items():
        for stream in realization_streams:
            for index, learner in learners:
                if learner.order_grid is not None:
                    orders = learner.order_grid
                elif learner.kind != "dogf" and (stream.name, realization) in dogf_orders:
                    orders = [dogf_orders[(stream.name, realization)]]
                else:
                    orders = config.sweeps.order_grid
                payload = RunPayload(
                    stream=stream,
                    learner=learner,
                    orders=list(orders),
                    seed=learner_seed(config.seed, realization, index),
                    window=config.sweeps.selection_window,
                    eta_sweep=config.sweeps.eta_sweep,
                    order_grid=list(config.sweeps.order_grid) if config.sweeps.order_sweep else [],
                    write_steps=config.output.write_steps,
                )
                tasks.append(RunTask(stream.name, learner.label, realization, payload))
    return tasks


async def run_experiment_async(config: ExperimentConfig, output_dir: str | Path | None = None) -> ExperimentResult:
    """Run every (dataset, learner, realization) and write the result tables.

    D-OGF learners run first; learners without an order grid of their own then
    reuse the filter order D-OGF selected on the same dataset and realization.
    """
    run_id = str(uuid.uuid4())
    run_start = datetime.now(timezone.utc)
    output_dir = Path(output_dir or config.output.base_path)
    store: ManifestStore = JsonManifestStore(output_dir / "manifest.json")
    store.start(run_id, config.name, config.seed, config.model_dump(mode="json"))
    writer: DataWriter = CsvWriter(output_dir)

    logger.info(f"Experiment {config.name} ({run_id}) started at {run_start.isoformat()}")
    logger.info(f"Learners: {[learner.label for learner in config.learners]}, realizations: {config.realizations}")

    streams = {r: load_datasets(config, r) for r in range(config.realizations)}
    split_index = {s.name: s.split_index for realization in streams.values() for s in realization}

    indexed = list(enumerate(config.learners))
    first = [(i, lc) for i, lc in indexed if lc.kind == "dogf" or lc.order_grid is not None]
    second = [(i, lc) for i, lc in indexed if lc.kind != "dogf" and lc.order_grid is None]

    pool: RunExecutor = AsyncRunPool(evaluate_run, max_workers=config.max_workers)
    outcomes = await pool.run_all(_run_tasks(config, streams, first, {}))
    dogf_labels = {lc.label for lc in config.learners if lc.kind == "dogf"}
    dogf_orders: dict[tuple[str, int], int] = {}
    for outcome in outcomes:
        if isinstance(outcome, RunOutcome) and outcome.result.learner in dogf_labels:
            key = (outcome.result.dataset, outcome.result.realization)
            dogf_orders.setdefault(key, outcome.result.selection.order)
    if second:
        outcomes += await pool.run_all(_run_tasks(config, streams, second, dogf_orders))

    runs: list[RunResult] = []
    failed: list[RunFailure] = []
    tables: dict[str, pl.DataFrame] = {}
    cumulative, eta_rows, order_rows = [], [], []
    for outcome in outcomes:
        if isinstance(outcome, RunFailure):
            failed.append(outcome)
            store.mark_run_failure(
                outcome.dataset,
                outcome.learner,
                outcome.realization,
                outcome.error,
                diverged_at=outcome.step,
                diverged=outcome.status == "diverged",
            )
            continue
        result = outcome.result
        runs.append(result)
        store.mark_run_success(
            result.dataset, result.learner, result.realization, result.selection, result.n_steps, result.steps_path
        )
        if outcome.steps is not None:
            tables[result.steps_path] = outcome.steps
        cumulative.append(outcome.cumulative)
        eta_rows += outcome.eta_rows
        order_rows += outcome.order_rows

    runs_df = runs_frame(runs, failed, split_index)
    tables["runs.csv"] = runs_df
    tables["summary.csv"] = summary_table(runs_df)
    tables["regret.csv"] = regret_table(runs_df)
    if cumulative:
        tables["cumulative_regret.csv"] = pl.concat(cumulative).sort(["dataset", "learner", "realization", "t"])
    if config.sweeps.eta_sweep:
        tables["eta_sweep.csv"] = sweep_frame(eta_rows, "eta")
    if config.sweeps.order_sweep:
        tables["order_sweep.csv"] = sweep_frame(order_rows, "order")
    files = writer.write_tables(tables)

    run_end = datetime.now(timezone.utc)
    logger.info(f"Experiment complete - Run ID: {run_id}")
    logger.info(f"Duration: {(run_end - run_start).total_seconds():.2f}s")
    logger.info(f"Files written: {len(files)}")
    logger.info(f"Failed runs: {len(failed)}")

    error = None
    if not runs:
        error = "Every run failed"
    elif failed:
        error = f"{len(failed)} of {len(runs) + len(failed)} runs failed"
    return ExperimentResult(
        success=not failed and bool(runs),
        run_id=run_id,
        run_start=run_start,
        run_end=run_end,
        output_dir=str(output_dir),
        runs=runs,
        failed=failed,
        files=files,
        error=error,
    )


def run_experiment(config: ExperimentConfig, output_dir: str | Path | None = None) -> ExperimentResult:
    """Synchronous wrapper to run the async experiment."""
    return asyncio.run(run_experiment_async(config, output_dir))


def audit_run(task: RunTask) -> AuditOutcome:
    """Run a learner with its shadow deterministic learner and check the regret bound."""
    payload: RunPayload = task.payload
    stream, learner = payload.stream, payload.learner
    _, hp = grid_search(stream, learner, payload.orders, payload.window, rng_seed=payload.seed)
    trace = run_learner(stream, learner, hp, rng_seed=payload.seed, observe=True)

    h_star = comparator_filter(stream, hp.order, hp.mu, steps=len(stream))
    ledger = RegretLedger(trace.online_losses, comparator_losses(trace.design_rows, trace.truths, h_star, hp.mu))
    comparator_in_ball = bool(np.linalg.norm(h_star) <= hp.ball_radius * (1.0 + 1e-12))
    if not comparator_in_ball:
        logger.warning(f"Comparator of {task.learner} lies outside the filter-energy ball")

    kind = BOUND_KIND[learner.kind]
    distance = trace.initial_filter - h_star
    table = audit_regret(
        ledger, trace.observations, kind, hp.eta, hp.mu, float(distance @ distance), payload.tolerance
    )
    slack = table["slack"].to_numpy()
    worst = int(np.argmin(slack))
    report = AuditReport(
        learner=task.learner,
        bound=kind,
        realization=task.realization,
        n_steps=len(trace),
        min_slack=float(slack[worst]),
        violations=int(np.sum(slack < -payload.tolerance)),
        worst_step=int(table["t"][worst]),
        comparator_in_ball=comparator_in_ball,
        path=get_run_path(task.dataset, task.learner, task.realization, "audit.csv"),
    )
    level = logging.INFO if report.passed else logging.ERROR
    logger.log(level, f"{task.dataset}/{task.learner}/{task.realization}: {kind} bound min slack {report.min_slack:.6g}")
    return AuditOutcome(report=report, table=table)


async def validate_bounds_async(config: ExperimentConfig, output_dir: str | Path | None = None) -> ExperimentResult:
    """Audit normalized regret against the analytic bounds for every audited learner."""
    run_id = str(uuid.uuid4())
    run_start = datetime.now(timezone.utc)
    output_dir = Path(output_dir or config.output.base_path)
    writer: DataWriter = CsvWriter(output_dir)

    tasks = []
    for realization in range(config.audit.realizations):
        for stream in load_datasets(config, realization):
            for index, kind in enumerate(config.audit.learners):
                learner = config.learner_for(kind)
                payload = RunPayload(
                    stream=stream,
                    learner=learner,
                    orders=list(learner.order_grid or config.sweeps.order_grid),
                    seed=learner_seed(config.seed, realization, index),
                    window=config.sweeps.selection_window,
                    tolerance=config.audit.tolerance,
                )
                tasks.append(RunTask(stream.name, learner.label, realization, payload))

    pool: RunExecutor = AsyncRunPool(audit_run, max_workers=config.max_workers)
    outcomes = await pool.run_all(tasks)

    audits, failed = [], []
    tables: dict[str, pl.DataFrame] = {}
    for outcome in outcomes:
        if isinstance(outcome, RunFailure):
            failed.append(outcome)
            continue
        audits.append(outcome.report)
        tables[outcome.report.path] = outcome.table
    tables["audit_summary.csv"] = audit_frame(audits)
    files = writer.write_tables(tables)

    violated = [a for a in audits if not a.passed]
    for audit in violated:
        logger.error(
            f"Bound violated: {audit.learner}/{audit.realization} {audit.violations} steps, "
            f"worst t={audit.worst_step} slack {audit.min_slack:.6g}"
        )
    run_end = datetime.now(timezone.utc)
    error = None
    if violated:
        error = f"{len(violated)} audited runs violate their bound"
    elif failed:
        error = f"{len(failed)} audit runs failed"
    return ExperimentResult(
        success=not violated and not failed and bool(audits),
        run_id=run_id,
        run_start=run_start,
        run_end=run_end,
        output_dir=str(output_dir),
        failed=failed,
        audits=audits,
        files=files,
        error=error,
    )


def validate_bounds(config: ExperimentConfig, output_dir: str | Path | None = None) -> ExperimentResult:
    """Synchronous wrapper to run the bound audit."""
    return asyncio.run(validate_bounds_async(config, output_dir))


def generate_dataset(
    synthetic: list[SyntheticConfig], output_dir: str | Path, realizations: int = 1, seed: int | None = None
) -> list[Path]:
    """Generate synthetic streams and save each under ``{label}/realization_{r}``."""
    output_dir = Path(output_dir)
    paths = []
    for cfg in synthetic:
        if seed is not None:
            cfg = cfg.model_copy(update={"seed": seed})
        for realization in range(realizations):
            stream = generate_stream(cfg, generate_base(cfg, realization), realization)
            paths.append(save_stream(stream, output_dir / cfg.label / f"realization_{realization}"))
            logger.info(f"Generated {cfg.label} realization {realization}: {stream.n0} + {len(stream)} nodes")
    return paths


_RUN_PATH_PATTERN = r"runs/([^/]+)/([^/]+)/realization_([0-9]+)/steps\.csv"

REPORT_QUERY = """
WITH steps AS (
    SELECT
        regexp_extract(replace(filename, '\\', '/'), '{pattern}', 1) AS dataset,
        regexp_extract(replace(filename, '\\', '/'), '{pattern}', 2) AS learner,
        CAST(regexp_extract(replace(filename, '\\', '/'), '{pattern}', 3) AS BIGINT) AS realization,
        t, prediction, truth
    FROM read_csv('{steps_glob}', header = true, filename = true)
),
all_runs AS (
    SELECT dataset, learner, CAST(realization AS BIGINT) AS realization, status, split_index
    FROM read_csv('{runs_file}', header = true)
),
per_run AS (
    SELECT s.dataset, s.learner, s.realization,
        sqrt(avg(power(s.prediction - s.truth, 2))) / (max(s.truth) - min(s.truth)) AS test_nrmse
    FROM steps s
    JOIN all_runs r ON s.dataset = r.dataset AND s.learner = r.learner AND s.realization = r.realization
    WHERE r.status = 'ok' AND s.t > r.split_index
    GROUP BY s.dataset, s.learner, s.realization
)
SELECT r.dataset, r.learner,
    avg(p.test_nrmse) AS mean_nrmse,
    stddev_pop(p.test_nrmse) AS std_nrmse,
    count(p.test_nrmse) AS runs,
    count(*) - count(p.test_nrmse) AS diverged
FROM all_runs r
LEFT JOIN per_run p ON p.dataset = r.dataset AND p.learner = r.learner AND p.realization = r.realization
GROUP BY r.dataset, r.learner
ORDER BY r.dataset, r.learner
"""


def _sql_path(path: Path) -> str:
    return path.as_posix().replace("'", "''")


def report(output_dir: str | Path) -> pl.DataFrame:
    """Recompute the summary table from the per-run step files with duckdb.

    Writes ``report_summary.csv`` next to the experiment's tables.

    Raises:
        FileNotFoundError: No ``runs.csv`` in the output directory
        ConfigurationError: The experiment wrote no per-run step files
    """
    output_dir = Path(output_dir)
    runs_file = output_dir / "runs.csv"
    if not runs_file.exists():
        raise FileNotFoundError(f"No runs.csv in {output_dir}")
    if not any(output_dir.glob("runs/*/*/realization_*/steps.csv")):
        raise ConfigurationError(f"No per-run steps files under {output_dir / 'runs'}")

    query = REPORT_QUERY.format(
        pattern=_RUN_PATH_PATTERN,
        steps_glob=_sql_path(output_dir / "runs" / "*" / "*" / "realization_*" / "steps.csv"),
        runs_file=_sql_path(runs_file),
    )
    with duckdb.connect() as con:
        rows = con.execute(query).fetchall()

    df = pl.DataFrame(
        rows,
        schema={
            "dataset": pl.Utf8,
            "learner": pl.Utf8,
            "mean_nrmse": pl.Float64,
            "std_nrmse": pl.Float64,
            "runs": pl.Int64,
            "diverged": pl.Int64,
        },
        orient="row",
    )
    CsvWriter(output_dir).write(df, "report_summary.csv")
    logger.info(f"Report over {df['runs'].sum()} runs written to {output_dir / 'report_summary.csv'}")
    return df
