"""Streaming run loop: replays a node stream through one learner.

The loop keeps the shift matrix, the rule scorers and the ensemble
dictionaries in step with the growing graph, and optionally runs a shadow
deterministic learner from the same initial filter so the regret bounds can
be audited afterwards.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy import linalg

from expanding_graph_filters.attachment import (
    EnsembleAttachment,
    RuleScorer,
    StochasticAttachment,
    append_ensemble_row,
    compose_ensemble,
    initial_ensemble,
)
from expanding_graph_filters.attachment.models import SeedLike
from expanding_graph_filters.config_handler.load_configs import LearnerConfig
from expanding_graph_filters.graph import ExpandingGraph, ShiftMatrix, build_shift_matrix, extend_shift_matrix
from expanding_graph_filters.learners.batch import StreamSample, batch_solve, pretrain
from expanding_graph_filters.learners.online import (
    HyperParams,
    LearnerState,
    adaogf_step,
    dogf_step,
    pcogf_step,
    sogf_step,
)
from expanding_graph_filters.metrics import BoundObservations, nrmse
from expanding_graph_filters.models import (
    ConfigurationError,
    DivergenceError,
    Selection,
    StepRecord,
    UndefinedMetricError,
)

if TYPE_CHECKING:
    from expanding_graph_filters.datagen.stream import NodeStream

logger = logging.getLogger(__name__)

BALL_RADIUS_FACTOR = 10.0
STOCHASTIC_KINDS = ("sogf", "pcogf")
FIXED_FILTER_KINDS = ("batch", "pretrained")


@dataclass(frozen=True, eq=False)
class RunTrace:
    """Everything a run produced, step by step."""

    kind: str
    params: HyperParams
    initial_filter: np.ndarray
    records: list[StepRecord]
    design_rows: np.ndarray
    final_state: LearnerState
    observations: BoundObservations | None = None

    def __len__(self) -> int:
        return len(self.records)

    @property
    def predictions(self) -> np.ndarray:
        return np.array([r.prediction for r in self.records], dtype=np.float64)

    @property
    def truths(self) -> np.ndarray:
        return np.array([r.truth for r in self.records], dtype=np.float64)

    @property
    def online_losses(self) -> np.ndarray:
        return np.array([r.loss_value for r in self.records], dtype=np.float64)

    @property
    def filters(self) -> np.ndarray:
        """Filter after every step, one row per step."""
        return np.array([r.filter_after for r in self.records], dtype=np.float64).reshape(len(self), -1)


def default_ball_radius(h_pretrained: np.ndarray) -> float:
    """``10 ||h_pretrain||``; unconstrained when the pre-trained filter is zero."""
    norm = float(np.linalg.norm(h_pretrained))
    if norm == 0.0 or not math.isfinite(norm):
        logger.warning("Pre-trained filter has zero norm, running without a filter-energy ball")
        return math.inf
    return BALL_RADIUS_FACTOR * norm


def hyper_params(learner: LearnerConfig, stream: NodeStream, eta: float, mu: float, order: int) -> HyperParams:
    """Hyperparameters of one grid point, with the ball radius resolved."""
    if learner.ball_radius is not None:
        radius = learner.ball_radius
    else:
        h_pre = pretrain(stream.graph0, stream.signal0, HyperParams(eta=0.0, mu=mu, order=order))
        radius = default_ball_radius(h_pre)
    return HyperParams(eta=eta, mu=mu, order=order, ball_radius=radius)


def stream_samples(stream: NodeStream, order: int, steps: int | None = None) -> list[StreamSample]:
    """``(a_t, A_x snapshot, x_t)`` for the first ``steps`` arrivals."""
    limit = len(stream) if steps is None else min(steps, len(stream))
    samples: list[StreamSample] = []
    sm = None
    for graph, signal, record in stream.replay():
        if len(samples) >= limit:
            break
        if sm is None:
            sm = build_shift_matrix(graph, signal, order)
        else:
            prev_a, _, prev_x = samples[-1]
            sm = extend_shift_matrix(sm, graph, prev_a, prev_x)
        samples.append((record.attachment, sm, record.value))
    return samples


def comparator_filter(stream: NodeStream, order: int, mu: float, steps: int | None = None) -> np.ndarray:
    """Batch least-squares filter over the first ``steps`` arrivals (the train prefix by default)."""
    steps = max(1, stream.split_index) if steps is None else steps
    return batch_solve(stream_samples(stream, order, steps), mu)


class _Observer:
    """Collects the per-step quantities of :class:`BoundObservations`."""

    def __init__(self, ensemble: bool):
        self.ensemble = ensemble
        self.columns: dict[str, list[float]] = {
            name: []
            for name in (
                "residual", "design_norm", "output_norm", "weight_max", "edges", "filter_norm",
                "prob_norm_sq", "prob_variance", "filter_distance",
                "dict_fro_sq", "dict_spec_sq", "dict_row_max",
            )
        }

    def observe(
        self,
        sm: ShiftMatrix,
        design_row: np.ndarray,
        x_t: float,
        record_weights: np.ndarray,
        h_learner: np.ndarray,
        h_shadow: np.ndarray,
        model: StochasticAttachment | None,
        ens: EnsembleAttachment | None,
    ) -> None:
        c = self.columns
        c["residual"].append(max(abs(float(design_row @ h) - x_t) for h in (h_learner, h_shadow)))
        c["design_norm"].append(float(np.linalg.norm(design_row)))
        c["output_norm"].append(max(float(np.linalg.norm(sm.apply(h))) for h in (h_learner, h_shadow)))
        weight = float(record_weights.max(initial=0.0))
        if model is not None and len(model):
            weight = max(weight, float(model.weights.max()))
        c["weight_max"].append(weight)
        c["edges"].append(float(record_weights.size))
        c["filter_norm"].append(max(float(np.linalg.norm(h_learner)), float(np.linalg.norm(h_shadow))))
        c["filter_distance"].append(float(np.linalg.norm(h_learner - h_shadow)))

        if model is None:
            c["prob_norm_sq"].append(0.0)
            c["prob_variance"].append(0.0)
        else:
            c["prob_norm_sq"].append(float(model.probs @ model.probs))
            c["prob_variance"].append(float(np.max(model.probs * (1.0 - model.probs), initial=0.0)))

        if ens is not None:
            P = ens.prob_dict
            c["dict_fro_sq"].append(float(np.sum(P * P)))
            c["dict_spec_sq"].append(float(linalg.norm(P, 2)) ** 2)
            c["dict_row_max"].append(float(np.max(np.linalg.norm(P, axis=1))))

    def finish(self) -> BoundObservations:
        arrays = {name: np.asarray(values, dtype=np.float64) for name, values in self.columns.items()}
        if not self.ensemble:
            for name in ("dict_fro_sq", "dict_spec_sq", "dict_row_max"):
                arrays[name] = None
        return BoundObservations(**arrays)


def run_learner(
    stream: NodeStream,
    learner: LearnerConfig,
    hp: HyperParams,
    rng_seed: SeedLike = None,
    steps: int | None = None,
    observe: bool = False,
    h0: np.ndarray | None = None,
) -> RunTrace:
    """Replay a stream through one learner.

    Args:
        stream: Starting graph and arrivals
        learner: Learner kind and its attachment settings
        hp: Learning rate, regularization, order and ball radius
        rng_seed: Seed for the ensemble weight draws
        steps: Stop after this many arrivals (all by default)
        observe: Record bound observations next to a shadow deterministic learner
        h0: Initial filter; pre-trained on the starting graph when omitted
            (the train-prefix batch solution for ``batch``)

    Returns:
        RunTrace with one StepRecord per arrival

    Raises:
        DivergenceError: A prediction exploded or the filter became non-finite
    """
    kind = learner.kind
    limit = len(stream) if steps is None else min(steps, len(stream))
    rng = np.random.default_rng(rng_seed)

    if h0 is None:
        if kind == "batch":
            h0 = comparator_filter(stream, hp.order, hp.mu)
        else:
            h0 = pretrain(stream.graph0, stream.signal0, hp)
    h0 = np.array(h0, dtype=np.float64)
    step_params = hp.model_copy(update={"eta": 0.0}) if kind in FIXED_FILTER_KINDS else hp

    # Rules without an explicit c_e follow the stream's mean arrival edge count
    expected = stream.expected_edges
    rules = [rule.with_edge_count(expected) for rule in learner.rules]
    scorers = [RuleScorer(rule) for rule in rules] if kind == "adaogf" else None
    scorer = RuleScorer(learner.rule.with_edge_count(expected)) if kind in STOCHASTIC_KINDS else None
    frozen_weight = stream.graph0.median_weight() if stream.graph0.n_edges else None

    state = LearnerState.initial(h0, len(learner.rules) if kind == "adaogf" else None)
    shadow = LearnerState.initial(h0)
    observer = _Observer(ensemble=kind == "adaogf") if observe else None
    records: list[StepRecord] = []
    design_rows: list[np.ndarray] = []
    sm: ShiftMatrix | None = None
    ens: EnsembleAttachment | None = None
    previous = None

    logger.debug(f"Running {learner.label} on {stream.name}: {limit} steps, {hp}")
    for graph, signal, record in stream.replay():
        if len(records) >= limit:
            break
        a_t, x_t = record.attachment, record.value
        if sm is None:
            sm = build_shift_matrix(graph, signal, hp.order)
        else:
            sm = extend_shift_matrix(sm, graph, previous.attachment, previous.value)

        weight = frozen_weight if learner.freeze_weights and frozen_weight else graph.median_weight()
        if kind == "adaogf":
            fixed = None if learner.learn_weights else weight
            if ens is None:
                ens = initial_ensemble(
                    rules, graph, rng, weight_cap=learner.w_h, fixed_weight=fixed, scorers=scorers
                )
            else:
                ens = append_ensemble_row(ens, graph, rng, scorers=scorers, fixed_weight=fixed)
        model = None
        if kind in STOCHASTIC_KINDS or (kind == "adaogf" and observer is not None):
            model = _attachment_model(kind, scorer, graph, weight, ens, state)

        g_t = sm.project(a_t)
        design_rows.append(g_t)
        if observer is not None:
            h_shadow = state.h if kind == "dogf" else shadow.h
            observer.observe(sm, g_t, x_t, a_t.weights, state.h, h_shadow, model, ens)

        if kind == "sogf":
            outcome = sogf_step(state, model, sm, x_t, step_params)
        elif kind == "pcogf":
            outcome = pcogf_step(state, model, a_t, sm, x_t, step_params)
        elif kind == "adaogf":
            outcome = adaogf_step(
                state,
                ens,
                sm,
                x_t,
                step_params,
                steps_per_arrival=learner.steps_per_arrival,
                form=learner.gradient_form,
                learn_weights=learner.learn_weights,
            )
            ens = ens.with_combiners(outcome.state.m, outcome.state.n)
        else:
            outcome = dogf_step(state, a_t, sm, x_t, step_params)

        if observer is not None and kind != "dogf":
            shadow = dogf_step(shadow, a_t, sm, x_t, step_params).state
        state = outcome.state
        records.append(outcome.record)
        previous = record

    order = hp.order
    return RunTrace(
        kind=kind,
        params=hp,
        initial_filter=h0,
        records=records,
        design_rows=np.vstack(design_rows) if design_rows else np.empty((0, order)),
        final_state=state,
        observations=observer.finish() if observer is not None else None,
    )


def _attachment_model(
    kind: str,
    scorer: RuleScorer | None,
    graph: ExpandingGraph,
    weight: float,
    ens: EnsembleAttachment | None,
    state: LearnerState,
) -> StochasticAttachment | None:
    if kind in STOCHASTIC_KINDS:
        return scorer(graph, weight)
    if kind == "adaogf":
        return compose_ensemble(ens.with_combiners(state.m, state.n))
    return None


def window_nrmse(trace: RunTrace, start: int, stop: int) -> float:
    """NRMSE of the trace's predictions over steps ``start < t <= stop``."""
    return nrmse(trace.predictions[start:stop], trace.truths[start:stop])


def selection_start(split: int, window: float) -> int:
    """First train step excluded from selection (the warm-up)."""
    return min(split - 1, int(math.floor(split * (1.0 - window)))) if split else 0


def grid_search(
    stream: NodeStream,
    learner: LearnerConfig,
    orders: Sequence[int],
    window: float,
    rng_seed: SeedLike = None,
) -> tuple[Selection, HyperParams]:
    """Lock hyperparameters minimizing NRMSE over the last ``window`` of the train prefix.

    Grid points whose run diverges or whose window NRMSE is undefined are skipped.

    Raises:
        ConfigurationError: The train prefix is empty
        DivergenceError: Every grid point diverged
    """
    split = stream.split_index
    if split < 1:
        raise ConfigurationError(f"Stream '{stream.name}' has no train prefix to select on")
    start = selection_start(split, window)
    etas = [0.0] if learner.kind in FIXED_FILTER_KINDS else learner.eta_grid

    best: tuple[float, HyperParams] | None = None
    for order in orders:
        for mu in learner.mu_grid:
            base = hyper_params(learner, stream, 0.0, mu, order)
            for eta in etas:
                hp = base.model_copy(update={"eta": eta})
                try:
                    trace = run_learner(stream, learner, hp, rng_seed=rng_seed, steps=split)
                    score = window_nrmse(trace, start, split)
                except DivergenceError as e:
                    logger.warning(f"{learner.label} diverged at step {e.step} with {hp}, skipping")
                    continue
                except UndefinedMetricError as e:
                    logger.warning(f"{learner.label} with {hp}: {e}, skipping")
                    continue
                logger.debug(f"{learner.label} eta={eta:g} mu={mu:g} K={order}: train NRMSE {score:.6g}")
                if best is None or score < best[0]:
                    best = (score, hp)

    if best is None:
        raise DivergenceError(f"Every hyperparameter of {learner.label} diverged on '{stream.name}'")
    score, hp = best
    logger.info(f"{learner.label} on {stream.name}: eta={hp.eta:g} mu={hp.mu:g} K={hp.order} (train NRMSE {score:.6g})")
    return Selection(eta=hp.eta, mu=hp.mu, order=hp.order, train_nrmse=score), hp
