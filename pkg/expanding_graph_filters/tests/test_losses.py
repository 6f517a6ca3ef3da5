"""Tests for the instantaneous losses and their gradients."""

import itertools

import numpy as np
import pytest

from expanding_graph_filters.attachment import (
    AttachmentRule,
    EnsembleAttachment,
    StochasticAttachment,
    initial_ensemble,
)
from expanding_graph_filters.graph import AttachmentVector, ExpandingGraph, GraphSignal, build_shift_matrix
from expanding_graph_filters.learners import (
    grad_ada_h,
    grad_ada_m,
    grad_ada_n,
    grad_det,
    grad_stoch,
    loss_ada,
    loss_det,
    loss_stoch,
    predict_deterministic,
    predict_stochastic,
)
from expanding_graph_filters.models import DimensionError
from expanding_graph_filters.tests.conftest import random_graph

EPS = 1e-6


def _numeric_gradient(f, x: np.ndarray) -> np.ndarray:
    grad = np.empty_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = EPS
        grad[i] = (f(x + step) - f(x - step)) / (2 * EPS)
    return grad


@pytest.fixture
def setting(small_graph, rng):
    """Order-3 shift matrix, a filter, a target and a stochastic attachment."""
    graph, signal = small_graph
    sm = build_shift_matrix(graph, signal, 3)
    h = rng.normal(size=3)
    sa = StochasticAttachment(probs=rng.uniform(0.05, 0.95, graph.n_nodes), weights=1.0 - rng.random(graph.n_nodes))
    return graph, sm, h, 0.7, sa


def test_deterministic_gradient(setting):
    """The deterministic gradient matches central differences."""
    graph, sm, h, x, _ = setting
    a = AttachmentVector(graph.n_nodes, [1, 4, 7], [0.3, 0.6, 0.9])

    numeric = _numeric_gradient(lambda v: loss_det(a, sm, v, x, 0.05), h)
    np.testing.assert_allclose(grad_det(a, sm, h, x, 0.05), numeric, rtol=1e-6, atol=1e-8)


def test_stochastic_gradient(setting):
    """The expected-loss gradient matches central differences."""
    _, sm, h, x, sa = setting
    numeric = _numeric_gradient(lambda v: loss_stoch(sa, sm, v, x, 0.05).total, h)
    np.testing.assert_allclose(grad_stoch(sa, sm, h, x, 0.05), numeric, rtol=1e-6, atol=1e-8)


def test_stochastic_loss_is_expectation(rng):
    """The stochastic loss equals the exact expectation over all attachments."""
    graph = random_graph(rng, 5, density=0.5)
    sm = build_shift_matrix(graph, GraphSignal(rng.normal(size=5)), 3)
    h = rng.normal(size=3)
    sa = StochasticAttachment(probs=[0.1, 0.4, 0.5, 0.8, 1.0], weights=[0.2, 0.5, 1.0, 0.7, 0.3])
    x, mu = -0.4, 0.1

    expected = 0.0
    for mask in itertools.product([False, True], repeat=5):
        present = np.array(mask)
        probability = np.prod(np.where(present, sa.probs, 1.0 - sa.probs))
        a = AttachmentVector(5, np.flatnonzero(present), sa.weights[present])
        expected += probability * loss_det(a, sm, h, x, mu)

    loss = loss_stoch(sa, sm, h, x, mu)
    assert loss.total == pytest.approx(expected, rel=1e-10)
    assert loss.total == pytest.approx(loss.bias_sq + loss.variance + loss.reg)
    assert loss.reg == pytest.approx(mu * h @ h)


def test_binary_probabilities_reduce_to_deterministic(setting):
    """With probabilities in {0, 1} the stochastic loss is the deterministic one."""
    graph, sm, h, x, _ = setting
    probs = np.zeros(graph.n_nodes)
    probs[[2, 5]] = 1.0
    weights = np.full(graph.n_nodes, 0.5)
    sa = StochasticAttachment(probs=probs, weights=weights)
    a = AttachmentVector(graph.n_nodes, [2, 5], [0.5, 0.5])

    assert loss_stoch(sa, sm, h, x, 0.1).variance == 0.0
    assert loss_stoch(sa, sm, h, x, 0.1).total == loss_det(a, sm, h, x, 0.1)
    np.testing.assert_array_equal(grad_stoch(sa, sm, h, x, 0.1), grad_det(a, sm, h, x, 0.1))
    assert predict_stochastic(sa, sm, h) == predict_deterministic(a, sm, h)


def _ensemble(graph, fixed_weight=None):
    rules = [AttachmentRule(kind=k, c_e=2.0) for k in ("uniform", "degree", "pagerank")]
    ens = initial_ensemble(rules, graph, rng_seed=3, fixed_weight=fixed_weight)
    return ens.with_combiners(np.array([0.5, 0.3, 0.2]), np.array([0.2, 0.2, 0.6]))


def _loss_in_combiners(ens, sm, h, x, mu):
    def loss(m, n):
        sa = StochasticAttachment(probs=ens.prob_dict @ m, weights=ens.weight_dict @ n)
        return loss_stoch(sa, sm, h, x, mu).total
    return loss


def test_exact_combiner_gradients(setting):
    """The exact combiner gradients match central differences of the composite loss."""
    graph, sm, h, x, _ = setting
    ens = _ensemble(graph)
    loss = _loss_in_combiners(ens, sm, h, x, 0.05)
    m, n = ens.prob_combiner, ens.weight_combiner

    numeric_m = _numeric_gradient(lambda v: loss(v, n), m)
    numeric_n = _numeric_gradient(lambda v: loss(m, v), n)
    np.testing.assert_allclose(grad_ada_m(ens, sm, h, x, 0.05, form="exact"), numeric_m, rtol=1e-5, atol=1e-8)
    np.testing.assert_allclose(grad_ada_n(ens, sm, h, x, 0.05, form="exact"), numeric_n, rtol=1e-5, atol=1e-8)


def test_printed_combiner_gradients(setting):
    """The printed forms double the variance part for m and drop it for n."""
    graph, sm, h, x, _ = setting
    ens = _ensemble(graph)
    exact_m = grad_ada_m(ens, sm, h, x, 0.0, form="exact")
    printed_m = grad_ada_m(ens, sm, h, x, 0.0, form="printed")
    exact_n = grad_ada_n(ens, sm, h, x, 0.0, form="exact")
    printed_n = grad_ada_n(ens, sm, h, x, 0.0, form="printed")

    p_bar = ens.prob_dict @ ens.prob_combiner
    w_bar = ens.weight_dict @ ens.weight_combiner
    y = sm.values @ h
    variance_m = 0.5 * ens.prob_dict.T @ ((y * w_bar) ** 2) - ens.prob_dict.T @ (p_bar * (y * w_bar) ** 2)
    variance_n = ens.weight_dict.T @ (w_bar * y * y * p_bar * (1 - p_bar))

    np.testing.assert_allclose(printed_m - exact_m, variance_m, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(exact_n - printed_n, variance_n, rtol=1e-10, atol=1e-12)


def test_ada_filter_gradient_uses_composite(setting):
    """Filter loss and gradient of the ensemble are those of its composite model."""
    graph, sm, h, x, _ = setting
    ens = _ensemble(graph)
    composite = StochasticAttachment(
        probs=ens.prob_dict @ ens.prob_combiner, weights=ens.weight_dict @ ens.weight_combiner
    )
    assert loss_ada(ens, sm, h, x, 0.1).total == pytest.approx(loss_stoch(composite, sm, h, x, 0.1).total)
    np.testing.assert_allclose(grad_ada_h(ens, sm, h, x, 0.1), grad_stoch(composite, sm, h, x, 0.1))


def test_dimension_checks(setting):
    """Filters and models must match the shift matrix."""
    graph, sm, h, x, sa = setting
    with pytest.raises(DimensionError):
        grad_stoch(sa, sm, np.zeros(4), x, 0.0)
    short = StochasticAttachment(probs=[0.5], weights=[1.0])
    with pytest.raises(DimensionError):
        loss_stoch(short, sm, h, x, 0.0)


def _scaled_instance(rng):
    """Random instance with spectral radius below one so high powers stay bounded."""
    n = int(rng.integers(3, 51))
    order = int(rng.integers(1, 8))
    mask = rng.random((n, n)) < 0.3
    np.fill_diagonal(mask, False)
    dense = np.where(mask, rng.random((n, n)), 0.0) / n
    graph = ExpandingGraph.from_dense(dense, weight_cap=1.0)
    sm = build_shift_matrix(graph, GraphSignal(rng.normal(size=n)), order)
    return graph, sm, rng.normal(size=order), float(rng.normal())


def test_gradients_on_random_instances(rng):
    """Filter gradients match central differences on a hundred random instances."""
    for _ in range(100):
        graph, sm, h, x = _scaled_instance(rng)
        n = graph.n_nodes
        support = rng.choice(n, size=min(3, n), replace=False)
        a = AttachmentVector(n, support, 1.0 - rng.random(support.size))
        sa = StochasticAttachment(probs=rng.random(n), weights=1.0 - rng.random(n))
        mu = float(rng.uniform(0.0, 0.5))

        for analytic, loss in (
            (grad_det(a, sm, h, x, mu), lambda v: loss_det(a, sm, v, x, mu)),
            (grad_stoch(sa, sm, h, x, mu), lambda v: loss_stoch(sa, sm, v, x, mu).total),
        ):
            numeric = _numeric_gradient(loss, h)
            assert np.linalg.norm(analytic - numeric) <= 1e-6 * max(np.linalg.norm(numeric), 1e-3)


def test_single_rule_ensemble_is_stochastic_loss(small_graph, rng):
    """With one rule the ensemble loss is the stochastic loss of that rule."""
    graph, signal = small_graph
    sm = build_shift_matrix(graph, signal, 3)
    h = rng.normal(size=3)
    ens = initial_ensemble([AttachmentRule(kind="degree", c_e=3.0)], graph, rng_seed=4)
    single = StochasticAttachment(probs=ens.prob_dict[:, 0], weights=ens.weight_dict[:, 0])

    assert abs(loss_ada(ens, sm, h, 0.2, 0.01).total - loss_stoch(single, sm, h, 0.2, 0.01).total) <= 1e-12


def test_combiner_gradients_on_random_instances(rng):
    """Ensemble gradients in h, m and n match central differences on a hundred random instances."""
    for _ in range(100):
        graph, sm, h, x = _scaled_instance(rng)
        n, size = graph.n_nodes, int(rng.integers(1, 5))
        ens = EnsembleAttachment(
            prob_dict=rng.uniform(0.05, 0.9, (n, size)),
            weight_dict=rng.uniform(0.1, 0.9, (n, size)),
            prob_combiner=rng.dirichlet(np.ones(size)),
            weight_combiner=rng.dirichlet(np.ones(size)),
            weight_cap=1.0,
            rules=tuple(AttachmentRule() for _ in range(size)),
        )
        mu = float(rng.uniform(0.0, 0.5))
        loss = _loss_in_combiners(ens, sm, h, x, mu)
        m, w = ens.prob_combiner, ens.weight_combiner

        for analytic, numeric in (
            (grad_ada_h(ens, sm, h, x, mu), _numeric_gradient(lambda v: loss_ada(ens, sm, v, x, mu).total, h)),
            (grad_ada_m(ens, sm, h, x, mu, form="exact"), _numeric_gradient(lambda v: loss(v, w), m)),
            (grad_ada_n(ens, sm, h, x, mu, form="exact"), _numeric_gradient(lambda v: loss(m, v), w)),
        ):
            assert np.linalg.norm(analytic - numeric) <= 1e-6 * max(np.linalg.norm(numeric), 1e-3)


def test_stochastic_loss_enumeration_up_to_twelve_nodes(rng):
    """Closed-form expected loss equals full enumeration over every attachment pattern."""
    for _ in range(50):
        n = int(rng.integers(1, 13))
        mask = rng.random((n, n)) < 0.4
        np.fill_diagonal(mask, False)
        graph = ExpandingGraph.from_dense(np.where(mask, rng.random((n, n)), 0.0) / n, weight_cap=1.0)
        order = int(rng.integers(1, 5))
        sm = build_shift_matrix(graph, GraphSignal(rng.normal(size=n)), order)
        h, x, mu = rng.normal(size=order), float(rng.normal()), float(rng.uniform(0.0, 0.2))
        sa = StochasticAttachment(probs=rng.random(n), weights=1.0 - rng.random(n))

        patterns = ((np.arange(2**n)[:, None] >> np.arange(n)) & 1).astype(bool)
        probability = np.prod(np.where(patterns, sa.probs, 1.0 - sa.probs), axis=1)
        predictions = (patterns * sa.weights) @ (sm.values @ h)
        expected = probability @ (0.5 * (predictions - x) ** 2) + mu * h @ h

        assert abs(loss_stoch(sa, sm, h, x, mu).total - expected) <= 1e-10
