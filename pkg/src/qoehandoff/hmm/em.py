"""EM (Baum-Welch) training for the Gaussian-emission HMM, plus k-fold
cross-validated one-step prediction accuracy.

Initialization is quantile-based and therefore deterministic for a given
seed; restarts re-seed the means from skewed quantiles and then random
data points, which guards against poor local optima when state occupancy
is lopsided, and the best-likelihood restart wins (ties to the lowest
restart index).
Trained models are canonicalized by sorting states by descending emission
mean, so state 1 is always the worst-delay state regardless of how the
optimizer happened to label states.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateModelError, DomainError
from ..qoe_model import QuantizationScheme, quantize_mos
from . import _backend
from .inference import forward_filter, predict_next_state
from .model import VARIANCE_FLOOR, GaussianEmission, HmmModel


@dataclass(frozen=True)
class EmConfig:
    max_iterations: int = 200
    rel_tol: float = 1e-6
    restarts: int = 5
    variance_floor: float = VARIANCE_FLOOR
    self_transition_init: float = 0.8
    seed: int = 0


@dataclass
class TrainingReport:
    log_likelihoods: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    restart_index: int = 0


def _validate_sequences(observations) -> list[np.ndarray]:
    seqs = [np.asarray(o, dtype=float) for o in observations]
    if not seqs or not any(len(s) >= 2 for s in seqs):
        raise DomainError("need at least one observation sequence of length >= 2")
    for s in seqs:
        if s.ndim != 1 or s.size == 0:
            raise DomainError("each observation sequence must be non-empty and 1-D")
        if not np.isfinite(s).all():
            raise DomainError("observations must be finite")
    return seqs


def _restart_means(all_obs: np.ndarray, k: int, restart: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Starting means for one restart: evenly spaced quantiles first, then
    quantile grids skewed low/high, then random data points."""
    base = (np.arange(k) + 0.5) / k
    if restart == 0:
        return np.quantile(all_obs, base)
    if restart == 1:
        return np.quantile(all_obs, base ** 2)
    if restart == 2:
        return np.quantile(all_obs, np.sqrt(base))
    return np.sort(rng.choice(all_obs, size=k, replace=False))


def _labeled_init(seqs, labels, k: int, cfg: EmConfig):
    x = np.concatenate(seqs)
    lab = np.concatenate([np.asarray(l, dtype=int) for l in labels])
    if lab.shape != x.shape:
        raise DomainError("state labels must align with observations")
    means = np.empty(k)
    variances = np.empty(k)
    overall_var = max(x.var(), cfg.variance_floor)
    for s in range(k):
        sel = x[lab == s + 1]
        means[s] = sel.mean() if sel.size else x.mean()
        variances[s] = max(sel.var(), cfg.variance_floor) if sel.size else overall_var
    return means, variances


def _run_em(seqs, means, variances, prior, tm, cfg: EmConfig):
    """One EM run from the given starting point. Returns (ll_history, params)."""
    k = means.size
    ll_history: list[float] = []
    best = None
    prev_ll = -np.inf
    converged = False
    iterations = 0
    for _ in range(cfg.max_iterations):
        iterations += 1
        # E-step: accumulate sufficient statistics over all sequences.
        ll = 0.0
        prior_acc = np.zeros(k)
        xi_acc = np.zeros((k, k))
        w_acc = np.zeros(k)
        wx_acc = np.zeros(k)
        wxx_acc = np.zeros(k)
        for s in seqs:
            diff = s[:, None] - means[None, :]
            flp = -0.5 * (diff * diff / variances + np.log(2.0 * np.pi * variances))
            gamma, xi_sum, seq_ll = _backend.forward_backward(flp, prior, tm)
            ll += seq_ll
            prior_acc += gamma[0]
            xi_acc += xi_sum
            w = gamma.sum(axis=0)
            w_acc += w
            wx_acc += gamma.T @ s
            wxx_acc += gamma.T @ (s * s)
        ll_history.append(ll)
        if best is None or ll > best[0]:
            best = (ll, means.copy(), variances.copy(), prior.copy(), tm.copy())
        if np.isfinite(prev_ll) and ll - prev_ll < cfg.rel_tol * abs(prev_ll):
            converged = True
            break
        prev_ll = ll
        # M-step.
        prior = prior_acc / prior_acc.sum()
        row = xi_acc.sum(axis=1, keepdims=True)
        tm = np.where(row > 0, xi_acc / np.where(row > 0, row, 1.0),
                      np.full((k, k), 1.0 / k))
        means = wx_acc / w_acc
        variances = np.maximum(wxx_acc / w_acc - means * means, cfg.variance_floor)
    return ll_history, best, converged, iterations


def em_train(observations, k: int, config: EmConfig = EmConfig(),
             scheme: QuantizationScheme | None = None,
             state_labels_for_init=None) -> tuple[HmmModel, TrainingReport]:
    """Fit a k-state model to one or more delay sequences.

    Returns the model at the best-likelihood iteration of the best restart,
    with states sorted by descending emission mean.
    """
    if k < 1:
        raise DomainError("state count k must be >= 1")
    if scheme is not None and scheme.state_count != k:
        raise DomainError("scheme state count does not match k")
    seqs = _validate_sequences(observations)
    all_obs = np.concatenate(seqs)
    if np.unique(all_obs).size < k:
        raise DegenerateModelError(
            f"{k} states requested but only {np.unique(all_obs).size} distinct values")

    if k == 1:
        # Closed form: single-state chain with population-moment emission.
        mean = float(all_obs.mean())
        var = max(float(all_obs.var()), config.variance_floor)
        model = HmmModel(prior=np.ones(1), transitions=np.ones((1, 1)),
                         emissions=(GaussianEmission(mean, var),), scheme=None)
        ll = sum(forward_filter(model, s)[1] for s in seqs)
        return model, TrainingReport([ll], iterations=1, converged=True)

    prior0 = np.full(k, 1.0 / k)
    tm0 = np.full((k, k), (1.0 - config.self_transition_init) / max(k - 1, 1))
    np.fill_diagonal(tm0, config.self_transition_init)
    var0 = max(float(all_obs.var()) / (k * k), config.variance_floor)

    rng = np.random.default_rng(config.seed)
    winner = None
    for restart in range(max(config.restarts, 1)):
        if state_labels_for_init is not None and restart == 0:
            means, vars_init = _labeled_init(seqs, state_labels_for_init, k, config)
        else:
            means = _restart_means(all_obs, k, restart, rng)
            vars_init = np.full(k, var0)
        history, best, converged, iters = _run_em(
            seqs, means, vars_init, prior0.copy(), tm0.copy(), config)
        if winner is None or best[0] > winner[1][0]:
            winner = (restart, best, history, converged, iters)

    restart_index, (_, means, variances, prior, tm), history, converged, iters = winner
    order = np.argsort(-means, kind="stable")
    model = HmmModel(
        prior=prior[order],
        transitions=tm[np.ix_(order, order)],
        emissions=tuple(GaussianEmission(float(means[i]), float(variances[i]))
                        for i in order),
        scheme=scheme,
    )
    report = TrainingReport(log_likelihoods=history, iterations=iters,
                            converged=converged, restart_index=restart_index)
    return model, report


def state_band_map(model: HmmModel, traces, scheme: QuantizationScheme) -> list[int]:
    """Majority QoE band observed while each hidden state was the MAP state.

    Lets a model with fewer states than the scheme has bands (e.g. a
    2-state fit of 3-band data) still be scored against quantized MOS.
    """
    counts = np.zeros((model.n_states, scheme.state_count), dtype=int)
    for obs, mos in traces:
        beliefs, _ = forward_filter(model, obs)
        map_states = beliefs.argmax(axis=1)
        for t, s in enumerate(map_states):
            counts[s, quantize_mos(mos[t], scheme) - 1] += 1
    mapping = []
    for s in range(model.n_states):
        if counts[s].sum() == 0:
            # Unvisited state: fall back to the canonical ordering.
            mapping.append(max(1, scheme.state_count - (model.n_states - 1 - s)))
        else:
            mapping.append(int(counts[s].argmax()) + 1)
    return mapping


def prediction_accuracy(model: HmmModel, traces, scheme: QuantizationScheme,
                        state_map: list[int] | None = None) -> tuple[int, int]:
    """(correct, total) one-step predictions over (observations, mos) traces.

    The state predicted from the belief at epoch t is scored against the
    state quantized from the trace's true MOS at t+1 (micro-average).
    `state_map` translates hidden-state indices to QoE bands; identity when
    omitted (model states must then coincide with the scheme's bands).
    """
    if state_map is None:
        state_map = list(range(1, model.n_states + 1))
    correct = 0
    total = 0
    for obs, mos in traces:
        beliefs, _ = forward_filter(model, obs)
        for t in range(len(obs) - 1):
            pred, _ = predict_next_state(model, beliefs[t])
            if state_map[pred - 1] == quantize_mos(mos[t + 1], scheme):
                correct += 1
            total += 1
    return correct, total


def cross_validate_folds(dataset, folds: int, k: int, scheme: QuantizationScheme,
                         config: EmConfig = EmConfig()) -> list[tuple[int, int]]:
    """Per-fold (correct, total) one-step prediction scores.

    Folds are assigned round-robin by trace index, so every trace is held
    out exactly once.
    """
    n = len(dataset)
    if not 2 <= folds <= n:
        raise DomainError(f"folds must be in [2, {n}]")
    scores = []
    for fold in range(folds):
        train = [dataset[i] for i in range(n) if i % folds != fold]
        held = [dataset[i] for i in range(n) if i % folds == fold]
        model, _ = em_train([obs for obs, _ in train], k, config,
                            scheme=scheme if k == scheme.state_count else None)
        state_map = state_band_map(model, train, scheme)
        scores.append(prediction_accuracy(model, held, scheme, state_map))
    return scores


def cross_validate(dataset, folds: int, k: int, scheme: QuantizationScheme,
                   config: EmConfig = EmConfig()) -> float:
    """Micro-averaged one-step prediction accuracy over all folds."""
    scores = cross_validate_folds(dataset, folds, k, scheme, config)
    correct = sum(c for c, _ in scores)
    total = sum(t for _, t in scores)
    return correct / total
