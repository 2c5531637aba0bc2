"""Forward filtering against independent oracles, backend agreement, and
one-step prediction."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qoehandoff.errors import DomainError
from qoehandoff.hmm import (GaussianEmission, HmmModel, forward_filter,
                            predict_belief, predict_next_state)
from qoehandoff.hmm import _kernels_py


def random_model(rng, n):
    prior = rng.dirichlet(np.ones(n))
    tm = rng.dirichlet(np.ones(n), size=n)
    means = np.sort(rng.uniform(0.0, 1.0, n))[::-1]
    variances = rng.uniform(0.005, 0.1, n)
    return HmmModel(prior, tm,
                    tuple(GaussianEmission(float(m), float(v))
                          for m, v in zip(means, variances)),
                    scheme=None)


def enumerate_posteriors(model, obs):
    """Brute-force filtered posteriors by summing over all state paths."""
    n = model.n_states
    dens = np.exp(model.frame_log_likelihood(obs))
    posts = []
    for t in range(len(obs)):
        post = np.zeros(n)
        for path in itertools.product(range(n), repeat=t + 1):
            p = model.prior[path[0]] * dens[0, path[0]]
            for u in range(1, t + 1):
                p *= model.transitions[path[u - 1], path[u]] * dens[u, path[u]]
            post[path[t]] += p
        posts.append(post / post.sum())
    return np.array(posts)


def enumerate_log_evidence(model, obs):
    n = model.n_states
    dens = np.exp(model.frame_log_likelihood(obs))
    total = 0.0
    for path in itertools.product(range(n), repeat=len(obs)):
        p = model.prior[path[0]] * dens[0, path[0]]
        for u in range(1, len(obs)):
            p *= model.transitions[path[u - 1], path[u]] * dens[u, path[u]]
        total += p
    return np.log(total)


class TestForwardFilterOracle:
    @pytest.mark.parametrize("n,length", [(n, t) for n in (2, 3)
                                          for t in range(1, 7)])
    def test_matches_path_enumeration(self, n, length):
        rng = np.random.default_rng(100 * n + length)
        model = random_model(rng, n)
        obs = rng.uniform(0.0, 1.0, length)
        beliefs, logev = forward_filter(model, obs)
        assert np.abs(beliefs - enumerate_posteriors(model, obs)).max() <= 1e-9
        assert logev == pytest.approx(enumerate_log_evidence(model, obs),
                                      abs=1e-9)

    def test_beliefs_normalized(self):
        rng = np.random.default_rng(5)
        model = random_model(rng, 3)
        beliefs, _ = forward_filter(model, rng.uniform(0, 1, 50))
        assert np.allclose(beliefs.sum(axis=1), 1.0, atol=1e-12)
        assert (beliefs >= 0).all()


class TestBackendAgreement:
    def test_compiled_and_pure_python_agree(self):
        from qoehandoff.hmm import _backend
        rng = np.random.default_rng(17)
        model = random_model(rng, 3)
        obs = rng.uniform(0, 1, 200)
        flp = model.frame_log_likelihood(obs)
        f1, ll1 = _backend.forward(flp, model.prior, model.transitions)
        f2, ll2 = _kernels_py.forward(flp, model.prior, model.transitions)
        assert np.abs(f1 - f2).max() <= 1e-12
        assert ll1 == pytest.approx(ll2, abs=1e-9)
        g1, x1, e1 = _backend.forward_backward(flp, model.prior, model.transitions)
        g2, x2, e2 = _kernels_py.forward_backward(flp, model.prior,
                                                  model.transitions)
        assert np.abs(g1 - g2).max() <= 1e-12
        assert np.abs(x1 - x2).max() <= 1e-10
        assert e1 == pytest.approx(e2, abs=1e-9)

    def test_smoothed_marginals_sum_to_one(self):
        rng = np.random.default_rng(23)
        model = random_model(rng, 3)
        obs = rng.uniform(0, 1, 60)
        flp = model.frame_log_likelihood(obs)
        gamma, xi_sum, _ = _kernels_py.forward_backward(flp, model.prior,
                                                        model.transitions)
        assert np.allclose(gamma.sum(axis=1), 1.0, atol=1e-10)
        # Expected transition counts total T-1.
        assert xi_sum.sum() == pytest.approx(len(obs) - 1, abs=1e-8)


class TestPrediction:
    def test_predict_belief_is_chain_push(self):
        rng = np.random.default_rng(3)
        model = random_model(rng, 3)
        belief = np.array([0.5, 0.3, 0.2])
        expected = belief @ model.transitions
        assert np.allclose(predict_belief(model, belief), expected, atol=1e-15)

    def test_predict_next_state_is_one_based_map(self):
        model = HmmModel(
            prior=np.array([0.5, 0.5]),
            transitions=np.array([[0.0, 1.0], [1.0, 0.0]]),
            emissions=(GaussianEmission(1.0, 0.01), GaussianEmission(0.0, 0.01)),
            scheme=None)
        state, predicted = predict_next_state(model, np.array([1.0, 0.0]))
        assert state == 2
        assert np.allclose(predicted, [0.0, 1.0])

    def test_tie_prefers_lower_state(self):
        model = HmmModel(
            prior=np.array([0.5, 0.5]),
            transitions=np.array([[0.5, 0.5], [0.5, 0.5]]),
            emissions=(GaussianEmission(1.0, 0.01), GaussianEmission(0.0, 0.01)),
            scheme=None)
        state, _ = predict_next_state(model, np.array([0.5, 0.5]))
        assert state == 1

    def test_rejects_invalid_belief(self):
        rng = np.random.default_rng(9)
        model = random_model(rng, 2)
        with pytest.raises(DomainError):
            predict_belief(model, np.array([0.7, 0.7]))
        with pytest.raises(DomainError):
            predict_belief(model, np.array([1.0, 0.0, 0.0]))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 31 - 1))
    def test_log_evidence_invariant_to_observation_scale_shift(self, seed):
        # Shifting both the observations and the emission means by the same
        # constant leaves the whole inference problem unchanged.
        rng = np.random.default_rng(seed)
        model = random_model(rng, 2)
        obs = rng.uniform(0, 1, 20)
        shift = 3.5
        shifted = HmmModel(
            model.prior, model.transitions,
            tuple(GaussianEmission(e.mean + shift, e.variance)
                  for e in model.emissions),
            scheme=None)
        b1, ll1 = forward_filter(model, obs)
        b2, ll2 = forward_filter(shifted, obs + shift)
        assert np.abs(b1 - b2).max() <= 1e-9
        assert ll1 == pytest.approx(ll2, abs=1e-7)
