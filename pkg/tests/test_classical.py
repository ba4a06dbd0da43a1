import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from corrlab.classical import (
    ClassicalDensity,
    ClassicalEvent,
    FiniteSampleSpace,
    NullEventError,
    atomic_decomposition,
    c_conditionalize,
    c_probability,
    commuting_correspondence,
    embed_density,
    embed_event,
    noncommuting_counterexample,
)
from corrlab.hilbert import born_probability


@st.composite
def density_and_events(draw, n=None):
    n = n or draw(st.integers(1, 8))
    w = draw(arrays(float, n, elements=st.floats(0.01, 1.0)))
    a = draw(arrays(int, n, elements=st.integers(0, 1)))
    b = draw(arrays(int, n, elements=st.integers(0, 1)))
    return ClassicalDensity(w / w.sum()), ClassicalEvent(a), ClassicalEvent(b)


def uniform(n):
    return ClassicalDensity(np.full(n, 1.0 / n))


class TestProbability:
    def test_whole_space(self):
        assert c_probability(uniform(5), FiniteSampleSpace(5).whole()) == pytest.approx(1.0)

    def test_single_atom(self):
        assert c_probability(uniform(4), FiniteSampleSpace(4).atom(2)) == 0.25

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            c_probability(uniform(4), FiniteSampleSpace(3).whole())

    @given(density_and_events())
    def test_matches_born_on_embedding(self, rab):
        rho, a, _ = rab
        assert c_probability(rho, a) == pytest.approx(born_probability(embed_density(rho), embed_event(a)), abs=1e-12)

    @pytest.mark.parametrize("w", [[0.5, 0.6], [-0.1, 1.1], []])
    def test_bad_weights(self, w):
        with pytest.raises(ValueError):
            ClassicalDensity(np.array(w))

    def test_bad_indicator(self):
        with pytest.raises(ValueError):
            ClassicalEvent(np.array([0, 2]))

    def test_bad_space(self):
        with pytest.raises(ValueError):
            FiniteSampleSpace(0)


class TestConditioning:
    def test_whole_space_unchanged(self):
        rho = ClassicalDensity([0.1, 0.2, 0.7])
        assert np.array_equal(c_conditionalize(rho, FiniteSampleSpace(3).whole()).weights, rho.weights)

    def test_two_atoms(self):
        out = c_conditionalize(uniform(4), ClassicalEvent([1, 0, 1, 0]))
        assert np.allclose(out.weights, [0.5, 0, 0.5, 0])

    def test_null_event(self):
        with pytest.raises(NullEventError):
            c_conditionalize(ClassicalDensity([1.0, 0.0]), ClassicalEvent([0, 1]))

    @given(density_and_events())
    def test_bayes_ratio(self, rab):
        rho, a, b = rab
        pa = c_probability(rho, a)
        if pa == 0:
            return
        # brute-force ratio over atoms
        joint = sum(w for w, ia, ib in zip(rho.weights, a.indicator, b.indicator) if ia and ib)
        assert c_probability(c_conditionalize(rho, a), b) == pytest.approx(joint / pa, abs=1e-12)
        assert c_probability(rho, a & b) == pytest.approx(joint, abs=1e-15)

    @given(density_and_events())
    def test_atomic_decomposition_unique(self, rab):
        rho, _, _ = rab
        w, atoms = atomic_decomposition(rho)
        assert np.allclose(w, rho.weights) and np.allclose(atoms @ w, rho.weights)

    def test_json(self):
        rho = ClassicalDensity([0.25, 0.75])
        assert np.array_equal(ClassicalDensity.from_json(rho.to_json()).weights, rho.weights)


class TestCorrespondence:
    def test_single_atom(self):
        rep = commuting_correspondence(1)
        assert rep.max_deviation == 0.0 and rep.holds

    def test_four_atoms(self):
        rep = commuting_correspondence(4, cases=100, seed=0)
        assert rep.max_deviation < 1e-12

    @given(st.integers(1, 10), st.integers(0, 1000))
    def test_any_size(self, n, seed):
        assert commuting_correspondence(n, cases=20, seed=seed).holds

    def test_noncommuting_flagged(self):
        rep = noncommuting_counterexample()
        assert not rep["correspondence_holds"]
        # |+><+| has off-diagonal 1/2
        assert rep["deviation"] == pytest.approx(0.5, abs=1e-12)
