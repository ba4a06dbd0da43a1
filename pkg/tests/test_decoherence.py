import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from corrlab.decoherence import (
    DecoherenceModel,
    decoherence_factor,
    emergent_boolean_check,
    environment_states,
    evolve_snapshot,
    half_decay_time,
    nonstandard_macro_basis_check,
    reference_model,
    time_series,
    time_series_csv,
)

from oracles import random_unitary

# |zeta_12| of the reference model, direct evaluation
ZETA_T10 = 0.08537596947146388
ZETA_T200 = 0.05705642262935683
ZETA_T1000 = 0.1402022812773665
# first point of linspace(0, 200, 4001) with |zeta_12| < 1e-2
FIRST_BELOW_1PCT = 139.45
HALF_DECAY = 2.625

HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


@pytest.fixture(scope="module")
def ref():
    return reference_model()


def single_mode():
    return DecoherenceModel.random(K=2, V=1, seed=0)


class TestFactor:
    def test_t0_all_ones(self, ref):
        assert np.allclose(decoherence_factor(ref, 0.0), 1.0)

    @pytest.mark.parametrize("t", [0.0, 1.0, 37.5, 1e4])
    def test_single_mode_never_decays(self, t):
        assert abs(decoherence_factor(single_mode(), t)[0, 1]) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("t, expected", [(10.0, ZETA_T10), (200.0, ZETA_T200), (1000.0, ZETA_T1000)])
    def test_reference_values(self, ref, t, expected):
        assert abs(decoherence_factor(ref, t)[0, 1]) == pytest.approx(expected, abs=1e-14)

    def test_t200_below_fifth(self, ref):
        assert abs(decoherence_factor(ref, 200.0)[0, 1]) < 0.2

    @given(st.floats(0.0, 1e3))
    def test_is_overlap_of_environment_states(self, t):
        m = reference_model()
        eps = environment_states(m, t)
        # entry [k, k'] = <eps_k'|eps_k>
        assert np.allclose(decoherence_factor(m, t), eps @ eps.conj().T, atol=1e-12)

    def test_half_decay(self, ref):
        assert half_decay_time(ref, 100.0) == HALF_DECAY
        assert half_decay_time(single_mode(), 100.0) is None

    @pytest.mark.parametrize("V", [50, 800])
    def test_late_time_floor(self, V):
        # residual coherence of V random phases: RMS close to 1/sqrt(V)
        m = DecoherenceModel.random(K=2, V=V, seed=0)
        z = np.array([abs(decoherence_factor(m, t)[0, 1]) for t in np.linspace(500, 5000, 2000)])
        assert np.sqrt(np.mean(z**2)) * np.sqrt(V) == pytest.approx(1.0, abs=0.1)


class TestSnapshot:
    def test_t0_coherence(self, ref):
        snap = evolve_snapshot(ref, 0.0)
        c = ref.amplitudes
        assert snap.offdiag_norm == pytest.approx(abs(c[0] * c[1]), abs=1e-12)

    @given(st.floats(0.0, 1e4))
    def test_populations_constant(self, t):
        m = reference_model()
        snap = evolve_snapshot(m, t)
        assert np.abs(snap.pointer_populations() - np.abs(m.amplitudes) ** 2).max() <= 1e-12
        assert snap.norm == pytest.approx(1.0, abs=1e-12)

    def test_unequal_amplitudes(self):
        c = np.array([np.sqrt(0.8), np.sqrt(0.2) * 1j])
        m = DecoherenceModel.random(K=2, V=30, seed=4, amplitudes=c)
        for t in (0.0, 5.0, 500.0):
            assert np.allclose(evolve_snapshot(m, t).pointer_populations(), [0.8, 0.2], atol=1e-12)

    def test_offdiag_tracks_zeta(self, ref):
        for t in (0.0, 3.0, 200.0):
            snap = evolve_snapshot(ref, t)
            assert snap.offdiag_norm == pytest.approx(0.5 * abs(snap.zeta[0, 1]), abs=1e-12)

    def test_t200_ratio_frozen(self, ref):
        ratio = evolve_snapshot(ref, 200.0).offdiag_norm / evolve_snapshot(ref, 0.0).offdiag_norm
        assert ratio == pytest.approx(ZETA_T200, abs=1e-12)

    def test_decays_below_one_percent_in_window(self, ref):
        times = np.linspace(0.0, 200.0, 4001)
        base = evolve_snapshot(ref, 0.0).offdiag_norm
        below = [t for t in times if evolve_snapshot(ref, t).offdiag_norm < 1e-2 * base]
        assert below and below[0] == pytest.approx(FIRST_BELOW_1PCT)

    def test_non_orthogonal_micro_states(self, ref):
        S = np.array([[1.0, np.cos(0.3)], [0.0, np.sin(0.3)]])
        snap = evolve_snapshot(ref, 7.0, S)
        assert snap.micro_dim == 2
        assert np.allclose(snap.pointer_populations(), 0.5, atol=1e-12)
        # coherence carries the micro overlap <s_1|s_0> = cos(0.3) as well as zeta
        expected = np.array([[0.5, 0.5 * np.cos(0.3) * snap.zeta[0, 1]],
                             [0.5 * np.cos(0.3) * snap.zeta[1, 0], 0.5]])
        assert np.allclose(snap.pointer_state(), expected, atol=1e-12)

    def test_dimension_guard(self):
        m = DecoherenceModel.random(K=2, V=2, seed=0)
        with pytest.raises(ValueError):
            evolve_snapshot(m, 0.0, np.eye(5000, 2))

    @pytest.mark.parametrize("kwargs", [dict(K=1, V=3), dict(K=2, V=0)])
    def test_bad_models(self, kwargs):
        with pytest.raises(ValueError):
            DecoherenceModel.random(seed=0, **kwargs)


class TestEmergentBoolean:
    def test_t0_false(self, ref):
        assert not emergent_boolean_check(evolve_snapshot(ref, 0.0), 1e-2)

    def test_true_once_coherence_is_gone(self, ref):
        snap = evolve_snapshot(ref, FIRST_BELOW_1PCT)
        assert emergent_boolean_check(snap, 1e-2)

    def test_false_on_generic_late_time(self, ref):
        # the finite environment leaves ~1/sqrt(V) coherence at most times
        assert not emergent_boolean_check(evolve_snapshot(ref, 1000.0), 1e-2)

    @pytest.mark.parametrize("t", [0.0, 10.0, 1e3])
    def test_single_mode_false(self, t):
        assert not emergent_boolean_check(evolve_snapshot(single_mode(), t), 1e-2)


class TestMacroBasis:
    def test_identity_product(self, ref):
        rep = nonstandard_macro_basis_check(ref, 50.0, np.eye(2))
        assert rep["standard_ranks"] == [1, 1] and rep["rotated_ranks"] == [1, 1]

    def test_hadamard_entangled(self, ref):
        rep = nonstandard_macro_basis_check(ref, 50.0, HADAMARD)
        assert rep["standard_product"]
        assert rep["rotated_ranks"] == [2, 2]

    @given(st.integers(0, 10_000))
    def test_only_pointer_basis_gives_products(self, seed):
        U = random_unitary(np.random.default_rng(seed), 2)
        if np.abs(U[0, 1]) < 1e-3:
            return
        rep = nonstandard_macro_basis_check(reference_model(), 50.0, U)
        assert rep["standard_product"] and not rep["rotated_product"]

    def test_rejects_non_unitary(self, ref):
        with pytest.raises(ValueError):
            nonstandard_macro_basis_check(ref, 1.0, np.ones((2, 2)))


class TestSeries:
    def test_csv(self, ref):
        rows = time_series(ref, [0.0, 1.0, 2.0])
        text = time_series_csv(rows)
        lines = text.strip().split("\n")
        assert lines[0] == "t,zeta_01,offdiag_norm"
        assert len(lines) == 4
        assert float(lines[1].split(",")[1]) == pytest.approx(1.0)

    def test_three_branches(self):
        m = DecoherenceModel.random(K=3, V=20, seed=2)
        row = time_series(m, [5.0])[0]
        assert {"zeta_01", "zeta_02", "zeta_12"} <= set(row)
