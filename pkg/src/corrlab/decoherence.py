"""Micro-system, pointer and environment: decay of pointer-basis coherence.

The state at time t is

    |psi(t)> = sum_k c_k |s_k> |M_k> |eps_k(t)>,
    |eps_k(t)> = sum_nu gamma_nu exp(-i g[k, nu] t) |e_nu>,

generated by a pointer-environment coupling diagonal in both bases. Time is
dimensionless; only products g * t enter.
"""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass

import numpy as np

from .hilbert import DensityOperator, schmidt_decompose

MAX_DIM = 4096
NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DecoherenceModel:
    amplitudes: np.ndarray  # c_k, length K
    env_weights: np.ndarray  # gamma_nu, length V
    couplings: np.ndarray  # g[k, nu], shape (K, V)

    def __post_init__(self):
        c = np.asarray(self.amplitudes, dtype=complex).ravel()
        gam = np.asarray(self.env_weights, dtype=complex).ravel()
        g = np.asarray(self.couplings, dtype=float)
        if c.size < 2:
            raise ValueError("need at least two pointer branches")
        if gam.size < 1:
            raise ValueError("need at least one environment mode")
        if g.shape != (c.size, gam.size):
            raise ValueError(f"couplings shape {g.shape} != {(c.size, gam.size)}")
        if abs(np.vdot(c, c).real - 1.0) > NORM_TOL or abs(np.vdot(gam, gam).real - 1.0) > NORM_TOL:
            raise ValueError("amplitudes and environment weights must be normalised")
        for name, v in (("amplitudes", c), ("env_weights", gam), ("couplings", g)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def K(self) -> int:
        return self.amplitudes.size

    @property
    def V(self) -> int:
        return self.env_weights.size

    @classmethod
    def random(cls, K: int = 2, V: int = 50, seed: int = 0, g_range=(0.0, 1.0), amplitudes=None) -> "DecoherenceModel":
        """Uniform environment weights and couplings drawn uniformly from ``g_range``."""
        rng = np.random.default_rng(seed)
        if K < 2 or V < 1:
            raise ValueError(f"need K >= 2 branches and V >= 1 modes, got K={K}, V={V}")
        c = np.full(K, 1 / np.sqrt(K)) if amplitudes is None else np.asarray(amplitudes)
        gam = np.full(V, 1 / np.sqrt(V))
        g = rng.uniform(*g_range, size=(K, V))
        return cls(c, gam, g)


def reference_model() -> DecoherenceModel:
    return DecoherenceModel.random(K=2, V=50, seed=0)


def environment_states(model: DecoherenceModel, t: float) -> np.ndarray:
    """|eps_k(t)> as rows, shape (K, V)."""
    return model.env_weights[None, :] * np.exp(-1j * model.couplings * t)


def decoherence_factor(model: DecoherenceModel, t: float) -> np.ndarray:
    """zeta[k, k'] = sum_nu |gamma_nu|^2 exp(i (g[k', nu] - g[k, nu]) t).

    With the environment states above this sum is <eps_k'|eps_k>, so the
    (k, k') pointer entry of the reduced operator is c_k conj(c_k') zeta[k, k']
    for orthogonal micro states. Only |zeta| enters the decay statements.
    """
    w = np.abs(model.env_weights) ** 2
    phase = np.exp(1j * (model.couplings[None, :, :] - model.couplings[:, None, :]) * t)
    return (phase * w).sum(axis=2)


@dataclass(frozen=True, eq=False)
class DecoherenceSnapshot:
    t: float
    zeta: np.ndarray
    reduced: DensityOperator  # micro (x) pointer, environment traced out
    micro_dim: int
    offdiag_norm: float
    norm: float

    @property
    def K(self) -> int:
        return self.zeta.shape[0]

    def pointer_block(self, k: int, kp: int) -> np.ndarray:
        r = self.reduced.matrix.reshape(self.micro_dim, self.K, self.micro_dim, self.K)
        return r[:, k, :, kp]

    def pointer_populations(self) -> np.ndarray:
        return np.array([np.trace(self.pointer_block(k, k)).real for k in range(self.K)])

    def pointer_state(self) -> np.ndarray:
        """Reduced operator of the pointer alone."""
        r = self.reduced.matrix.reshape(self.micro_dim, self.K, self.micro_dim, self.K)
        return np.einsum("ikil->kl", r)


def _micro(model: DecoherenceModel, micro_states) -> np.ndarray:
    if micro_states is None:
        return np.eye(model.K, dtype=complex)
    S = np.asarray(micro_states, dtype=complex)
    if S.ndim != 2 or S.shape[1] != model.K:
        raise ValueError("micro_states must hold one column per pointer branch")
    if not np.allclose(np.linalg.norm(S, axis=0), 1.0, atol=1e-10):
        raise ValueError("micro states must be unit vectors")
    return S


def global_state(model: DecoherenceModel, t: float, micro_states=None) -> np.ndarray:
    """psi(t) as an array [micro, pointer, environment]."""
    S = _micro(model, micro_states)
    if S.shape[0] * model.K * model.V > MAX_DIM * 64:
        raise ValueError("state space too large for dense evolution")
    eps = environment_states(model, t)
    return np.einsum("k,sk,kn->skn", model.amplitudes, S, eps)


def evolve_snapshot(model: DecoherenceModel, t: float, micro_states=None) -> DecoherenceSnapshot:
    S = _micro(model, micro_states)
    d = S.shape[0] * model.K
    if d > MAX_DIM:
        raise ValueError(f"micro x pointer dimension {d} exceeds {MAX_DIM}")
    psi = global_state(model, t, S)
    norm = float(np.vdot(psi, psi).real)
    flat = psi.reshape(d, model.V)
    reduced = flat @ flat.conj().T
    r = reduced.reshape(S.shape[0], model.K, S.shape[0], model.K)
    off = 0.0
    for k, kp in itertools.permutations(range(model.K), 2):
        off = max(off, float(np.abs(r[:, k, :, kp]).max()))
    return DecoherenceSnapshot(t, decoherence_factor(model, t), DensityOperator(reduced), S.shape[0], off, norm)


def emergent_boolean_check(snapshot: DecoherenceSnapshot, eps: float) -> bool:
    """True when pointer-basis coherences are below ``eps``.

    In that regime the pointer populations act as a classical distribution:
    the probability of a union of pointer events equals the sum of the parts
    to within the coherence that is dropped.
    """
    if snapshot.offdiag_norm > eps:
        return False
    return abs(snapshot.pointer_populations().sum() - 1.0) <= 1e-10


def time_series(model: DecoherenceModel, times, micro_states=None) -> list[dict]:
    rows = []
    for t in times:
        snap = evolve_snapshot(model, float(t), micro_states)
        row = {"t": float(t)}
        for k, kp in itertools.combinations(range(model.K), 2):
            row[f"zeta_{k}{kp}"] = float(abs(snap.zeta[k, kp]))
        row["offdiag_norm"] = snap.offdiag_norm
        rows.append(row)
    return rows


def time_series_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def half_decay_time(model: DecoherenceModel, tmax: float, steps: int = 4000) -> float | None:
    """First grid time at which max |zeta_kk'| falls to half its initial value of 1."""
    for t in np.linspace(0.0, tmax, steps + 1):
        z = decoherence_factor(model, t)
        if np.abs(z[~np.eye(model.K, dtype=bool)]).max() <= 0.5:
            return float(t)
    return None


def nonstandard_macro_basis_check(model: DecoherenceModel, t: float, rotation: np.ndarray, micro_states=None) -> dict:
    """Schmidt ranks of the micro (x) environment factor attached to each macro vector.

    The rotated macro basis is |M'_l> = sum_k R[k, l] |M_k>; the factor attached
    to M'_l is sum_k conj(R[k, l]) c_k |s_k>|eps_k(t)>.
    """
    R = np.asarray(rotation, dtype=complex)
    if R.shape != (model.K, model.K) or not np.allclose(R.conj().T @ R, np.eye(model.K), atol=1e-10):
        raise ValueError("rotation must be a K x K unitary")
    psi = global_state(model, t, micro_states)  # [s, k, nu]
    dS = psi.shape[0]
    standard, rotated = [], []
    for k in range(model.K):
        factor = psi[:, k, :].ravel()
        standard.append(_rank(factor, (dS, model.V)))
    for l in range(model.K):
        factor = np.einsum("k,skn->sn", R[:, l].conj(), psi).ravel()
        rotated.append(_rank(factor, (dS, model.V)))
    return {"standard_ranks": standard, "rotated_ranks": rotated,
            "standard_product": all(r <= 1 for r in standard),
            "rotated_product": all(r <= 1 for r in rotated)}


def _rank(vec: np.ndarray, dims) -> int:
    nrm = np.linalg.norm(vec)
    if nrm < 1e-14:
        return 0
    return schmidt_decompose(vec / nrm, dims, cutoff=1e-9).rank
