"""Remote steering, cloning-based signaling and tomography information loss.

The steering state lives on a qutrit A and a qubit B:

    |psi> = (|a1>|b1> + |a2>|c> + |a3>|d>) / sqrt(3)
          = (|a1'>|b2> + |a2'>|e> + |a3'>|f>) / sqrt(3)

with {b1, c, d} and {b2, e, f} trines (Bloch vectors 120 degrees apart on a
great circle) and b1 orthogonal to b2. The first trine is real (X-Z circle);
the second lies on the Y-Z circle. Two real trines would share every
two-copy moment, which hides the cloning advantage at n = 2.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import null_space

from .hilbert import (
    TOL,
    DensityOperator,
    ProjectiveMeasurement,
    Projector,
    born_probability,
    luders_conditionalize,
    measurement_average,
    partial_trace,
    schmidt_decompose,
)

MAX_CLONES = 10


def _rot(theta: float) -> np.ndarray:
    return np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])


def trine(offset: float = 0.0) -> np.ndarray:
    """Three real unit vectors 120 degrees apart (columns), the first at angle ``offset``."""
    return np.column_stack([_rot(offset + k * 2 * np.pi / 3) @ np.array([1.0, 0.0]) for k in range(3)])


def bloch_ket(theta: float, phi: float) -> np.ndarray:
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def yz_trine() -> np.ndarray:
    """|1> and the two states 120 degrees from it on the Y-Z Bloch circle."""
    return np.column_stack([np.array([0.0, 1.0], dtype=complex), bloch_ket(np.pi / 3, np.pi / 2),
                            bloch_ket(np.pi / 3, -np.pi / 2)])


@dataclass(frozen=True, eq=False)
class Ensemble:
    weights: np.ndarray
    states: np.ndarray  # columns

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        S = np.asarray(self.states, dtype=complex)
        if S.shape[1] != w.size:
            raise ValueError("one state per weight required")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("ensemble weights must be non-negative and sum to 1")
        if not np.allclose(np.linalg.norm(S, axis=0), 1.0, atol=TOL):
            raise ValueError("ensemble states must be unit vectors")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", S)

    def density(self) -> np.ndarray:
        return (self.states * self.weights) @ self.states.conj().T

    def realizes(self, target, atol: float = TOL) -> bool:
        m = target.matrix if isinstance(target, DensityOperator) else np.asarray(target)
        return np.allclose(self.density(), m, atol=atol, rtol=0)


def hjw_basis(psi, dims: Sequence[int], ensemble: Ensemble) -> np.ndarray:
    """Orthonormal A-vectors a_i (columns) with psi = sum_i sqrt(p_i) |a_i>|t_i>.

    Each sqrt(p_i)|t_i> is expanded in the B Schmidt basis and divided by the
    Schmidt coefficients, which gives an isometry W (n x r). Completing W to a
    unitary and the A Schmidt vectors to a basis of A fixes the rest.
    """
    dA, dB = dims
    psi = np.asarray(psi, dtype=complex).ravel()
    n = ensemble.weights.size
    if n > dA:
        raise ValueError(f"ensemble of size {n} needs at least {n} dimensions on A, have {dA}")
    rho_B = partial_trace(DensityOperator.pure(psi), "B", dims)
    if not ensemble.realizes(rho_B):
        raise ValueError("ensemble does not realize the reduced state of B")
    sd = schmidt_decompose(psi, dims)
    r = sd.rank
    lam, U, V = sd.coefficients[:r], sd.a_basis[:, :r], sd.b_basis[:, :r]
    W = (V.conj().T @ ensemble.states * np.sqrt(ensemble.weights)).T / lam  # W[i, k]
    W_full = np.hstack([W, null_space(W.conj().T)]) if r < n else W
    U_full = np.hstack([U, null_space(U.conj().T)])[:, :n]
    return U_full @ W_full.conj().T


@dataclass(frozen=True, eq=False)
class SteeringExample:
    state: np.ndarray
    trine1: np.ndarray
    trine2: np.ndarray
    basis1: np.ndarray
    basis2: np.ndarray
    dims: tuple[int, int] = (3, 2)

    def expansion(self, which: int) -> np.ndarray:
        A, T = (self.basis1, self.trine1) if which == 1 else (self.basis2, self.trine2)
        return sum(np.kron(A[:, i], T[:, i]) for i in range(3)) / np.sqrt(3.0)

    def rho_A(self) -> DensityOperator:
        return partial_trace(DensityOperator.pure(self.state), "A", self.dims)

    def rho_B(self) -> DensityOperator:
        return partial_trace(DensityOperator.pure(self.state), "B", self.dims)

    def a_measurement(self, which: int) -> ProjectiveMeasurement:
        return ProjectiveMeasurement.from_basis(self.basis1 if which == 1 else self.basis2)

    def plane_vectors(self) -> tuple[np.ndarray, np.ndarray]:
        """g, h spanning the support of rho_A."""
        a1, a2, a3 = np.eye(3)
        return (2 * a1 - a2 - a3) / np.sqrt(6.0), (a2 - a3) / np.sqrt(2.0)


def build_steering_example() -> SteeringExample:
    t1 = trine(0.0).astype(complex)
    t2 = yz_trine()
    basis1 = np.eye(3)
    psi = sum(np.kron(basis1[:, i], t1[:, i]) for i in range(3)) / np.sqrt(3.0)
    basis2 = hjw_basis(psi, (3, 2), Ensemble(np.full(3, 1 / 3), t2))
    return SteeringExample(psi.astype(complex), t1, t2, basis1, basis2)


def _complex_list(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def _trace_distance(m1: np.ndarray, m2: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh(m1 - m2)).sum())


def conditional_b_states(example: SteeringExample, M: ProjectiveMeasurement) -> list[tuple[float, np.ndarray]]:
    """(probability, B state) for each outcome of an A measurement."""
    rho = DensityOperator.pure(example.state)
    dB = example.dims[1]
    out = []
    for P in M.projectors:
        lifted = Projector(np.kron(P.matrix, np.eye(dB)))
        p = born_probability(rho, lifted)
        if p <= 1e-12:
            out.append((p, np.zeros((dB, dB), dtype=complex)))
            continue
        post = luders_conditionalize(rho, lifted)
        out.append((p, partial_trace(post, "B", example.dims).matrix))
    return out


def steering_no_signaling_check(example: SteeringExample, measurements=None) -> dict:
    """Average the Lüders-updated B state over each A measurement's outcomes.

    ``measurements`` defaults to the two bases of the example; a list of
    projector sets that do not sum to the identity is accepted so incomplete
    measurements can be flagged.
    """
    if measurements is None:
        measurements = [example.a_measurement(1), example.a_measurement(2)]
    target = example.rho_B().matrix
    rows, averages = [], []
    for M in measurements:
        if not isinstance(M, ProjectiveMeasurement):
            M = _PartialMeasurement(tuple(Projector(p) for p in M))
        branches = conditional_b_states(example, M)
        total = sum(p for p, _ in branches)
        avg = sum(p * s for p, s in branches)
        averages.append(avg)
        rows.append({
            "total_probability": total,
            "complete": abs(total - 1.0) <= TOL,
            "outcome_probabilities": [p for p, _ in branches],
            "conditional_states": [_complex_list(s) for _, s in branches],
            "deviation_from_rho_B": float(np.abs(avg - target).max()),
        })
    distances = [_trace_distance(averages[0], a) for a in averages[1:]]
    return {
        "per_measurement": rows,
        "trace_distance": max(distances) if distances else 0.0,
        "no_signaling": all(r["complete"] and r["deviation_from_rho_B"] <= TOL for r in rows),
    }


@dataclass(frozen=True)
class _PartialMeasurement:
    projectors: tuple

    @property
    def dim(self):
        return self.projectors[0].dim


def local_unitary_on_a(example: SteeringExample, U: np.ndarray) -> SteeringExample:
    """The example after applying U to A (bases rotate with the state)."""
    full = np.kron(U, np.eye(example.dims[1]))
    return SteeringExample(full @ example.state, example.trine1, example.trine2,
                           U @ example.basis1, U @ example.basis2, example.dims)


# --- cloning -------------------------------------------------------------------


def _copies(v: np.ndarray, n: int) -> np.ndarray:
    out = np.ones(1)
    for _ in range(n):
        out = np.kron(out, v)
    return out


def cloned_ensemble_density(states: np.ndarray, n: int) -> np.ndarray:
    """(1/m) sum_i |t_i><t_i|^(x)n for the columns t_i."""
    m = states.shape[1]
    vecs = np.column_stack([_copies(states[:, i], n) for i in range(m)])
    return vecs @ vecs.conj().T / m


@dataclass(frozen=True)
class CloningAdvantage:
    n: int
    trace_distance: float
    success: float


def cloning_signaling_advantage(n: int, example: SteeringExample | None = None) -> CloningAdvantage:
    """Helstrom success for telling the two trine mixtures apart from n clones."""
    if int(n) != n or n < 1:
        raise ValueError(f"need n >= 1 copies, got {n!r}")
    if n > MAX_CLONES:
        raise ValueError(f"n={n} copies exceeds the dense limit of {MAX_CLONES} (dim 2^{MAX_CLONES})")
    ex = example or build_steering_example()
    s1 = cloned_ensemble_density(ex.trine1, n)
    s2 = cloned_ensemble_density(ex.trine2, n)
    D = _trace_distance(s1, s2)
    return CloningAdvantage(n, D, 0.5 + 0.5 * D)


@dataclass
class PRCloneRecord:
    rounds: int
    y: int
    y_clone: int
    cloned: bool
    accuracy: float
    identity_holds: bool
    seed: int


def pr_clone_signal(rounds: int = 10_000, seed: int = 0, y: int = 0, y_clone: int = 1,
                    cloned: bool = True) -> PRCloneRecord:
    """Bob guesses Alice's input as b XOR b' from two PR-correlated outputs.

    With a clone both of Bob's outputs satisfy a XOR b = x.y against the same
    Alice output a, so b XOR b' = x.(y XOR y'). Without a clone the second
    output is an independent fair bit.
    """
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 2, size=rounds)
    # PR box sampling: Alice's output is uniform, Bob's is fixed by a XOR b = x.y
    a = rng.integers(0, 2, size=rounds)
    b = a ^ (x & y)
    if cloned:
        b2 = a ^ (x & y_clone)
    else:
        b2 = rng.integers(0, 2, size=rounds)
    guess = b ^ b2
    identity = bool(np.all((b ^ b2) == (x & (y ^ y_clone)))) if cloned else False
    return PRCloneRecord(rounds, y, y_clone, cloned, float(np.mean(guess == x)), identity, seed)


# --- tomography ------------------------------------------------------------------

PAULIS = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def bloch_vector(rho: DensityOperator) -> np.ndarray:
    return np.array([np.trace(rho.matrix @ PAULIS[k]).real for k in "xyz"])


def from_bloch(r: Sequence[float]) -> DensityOperator:
    r = np.asarray(r, dtype=float)
    return DensityOperator(0.5 * (np.eye(2) + sum(c * PAULIS[k] for c, k in zip(r, "xyz"))))


def pauli_measurement(axis: str) -> ProjectiveMeasurement:
    w, v = np.linalg.eigh(PAULIS[axis])
    order = np.argsort(-w)
    return ProjectiveMeasurement.from_basis(v[:, order], labels=(1, -1))


def pauli_product_measure(rho: DensityOperator) -> np.ndarray:
    """Independent joint distribution of the three Pauli outcomes, indexed [sx, sy, sz] (0 = +1)."""
    probs = [np.array([born_probability(rho, P) for P in pauli_measurement(k).projectors]) for k in "xyz"]
    return np.einsum("i,j,k->ijk", *probs)


def bloch_from_product_measure(P: np.ndarray) -> np.ndarray:
    signs = np.array([1.0, -1.0])
    return np.array([
        signs @ P.sum(axis=(1, 2)),
        signs @ P.sum(axis=(0, 2)),
        signs @ P.sum(axis=(0, 1)),
    ])


def fidelity(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Uhlmann fidelity for qubits: Tr(rho sigma) + 2 sqrt(det rho det sigma)."""
    tr = np.trace(rho.matrix @ sigma.matrix).real
    dets = max(np.linalg.det(rho.matrix).real, 0.0) * max(np.linalg.det(sigma.matrix).real, 0.0)
    return float(min(1.0, tr + 2.0 * np.sqrt(dets)))


@dataclass
class TomographyRecord:
    true_bloch: list
    estimated_bloch: list
    raw_bloch: list
    projected: bool
    shots: int | None
    fidelity_error: float
    disturbance: dict = field(default_factory=dict)
    seed: int | None = None

    def to_json(self) -> str:
        return json.dumps(self.__dict__)


def tomography_information_loss(true_state: DensityOperator, shots: int | None, seed: int | None = None) -> TomographyRecord:
    """Estimate a qubit from N Pauli measurements per axis.

    ``shots=None`` uses the exact outcome probabilities (the infinite-sample
    limit). Estimates outside the Bloch ball are scaled back onto it. Each
    measured copy is left in the dephased state of its measurement, reported
    in ``disturbance`` as the trace distance from the original.
    """
    if true_state.dim != 2:
        raise ValueError("tomography is implemented for qubits")
    if shots is not None and shots < 1:
        raise ValueError("need at least one shot per observable")
    P = pauli_product_measure(true_state)
    if shots is None:
        raw = bloch_from_product_measure(P)
    else:
        rng = np.random.default_rng(seed)
        marg = [P.sum(axis=(1, 2)), P.sum(axis=(0, 2)), P.sum(axis=(0, 1))]
        raw = np.array([1.0 - 2.0 * rng.binomial(shots, m[1]) / shots for m in marg])
    nrm = np.linalg.norm(raw)
    est = raw / nrm if nrm > 1.0 else raw
    estimate = from_bloch(est)
    disturbance = {
        k: _trace_distance(measurement_average(true_state, pauli_measurement(k)).matrix, true_state.matrix)
        for k in "xyz"
    }
    return TomographyRecord(
        true_bloch=bloch_vector(true_state).tolist(),
        estimated_bloch=est.tolist(),
        raw_bloch=raw.tolist(),
        projected=bool(nrm > 1.0),
        shots=shots,
        fidelity_error=1.0 - fidelity(true_state, estimate),
        disturbance=disturbance,
        seed=seed,
    )
