"""Finite-dimensional quantum kernel: states, projective measurements, Born and Lüders rules.

Also builds quantum correlation boxes from bipartite strategies and searches
qubit measurement angles for extreme CHSH values.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .boxes import CHSH_SCENARIO, CorrelationBox, Scenario, chsh_value

TOL = 1e-10
NULL_EVENT_TOL = 1e-12
TSIRELSON = 2.0 * np.sqrt(2.0)


class NullConditioningError(ValueError):
    """Conditioning on an event of (numerically) zero probability."""


def _square(m) -> np.ndarray:
    m = np.array(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _is_hermitian(m: np.ndarray, tol: float = TOL) -> bool:
    return np.allclose(m, m.conj().T, atol=tol, rtol=0)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = _square(self.matrix)
        if not _is_hermitian(m):
            raise ValueError("density operator must be Hermitian")
        m = 0.5 * (m + m.conj().T)
        w, v = np.linalg.eigh(m)
        if w.min() < -TOL:
            raise ValueError(f"density operator has negative eigenvalue {w.min():.3g}")
        if abs(np.trace(m).real - 1.0) > TOL:
            raise ValueError(f"density operator trace {np.trace(m).real!r} != 1")
        if w.min() < 0:
            m = (v * np.clip(w, 0.0, None)) @ v.conj().T
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, psi) -> "DensityOperator":
        psi = np.asarray(psi, dtype=complex).ravel()
        nrm = np.linalg.norm(psi)
        if abs(nrm - 1.0) > TOL:
            raise ValueError(f"state vector norm {nrm!r} != 1")
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, d: int) -> "DensityOperator":
        return cls(np.eye(d) / d)

    def allclose(self, other, atol: float = TOL) -> bool:
        m = other.matrix if isinstance(other, DensityOperator) else np.asarray(other)
        return m.shape == self.matrix.shape and np.allclose(self.matrix, m, atol=atol, rtol=0)


@dataclass(frozen=True, eq=False)
class Projector:
    matrix: np.ndarray

    def __post_init__(self):
        m = _square(self.matrix)
        if not _is_hermitian(m):
            raise ValueError("projector must be Hermitian")
        if not np.allclose(m @ m, m, atol=TOL, rtol=0):
            raise ValueError("projector must be idempotent")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def onto(cls, *vectors) -> "Projector":
        """Projector onto the span of the given vectors."""
        V = np.column_stack([np.asarray(v, dtype=complex).ravel() for v in vectors])
        q, r = np.linalg.qr(V)
        rank = int(np.sum(np.abs(np.diag(r)) > TOL))
        q = q[:, :rank]
        return cls(q @ q.conj().T)

    @classmethod
    def identity(cls, d: int) -> "Projector":
        return cls(np.eye(d))


@dataclass(frozen=True, eq=False)
class ProjectiveMeasurement:
    projectors: tuple[Projector, ...]
    labels: tuple[float, ...] = None

    def __post_init__(self):
        ps = tuple(p if isinstance(p, Projector) else Projector(p) for p in self.projectors)
        if not ps:
            raise ValueError("measurement needs at least one projector")
        d = ps[0].dim
        if any(p.dim != d for p in ps):
            raise ValueError("projectors of different dimensions")
        for p, q in itertools.combinations(ps, 2):
            if not np.allclose(p.matrix @ q.matrix, 0.0, atol=TOL):
                raise ValueError("projectors are not mutually orthogonal")
        if not np.allclose(sum(p.matrix for p in ps), np.eye(d), atol=TOL):
            raise ValueError("projectors do not sum to the identity")
        labels = tuple(range(len(ps))) if self.labels is None else tuple(self.labels)
        if len(labels) != len(ps):
            raise ValueError("one label per projector required")
        object.__setattr__(self, "projectors", ps)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.projectors[0].dim

    def __len__(self):
        return len(self.projectors)

    @classmethod
    def from_basis(cls, basis, labels=None) -> "ProjectiveMeasurement":
        """Rank-1 measurement in the orthonormal basis given by the columns of ``basis``."""
        B = np.asarray(basis, dtype=complex)
        return cls(tuple(Projector(np.outer(B[:, i], B[:, i].conj())) for i in range(B.shape[1])), labels)


def _dims_match(rho: DensityOperator, P):
    if rho.dim != P.dim:
        raise ValueError(f"dimension mismatch: state {rho.dim}, operator {P.dim}")


# --- Born rule and conditioning ---------------------------------------------


def born_probability(rho: DensityOperator, P: Projector) -> float:
    _dims_match(rho, P)
    p = float(np.trace(rho.matrix @ P.matrix).real)
    if p < -TOL or p > 1 + TOL:
        raise ArithmeticError(f"Born probability {p} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def luders_conditionalize(rho: DensityOperator, P: Projector) -> DensityOperator:
    _dims_match(rho, P)
    num = P.matrix @ rho.matrix @ P.matrix
    pr = float(np.trace(num).real)
    if pr <= NULL_EVENT_TOL:
        raise NullConditioningError(f"conditioning event has probability {pr:.3g}")
    return DensityOperator(num / pr)


def conditional_probability(rho: DensityOperator, Pa: Projector, Pb: Projector) -> float:
    return born_probability(luders_conditionalize(rho, Pa), Pb)


def measurement_average(rho: DensityOperator, M: ProjectiveMeasurement) -> DensityOperator:
    """Non-selective measurement: sum_i P_i rho P_i."""
    _dims_match(rho, M)
    out = sum(P.matrix @ rho.matrix @ P.matrix for P in M.projectors)
    return DensityOperator(out)


def outcome_probabilities(rho: DensityOperator, M: ProjectiveMeasurement) -> np.ndarray:
    return np.array([born_probability(rho, P) for P in M.projectors])


# --- composite systems ------------------------------------------------------


def tensor(*states: DensityOperator) -> DensityOperator:
    m = np.ones((1, 1), dtype=complex)
    for s in states:
        m = np.kron(m, s.matrix)
    return DensityOperator(m)


def partial_trace(rho: DensityOperator | np.ndarray, keep: str, dims: Sequence[int]) -> DensityOperator:
    """Reduce a bipartite operator on dims = (dA, dB) to party ``keep`` ('A' or 'B')."""
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
    dA, dB = dims
    if m.shape != (dA * dB, dA * dB):
        raise ValueError(f"operator shape {m.shape} does not match dims {tuple(dims)}")
    r = m.reshape(dA, dB, dA, dB)
    keep = keep.upper()
    if keep == "A":
        return DensityOperator(np.einsum("ijkj->ik", r))
    if keep == "B":
        return DensityOperator(np.einsum("ijil->jl", r))
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def _fix_phase(v: np.ndarray) -> tuple[np.ndarray, complex]:
    """Rotate v so its largest-magnitude component is real positive; returns (v', phase removed)."""
    k = int(np.argmax(np.abs(v)))
    ph = v[k] / abs(v[k])
    return v / ph, ph


@dataclass(frozen=True)
class SchmidtDecomposition:
    coefficients: np.ndarray
    a_basis: np.ndarray  # columns
    b_basis: np.ndarray  # columns

    def state(self) -> np.ndarray:
        return sum(c * np.kron(self.a_basis[:, i], self.b_basis[:, i]) for i, c in enumerate(self.coefficients))

    @property
    def rank(self) -> int:
        return int(np.sum(self.coefficients > 1e-12))


def schmidt_decompose(psi, dims: Sequence[int], cutoff: float = 1e-14) -> SchmidtDecomposition:
    """psi = sum_i c_i |a_i>|b_i> with c_i descending; zero coefficients dropped."""
    dA, dB = dims
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != dA * dB:
        raise ValueError(f"state of size {psi.size} does not match dims {tuple(dims)}")
    if abs(np.linalg.norm(psi) - 1.0) > TOL:
        raise ValueError("Schmidt decomposition needs a unit vector")
    U, s, Vh = np.linalg.svd(psi.reshape(dA, dB))
    r = max(1, int(np.sum(s > cutoff)))
    A = np.empty((dA, r), dtype=complex)
    B = np.empty((dB, r), dtype=complex)
    for i in range(r):
        A[:, i], ph = _fix_phase(U[:, i])
        B[:, i] = Vh[i, :] * ph
    return SchmidtDecomposition(s[:r].copy(), A, B)


# --- quantum strategies -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuantumStrategy:
    state: DensityOperator
    alice_settings: tuple[ProjectiveMeasurement, ...]
    bob_settings: tuple[ProjectiveMeasurement, ...]

    def __post_init__(self):
        dA = self.alice_settings[0].dim
        dB = self.bob_settings[0].dim
        if any(m.dim != dA for m in self.alice_settings) or any(m.dim != dB for m in self.bob_settings):
            raise ValueError("settings of one party must share a dimension")
        if self.state.dim != dA * dB:
            raise ValueError(f"state dimension {self.state.dim} != {dA}*{dB}")
        if len({len(m) for m in self.alice_settings}) != 1 or len({len(m) for m in self.bob_settings}) != 1:
            raise ValueError("all settings of one party need the same number of outcomes")

    @property
    def dims(self) -> tuple[int, int]:
        return self.alice_settings[0].dim, self.bob_settings[0].dim

    @property
    def scenario(self) -> Scenario:
        return Scenario(len(self.alice_settings), len(self.bob_settings),
                        len(self.alice_settings[0]), len(self.bob_settings[0]))


def quantum_box(strategy: QuantumStrategy) -> CorrelationBox:
    """table[x, y, a, b] = Tr(rho (P^x_a (x) Q^y_b))."""
    s = strategy.scenario
    rho = strategy.state.matrix
    t = np.zeros(s.shape)
    for x, Ma in enumerate(strategy.alice_settings):
        for y, Mb in enumerate(strategy.bob_settings):
            for a, P in enumerate(Ma.projectors):
                for b, Q in enumerate(Mb.projectors):
                    t[x, y, a, b] = np.trace(rho @ np.kron(P.matrix, Q.matrix)).real
    t[np.abs(t) < 1e-15] = 0.0
    # renormalise away rounding so the box invariant (1e-12) holds
    t /= t.sum(axis=(2, 3), keepdims=True)
    return CorrelationBox(s, t)


def xz_measurement(theta: float) -> ProjectiveMeasurement:
    """Qubit measurement along Bloch angle ``theta`` in the X-Z plane; outcome 0 is the +1 eigenvector."""
    up = np.array([np.cos(theta / 2), np.sin(theta / 2)])
    down = np.array([-np.sin(theta / 2), np.cos(theta / 2)])
    return ProjectiveMeasurement.from_basis(np.column_stack([up, down]), labels=(1, -1))


def phi_plus() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)


def singlet() -> np.ndarray:
    return np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / np.sqrt(2.0)


def angle_strategy(angles: Sequence[float], psi=None) -> QuantumStrategy:
    """Strategy with Alice at angles[0:2] and Bob at angles[2:4] on a shared pure state."""
    psi = phi_plus() if psi is None else psi
    a0, a1, b0, b1 = angles
    return QuantumStrategy(
        DensityOperator.pure(psi),
        (xz_measurement(a0), xz_measurement(a1)),
        (xz_measurement(b0), xz_measurement(b1)),
    )


_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _correlator_grid(alice: np.ndarray, bob: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """<psi| n(a).sigma (x) n(b).sigma |psi> for every angle pair, by direct operator evaluation."""
    def obs(th):
        return np.cos(th)[:, None, None] * _PAULI_Z + np.sin(th)[:, None, None] * _PAULI_X

    OA, OB = obs(alice), obs(bob)
    psi_m = psi.reshape(2, 2)
    # <psi|A (x) B|psi> = sum conj(psi_ij) A_ik B_jl psi_kl
    return np.einsum("ij,aik,bjl,kl->ab", psi_m.conj(), OA, OB, psi_m).real


def _chsh_of_angles(angles, psi) -> float:
    a0, a1, b0, b1 = angles
    E = _correlator_grid(np.array([a0, a1]), np.array([b0, b1]), psi)
    return float(E[0, 0] + E[0, 1] + E[1, 0] - E[1, 1])


@dataclass(frozen=True)
class ChshOptimum:
    strategy: QuantumStrategy
    K: float
    angles: tuple[float, float, float, float]


def optimize_chsh(objective: str = "max", grid: int = 16, sweeps: int = 20, tol: float = 1e-12) -> ChshOptimum:
    """Search X-Z plane qubit measurements on |phi+> for the extreme CHSH value.

    A coarse grid over the four angles seeds a coordinate-descent refinement
    with bounded scalar minimisation along each angle.
    """
    if objective not in ("max", "min"):
        raise ValueError(f"objective must be 'max' or 'min', got {objective!r}")
    sign = 1.0 if objective == "max" else -1.0
    psi = phi_plus()
    th = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    E = _correlator_grid(th, th, psi)
    # K[a0, a1, b0, b1]
    K = E[:, None, :, None] + E[:, None, None, :] + E[None, :, :, None] - E[None, :, None, :]
    i = np.unravel_index(np.argmax(sign * K), K.shape)
    angles = [float(th[j]) for j in i]
    best = sign * _chsh_of_angles(angles, psi)
    for _ in range(sweeps):
        before = best
        for k in range(4):
            def f(v, k=k):
                trial = list(angles)
                trial[k] = v
                return -sign * _chsh_of_angles(trial, psi)

            c = angles[k]
            r = minimize_scalar(f, bounds=(c - np.pi / 2, c + np.pi / 2), method="bounded",
                                options={"xatol": 1e-12})
            if -r.fun > best:
                angles[k], best = float(r.x), -float(r.fun)
        if best - before < tol:
            break
    strategy = angle_strategy(angles, psi)
    return ChshOptimum(strategy, chsh_value(quantum_box(strategy)), tuple(angles))


# --- serialisation ----------------------------------------------------------


def matrix_to_json(m: np.ndarray, dims: Sequence[int] | None = None) -> dict:
    m = np.asarray(m, dtype=complex)
    return {
        "dims": list(dims) if dims is not None else [m.shape[0]],
        "shape": list(m.shape),
        "data": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def matrix_from_json(d: dict) -> tuple[np.ndarray, list[int]]:
    try:
        shape = tuple(int(s) for s in d["shape"])
        data = np.asarray(d["data"], dtype=float)
        dims = [int(v) for v in d["dims"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    if data.shape != (int(np.prod(shape)), 2):
        raise ValueError("matrix data length does not match shape")
    return (data[:, 0] + 1j * data[:, 1]).reshape(shape), dims


def state_to_json(rho: DensityOperator, dims: Sequence[int] | None = None) -> str:
    return json.dumps(matrix_to_json(rho.matrix, dims))


def state_from_json(text: str) -> tuple[DensityOperator, list[int]]:
    m, dims = matrix_from_json(json.loads(text))
    return DensityOperator(m), dims


def measurement_to_json(M: ProjectiveMeasurement) -> str:
    return json.dumps({
        "labels": list(M.labels),
        "projectors": [matrix_to_json(P.matrix) for P in M.projectors],
    })


def measurement_from_json(text: str) -> ProjectiveMeasurement:
    d = json.loads(text)
    return ProjectiveMeasurement(tuple(Projector(matrix_from_json(p)[0]) for p in d["projectors"]),
                                 tuple(d["labels"]))
