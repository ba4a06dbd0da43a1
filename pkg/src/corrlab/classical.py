"""Finite classical probability spaces written in density-operator form.

A distribution over n atoms is rho = sum_i p_i chi_i and an event is an
indicator vector chi_a. Conditioning is chi_a rho chi_a / sum(chi_a rho chi_a),
which on diagonal matrices is exactly the Lüders rule.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .hilbert import DensityOperator, Projector, luders_conditionalize

TOL = 1e-12


class NullEventError(ValueError):
    """Conditioning on an event of probability zero."""


@dataclass(frozen=True, eq=False)
class FiniteSampleSpace:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"sample space needs n >= 1 atoms, got {self.n!r}")

    def whole(self) -> "ClassicalEvent":
        return ClassicalEvent(np.ones(self.n, dtype=int))

    def atom(self, i: int) -> "ClassicalEvent":
        chi = np.zeros(self.n, dtype=int)
        chi[i] = 1
        return ClassicalEvent(chi)


@dataclass(frozen=True, eq=False)
class ClassicalDensity:
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size == 0 or np.any(w < 0) or abs(w.sum() - 1.0) > TOL:
            raise ValueError("weights must be non-negative and sum to 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.size

    def to_json(self) -> str:
        return json.dumps({"weights": self.weights.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "ClassicalDensity":
        return cls(np.asarray(json.loads(text)["weights"], dtype=float))


@dataclass(frozen=True, eq=False)
class ClassicalEvent:
    indicator: np.ndarray

    def __post_init__(self):
        chi = np.array(self.indicator).ravel()
        if not np.all((chi == 0) | (chi == 1)):
            raise ValueError("event indicator entries must be 0 or 1")
        chi = chi.astype(int)
        chi.setflags(write=False)
        object.__setattr__(self, "indicator", chi)

    def __and__(self, other: "ClassicalEvent") -> "ClassicalEvent":
        return ClassicalEvent(self.indicator * other.indicator)


def _check(rho: ClassicalDensity, a: ClassicalEvent):
    if rho.n != a.indicator.size:
        raise ValueError(f"dimension mismatch: {rho.n} atoms vs event of size {a.indicator.size}")


def c_probability(rho: ClassicalDensity, a: ClassicalEvent) -> float:
    _check(rho, a)
    return float(rho.weights @ a.indicator)


def c_conditionalize(rho: ClassicalDensity, a: ClassicalEvent) -> ClassicalDensity:
    pa = c_probability(rho, a)
    if pa <= TOL:
        raise NullEventError(f"event has probability {pa:.3g}")
    return ClassicalDensity(rho.weights * a.indicator / pa)


def atomic_decomposition(rho: ClassicalDensity) -> tuple[np.ndarray, np.ndarray]:
    """Weights over the deterministic (atomic) states and the atom matrix.

    The atoms form the identity, so the linear system has exactly one
    solution; the returned weights are that solution.
    """
    atoms = np.eye(rho.n)
    w = np.linalg.solve(atoms, rho.weights)
    return w, atoms


# --- embedding in the quantum formalism --------------------------------------


def embed_density(rho: ClassicalDensity) -> DensityOperator:
    return DensityOperator(np.diag(rho.weights).astype(complex))


def embed_event(a: ClassicalEvent) -> Projector:
    return Projector(np.diag(a.indicator).astype(complex))


@dataclass
class CorrespondenceReport:
    n: int
    cases: int
    skipped_null: int
    max_deviation: float

    @property
    def holds(self) -> bool:
        return self.max_deviation < TOL


def commuting_correspondence(n: int, cases: int = 100, seed: int = 0) -> CorrespondenceReport:
    """Compare Lüders on the diagonal embedding with Bayesian conditioning on random instances."""
    FiniteSampleSpace(n)
    rng = np.random.default_rng(seed)
    worst, skipped = 0.0, 0
    for _ in range(cases):
        w = rng.dirichlet(np.ones(n))
        chi = rng.integers(0, 2, size=n)
        if not chi.any():
            chi[rng.integers(n)] = 1
        rho, a = ClassicalDensity(w), ClassicalEvent(chi)
        if c_probability(rho, a) <= TOL:
            skipped += 1
            continue
        classical = np.diag(c_conditionalize(rho, a).weights)
        quantum = luders_conditionalize(embed_density(rho), embed_event(a)).matrix
        worst = max(worst, float(np.abs(quantum - classical).max()))
    return CorrespondenceReport(n, cases, skipped, worst)


def noncommuting_counterexample() -> dict:
    """A qubit state and projector that are not simultaneously diagonal.

    Lüders conditioning produces coherences, so the result is not the
    embedding of any classical density; ``deviation`` is its distance (max
    entry) from the nearest diagonal operator.
    """
    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    rho = DensityOperator(np.array([[0.75, 0.0], [0.0, 0.25]], dtype=complex))
    P = Projector(np.outer(plus, plus))
    quantum = luders_conditionalize(rho, P).matrix
    deviation = float(np.abs(quantum - np.diag(np.diag(quantum))).max())
    return {"deviation": deviation, "correspondence_holds": deviation < TOL}
