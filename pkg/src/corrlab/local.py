"""Local deterministic boxes, shared-randomness mixtures and local-polytope membership."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import simplex
from .boxes import (
    CHSH_SCENARIO,
    DIGIT_MAPS,
    CorrelationBox,
    GameSpec,
    Scenario,
    chsh_value,
    mix,
    win_probability,
)

BELL_BOUND = 2.0


@dataclass(frozen=True)
class DeterministicBox:
    alice_map: tuple[int, ...]
    bob_map: tuple[int, ...]
    na: int = 2
    nb: int = 2

    @property
    def scenario(self) -> Scenario:
        return Scenario(len(self.alice_map), len(self.bob_map), self.na, self.nb)

    def box(self) -> CorrelationBox:
        t = np.zeros(self.scenario.shape)
        for x, a in enumerate(self.alice_map):
            for y, b in enumerate(self.bob_map):
                t[x, y, a, b] = 1.0
        return CorrelationBox(self.scenario, t)

    def respond(self, x: int, y: int) -> tuple[int, int]:
        return self.alice_map[x], self.bob_map[y]


def enumerate_deterministic(scenario: Scenario) -> list[DeterministicBox]:
    """All na**nx * nb**ny local deterministic boxes, lexicographic in (alice_map, bob_map)."""
    alice = itertools.product(range(scenario.na), repeat=scenario.nx)
    bob = list(itertools.product(range(scenario.nb), repeat=scenario.ny))
    return [DeterministicBox(a, b, scenario.na, scenario.nb) for a in alice for b in bob]


def vertex_index(vertex: DeterministicBox) -> int:
    return enumerate_deterministic(vertex.scenario).index(vertex)


@dataclass(frozen=True)
class LocalDecomposition:
    vertices: tuple[DeterministicBox, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.vertices) != len(self.weights) or not self.vertices:
            raise ValueError("need one weight per vertex")
        w = np.asarray(self.weights)
        if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be non-negative and sum to 1")

    def box(self) -> CorrelationBox:
        w = np.clip(np.asarray(self.weights, float), 0.0, None)
        return mix([v.box() for v in self.vertices], w / w.sum())


@dataclass(frozen=True)
class MembershipResult:
    status: str  # "local" | "nonlocal"
    decomposition: LocalDecomposition | None = None
    chsh: float | None = None
    infeasibility: float | None = None

    @property
    def is_local(self) -> bool:
        return self.status == "local"

    def to_dict(self) -> dict:
        if self.is_local:
            return {
                "status": "local",
                "weights": list(self.decomposition.weights),
                "vertices": [vertex_index(v) for v in self.decomposition.vertices],
            }
        out = {"status": "nonlocal", "chsh": self.chsh}
        if self.infeasibility is not None:
            out["infeasibility"] = self.infeasibility
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _vertex_matrix(vertices: Sequence[DeterministicBox]) -> np.ndarray:
    """Columns are the flattened vertex tables."""
    return np.stack([v.box().table.ravel() for v in vertices], axis=1)


def membership(box: CorrelationBox, tol: float = 1e-8) -> MembershipResult:
    """Decide whether ``box`` is a shared-randomness mixture of deterministic boxes.

    Solves the feasibility LP  sum_v w_v D_v = box,  sum_v w_v = 1,  w >= 0.
    """
    vertices = enumerate_deterministic(box.scenario)
    D = _vertex_matrix(vertices)
    A = np.vstack([D, np.ones((1, D.shape[1]))])
    b = np.concatenate([box.table.ravel(), [1.0]])
    res = simplex.solve(np.zeros(D.shape[1]), A, b)
    k = chsh_value(box) if box.scenario == CHSH_SCENARIO else None
    if res.status == "infeasible":
        return MembershipResult("nonlocal", chsh=k, infeasibility=res.infeasibility)
    if res.status != "optimal":
        raise simplex.LPError(f"membership LP ended with status {res.status}")
    support = np.flatnonzero(res.x > 0)
    w = res.x[support]
    dec = LocalDecomposition(tuple(vertices[i] for i in support), tuple(float(v) for v in w / w.sum()))
    err = np.abs(dec.box().table - box.table).max()
    if err > tol:
        raise simplex.LPError(f"LP decomposition misses the box by {err:.3g} > tol={tol}")
    return MembershipResult("local", decomposition=dec, chsh=k)


def classical_game_strategy(p: float) -> LocalDecomposition:
    """Shared-randomness strategy that wins the p-game with certainty for p <= 1/3."""
    if not 0.0 <= p <= 1.0 / 3.0:
        raise ValueError(
            f"no classical winning strategy for p={p}: winning needs K = 2 - 12p, "
            "and |K| <= 2 for shared randomness forces p <= 1/3"
        )
    digits = [1, 2, 3, 4]
    weights = [p, p, p, 1.0 - 3.0 * p]
    pairs = [(DeterministicBox(*DIGIT_MAPS[d]), w) for d, w in zip(digits, weights) if w > 0]
    return LocalDecomposition(tuple(v for v, _ in pairs), tuple(w for _, w in pairs))


def classical_bound_optimum(game: GameSpec, minimize: bool = False) -> tuple[float, DeterministicBox]:
    """Best (or worst) deterministic strategy; the first in canonical order wins ties."""
    best_val, best_v = None, None
    for v in enumerate_deterministic(game.scenario):
        val = win_probability(v.box(), game)
        if best_val is None or (val < best_val if minimize else val > best_val):
            best_val, best_v = val, v
    return best_val, best_v


def lp_optimal_win(
    game: GameSpec,
    marginal: float | None = None,
    zero_entries: Sequence[tuple[int, int, int, int]] = (),
    minimize: bool = False,
) -> tuple[float, LocalDecomposition]:
    """Optimise the win probability over the local polytope by linear programming.

    ``marginal`` pins p(a=1|x) = p(b=1|y) = marginal for every input (binary
    outputs); ``zero_entries`` forces the listed table entries to vanish.
    """
    vertices = enumerate_deterministic(game.scenario)
    tables = [v.box().table for v in vertices]
    n = len(vertices)
    rows, rhs = [np.ones(n)], [1.0]
    if marginal is not None:
        s = game.scenario
        if s.na != 2 or s.nb != 2:
            raise ValueError("marginal constraint needs binary outputs")
        for x in range(s.nx):
            rows.append(np.array([t[x, 0, 1, :].sum() for t in tables]))
            rhs.append(marginal)
        for y in range(s.ny):
            rows.append(np.array([t[0, y, :, 1].sum() for t in tables]))
            rhs.append(marginal)
    for idx in zero_entries:
        rows.append(np.array([t[idx] for t in tables]))
        rhs.append(0.0)
    gains = np.array([win_probability(CorrelationBox(game.scenario, t), game) for t in tables])
    res = simplex.solve(gains if minimize else -gains, np.vstack(rows), np.array(rhs))
    if res.status != "optimal":
        raise simplex.LPError(f"win-probability LP ended with status {res.status}")
    support = np.flatnonzero(res.x > 0)
    w = res.x[support] / res.x[support].sum()
    dec = LocalDecomposition(tuple(vertices[i] for i in support), tuple(float(v) for v in w))
    return float(gains @ res.x), dec


# --- monogamy demonstration -------------------------------------------------


def _tripartite_extension_lp(ab: CorrelationBox, ac: CorrelationBox) -> simplex.LPResult:
    """Feasibility of a no-signaling p(a,b,c|x,y,z) with AB marginal ``ab`` and AC marginal ``ac``."""
    shape = (2,) * 6  # a, b, c, x, y, z
    n = 64

    def idx(a, b, c, x, y, z):
        return np.ravel_multi_index((a, b, c, x, y, z), shape)

    rows, rhs = [], []
    for a, b, x, y, z in itertools.product(range(2), repeat=5):
        r = np.zeros(n)
        for c in range(2):
            r[idx(a, b, c, x, y, z)] = 1.0
        rows.append(r)
        rhs.append(ab.table[x, y, a, b])
    for a, c, x, y, z in itertools.product(range(2), repeat=5):
        r = np.zeros(n)
        for b in range(2):
            r[idx(a, b, c, x, y, z)] = 1.0
        rows.append(r)
        rhs.append(ac.table[x, z, a, c])
    # BC marginal independent of Alice's input
    for b, c, y, z in itertools.product(range(2), repeat=4):
        r = np.zeros(n)
        for a in range(2):
            r[idx(a, b, c, 0, y, z)] += 1.0
            r[idx(a, b, c, 1, y, z)] -= 1.0
        rows.append(r)
        rhs.append(0.0)
    return simplex.solve(np.zeros(n), np.array(rows), np.array(rhs))


def monogamy_demo(shared: CorrelationBox) -> dict:
    """Can Alice share ``shared`` with both Bob and Charles under no-signaling?"""
    res = _tripartite_extension_lp(shared, shared)
    return {
        "chsh": chsh_value(shared),
        "extendable": res.status == "optimal",
        "infeasibility": res.infeasibility,
    }
