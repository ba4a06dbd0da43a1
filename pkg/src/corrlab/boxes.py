"""Bipartite correlation boxes p(a,b|x,y) and the canonical tables of the p-game.

Tables are dense arrays indexed ``[x, y, a, b]``. Output 0 counts as +1 and
output 1 as -1 when correlators are formed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

NORM_TOL = 1e-12
CLAMP_TOL = 1e-12
NS_TOL = 1e-10


@dataclass(frozen=True)
class Scenario:
    nx: int
    ny: int
    na: int
    nb: int

    def __post_init__(self):
        for name in ("nx", "ny", "na", "nb"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"scenario count {name}={v!r} must be a positive integer")

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.nx, self.ny, self.na, self.nb)


CHSH_SCENARIO = Scenario(2, 2, 2, 2)


@dataclass(frozen=True, eq=False)
class CorrelationBox:
    """Conditional probability table ``table[x, y, a, b] = p(a, b | x, y)``.

    Entries in ``[-1e-12, 0)`` are clamped to zero; anything more negative,
    or a cell that does not sum to one, is rejected.
    """

    scenario: Scenario
    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.shape != self.scenario.shape:
            raise ValueError(f"table shape {t.shape} does not match scenario {self.scenario.shape}")
        if not np.all(np.isfinite(t)):
            raise ValueError("table has non-finite entries")
        if np.any(t < -CLAMP_TOL):
            raise ValueError(f"negative probability {t.min():.3g}")
        t[t < 0] = 0.0
        sums = t.sum(axis=(2, 3))
        bad = np.abs(sums - 1.0) > NORM_TOL
        if np.any(bad):
            x, y = np.argwhere(bad)[0]
            raise ValueError(f"cell (x={x}, y={y}) sums to {sums[x, y]!r}, not 1")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def from_table(cls, table) -> "CorrelationBox":
        t = np.asarray(table, dtype=float)
        if t.ndim != 4:
            raise ValueError("table must be 4-dimensional [x][y][a][b]")
        return cls(Scenario(*t.shape), t)

    def __eq__(self, other):
        if not isinstance(other, CorrelationBox):
            return NotImplemented
        return self.scenario == other.scenario and np.array_equal(self.table, other.table)

    def allclose(self, other: "CorrelationBox", atol: float = 1e-12) -> bool:
        return self.scenario == other.scenario and np.allclose(self.table, other.table, atol=atol, rtol=0)

    def to_json(self) -> str:
        return json.dumps({"scenario": list(self.scenario.shape), "table": self.table.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "CorrelationBox":
        data = json.loads(text)
        try:
            scenario = Scenario(*[int(v) for v in data["scenario"]])
            table = data["table"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed box JSON: {exc}") from exc
        return cls(scenario, np.asarray(table, dtype=float))


@dataclass(frozen=True)
class NoSignalingReport:
    is_no_signaling: bool
    max_violation: float
    # (party, output, own input, (other input i, other input j))
    worst_case: tuple | None = None


def _alice_marginals(box: CorrelationBox) -> np.ndarray:
    """p(a | x, y) as an array [x, y, a]."""
    return box.table.sum(axis=3)


def _bob_marginals(box: CorrelationBox) -> np.ndarray:
    """p(b | x, y) as an array [x, y, b]."""
    return box.table.sum(axis=2)


def check_no_signaling(box: CorrelationBox, tol: float = NS_TOL) -> NoSignalingReport:
    worst = 0.0
    where = None
    ma = _alice_marginals(box)
    for x in range(box.scenario.nx):
        for a in range(box.scenario.na):
            col = ma[x, :, a]
            i, j = int(np.argmax(col)), int(np.argmin(col))
            if col[i] - col[j] > worst:
                worst, where = col[i] - col[j], ("A", a, x, (i, j))
    mb = _bob_marginals(box)
    for y in range(box.scenario.ny):
        for b in range(box.scenario.nb):
            col = mb[:, y, b]
            i, j = int(np.argmax(col)), int(np.argmin(col))
            if col[i] - col[j] > worst:
                worst, where = col[i] - col[j], ("B", b, y, (i, j))
    worst = float(worst)
    return NoSignalingReport(worst <= tol, worst, where)


def marginal(box: CorrelationBox, party: str, output: int, own_input: int, other_input: int) -> float:
    """Probability that ``party`` ('A' or 'B') outputs ``output`` given both inputs."""
    s = box.scenario
    party = party.upper()
    if party == "A":
        limits = (s.na, s.nx, s.ny)
    elif party == "B":
        limits = (s.nb, s.ny, s.nx)
    else:
        raise ValueError(f"party must be 'A' or 'B', got {party!r}")
    for value, bound, name in zip((output, own_input, other_input), limits, ("output", "own_input", "other_input")):
        if not 0 <= value < bound:
            raise IndexError(f"{name}={value} out of range [0, {bound})")
    if party == "A":
        return float(box.table[own_input, other_input, output, :].sum())
    return float(box.table[other_input, own_input, :, output].sum())


def _require_chsh(box: CorrelationBox):
    if box.scenario != CHSH_SCENARIO:
        raise ValueError(f"CHSH quantities need a 2,2,2,2 scenario, got {box.scenario.shape}")


def correlators(box: CorrelationBox) -> np.ndarray:
    """<xy> = p(same | xy) - p(different | xy), as a 2x2 array."""
    _require_chsh(box)
    sign = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return np.einsum("xyab,ab->xy", box.table, sign)


def chsh_value(box: CorrelationBox) -> float:
    c = correlators(box)
    return float(c[0, 0] + c[0, 1] + c[1, 0] - c[1, 1])


# --- games -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GameSpec:
    scenario: Scenario
    win: Callable[[int, int, int, int], bool]
    input_distribution: np.ndarray = None
    marginal_p: float | None = None
    name: str = ""
    win_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        s = self.scenario
        dist = self.input_distribution
        if dist is None:
            dist = np.full((s.nx, s.ny), 1.0 / (s.nx * s.ny))
        dist = np.array(dist, dtype=float)
        if dist.shape != (s.nx, s.ny):
            raise ValueError(f"input distribution shape {dist.shape} != {(s.nx, s.ny)}")
        if np.any(dist < 0) or abs(dist.sum() - 1.0) > NORM_TOL:
            raise ValueError("input distribution must be non-negative and sum to 1")
        if self.marginal_p is not None and not 0.0 <= self.marginal_p <= 0.5:
            raise ValueError(f"marginal p={self.marginal_p} outside [0, 1/2]")
        dist.setflags(write=False)
        object.__setattr__(self, "input_distribution", dist)
        mask = np.zeros(s.shape, dtype=bool)
        for idx in np.ndindex(*s.shape):
            mask[idx] = bool(self.win(*idx))
        mask.setflags(write=False)
        object.__setattr__(self, "win_mask", mask)


def p_game(p: float) -> GameSpec:
    """The two-input, two-output game with marginal probability ``p`` of output 1.

    Rounds with inputs 00, 01, 10 are won when the outputs are never both 1 and
    the round 11 when the outputs agree. At ``p = 1/2`` the marginal constraint
    leaves no room for the output pair 00 on those three inputs, so the rule
    tightens to "outputs differ"; this is the form in which the classical
    optimum is 3/4.
    """
    _check_p(p)
    if p == 0.5:
        def win(x, y, a, b):
            return (a != b) if (x, y) != (1, 1) else (a == b)
    else:
        def win(x, y, a, b):
            return (a * b == 0) if (x, y) != (1, 1) else (a == b)
    return GameSpec(CHSH_SCENARIO, win, marginal_p=p, name=f"p-game(p={p})")


def trivial_game(scenario: Scenario = CHSH_SCENARIO) -> GameSpec:
    return GameSpec(scenario, lambda x, y, a, b: True, name="always-win")


def win_probability(box: CorrelationBox, game: GameSpec) -> float:
    if box.scenario != game.scenario:
        raise ValueError(f"box scenario {box.scenario.shape} != game scenario {game.scenario.shape}")
    per_input = np.where(game.win_mask, box.table, 0.0).sum(axis=(2, 3))
    return float((game.input_distribution * per_input).sum())


def _check_p(p: float):
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"p={p} outside [0, 1/2]; the game needs 1-2p >= 0 and p >= 0")


def win_probability_formula(K: float, p: float) -> float:
    """Win probability of the p-game from the CHSH value K (uniform inputs)."""
    _check_p(p)
    return 0.5 - K / 8.0 + 3.0 * (1.0 - 2.0 * p) / 4.0


# --- canonical boxes -------------------------------------------------------


def build_game_table(p: float) -> CorrelationBox:
    """The perfectly winning correlations of the p-game."""
    _check_p(p)
    t = np.zeros(CHSH_SCENARIO.shape)
    for x, y in [(0, 0), (0, 1), (1, 0)]:
        t[x, y, 0, 0] = 1 - 2 * p
        t[x, y, 1, 0] = p
        t[x, y, 0, 1] = p
    t[1, 1, 0, 0] = 1 - p
    t[1, 1, 1, 1] = p
    return CorrelationBox(CHSH_SCENARIO, t)


def table6_box() -> CorrelationBox:
    return build_game_table(0.5)


def pr_box() -> CorrelationBox:
    """a XOR b = x AND y with uniform marginals."""
    t = np.zeros(CHSH_SCENARIO.shape)
    for x, y, a, b in np.ndindex(2, 2, 2, 2):
        if (a ^ b) == (x & y):
            t[x, y, a, b] = 0.5
    return CorrelationBox(CHSH_SCENARIO, t)


def deterministic_box(alice_map: Sequence[int], bob_map: Sequence[int], na: int = 2, nb: int = 2) -> CorrelationBox:
    """Product box a = alice_map[x], b = bob_map[y]."""
    s = Scenario(len(alice_map), len(bob_map), na, nb)
    t = np.zeros(s.shape)
    for x, a in enumerate(alice_map):
        for y, b in enumerate(bob_map):
            t[x, y, a, b] = 1.0
    return CorrelationBox(s, t)


# Local maps of the three shared-randomness digits; digit 4 outputs 0 always.
DIGIT_MAPS = {
    1: ((0, 1), (0, 1)),
    2: ((1, 0), (0, 0)),
    3: ((0, 0), (1, 0)),
    4: ((0, 0), (0, 0)),
}


def deterministic_digit_box(d: int) -> CorrelationBox:
    if d not in DIGIT_MAPS:
        raise ValueError(f"digit must be one of {sorted(DIGIT_MAPS)}, got {d!r}")
    return deterministic_box(*DIGIT_MAPS[d])


def uniform_box(scenario: Scenario = CHSH_SCENARIO) -> CorrelationBox:
    return CorrelationBox(scenario, np.full(scenario.shape, 1.0 / (scenario.na * scenario.nb)))


def product_box(q: Sequence[Sequence[float]], r: Sequence[Sequence[float]]) -> CorrelationBox:
    """p(a,b|x,y) = q[x][a] * r[y][b]."""
    q, r = np.asarray(q, float), np.asarray(r, float)
    return CorrelationBox.from_table(np.einsum("xa,yb->xyab", q, r))


def flip_outputs(box: CorrelationBox, party: str) -> CorrelationBox:
    """Relabel one party's outputs a -> na-1-a on every input."""
    party = party.upper()
    if party == "A":
        t = box.table[:, :, ::-1, :]
    elif party == "B":
        t = box.table[:, :, :, ::-1]
    else:
        raise ValueError(f"party must be 'A' or 'B', got {party!r}")
    return CorrelationBox(box.scenario, t)


def mix(boxes: Sequence[CorrelationBox], weights: Sequence[float]) -> CorrelationBox:
    if len(boxes) == 0 or len(boxes) != len(weights):
        raise ValueError("need one weight per box and at least one box")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > NORM_TOL:
        raise ValueError("weights must be non-negative and sum to 1")
    scenario = boxes[0].scenario
    if any(b.scenario != scenario for b in boxes):
        raise ValueError("all boxes must share one scenario")
    if len(boxes) == 1:
        return CorrelationBox(scenario, boxes[0].table)
    t = np.tensordot(w, np.stack([b.table for b in boxes]), axes=1)
    return CorrelationBox(scenario, t)
