"""Monte Carlo play of nonlocal games.

Rounds are generated in fixed-size blocks. Block ``j`` draws from its own
stream, ``SeedSequence(seed, spawn_key=(j,))``, so the result for a seed does
not depend on how blocks are distributed over workers. Reports hold raw
counts and merge by addition.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.stats import norm

from .boxes import CorrelationBox, GameSpec, Scenario, build_game_table, win_probability, win_probability_formula
from .hilbert import QuantumStrategy, optimize_chsh, quantum_box
from .local import LocalDecomposition, classical_game_strategy, lp_optimal_win

BLOCK = 8192
MIN_CELL = 30


@dataclass(frozen=True)
class LocalMixture:
    decomposition: LocalDecomposition
    name: str = "classical"

    @property
    def scenario(self) -> Scenario:
        return self.decomposition.vertices[0].scenario

    def box(self) -> CorrelationBox:
        return self.decomposition.box()

    def sample(self, x: np.ndarray, y: np.ndarray, rng: np.random.Generator):
        # shared randomness: one vertex per round, then each party applies its own map
        w = np.asarray(self.decomposition.weights, dtype=float)
        lam = rng.choice(w.size, size=x.size, p=w / w.sum())
        amap = np.array([v.alice_map for v in self.decomposition.vertices])
        bmap = np.array([v.bob_map for v in self.decomposition.vertices])
        return amap[lam, x], bmap[lam, y]


@dataclass(frozen=True)
class Oracle:
    box_: CorrelationBox
    name: str = "oracle"

    @property
    def scenario(self) -> Scenario:
        return self.box_.scenario

    def box(self) -> CorrelationBox:
        return self.box_

    def sample(self, x, y, rng):
        return _sample_table(self.box_, x, y, rng)


@dataclass(frozen=True)
class Quantum:
    strategy: QuantumStrategy
    name: str = "quantum"

    @property
    def scenario(self) -> Scenario:
        return self.strategy.scenario

    def box(self) -> CorrelationBox:
        return quantum_box(self.strategy)

    def sample(self, x, y, rng):
        return _sample_table(self.box(), x, y, rng)


Strategy = Union[LocalMixture, Oracle, Quantum]


def _sample_table(box: CorrelationBox, x, y, rng):
    s = box.scenario
    cdf = np.cumsum(box.table.reshape(s.nx, s.ny, s.na * s.nb), axis=2)
    cdf[..., -1] = 1.0
    u = rng.random(x.size)
    k = np.empty(x.size, dtype=int)
    for xi in range(s.nx):
        for yi in range(s.ny):
            sel = (x == xi) & (y == yi)
            k[sel] = np.searchsorted(cdf[xi, yi], u[sel], side="right")
    return k // s.nb, k % s.nb


@dataclass
class RunReport:
    rounds: int
    wins: int
    counts: np.ndarray  # [x, y, a, b]
    seed: int
    game: str = ""
    strategy: str = ""

    @property
    def win_rate(self) -> float:
        return self.wins / self.rounds

    def empirical_box_table(self) -> np.ndarray:
        n = self.counts.sum(axis=(2, 3), keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(n > 0, self.counts / np.maximum(n, 1), np.nan)

    def empirical_marginals(self) -> dict:
        """{'A': p(a|x,y) as [x, y, a], 'B': p(b|x,y) as [x, y, b]}."""
        t = self.empirical_box_table()
        return {"A": t.sum(axis=3), "B": t.sum(axis=2)}

    @property
    def no_signaling_stat(self) -> float:
        m = self.empirical_marginals()
        stat = 0.0
        for arr, axis in ((m["A"], 1), (m["B"], 0)):
            spread = np.nanmax(arr, axis=axis) - np.nanmin(arr, axis=axis)
            if np.any(np.isfinite(spread)):
                stat = max(stat, float(np.nanmax(spread)))
        return stat

    def merge(self, other: "RunReport") -> "RunReport":
        if self.seed != other.seed or self.counts.shape != other.counts.shape:
            raise ValueError("can only merge reports of one run")
        return RunReport(self.rounds + other.rounds, self.wins + other.wins,
                         self.counts + other.counts, self.seed, self.game, self.strategy)

    def to_dict(self) -> dict:
        m = self.empirical_marginals()
        return {
            "game": self.game,
            "strategy": self.strategy,
            "rounds": self.rounds,
            "wins": self.wins,
            "win_rate": self.win_rate,
            "seed": self.seed,
            "counts": self.counts.tolist(),
            "marginals": {k: np.nan_to_num(v, nan=-1.0).tolist() for k, v in m.items()},
            "no_signaling_stat": self.no_signaling_stat,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_csv(self) -> str:
        lines = ["x,y,a,b,count"]
        for idx in np.ndindex(*self.counts.shape):
            lines.append(",".join(map(str, idx)) + f",{int(self.counts[idx])}")
        return "\n".join(lines) + "\n"


def _play_block(game: GameSpec, strategy: Strategy, n: int, seed: int, block: int) -> RunReport:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    s = game.scenario
    flat = rng.choice(s.nx * s.ny, size=n, p=game.input_distribution.ravel())
    x, y = flat // s.ny, flat % s.ny
    a, b = strategy.sample(x, y, rng)
    counts = np.zeros(s.shape, dtype=np.int64)
    np.add.at(counts, (x, y, a, b), 1)
    wins = int(game.win_mask[x, y, a, b].sum())
    return RunReport(n, wins, counts, seed)


def play(game: GameSpec, strategy: Strategy, rounds: int, seed: int, workers: int = 1) -> RunReport:
    if rounds < 1:
        raise ValueError("need at least one round")
    if strategy.scenario != game.scenario:
        raise ValueError(f"strategy scenario {strategy.scenario.shape} != game scenario {game.scenario.shape}")
    sizes = [BLOCK] * (rounds // BLOCK) + ([rounds % BLOCK] if rounds % BLOCK else [])
    jobs = [(game, strategy, n, seed, j) for j, n in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda args: _play_block(*args), jobs))
    else:
        parts = [_play_block(*args) for args in jobs]
    report = parts[0]
    for p in parts[1:]:
        report = report.merge(p)
    report.game = game.name
    report.strategy = getattr(strategy, "name", type(strategy).__name__)
    return report


# --- statistical no-signaling test --------------------------------------------


@dataclass
class NoSignalingVerdict:
    status: str  # "pass" | "reject" | "inconclusive"
    alpha: float
    tests: int
    min_p_value: float | None
    max_abs_z: float | None
    worst: tuple | None = None
    small_cells: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def _two_proportion_z(k1, n1, k2, n2) -> float:
    pooled = (k1 + k2) / (n1 + n2)
    se = np.sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n2))
    if se == 0:
        return 0.0 if k1 / n1 == k2 / n2 else np.inf
    return (k1 / n1 - k2 / n2) / se


def empirical_no_signaling(report: RunReport, alpha: float = 0.01) -> NoSignalingVerdict:
    """Two-proportion z-tests of each marginal across the other party's inputs (Bonferroni)."""
    c = report.counts
    nx, ny, na, nb = c.shape
    tests = []  # (label, k1, n1, k2, n2)
    ca, cb = c.sum(axis=3), c.sum(axis=2)  # [x, y, a], [x, y, b]
    for x in range(nx):
        for a in range(na):
            for y1 in range(ny):
                for y2 in range(y1 + 1, ny):
                    tests.append((("A", a, x, (y1, y2)), ca[x, y1, a], ca[x, y1].sum(), ca[x, y2, a], ca[x, y2].sum()))
    for y in range(ny):
        for b in range(nb):
            for x1 in range(nx):
                for x2 in range(x1 + 1, nx):
                    tests.append((("B", b, y, (x1, x2)), cb[x1, y, b], cb[x1, y].sum(), cb[x2, y, b], cb[x2, y].sum()))
    small = sorted({t[0][:3] for t in tests if min(t[2], t[4]) < MIN_CELL})
    if small or not tests:
        return NoSignalingVerdict("inconclusive", alpha, len(tests), None, None, small_cells=small)
    level = alpha / len(tests)
    best_p, best_z, worst = 1.0, 0.0, None
    for label, k1, n1, k2, n2 in tests:
        z = _two_proportion_z(k1, n1, k2, n2)
        p = 2 * norm.sf(abs(z))
        if p < best_p or worst is None:
            best_p, best_z, worst = p, abs(z), label
    return NoSignalingVerdict("reject" if best_p < level else "pass", alpha, len(tests), float(best_p), float(best_z), worst)


# --- shipped strategies and the p sweep ------------------------------------------


def classical_strategy(p: float) -> LocalMixture:
    """Winning shared-randomness strategy for p <= 1/3, else the best local one honouring the marginals."""
    if p <= 1 / 3:
        return LocalMixture(classical_game_strategy(p))
    from .boxes import p_game

    _, dec = lp_optimal_win(p_game(p), marginal=p, zero_entries=_RULE1_ZEROS)
    return LocalMixture(dec)


def quantum_strategy(objective: str = "min") -> Quantum:
    return Quantum(optimize_chsh(objective).strategy)


def pr_strategy(p: float) -> Oracle:
    return Oracle(build_game_table(p), name="pr")


# p(1,1|xy) = 0 on the inputs where both outputs 1 lose
_RULE1_ZEROS = [(0, 0, 1, 1), (0, 1, 1, 1), (1, 0, 1, 1)]

CLASSICAL_K = -2.0


def sweep_p(family: str, p_grid: Sequence[float], rounds: int = 0, seed: int = 0) -> list[dict]:
    """Best win probability per p for a strategy family.

    ``best`` is exact: the LP optimum over local boxes with marginal p (and no
    rule-1 losses) for "classical", the winning game table for "pr", and the formula value at
    the optimal quantum CHSH value for "quantum". ``ceiling`` is the formula
    bound clipped at 1. With ``rounds > 0`` classical and pr rows also carry a
    simulated win rate.
    """
    from .boxes import p_game

    if family not in ("classical", "quantum", "pr"):
        raise ValueError(f"unknown strategy family {family!r}")
    k_quantum = optimize_chsh("min").K if family == "quantum" else None
    rows = []
    for i, p in enumerate(p_grid):
        if not 0.0 <= p <= 0.5:
            raise ValueError(f"p={p} outside [0, 1/2]")
        game = p_game(p)
        row = {"family": family, "p": float(p)}
        if family == "classical":
            row["ceiling"] = min(1.0, win_probability_formula(CLASSICAL_K, p))
            strat = classical_strategy(p)
            row["best"] = win_probability(strat.box(), game)
        elif family == "quantum":
            row["ceiling"] = min(1.0, win_probability_formula(k_quantum, p))
            row["best"] = row["ceiling"]
            row["K"] = k_quantum
            strat = None
        else:
            row["ceiling"] = 1.0
            strat = pr_strategy(p)
            row["best"] = win_probability(strat.box(), game)
        if rounds and strat is not None:
            row["simulated"] = play(game, strat, rounds, seed + i).win_rate
        rows.append(row)
    return rows
