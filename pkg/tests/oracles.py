"""Independent reference computations used to derive and freeze expected values.

Each oracle recomputes a quantity by a route that does not share code with the
package: explicit loops, scipy's LP solver, dense Kronecker products of density
matrices, closed-form correlators.
"""
import itertools

import numpy as np
from scipy.optimize import linprog


def rule_win(x, y, a, b, p):
    """Round outcome read off the game rules; at p = 1/2 the 00 output is excluded too."""
    if (x, y) == (1, 1):
        return a == b
    if p == 0.5:
        return a != b
    return not (a == 1 and b == 1)


def brute_win(table, p):
    total = 0.0
    for x, y, a, b in itertools.product(range(2), repeat=4):
        if rule_win(x, y, a, b, p):
            total += 0.25 * table[x][y][a][b]
    return total


def brute_chsh(table):
    sign = {0: 1, 1: -1}
    E = {}
    for x, y in itertools.product(range(2), repeat=2):
        E[x, y] = sum(sign[a] * sign[b] * table[x][y][a][b] for a in range(2) for b in range(2))
    return E[0, 0] + E[0, 1] + E[1, 0] - E[1, 1]


def all_local_maps():
    """The 16 deterministic tables, built from explicit response functions."""
    maps = list(itertools.product(range(2), repeat=2))
    out = []
    for fa in maps:
        for fb in maps:
            t = np.zeros((2, 2, 2, 2))
            for x, y in itertools.product(range(2), repeat=2):
                t[x, y, fa[x], fb[y]] = 1.0
            out.append(t)
    return out


def vertex_win_range(p):
    vals = [brute_win(t, p) for t in all_local_maps()]
    return min(vals), max(vals)


def linprog_is_local(table):
    V = np.stack([t.ravel() for t in all_local_maps()], axis=1)
    A = np.vstack([V, np.ones((1, V.shape[1]))])
    b = np.concatenate([np.asarray(table).ravel(), [1.0]])
    res = linprog(np.zeros(V.shape[1]), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    return res.status == 0


def linprog_best_win(p, zero_rule1=True):
    """Best local win probability with marginal p (and optionally no 11 outputs off input 11)."""
    tabs = all_local_maps()
    V = np.stack([t.ravel() for t in tabs], axis=1)
    rows, rhs = [np.ones(V.shape[1])], [1.0]
    for x, y in itertools.product(range(2), repeat=2):
        rows.append(np.array([t[x, y, 1, :].sum() for t in tabs])); rhs.append(p)
        rows.append(np.array([t[x, y, :, 1].sum() for t in tabs])); rhs.append(p)
        if zero_rule1 and (x, y) != (1, 1):
            rows.append(np.array([t[x, y, 1, 1] for t in tabs])); rhs.append(0.0)
    c = -np.array([brute_win(t, p) for t in tabs])
    res = linprog(c, A_eq=np.array(rows), b_eq=np.array(rhs), bounds=(0, None), method="highs")
    return -res.fun if res.status == 0 else None


def naive_partial_trace(rho, dA, dB, keep):
    r = np.asarray(rho).reshape(dA, dB, dA, dB)
    if keep == "A":
        out = np.zeros((dA, dA), dtype=complex)
        for i, j, k in itertools.product(range(dA), range(dA), range(dB)):
            out[i, j] += r[i, k, j, k]
    else:
        out = np.zeros((dB, dB), dtype=complex)
        for i, j, k in itertools.product(range(dB), range(dB), range(dA)):
            out[i, j] += r[k, i, k, j]
    return out


def xz_correlator(theta_a, theta_b, state="phi+"):
    """Closed form: cos(a - b) on |phi+>, -cos(a - b) on the singlet."""
    return np.cos(theta_a - theta_b) * (1 if state == "phi+" else -1)


def dense_helstrom(states1, states2, n):
    """Helstrom success from n-fold tensor powers of the averaged density matrices."""
    def power(rho):
        out = np.ones((1, 1))
        for _ in range(n):
            out = np.kron(out, rho)
        return out

    def avg(states):
        return sum(power(np.outer(s, s.conj())) for s in states.T) / states.shape[1]

    ev = np.linalg.eigvalsh(avg(states1) - avg(states2))
    return 0.5 + 0.25 * np.abs(ev).sum()


def random_density(rng, d, rank=None):
    rank = rank or d
    G = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, d):
    Z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))
