"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Solves min c.x subject to A x = b, x >= 0. Phase one drives artificial
variables out of the basis; phase two optimizes the real objective. Bland's
rule (lowest eligible index enters, lowest-index basic variable leaves on
ratio ties) makes the pivot sequence a deterministic function of the input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import Infeasible, Unbounded

TOL = 1e-9


@dataclass
class SimplexResult:
    x: np.ndarray
    objective: float
    duals: np.ndarray
    basis: List[int]
    pivots: List[Tuple[int, int]] = field(default_factory=list)


def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    for r in range(tableau.shape[0]):
        if r != row and tableau[r, col] != 0.0:
            tableau[r] -= tableau[r, col] * tableau[row]


def _run_phase(tableau: np.ndarray, basis: List[int], costs: np.ndarray,
               n_cols: int, pivots: List[Tuple[int, int]],
               frozen: Optional[set] = None) -> None:
    m = tableau.shape[0]
    while True:
        # Reduced costs under the current basis.
        cb = costs[basis]
        reduced = costs[:n_cols] - cb @ tableau[:, :n_cols]
        entering = -1
        for j in range(n_cols):
            if frozen and j in frozen:
                continue
            if reduced[j] < -TOL:
                entering = j
                break
        if entering < 0:
            return
        column = tableau[:, entering]
        best_row = -1
        best_ratio = None
        for r in range(m):
            if column[r] > TOL:
                ratio = tableau[r, -1] / column[r]
                if best_row < 0 or ratio < best_ratio - TOL or (
                        abs(ratio - best_ratio) <= TOL and basis[r] < basis[best_row]):
                    best_row, best_ratio = r, ratio
        if best_row < 0:
            raise Unbounded(f"column {entering} unbounded")
        pivots.append((entering, basis[best_row]))
        _pivot(tableau, best_row, entering)
        basis[best_row] = entering


def solve_standard_form(c: np.ndarray, a: np.ndarray, b: np.ndarray) -> SimplexResult:
    """Minimize ``c.x`` over ``a x = b, x >= 0``.

    Raises Infeasible when phase one cannot reach zero and Unbounded when the
    objective has no finite minimum. Dual values are recovered from the final
    basis against the original data.
    """
    a = np.asarray(a, dtype=float).copy()
    b = np.asarray(b, dtype=float).copy()
    c = np.asarray(c, dtype=float).copy()
    m, n = a.shape
    flip = b < 0
    a[flip] *= -1.0
    b[flip] *= -1.0

    a_orig = a.copy()

    # Phase 1 tableau: [A | I | b] with artificial costs.
    tableau = np.hstack([a, np.eye(m), b.reshape(-1, 1)])
    basis = list(range(n, n + m))
    costs1 = np.concatenate([np.zeros(n), np.ones(m)])
    pivots: List[Tuple[int, int]] = []
    _run_phase(tableau, basis, costs1, n + m, pivots)

    phase1_obj = float(costs1[basis] @ tableau[:, -1])
    if phase1_obj > 1e-7:
        raise Infeasible(f"phase-1 objective {phase1_obj}")

    # Drive leftover artificial variables out of the basis; rows that cannot
    # pivot on a real column are redundant and stay harmlessly at zero.
    for r in range(m):
        if basis[r] >= n:
            for j in range(n):
                if abs(tableau[r, j]) > TOL:
                    pivots.append((j, basis[r]))
                    _pivot(tableau, r, j)
                    basis[r] = j
                    break

    costs2 = np.concatenate([c, np.zeros(m)])
    artificial = set(range(n, n + m))
    _run_phase(tableau, basis, costs2, n + m, pivots, frozen=artificial)

    x = np.zeros(n)
    for r, var in enumerate(basis):
        if var < n:
            x[var] = tableau[r, -1]
    objective = float(c @ x)

    # Duals y solve B^T y = c_B for the final basis columns of the original A;
    # a leftover artificial in the basis contributes its identity column at cost 0.
    basis_matrix = np.zeros((m, m))
    for r in range(m):
        if basis[r] < n:
            basis_matrix[:, r] = a_orig[:, basis[r]]
        else:
            basis_matrix[basis[r] - n, r] = 1.0
    cb = np.array([c[v] if v < n else 0.0 for v in basis])
    duals = np.linalg.solve(basis_matrix.T, cb)
    duals[flip] *= -1.0
    return SimplexResult(x=x, objective=objective, duals=duals, basis=basis, pivots=pivots)
