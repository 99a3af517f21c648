"""Exact feasibility LP: phase-1 simplex over rationals with Bland's rule.

Solves  find x >= 0 with  A x = b  where the columns of A are given vectors.
Either a solution or a dual separating functional is produced; both are exact
and callers re-verify them by direct arithmetic.  Bland's rule guarantees
termination and makes the outcome deterministic.
"""

from __future__ import annotations

from .linalg import Q


def _phase1(columns, target):
    """Core simplex: ('feasible', {j: coeff}) or ('infeasible', None)."""
    m = len(target)
    n = len(columns)
    sign = [1 if target[i] >= 0 else -1 for i in range(m)]
    tab = []
    for i in range(m):
        row = [Q(sign[i] * columns[j][i]) for j in range(n)]
        row.append(Q(sign[i] * target[i]))
        tab.append(row)
    basis = list(range(n, n + m))  # artificial i starts basic in row i
    # Minimize the sum of artificials; reduced cost of structural j is
    # -(column sum) while all artificials are basic.
    obj = [-sum(tab[i][j] for i in range(m)) for j in range(n)]
    obj.append(-sum(tab[i][n] for i in range(m)))
    zero = Q(0)

    while True:
        enter = -1
        for j in range(n):  # Bland: smallest eligible index
            if obj[j] < zero:
                enter = j
                break
        if enter < 0:
            break
        leave = -1
        best = None
        for i in range(m):
            a = tab[i][enter]
            if a > zero:
                ratio = tab[i][n] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            return "unbounded", None
        piv = tab[leave][enter]
        tab[leave] = [x / piv for x in tab[leave]]
        for i in range(m):
            if i != leave and tab[i][enter] != zero:
                f = tab[i][enter]
                tab[i] = [x - f * y for x, y in zip(tab[i], tab[leave])]
        if obj[enter] != zero:
            f = obj[enter]
            obj = [x - f * y for x, y in zip(obj, tab[leave])]
        basis[leave] = enter

    if -obj[n] != zero:
        return "infeasible", None
    coeffs = {}
    for i, b in enumerate(basis):
        if b < n and tab[i][n] != zero:
            coeffs[b] = tab[i][n]
    return "feasible", coeffs


def feasible_combination(columns, target):
    """Return ('feasible', {j: coeff}) or ('infeasible', y).

    The dual vector y satisfies dot(y, target) > 0 and dot(y, col_j) <= 0 for
    every column, which refutes feasibility by Farkas' lemma.
    """
    status, coeffs = _phase1(columns, target)
    if status == "feasible":
        return status, coeffs
    if status == "unbounded":
        raise ArithmeticError("phase-1 objective unbounded; inconsistent tableau")
    return "infeasible", _dual(columns, target)


def _dual(columns, target):
    """Find y with dot(y, target) = 1 and dot(y, col_j) <= 0 for all j.

    Posed as another phase-1 problem (y = p - q, slacks s_j):
        -col_j . (p - q) - s_j = 0,   target . (p - q) = 1,   p, q, s >= 0.
    """
    m = len(target)
    n = len(columns)
    cols = []
    for k in range(m):  # p_k
        cols.append(tuple(-columns[j][k] for j in range(n)) + (target[k],))
    for k in range(m):  # q_k
        cols.append(tuple(columns[j][k] for j in range(n)) + (-target[k],))
    for j in range(n):  # slack s_j
        cols.append(tuple(-1 if i == j else 0 for i in range(n)) + (0,))
    rhs = tuple([0] * n + [1])
    status, coeffs = _phase1(cols, rhs)
    if status != "feasible":
        raise ArithmeticError("Farkas alternative system infeasible; exact LP bug")
    y = [Q(0)] * m
    for idx, val in coeffs.items():
        if idx < m:
            y[idx] += val
        elif idx < 2 * m:
            y[idx - m] -= val
    return tuple(y)
