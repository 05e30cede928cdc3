"""Exact rational linear algebra and a small exact simplex solver."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence


def rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank over Q by fraction-free (Bareiss) elimination.  Accepts rationals."""
    if not rows:
        return 0
    mat = [list(r) for r in rows]
    if any(isinstance(x, Fraction) for r in mat for x in r):
        from math import lcm
        mat = [[int(x * lcm(*(Fraction(y).denominator for y in r))) for x in r] for r in mat]
    n_rows, n_cols = len(mat), len(mat[0])
    r, prev = 0, 1
    for c in range(n_cols):
        pivot = next((i for i in range(r, n_rows) if mat[i][c] != 0), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        for i in range(r + 1, n_rows):
            for j in range(c + 1, n_cols):
                mat[i][j] = (mat[i][j] * mat[r][c] - mat[r][j] * mat[i][c]) // prev
            mat[i][c] = 0
        prev = mat[r][c]
        r += 1
        if r == n_rows:
            break
    return r


def determinant(mat: Sequence[Sequence]) -> Fraction:
    a = [[Fraction(x) for x in row] for row in mat]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        inv = 1 / a[c][c]
        for i in range(c + 1, n):
            f = a[i][c] * inv
            if f:
                for j in range(c, n):
                    a[i][j] -= f * a[c][j]
    return det


def rref(mat: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    a = [[Fraction(x) for x in row] for row in mat]
    pivots = []
    r = 0
    n_rows = len(a)
    n_cols = len(a[0]) if a else 0
    for c in range(n_cols):
        p = next((i for i in range(r, n_rows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(n_rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    return a, pivots


def solve(mat: Sequence[Sequence], rhs: Sequence) -> list[Fraction] | None:
    """Unique solution of a square system, or None when singular."""
    n = len(mat)
    aug = [list(row) + [rhs[i]] for i, row in enumerate(mat)]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        return None
    return [red[i][n] for i in range(n)]


def nullspace(mat: Sequence[Sequence], n_cols: int | None = None) -> list[list[int]]:
    """Integer basis (primitive vectors) of the right null space."""
    if not mat:
        n = n_cols or 0
        return [[int(i == j) for j in range(n)] for i in range(n)]
    red, pivots = rref(mat)
    n = len(mat[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[f]
        basis.append(primitive(v))
    return basis


def primitive(v: Sequence[Fraction]) -> list[int]:
    from math import lcm
    den = lcm(*(Fraction(x).denominator for x in v))
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    return [x // g for x in ints] if g else ints


def affine_dimension(points: Sequence[Sequence]) -> int:
    if not points:
        return -1
    base = points[0]
    return rank([[Fraction(x) - Fraction(y) for x, y in zip(p, base)] for p in points[1:]]) if len(points) > 1 else 0


class LPResult:
    def __init__(self, status: str, value=None, x=None, duals=None):
        self.status = status
        self.value = value
        self.x = x
        self.duals = duals

    def __repr__(self):
        return f"LPResult({self.status}, value={self.value})"


def simplex_max(c: Sequence, A_ub: Sequence[Sequence], b_ub: Sequence,
                A_eq: Sequence[Sequence] = (), b_eq: Sequence = ()) -> LPResult:
    """Maximize c.x subject to A_ub x <= b_ub, A_eq x = b_eq, x >= 0, exactly.

    Two-phase tableau simplex with Bland's rule, so it always terminates.
    ``duals`` holds the multipliers for the inequality rows then equality rows.
    """
    n = len(c)
    rows, rhs, kinds = [], [], []
    for row, b in zip(A_ub, b_ub):
        rows.append([Fraction(x) for x in row]); rhs.append(Fraction(b)); kinds.append("ub")
    for row, b in zip(A_eq, b_eq):
        rows.append([Fraction(x) for x in row]); rhs.append(Fraction(b)); kinds.append("eq")
    m = len(rows)
    n_slack = sum(k == "ub" for k in kinds)
    # Columns: x (n), slacks, artificials (m).
    width = n + n_slack + m
    tab = []
    basis = []
    s_idx = 0
    sign = []
    for i in range(m):
        row = rows[i] + [Fraction(0)] * (n_slack + m)
        if kinds[i] == "ub":
            row[n + s_idx] = Fraction(1)
            s_idx += 1
        b = rhs[i]
        flip = b < 0
        if flip:
            row = [-x for x in row]
            b = -b
        row[n + n_slack + i] = Fraction(1)
        sign.append(-1 if flip else 1)
        tab.append(row + [b])
        basis.append(n + n_slack + i)

    def pivot(r, col):
        inv = 1 / tab[r][col]
        tab[r] = [x * inv for x in tab[r]]
        for i in range(m):
            if i != r and tab[i][col] != 0:
                f = tab[i][col]
                tab[i] = [x - f * y for x, y in zip(tab[i], tab[r])]
        basis[r] = col

    def run(cost, allowed):
        # maximize cost.x over the current tableau; cost has length width
        while True:
            cb = [cost[b] for b in basis]
            entering = None
            for j in allowed:
                if j in basis:
                    continue
                red = cost[j] - sum(cb[i] * tab[i][j] for i in range(m))
                if red > 0:
                    entering = j
                    break
            if entering is None:
                return "optimal"
            best, leave = None, None
            for i in range(m):
                a = tab[i][entering]
                if a > 0:
                    ratio = tab[i][-1] / a
                    if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                        best, leave = ratio, i
            if leave is None:
                return "unbounded"
            pivot(leave, entering)

    phase1 = [Fraction(0)] * (n + n_slack) + [Fraction(-1)] * m
    run(phase1, range(width))
    infeas = sum(tab[i][-1] for i in range(m) if basis[i] >= n + n_slack)
    if infeas > 0:
        return LPResult("infeasible")
    # Drive remaining artificials out of the basis where possible.
    for i in range(m):
        if basis[i] >= n + n_slack:
            col = next((j for j in range(n + n_slack) if tab[i][j] != 0), None)
            if col is not None:
                pivot(i, col)
    cost = [Fraction(x) for x in c] + [Fraction(0)] * (n_slack + m)
    status = run(cost, range(n + n_slack))
    if status == "unbounded":
        return LPResult("unbounded")
    x = [Fraction(0)] * width
    for i, b in enumerate(basis):
        x[b] = tab[i][-1]
    cb = [cost[b] for b in basis]
    duals = [sum(cb[i] * tab[i][n + n_slack + r] for i in range(m)) * sign[r] for r in range(m)]
    value = sum(Fraction(ci) * xi for ci, xi in zip(c, x[:n]))
    return LPResult("optimal", value, x[:n], duals)
