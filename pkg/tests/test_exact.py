import itertools
from fractions import Fraction

from hypothesis import given, strategies as st

from divlab import exact

small = st.integers(-4, 4)


def leibniz(mat):
    n = len(mat)
    total = 0
    for perm in itertools.permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        term = sign
        for i in range(n):
            term *= mat[i][perm[i]]
        total += term
    return total


@given(st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n)))
def test_determinant_matches_leibniz(mat):
    assert exact.determinant(mat) == leibniz(mat)


@given(st.lists(st.lists(small, min_size=4, max_size=4), min_size=1, max_size=5))
def test_rank_nullity(mat):
    r = exact.rank(mat)
    null = exact.nullspace(mat, 4)
    assert r + len(null) == 4
    for v in null:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in mat)


def test_solve_and_affine_dimension():
    assert exact.solve([[2, 1], [1, 3]], [3, 5]) == [Fraction(4, 5), Fraction(7, 5)]
    assert exact.solve([[1, 1], [2, 2]], [1, 2]) is None
    assert exact.affine_dimension([(0, 0), (1, 1), (2, 2)]) == 1
    assert exact.primitive([Fraction(2, 3), Fraction(4, 3)]) == [1, 2]


def _brute_lp(c, A, b):
    n = len(c)
    best = None
    rows = [list(r) for r in A] + [[-int(i == j) for j in range(n)] for i in range(n)]
    rhs = list(b) + [0] * n
    for sub in itertools.combinations(range(len(rows)), n):
        x = exact.solve([rows[i] for i in sub], [rhs[i] for i in sub])
        if x is None:
            continue
        if all(sum(a * xi for a, xi in zip(r, x)) <= bi for r, bi in zip(rows, rhs)):
            v = sum(ci * xi for ci, xi in zip(c, x))
            best = v if best is None else max(best, v)
    return best


@given(st.lists(st.integers(-3, 5), min_size=2, max_size=3).flatmap(
    lambda c: st.tuples(st.just(c), st.lists(st.lists(st.integers(0, 4), min_size=len(c), max_size=len(c)),
                                              min_size=1, max_size=3),
                        st.lists(st.integers(1, 6), min_size=3, max_size=3))))
def test_simplex_matches_vertex_search(data):
    c, A, b = data
    b = b[:len(A)]
    A = [[x + 1 for x in row] for row in A]  # positive rows keep the LP bounded
    res = exact.simplex_max(c, A, b)
    assert res.status == "optimal"
    assert res.value == _brute_lp(c, A, b)


def test_simplex_infeasible_and_unbounded():
    assert exact.simplex_max([1], [[1]], [-1]).status == "infeasible"
    assert exact.simplex_max([1, 0], [[0, 1]], [1]).status == "unbounded"
    res = exact.simplex_max([0, 0], [], [], [[1, 1]], [1])
    assert res.status == "optimal"
