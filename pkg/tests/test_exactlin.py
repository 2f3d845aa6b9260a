import random
from itertools import combinations
from math import gcd

import pytest
from hypothesis import given, strategies as st

from perftower.errors import ComplexNotComposable, NotAComplex
from perftower.exactlin import (BoundedComplex, FinAbPresentation, IntMatrix, homology_of_complex,
                                invariant_factors, rank_mod_p, ranks_mod_p, smith_normal_form)


def _det(rows):
    if not rows:
        return 1
    if len(rows) == 1:
        return rows[0][0]
    return sum((-1) ** j * rows[0][j] * _det([r[:j] + r[j + 1:] for r in rows[1:]])
               for j in range(len(rows)) if rows[0][j])


def determinantal_factors(rows, m, n):
    """Invariant factors from gcds of k x k minors, independent of any elimination."""
    out, prev = [], 1
    for k in range(1, min(m, n) + 1):
        g = 0
        for rs in combinations(range(m), k):
            for cs in combinations(range(n), k):
                g = gcd(g, _det([[rows[i][j] for j in cs] for i in rs]))
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return out


matrices = st.integers(1, 5).flatmap(lambda m: st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(st.integers(-20, 20), min_size=n, max_size=n), min_size=m, max_size=m)))


@given(matrices)
def test_snf_matches_determinantal_divisors(rows):
    M = IntMatrix.from_rows(rows)
    assert invariant_factors(M) == determinantal_factors(rows, M.rows, M.cols)


@given(matrices)
def test_snf_factorization(rows):
    M = IntMatrix.from_rows(rows)
    D, U, V = smith_normal_form(M)
    assert U @ M @ V == D
    assert abs(U.det()) == 1 and abs(V.det()) == 1
    diag = [x for x in D.diagonal() if x]
    assert all(x > 0 for x in diag)
    assert all(b % a == 0 for a, b in zip(diag, diag[1:]))
    off = [D[i, j] for i in range(D.rows) for j in range(D.cols) if i != j]
    assert not any(off)


def test_snf_small_values():
    assert smith_normal_form(IntMatrix.from_rows([[2, 0], [0, 3]]))[0].diagonal() == (1, 6)
    assert invariant_factors(IntMatrix.from_rows([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])) == [2, 6, 12]
    assert invariant_factors(IntMatrix.zeros(2, 3)) == []


def test_matmul_shape_error():
    with pytest.raises(ComplexNotComposable):
        IntMatrix.zeros(2, 3) @ IntMatrix.zeros(2, 3)


@given(st.lists(st.lists(st.integers(-9, 9), min_size=4, max_size=4), min_size=1, max_size=4),
       st.sampled_from([2, 3, 5, 7]))
def test_rank_mod_p_against_determinants(rows, p):
    # rank over F_p is the largest k with a k x k minor prime to p
    m, n = len(rows), 4
    best = 0
    for k in range(1, min(m, n) + 1):
        if any(_det([[rows[i][j] for j in cs] for i in rs]) % p
               for rs in combinations(range(m), k) for cs in combinations(range(n), k)):
            best = k
    assert rank_mod_p(rows, p) == best


def test_presentations():
    g = FinAbPresentation.cyclic([2, 3, None])
    assert g.invariants() == (1, (6,))
    assert g.order() is None
    assert FinAbPresentation.cyclic([4, 6]).invariants() == (0, (2, 12))
    assert FinAbPresentation.cyclic([2, 3]).is_isomorphic(FinAbPresentation.cyclic([6]))
    assert FinAbPresentation.free(2).with_modulus(5).order() == 25


def test_homology_small_complexes():
    # 0 -> Z -(x2)-> Z -> 0
    c = BoundedComplex.free([1, 1], [IntMatrix.from_rows([[2]])])
    assert homology_of_complex(c) == [(0, (2,)), (0, ())]
    # Z/4 -(x2)-> Z/4
    c = BoundedComplex((FinAbPresentation.cyclic([4]), FinAbPresentation.cyclic([4])),
                       (IntMatrix.from_rows([[2]]),))
    assert homology_of_complex(c) == [(0, (2,)), (0, (2,))]
    assert ranks_mod_p(BoundedComplex.free([1, 1], [IntMatrix.from_rows([[2]])]), 2) == [1, 1]


def test_not_a_complex():
    d1 = IntMatrix.from_rows([[1]])
    d2 = IntMatrix.from_rows([[1]])
    with pytest.raises(NotAComplex):
        homology_of_complex(BoundedComplex.free([1, 1, 1], [d1, d2]))
    # multiplication by 1 from Z/2 to Z is not well defined
    bad = BoundedComplex((FinAbPresentation.free(1), FinAbPresentation.cyclic([2])), (IntMatrix.from_rows([[1]]),))
    with pytest.raises(NotAComplex):
        homology_of_complex(bad)


def _unimodular(n, rng):
    g = [[int(i == j) for j in range(n)] for i in range(n)]
    ginv = [row[:] for row in g]
    for _ in range(3 * n):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i == j:
            continue
        q = rng.randint(-3, 3)
        # row_i += q row_j on g, and col_j -= q col_i on the inverse
        g[i] = [a + q * b for a, b in zip(g[i], g[j])]
        for r in ginv:
            r[j] -= q * r[i]
    return IntMatrix.from_rows(g, n), IntMatrix.from_rows(ginv, n)


def _random_complex(rng):
    n0, n1, n2 = rng.randint(1, 4), rng.randint(1, 5), rng.randint(1, 4)
    d2 = IntMatrix.from_rows([[rng.randint(-4, 4) for _ in range(n2)] for _ in range(n1)], n2)
    D, U, _ = smith_normal_form(d2)
    r = sum(1 for x in D.diagonal() if x)
    # rows of U past the rank annihilate d2
    left = IntMatrix.from_rows(U.to_rows()[r:], n1)
    R = IntMatrix.from_rows([[rng.randint(-3, 3) for _ in range(n1 - r)] for _ in range(n0)], n1 - r)
    d1 = R @ left if n1 - r else IntMatrix.zeros(n0, n1)
    return [n0, n1, n2], d1, d2


def _formula_homology(ranks, diffs):
    """H_q of a free complex: rank n_q - rk d_q - rk d_{q+1}, torsion from d_{q+1}."""
    rk = [len(invariant_factors(d)) for d in diffs]
    out = []
    for q, n in enumerate(ranks):
        r_out = rk[q - 1] if q else 0
        r_in = rk[q] if q < len(diffs) else 0
        tors = tuple(x for x in invariant_factors(diffs[q])) if q < len(diffs) else ()
        out.append((n - r_out - r_in, tuple(x for x in tors if x != 1)))
    return out


def test_homology_invariant_under_basis_change():
    rng = random.Random(20261014)
    for _ in range(200):
        ranks, d1, d2 = _random_complex(rng)
        assert (d1 @ d2).is_zero()
        h = homology_of_complex(BoundedComplex.free(ranks, [d1, d2]))
        assert h == _formula_homology(ranks, [d1, d2])
        (g0, _), (g1, g1i), (g2, g2i) = (_unimodular(n, rng) for n in ranks)
        e1, e2 = g0 @ d1 @ g1i, g1 @ d2 @ g2i
        assert homology_of_complex(BoundedComplex.free(ranks, [e1, e2])) == h
