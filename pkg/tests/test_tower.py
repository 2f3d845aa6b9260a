from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from perftower.errors import DepthExceedsLevels, MapNotDefined, NotPurelyInseparable, NotReduced
from perftower.levelring import MIXED, PURE, LevelRingSpec, PMonomial, Window
from perftower.simplicial import SimplicialComplex, discrete_points, p_stanley_reisner_tower, path_graph
from perftower.tower import (FAILED, TowerSpec, build_monomial_tower, check_axioms, check_cartesian_g,
                             check_gluing_conditions, decompose_tower, drop_generator, frobenius_projection,
                             glue_towers, perfect_polynomial_tower, pillar_check, reducedness_check,
                             zero_torsion_map, zp_tower)

WINDOW = Window(levels=3, degree=8, precision=4)


def torsion_example_tower(p, L=3):
    return glue_towers(LevelRingSpec(p, 1, 0, PURE, ("x", "y")), zp_tower(p, L))


def test_torsion_example_levels():
    G = torsion_example_tower(3)
    assert [str(s) for s in G.levels[:2]] == ["Z/3^4[x,y]/(p*x, p*y)", "Z/3^4[P=3^(1/3^1)][x,y]/(P*x, P*y)"]


@pytest.mark.parametrize("p", [2, 3])
def test_standard_towers_pass(p):
    for T in (zp_tower(p), perfect_polynomial_tower(p, ("x", "y")), torsion_example_tower(p),
              p_stanley_reisner_tower(discrete_points(2), p)):
        rep = check_axioms(T, WINDOW)
        assert rep.passed, rep.to_dict()
        assert rep["e"].status == "assumed"
        assert check_cartesian_g(T, window=WINDOW)
        assert all(pillar_check(T, i) for i in range(T.L))


def test_dropped_generator_witness():
    M = drop_generator(torsion_example_tower(3), 1, PMonomial(1, (0, 1)))
    rep = check_axioms(M, WINDOW)
    assert rep["b"].status == FAILED
    assert rep["b"].witness == {"level": 1, "element": "P*y",
                                "reason": "nonzero element with zero image under the transition"}


def test_zeroed_torsion_witness():
    Z = zero_torsion_map(p_stanley_reisner_tower(discrete_points(3), 3), 0)
    rep = check_axioms(Z, WINDOW)
    assert rep.failures() == ["g"]
    assert rep["g"].witness["element"] == "x2"
    res = check_cartesian_g(Z, window=WINDOW)
    assert not res and res.witness["square"] == "PBt"


def test_frobenius_projection():
    F = frobenius_projection(zp_tower(3), 0)
    assert F.kernel == ((1, ()), (2, ()))
    assert F.surjective
    assert F.apply((1, ())) is None and F.apply((0, ())) == (0, ())
    with pytest.raises(DepthExceedsLevels):
        frobenius_projection(zp_tower(3, L=1), 1)


def test_frobenius_projection_undefined():
    # level 1 missing the generator P*x means P*x has nowhere to go
    T = torsion_example_tower(2)
    with pytest.raises(NotPurelyInseparable):
        frobenius_projection(drop_generator(T, 1, PMonomial(1, (1, 0))), 1)


def test_decomposition_of_torsion_example():
    G = torsion_example_tower(3, L=2)
    d = decompose_tower(G, Window(levels=2))
    assert d.certified
    assert d.torsion_free.levels == zp_tower(3, 2).levels
    assert d.reduced.levels[0] == LevelRingSpec(3, 1, 0, PURE, ("x", "y"))
    assert [str(s) for s in d.overlap.levels] == ["F_3"] * 3


def test_decomposition_detects_failure():
    # Z_p[x]/(p^2 x): p*x is torsion and nilpotent modulo p
    T = build_monomial_tower(LevelRingSpec(3, 4, 0, MIXED, ("x",), (PMonomial(2, (1,)),)), 2)
    d = decompose_tower(T)
    assert not d.certified
    assert d.certificates[0][2]["element"] == "x"
    assert d.torsion_meets_radical[1][1]["element"] == "P*x"


def test_gluing_conditions_and_errors():
    S = zp_tower(3)
    R = LevelRingSpec(3, 1, 0, PURE, ("x", "y"))
    G = glue_towers(R, S)
    assert all(s.ok for s in check_gluing_conditions(G, R, S, window=WINDOW).values())
    with pytest.raises(NotReduced):
        glue_towers(LevelRingSpec(3, 1, 0, PURE, ("x",), ((0, (2,)),)), S)
    with pytest.raises(MapNotDefined):
        glue_towers(R, S, {"x": "z"})
    S2 = build_monomial_tower(LevelRingSpec(3, 4, 0, MIXED, ("z",), ((1, (1,)),)), 2)
    with pytest.raises(MapNotDefined):
        glue_towers(R, S2)  # z has no preimage
    R2 = LevelRingSpec(3, 1, 0, PURE, ("x", "y"), ((0, (1, 1)),))
    G2 = glue_towers(R2, S2, {"x": "z"})
    assert str(G2.levels[0]) == "Z/3^4[z,y]/(p*z, p*y, z*y)"
    assert check_axioms(G2, Window(levels=2)).passed
    assert decompose_tower(G2).certified


def test_tower_dict_roundtrip():
    T = p_stanley_reisner_tower(path_graph(4), 2)
    assert TowerSpec.from_dict(T.to_dict()) == T
    assert T.is_standard and "level_rings" not in T.to_dict()
    for M in (drop_generator(T, 1, 0), zero_torsion_map(T, 0)):
        assert not M.is_standard
        assert TowerSpec.from_dict(M.to_dict()) == M


# -- brute-force fiber product -------------------------------------------------

def _elements(gens):
    """All elements of a direct sum of cyclic groups given as {name: order}."""
    names = list(gens)
    for coeffs in product(*[range(gens[n]) for n in names]):
        yield {n: c for n, c in zip(names, coeffs) if c}


def _apply(elem, fn, orders):
    out = {}
    for mono, c in elem.items():
        img = fn(mono)
        if img is not None and img in orders:
            out[img] = (out.get(img, 0) + c) % orders[img]
    return {k: v for k, v in out.items() if v}


def _pbt_groups(T, D):
    """tor(R_0), tor(R_1), R_0/I_0, R_1/I_0 as {(a, alpha): order}, straight from the ring specs."""
    p = T.prime
    R0, R1 = T.levels[0], T.levels[1]

    def tor(R, deg):
        out = {}
        for alpha in R.window(deg):
            if R.divides_some(alpha):
                m = R.m(alpha)
                for a in range(min(m, R.coeff_length)):
                    out[(a, alpha)] = p ** (-(-(m - a) // R.coeff_length))
        return out

    def fiber(R, deg):
        return {(a, alpha): p for alpha in R.window(deg) for a in range(R.fiber_order(alpha))}

    return tor(R0, D), tor(R1, p * D), fiber(R0, D), fiber(R1, p * D)


@pytest.mark.parametrize("zeroed", [False, True])
def test_pbt_against_brute_force(zeroed):
    p, D = 2, 2
    T = p_stanley_reisner_tower(discrete_points(2), p, levels=1)
    A, B, C, Dg = _pbt_groups(T, D)
    scale = lambda m: (p * m[0], tuple(p * e for e in m[1]))  # noqa: E731
    t_tor = (lambda m: None) if zeroed else scale
    fiber_product = [(b, c) for b in _elements(B) for c in _elements(C)
                     if _apply(b, lambda m: m, Dg) == _apply(c, scale, Dg)]
    images = [(_apply(a, t_tor, B), _apply(a, lambda m: m, C)) for a in _elements(A)]
    brute = all(i in fiber_product for i in images) and len(fiber_product) == len(images) and \
        len({repr(i) for i in images}) == len(images)
    tower = zero_torsion_map(T, 0) if zeroed else T
    assert brute == (not zeroed)
    assert check_cartesian_g(tower, 0, Window(levels=1, degree=D)).cartesian == brute


# -- properties -------------------------------------------------------------------

@st.composite
def small_complexes(draw):
    n = draw(st.integers(2, 4))
    facets = draw(st.lists(st.sets(st.integers(0, n - 1), min_size=1, max_size=3), min_size=1, max_size=4))
    used = sorted(set().union(*facets))
    if len(used) < 2:
        used = [0, 1]
        facets = facets + [{0}, {1}]
    relabel = {v: k for k, v in enumerate(used)}
    return SimplicialComplex(tuple(f"x{k + 1}" for k in range(len(used))),
                             tuple(tuple(relabel[v] for v in f) for f in facets))


@settings(max_examples=15)
@given(small_complexes(), st.sampled_from([2, 3]))
def test_psr_towers_satisfy_axioms(delta, p):
    T = p_stanley_reisner_tower(delta, p, levels=2)
    w = Window(levels=2, degree=5)
    assert check_axioms(T, w).passed
    assert check_cartesian_g(T, window=w).cartesian
    assert decompose_tower(T, w).certified
    assert reducedness_check(T, 5) is None


@st.composite
def monomial_towers(draw):
    p = draw(st.sampled_from([2, 3]))
    n = draw(st.integers(1, 2))
    gens = draw(st.lists(st.tuples(st.integers(0, 3), st.tuples(*[st.integers(0, 2)] * n)), min_size=1, max_size=3))
    gens = [g for g in gens if g[0] or any(g[1])] or [(1, (1,) * n)]
    return build_monomial_tower(LevelRingSpec(p, 40, 0, MIXED, ("x", "y")[:n], tuple(gens)), 1)


@settings(max_examples=40)
@given(monomial_towers())
def test_reducedness_matches_powers(T):
    # a monomial is nilpotent iff a small power of it vanishes (precision is far away)
    found = None
    for j, spec in enumerate(T.levels):
        for alpha in spec.window(3):
            for a in range(spec.coeff_length):
                x = spec.monomial(a, alpha)
                if x and any(not (x ** k) for k in range(2, 7)):
                    found = found or (j, a, alpha)
    assert (reducedness_check(T, 3) is None) == (found is None)
