"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import random
import time

import pytest

from perftower.exactlin import BoundedComplex, IntMatrix, homology_of_complex, smith_normal_form
from perftower.koszul import graded_depth, krull_dim_monomial, tilt_koszul_compare
from perftower.levelring import MIXED, PURE, LevelRingSpec, PMonomial, Window
from perftower.simplicial import (discrete_points, p_stanley_reisner_tower, path_graph, reisner_cm_check,
                                  rp2_six_vertex, stanley_reisner_ideal)
from perftower.tiltops import closed_form, tilt_iso_check, tilt_level_truncated
from perftower.tower import (AXIOMS, check_axioms, check_cartesian_g, decompose_tower, drop_generator, glue_towers,
                             perfect_polynomial_tower, zero_torsion_map, zp_tower)

from corpus import corpus

WINDOW = Window(levels=3, degree=8, precision=4, tilt_depth=4)
PRIMES = (2, 3, 5)
SR_CASES = {"two-point": discrete_points(2), "three-point": discrete_points(3), "path4": path_graph(4)}


@pytest.fixture
def verdict(capsys):
    def emit(n, failures, detail=""):
        with capsys.disabled():
            status = "PASS" if not failures else "FAIL"
            print(f"\n[acceptance {n}] {status} {detail}".rstrip())
            for f in failures[:5]:
                print(f"    {f}")
        assert not failures, failures
    return emit


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def test_criterion_1_rp2(verdict):
    bad = []
    for p in (2, 3, 5, 7):
        res, dt = timed(reisner_cm_check, rp2_six_vertex(), p)
        if bool(res) != (p != 2):
            bad.append(f"p={p}: got {bool(res)}")
        if dt >= 5:
            bad.append(f"p={p}: {dt:.1f}s")
    verdict(1, bad, "RP2 is CM exactly for p != 2")


def test_criterion_2_reisner_equivalence(verdict):
    bad = []
    cases = corpus()
    assert len(cases) >= 10
    for p in (2, 3):
        for name, delta in cases.items():
            R = stanley_reisner_ideal(delta, p)
            depth_cm = graded_depth(R) == delta.dim + 1
            if depth_cm != bool(reisner_cm_check(delta, p)):
                bad.append(f"{name}, p={p}")
            if krull_dim_monomial(R) != delta.dim + 1:
                bad.append(f"{name}: Krull dimension")
    verdict(2, bad, f"{len(cases)} complexes, p in (2, 3)")


def _compare_all(window):
    out = {}
    for name, delta in SR_CASES.items():
        for p in PRIMES:
            T = p_stanley_reisner_tower(delta, p, levels=4)
            out[name, p] = timed(tilt_koszul_compare, T, None, window)
    return out


@pytest.fixture(scope="module")
def comparisons():
    return _compare_all(Window(levels=4, degree=8, precision=4, tilt_depth=4))


def test_criterion_3_tilt_koszul(verdict, comparisons):
    bad = []
    for (name, p), (c, dt) in comparisons.items():
        if not c.equal:
            bad.append(f"{name}, p={p}: {c.to_dict()['per_q']}")
        if dt >= 30:
            bad.append(f"{name}, p={p}: {dt:.1f}s")
        if name == "two-point":
            want = ((0, (p,)), (0, (p,)), (0, ()))
            if c.mixed.groups != want or c.tilt.groups != want:
                bad.append(f"two-point, p={p}: {c.mixed.groups} | {c.tilt.groups}")
    slowest = max(dt for _, dt in comparisons.values())
    verdict(3, bad, f"{len(comparisons)} comparisons, slowest {slowest:.1f}s")


def test_criterion_4_decomposition_round_trip(verdict):
    bad = []
    for p in (2, 3):
        pb = LevelRingSpec(p, 4, 0, MIXED, ("x", "y"), (PMonomial(1, (1, 0)), PMonomial(1, (0, 1))))
        glued = glue_towers(LevelRingSpec(p, 1, 0, PURE, ("x", "y")), zp_tower(p, 2))
        expected = tuple(pb.at_level(i) for i in range(3))
        if glued.levels != expected:
            bad.append(f"p={p}: glued {[str(s) for s in glued.levels]}")
        d = decompose_tower(glued, Window(levels=2))
        if not d.certified:
            bad.append(f"p={p}: decomposition not certified {d.to_dict()}")
        if d.torsion_free.levels != zp_tower(p, 2).levels:
            bad.append(f"p={p}: torsion-free part {d.torsion_free.levels[0]}")
    verdict(4, bad, "torsion example, levels 0-2")


def test_criterion_5_axioms(verdict):
    bad = []
    for p in (2, 3):
        psr = [p_stanley_reisner_tower(d, p, levels=3) for d in SR_CASES.values()]
        for T in [zp_tower(p, 3), perfect_polynomial_tower(p, ("x",), 3)] + psr:
            rep = check_axioms(T, WINDOW)
            if not rep.passed:
                bad.append(f"p={p} {T.levels[0]}: {rep.failures()}")
            if any(rep[a].status != "verified-on-window" for a in AXIOMS if a != "e"):
                bad.append(f"p={p} {T.levels[0]}: not all verified")
        for T in psr:
            for M in (drop_generator(T, 1, 0), zero_torsion_map(T, 0)):
                rep = check_axioms(M, WINDOW)
                fails = rep.failures()
                if not fails or any(rep[a].witness is None for a in fails):
                    bad.append(f"p={p} mutant of {T.levels[0]} not caught")
    verdict(5, bad, "5 towers x 2 primes, 12 mutants")


def _corpus_towers(p):
    towers = {name: p_stanley_reisner_tower(d, p, levels=3) for name, d in corpus().items()}
    towers["Zp"] = zp_tower(p, 3)
    towers["perfect"] = perfect_polynomial_tower(p, ("x",), 3)
    return towers


def test_criterion_6_tilt_isomorphisms(verdict):
    bad = []
    for p in (2, 3):
        for name, T in _corpus_towers(p).items():
            for i in range(T.L):
                rep = tilt_iso_check(T, i, WINDOW)
                if not rep.passed:
                    bad.append(f"{name}, p={p}, level {i}: {rep.to_dict()['checks']}")
        for name, d in corpus().items():
            if closed_form(p_stanley_reisner_tower(d, p), 0) != stanley_reisner_ideal(d, p):
                bad.append(f"{name}, p={p}: closed form differs from the SR ring")
    for p in PRIMES:
        t = tilt_level_truncated(zp_tower(p, 3), 0, 3, WINDOW)
        # F_p[T]/(T^(p^3)) on total degree <= 8
        if (str(t.closed), t.truncation_exponent) != (f"F_{p}[T]", p ** 3) or \
                t.carrier() != tuple((a,) for a in range(min(9, p ** 3))) or not t.carrier_matches_closed_form:
            bad.append(f"Zp depth-3 carrier, p={p}")
    verdict(6, bad, f"{len(_corpus_towers(2))} towers x 2 primes")


def test_criterion_7_cartesian(verdict):
    bad = []
    for p in (2, 3):
        for name, T in _corpus_towers(p).items():
            res = check_cartesian_g(T, window=WINDOW)
            if not res:
                bad.append(f"{name}, p={p}: {res.witness}")
        for name, d in SR_CASES.items():
            res = check_cartesian_g(zero_torsion_map(p_stanley_reisner_tower(d, p), 0), window=WINDOW)
            if res or not res.witness:
                bad.append(f"zeroed {name}, p={p} not caught")
    verdict(7, bad, "corpus towers pass, zeroed mutants fail")


def _unimodular(n, rng):
    g = [[int(i == j) for j in range(n)] for i in range(n)]
    ginv = [row[:] for row in g]
    for _ in range(3 * n):
        if n < 2:
            break
        i, j = rng.sample(range(n), 2)
        q = rng.randint(-3, 3)
        g[i] = [a + q * b for a, b in zip(g[i], g[j])]
        for r in ginv:
            r[j] -= q * r[i]
    return IntMatrix.from_rows(g, n), IntMatrix.from_rows(ginv, n)


def _random_complex(rng):
    n0, n1, n2 = rng.randint(1, 4), rng.randint(1, 5), rng.randint(1, 4)
    d2 = IntMatrix.from_rows([[rng.randint(-4, 4) for _ in range(n2)] for _ in range(n1)], n2)
    D, U, _ = smith_normal_form(d2)
    r = sum(1 for x in D.diagonal() if x)
    left = IntMatrix.from_rows(U.to_rows()[r:], n1)
    R = IntMatrix.from_rows([[rng.randint(-3, 3) for _ in range(n1 - r)] for _ in range(n0)], n1 - r)
    d1 = R @ left if n1 - r else IntMatrix.zeros(n0, n1)
    return [n0, n1, n2], d1, d2


def test_criterion_8_exact_linear_algebra(verdict):
    rng = random.Random(8)
    bad = []
    for k in range(1000):
        m, n = rng.randint(1, 8), rng.randint(1, 8)
        M = IntMatrix.from_rows([[rng.randint(-20, 20) for _ in range(n)] for _ in range(m)], n)
        D, U, V = smith_normal_form(M)
        diag = [x for x in D.diagonal() if x]
        off = any(D[i, j] for i in range(m) for j in range(n) if i != j)
        if U @ M @ V != D or abs(U.det()) != 1 or abs(V.det()) != 1 or off or \
                any(x <= 0 for x in diag) or any(b % a for a, b in zip(diag, diag[1:])):
            bad.append(f"SNF instance {k}: {M.to_rows()}")
    for k in range(200):
        ranks, d1, d2 = _random_complex(rng)
        h = homology_of_complex(BoundedComplex.free(ranks, [d1, d2]))
        (g0, _), (g1, g1i), (g2, g2i) = (_unimodular(n, rng) for n in ranks)
        if homology_of_complex(BoundedComplex.free(ranks, [g0 @ d1 @ g1i, g1 @ d2 @ g2i])) != h:
            bad.append(f"complex {k}: homology changed under basis change")
    verdict(8, bad, "1000 SNF instances, 200 complexes")


def test_criterion_9_window_stability(verdict, comparisons):
    bigger = _compare_all(Window(levels=4, degree=10, precision=5, tilt_depth=4))
    bad = []
    for key, (c, _) in comparisons.items():
        b = bigger[key][0]
        if (c.mixed.groups, c.tilt.groups) != (b.mixed.groups, b.tilt.groups):
            bad.append(f"{key}: {c.mixed.groups} vs {b.mixed.groups}")
    verdict(9, bad, "(D, N) = (8, 4) against (10, 5)")
