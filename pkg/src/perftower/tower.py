"""Monomial towers R_0 -> R_1 -> ... and their structural checks.

Every level reuses the level-0 exponent vectors in rescaled variables, so
the transition t_i multiplies exponents by p and the Frobenius projection
F_i keeps the exponent vector and reinterprets it one level down.  All
maps between special fibers therefore send monomials to monomials, and
each check reduces to a finite scan over a degree window.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .errors import (DepthExceedsLevels, MapNotDefined, NotAComplex, NotPurelyInseparable,
                     NotReduced, UnitIdeal)
from .exactlin import BoundedComplex, FinAbPresentation, IntMatrix, homology_of_complex
from .levelring import (MIXED, PURE, LevelRingSpec, PMonomial, RingElement, Window,
                        is_reduced, mod_pillar, normal_form, radical_quotient,
                        torsion_free_quotient)

VERIFIED = "verified-on-window"
FAILED = "failed"
ASSUMED = "assumed"

AXIOMS = ("a", "b", "c", "d", "e", "f-1", "f-2", "g")


def _key(mono):
    a, alpha = mono
    full = (a,) + tuple(alpha)
    return (sum(full), tuple(reversed(full)))


def _scale(mono, p):
    a, alpha = mono
    return (p * a, tuple(p * e for e in alpha))


@dataclass(frozen=True)
class TowerSpec:
    """Levels R_0..R_L of a monomial tower.

    ``zeroed_torsion`` lists indices i whose torsion maps (t_i)_tor and
    (F_i)_tor are replaced by zero; it exists to build broken towers.
    """

    levels: tuple[LevelRingSpec, ...]
    zeroed_torsion: frozenset = frozenset()
    assumptions: tuple[tuple[str, str], ...] = (("e", ASSUMED),)
    tilt_variable: str = "T"

    def __post_init__(self):
        if not self.levels:
            raise ValueError("a tower needs at least one level")
        first = self.levels[0]
        for i, spec in enumerate(self.levels):
            if spec.level != i:
                raise ValueError(f"level {i} carries level field {spec.level}")
            if (spec.prime, spec.characteristic, spec.precision, spec.variables) != \
                    (first.prime, first.characteristic, first.precision, first.variables):
                raise ValueError("all levels must share prime, characteristic, precision and variables")
        object.__setattr__(self, "zeroed_torsion", frozenset(self.zeroed_torsion))

    @property
    def L(self) -> int:
        return len(self.levels) - 1

    @property
    def prime(self) -> int:
        return self.levels[0].prime

    @property
    def precision(self) -> int:
        return self.levels[0].precision

    @property
    def is_mixed(self) -> bool:
        return self.levels[0].is_mixed

    @property
    def variables(self) -> tuple[str, ...]:
        return self.levels[0].variables

    def level(self, i: int) -> LevelRingSpec:
        return self.levels[i]

    def with_precision(self, precision: int) -> TowerSpec:
        if not self.is_mixed or precision == self.precision:
            return self
        return replace(self, levels=tuple(replace(s, precision=precision) for s in self.levels))

    def truncated(self, levels: int) -> TowerSpec:
        return replace(self, levels=self.levels[:levels + 1])

    def pillar_exponent(self, which: str, i: int) -> int | None:
        """P-exponent of f_0 (which='I0') or f_1 (which='I1') at level i."""
        if not self.is_mixed:
            return None
        p = self.prime
        if which == "I0":
            return p ** i
        if i == 0:
            return None
        return p ** (i - 1)

    def pillar_element(self, which: str, i: int) -> RingElement:
        spec = self.levels[i]
        e = self.pillar_exponent(which, i)
        if e is None:
            return spec.zero()
        return spec.monomial(e, (0,) * spec.nvars)

    def transition(self, i: int, x: RingElement) -> RingElement:
        """t_i: R_i -> R_{i+1}, exponents multiplied by p."""
        src, dst = self.levels[i], self.levels[i + 1]
        if x.spec != src:
            raise ValueError("element does not live at level i")
        p = self.prime
        raw = []
        for alpha, coeffs in x.terms:
            beta = tuple(p * e for e in alpha)
            for k, c in enumerate(coeffs):
                if c:
                    raw.append((c, p * k, beta))
        return normal_form(dst, raw)

    def to_dict(self) -> dict:
        """Level-0 ring fields plus ``levels``; other level rings only when not rescaled copies."""
        d = self.levels[0].to_dict()
        d["levels"] = self.L
        d["tilt_variable"] = self.tilt_variable
        if self.levels != build_monomial_tower(self.levels[0], self.L).levels:
            d["level_rings"] = [s.to_dict() for s in self.levels]
        if self.zeroed_torsion:
            d["zeroed_torsion"] = sorted(self.zeroed_torsion)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> TowerSpec:
        """Inverse of to_dict; ``levels`` defaults to 3."""
        tilt = d.get("tilt_variable", "T")
        if "level_rings" in d:
            T = cls(tuple(LevelRingSpec.from_dict(x) for x in d["level_rings"]), tilt_variable=tilt)
        else:
            T = build_monomial_tower(LevelRingSpec.from_dict(d), int(d.get("levels", 3)), tilt)
        return replace(T, zeroed_torsion=frozenset(d.get("zeroed_torsion", ())))

    @property
    def is_standard(self) -> bool:
        """Every level is the rescaled level-0 ring and no torsion map is altered."""
        return not self.zeroed_torsion and self.levels == build_monomial_tower(self.levels[0], self.L).levels


def build_monomial_tower(level0: LevelRingSpec, L: int, tilt_variable: str = "T") -> TowerSpec:
    """Levels 0..L with the level-0 generators read in rescaled variables."""
    if L < 0:
        raise ValueError("number of levels must be nonnegative")
    for g in level0.generators:
        if g.p_exp == 0 and not any(g.x_exps):
            raise UnitIdeal("unit ideal")
    base = level0.at_level(0)
    return TowerSpec(tuple(base.at_level(i) for i in range(L + 1)), tilt_variable=tilt_variable)


def zp_tower(p: int, L: int = 3, precision: int = 4) -> TowerSpec:
    """Z_p -> Z_p[p^(1/p)] -> Z_p[p^(1/p^2)] -> ..."""
    return build_monomial_tower(LevelRingSpec(p, precision, 0, MIXED, ()), L)


def perfect_polynomial_tower(p: int, names: Sequence[str] = ("x",), L: int = 3) -> TowerSpec:
    """F_p[x] -> F_p[x^(1/p)] -> ..., the tower of absolute Frobenius."""
    return build_monomial_tower(LevelRingSpec(p, 1, 0, PURE, tuple(names)), L)


def drop_generator(T: TowerSpec, level: int, generator: PMonomial | int) -> TowerSpec:
    """Copy of T with one generator removed at a single level."""
    spec = T.levels[level]
    if isinstance(generator, int):
        generator = spec.generators[generator]
    gens = tuple(g for g in spec.generators if g != generator)
    if len(gens) == len(spec.generators):
        raise ValueError("generator not present at that level")
    levels = list(T.levels)
    levels[level] = replace(spec, generators=gens)
    return replace(T, levels=tuple(levels))


def zero_torsion_map(T: TowerSpec, i: int) -> TowerSpec:
    return replace(T, zeroed_torsion=T.zeroed_torsion | {i})


class _Level:
    """Cached monomial predicates for one level ring."""

    def __init__(self, spec: LevelRingSpec):
        self.spec = spec
        self.p = spec.prime
        self.L = spec.coeff_length
        self.mixed = spec.is_mixed
        self._m: dict = {}
        self._tor: dict = {}

    def m(self, alpha) -> int:
        v = self._m.get(alpha)
        if v is None:
            v = self._m[alpha] = self.spec.m(alpha)
        return v

    def is_torsion(self, alpha) -> bool:
        if not self.mixed:
            return True
        v = self._tor.get(alpha)
        if v is None:
            v = self._tor[alpha] = self.spec.divides_some(alpha)
        return v

    def order(self, a, alpha) -> int:
        """Additive order of P^a X^alpha in R (0 when the monomial vanishes)."""
        m = self.m(alpha)
        if a >= m:
            return 0
        return self.p ** (-(-(m - a) // self.L))

    def sf(self, a, alpha) -> bool:
        """Nonzero in R/I_0."""
        if not self.mixed:
            return a == 0 and self.m(alpha) > 0
        return a < min(self.L, self.m(alpha))

    def mod_i1(self, a, alpha) -> bool:
        """Nonzero in R/I_1 (mixed, level >= 1)."""
        if not self.mixed:
            return self.sf(a, alpha)
        return a < min(self.L // self.p, self.m(alpha))

    def tor_order(self, a, alpha) -> int:
        """Order of the torsion basis element P^a X^alpha, 0 if not one."""
        if not self.mixed:
            return self.p if self.sf(a, alpha) else 0
        if a >= self.L or not self.is_torsion(alpha):
            return 0
        return self.order(a, alpha)

    def sf_window(self, degree):
        out = [(a, al) for al in self.spec.window(degree)
               for a in range(self.L if self.mixed else 1) if self.sf(a, al)]
        return sorted(out, key=_key)

    def tor_window(self, degree):
        out = [(a, al) for al in self.spec.window(degree)
               for a in range(self.L if self.mixed else 1) if self.tor_order(a, al)]
        return sorted(out, key=_key)

    def mod_i1_window(self, degree):
        out = [(a, al) for al in self.spec.window(degree)
               for a in range(self.L if self.mixed else 1) if self.mod_i1(a, al)]
        return sorted(out, key=_key)

    def name(self, mono) -> str:
        return self.spec.monomial_str(*mono)

    def special_generators(self):
        """Monomial generators of I_0 + I at this level, as (a, alpha)."""
        out = [(g.p_exp, g.x_exps) for g in self.spec.generators]
        if self.mixed:
            out.append((self.L, (0,) * self.spec.nvars))
        return out


def _witness(level: int, lv: _Level, mono, reason: str) -> dict:
    return {"level": level, "element": lv.name(mono), "reason": reason}


@dataclass(frozen=True)
class AxiomStatus:
    status: str
    witness: dict | None = None

    @property
    def ok(self) -> bool:
        return self.status != FAILED

    def to_dict(self) -> dict:
        d = {"status": self.status}
        if self.witness is not None:
            d["witness"] = self.witness
        return d


@dataclass(frozen=True)
class AxiomReport:
    statuses: tuple[tuple[str, AxiomStatus], ...]
    window: Window

    def __getitem__(self, name: str) -> AxiomStatus:
        return dict(self.statuses)[name]

    @property
    def passed(self) -> bool:
        return all(s.ok for _, s in self.statuses)

    def failures(self) -> list[str]:
        return [n for n, s in self.statuses if not s.ok]

    def to_dict(self) -> dict:
        return {"axioms": {n: s.to_dict() for n, s in self.statuses},
                "window": self.window.to_dict(), "passed": self.passed}


def _status(witness) -> AxiomStatus:
    return AxiomStatus(VERIFIED) if witness is None else AxiomStatus(FAILED, witness)


def _levels(T: TowerSpec, window: Window | None):
    if window is None:
        window = Window(levels=max(T.L, 1), degree=8, precision=T.precision)
    T = T.with_precision(window.precision)
    L = min(window.levels, T.L)
    return T, L, window, [_Level(s) for s in T.levels[:L + 1]]


def _check_b(lvs, i, D, p):
    src, dst = lvs[i], lvs[i + 1]
    for g in src.special_generators():
        if dst.sf(*_scale(g, p)):
            return _witness(i, src, g, "transition is not well defined on this generator")
    for mono in src.sf_window(D):
        if not dst.sf(*_scale(mono, p)):
            return _witness(i, src, mono, "nonzero element with zero image under the transition")
    return None


def _check_c(lvs, i, D, p):
    src, dst = lvs[i + 1], lvs[i]
    for mono in src.sf_window(D):
        if src.sf(*_scale(mono, p)) and not dst.sf(*mono):
            return _witness(i + 1, src, mono, "p-th power is not in the image of the transition")
    return None


def _check_d(lvs, i, D, p):
    src, dst = lvs[i + 1], lvs[i]
    for g in src.special_generators():
        if dst.sf(*g):
            return _witness(i + 1, src, g, "Frobenius projection is not well defined on this generator")
    for mono in dst.sf_window(D):
        if not src.sf(*mono):
            return _witness(i, dst, mono, "not in the image of the Frobenius projection")
    return None


def _check_f2(T, lvs, i, D):
    src, dst = lvs[i + 1], lvs[i]
    threshold = T.pillar_exponent("I1", i + 1)
    for mono in src.sf_window(D):
        in_kernel = not dst.sf(*mono)
        in_pillar = threshold is not None and mono[0] >= threshold
        if in_kernel != in_pillar:
            reason = "in the kernel but not in I_1" if in_kernel else "in I_1 but not in the kernel"
            return _witness(i + 1, src, mono, reason)
    return None


def _check_f1(T):
    if not T.is_mixed or T.L < 1:
        return None
    f1 = T.pillar_element("I1", 1)
    f0 = T.transition(0, T.pillar_element("I0", 0))
    if f1 ** T.prime != f0:
        return {"level": 1, "element": str(f1 ** T.prime), "reason": "I_1^p differs from I_0 R_1"}
    return None


def _check_g(T, lvs, L, D, p):
    for j, lv in enumerate(lvs):
        for mono in lv.tor_window(D):
            if lv.mixed and lv.order(mono[0] + lv.L, mono[1]):
                return _witness(j, lv, mono, "torsion element not killed by I_0")
    for i in range(L):
        src, dst = lvs[i + 1], lvs[i]
        tor_src = src.tor_window(D)
        if i in T.zeroed_torsion:
            if tor_src:
                return _witness(i + 1, src, tor_src[0], "torsion map sends a nonzero element to 0")
            continue
        for mono in tor_src:
            if not src.sf(*mono):
                return _witness(i + 1, src, mono, "torsion element vanishes modulo I_0")
            if not (dst.sf(*mono) and dst.tor_order(*mono)):
                return _witness(i + 1, src, mono, "F_i does not carry torsion into torsion")
        hit = set(tor_src)
        for mono in dst.tor_window(D):
            if mono not in hit:
                return _witness(i, dst, mono, "torsion element missed by (F_i)_tor")
    return None


def check_axioms(T: TowerSpec, window: Window | None = None) -> AxiomReport:
    """Check axioms (a)-(d), (f), (g) on the window; (e) is recorded as assumed."""
    T, L, window, lvs = _levels(T, window)
    D, p = window.degree, T.prime

    def first(check):
        for i in range(L):
            w = check(i)
            if w is not None:
                return w
        return None

    statuses = [
        ("a", AxiomStatus(VERIFIED)),
        ("b", _status(first(lambda i: _check_b(lvs, i, D, p)))),
        ("c", _status(first(lambda i: _check_c(lvs, i, D, p)))),
        ("d", _status(first(lambda i: _check_d(lvs, i, D, p)))),
        ("e", AxiomStatus(ASSUMED)),
        ("f-1", _status(_check_f1(T))),
        ("f-2", _status(first(lambda i: _check_f2(T, lvs, i, D)))),
        ("g", _status(_check_g(T, lvs, L, D, p))),
    ]
    return AxiomReport(tuple(statuses), window)


@dataclass(frozen=True)
class FrobeniusProjectionMap:
    """F_i: R_{i+1}/I_0 -> R_i/I_0 on monomials of degree <= D."""

    source: LevelRingSpec
    target: LevelRingSpec
    level: int
    degree: int
    kernel: tuple
    surjective: bool

    def apply(self, mono):
        """Image of the monomial (a, alpha); None when it is zero."""
        return mono if _Level(self.target).sf(*mono) else None


def frobenius_projection(T: TowerSpec, i: int, degree: int = 8) -> FrobeniusProjectionMap:
    if i + 1 > T.L:
        raise DepthExceedsLevels(f"level {i + 1} is not materialized")
    src, dst = _Level(T.levels[i + 1]), _Level(T.levels[i])
    p = T.prime
    for g in src.special_generators():
        if dst.sf(*g):
            raise NotPurelyInseparable("projection not defined", _witness(i + 1, src, g, "generator"))
    kernel = []
    for mono in src.sf_window(degree):
        if dst.sf(*mono):
            continue
        kernel.append(mono)
        if src.sf(*_scale(mono, p)):
            raise NotPurelyInseparable("Frobenius image escapes the transition image",
                                       _witness(i + 1, src, mono, "p-th power not hit"))
    surjective = all(src.sf(*mono) for mono in dst.sf_window(degree))
    return FrobeniusProjectionMap(mod_pillar(T.levels[i + 1]), mod_pillar(T.levels[i]), i, degree,
                                  tuple(kernel), surjective)


# -- exactness of small blocks ----------------------------------------------

def _exact_three(orders, f, g, need_onto=False):
    """Is 0 -> A -f-> B -g-> C (-> 0) exact?  orders list cyclic orders (p^e)."""
    a, b, c = orders
    mods = (FinAbPresentation.cyclic(c), FinAbPresentation.cyclic(b), FinAbPresentation.cyclic(a))
    d1 = IntMatrix.from_rows(g, len(b)) if c else IntMatrix.zeros(0, len(b))
    d2 = IntMatrix.from_rows(f, len(a)) if b else IntMatrix.zeros(0, len(a))
    try:
        h = homology_of_complex(BoundedComplex(mods, (d1, d2)))
    except NotAComplex:
        return False, "square does not commute"
    if h[2] != (0, ()):
        return False, "map into the direct sum is not injective"
    if h[1] != (0, ()):
        return False, "kernel exceeds the fiber product candidate"
    if need_onto and h[0] != (0, ()):
        return False, "map onto the corner is not surjective"
    return True, None


def _block_check(blocks, lv, level, name):
    """Run exactness on each block; blocks are (key, A, B, C, D, maps)."""
    for key, A, B, C, Dm, fb, fc, gb, gc in sorted(blocks, key=lambda b: _key(b[0])):
        if not (A or B or C):
            continue
        bc = B + C
        f = [[0] * len(A) for _ in bc]
        for j, x in enumerate(A):
            for k, y in enumerate(B):
                f[k][j] = fb(x, y)
            for k, y in enumerate(C):
                f[len(B) + k][j] = fc(x, y)
        g = [[0] * len(bc) for _ in Dm]
        for r, z in enumerate(Dm):
            for k, y in enumerate(B):
                g[r][k] = gb(y, z)
            for k, y in enumerate(C):
                g[r][len(B) + k] = -gc(y, z)
        orders = ([o for _, o in A], [o for _, o in B] + [o for _, o in C], [o for _, o in Dm])
        ok, reason = _exact_three(orders, f, g)
        if not ok:
            return {"square": name, "level": level, "element": lv.name(key), "reason": reason}
    return None


@dataclass(frozen=True)
class CartesianResult:
    cartesian: bool
    witness: dict | None = None
    squares: tuple[tuple[str, bool], ...] = ()

    def __bool__(self) -> bool:
        return self.cartesian

    def to_dict(self) -> dict:
        d = {"cartesian": self.cartesian, "squares": dict(self.squares)}
        if self.witness:
            d["witness"] = self.witness
        return d


def _pbt_blocks(T, src, dst, i, D):
    p = T.prime
    zeroed = i in T.zeroed_torsion
    blocks: dict = {}

    def block(key):
        return blocks.setdefault(key, ([], [], [], []))

    for x in src.tor_window(D):
        block(_scale(x, p))[0].append((x, src.tor_order(*x)))
    for x in src.sf_window(D):
        block(_scale(x, p))[2].append((x, p))
    for y in dst.tor_window(D):
        block(y)
    for y in dst.sf_window(D):
        block(y)
    out = []
    for key, (A, B, C, Dm) in blocks.items():
        o = dst.tor_order(*key)
        if o:
            B.append((key, o))
        if dst.sf(*key):
            Dm.append((key, p))
        out.append((key, A, B, C, Dm,
                    lambda x, y: 0 if zeroed else int(_scale(x[0], p) == y[0]),
                    lambda x, y: int(x[0] == y[0]),
                    lambda y, z: int(y[0] == z[0]),
                    lambda y, z: int(_scale(y[0], p) == z[0])))
    return out


def _pbphi_blocks(T, lv, D):
    p = T.prime
    blocks: dict = {}

    def block(key):
        return blocks.setdefault(key, ([], [], [], []))

    for x in lv.tor_window(D):
        block(_scale(x, p))[0].append((x, lv.tor_order(*x)))
    for x in lv.mod_i1_window(D):
        block(_scale(x, p))[1].append((x, p))
    for y in lv.tor_window(D):
        block(y)
    for y in lv.sf_window(D):
        block(y)
    out = []
    for key, (A, B, C, Dm) in blocks.items():
        o = lv.tor_order(*key)
        if o:
            C.append((key, o))
        if lv.sf(*key):
            Dm.append((key, p))
        out.append((key, A, B, C, Dm,
                    lambda x, y: int(x[0] == y[0]),
                    lambda x, y: int(_scale(x[0], p) == y[0]),
                    lambda y, z: int(_scale(y[0], p) == z[0]),
                    lambda y, z: int(y[0] == z[0])))
    return out


def check_cartesian_g(T: TowerSpec, i: int | None = None, window: Window | None = None) -> CartesianResult:
    """Both squares characterizing (g) are cartesian at level i (all levels if None)."""
    T, L, window, lvs = _levels(T, window)
    D = window.degree
    indices = range(L) if i is None else [i]
    for k in indices:
        if k + 1 > L:
            raise DepthExceedsLevels(f"level {k + 1} is not materialized")
    squares = []
    witness = None
    for k in indices:
        w1 = _block_check(_pbt_blocks(T, lvs[k], lvs[k + 1], k, D), lvs[k + 1], k + 1, "PBt")
        w2 = _block_check(_pbphi_blocks(T, lvs[k + 1], D), lvs[k + 1], k + 1, "PBphi")
        squares += [(f"PBt[{k}]", w1 is None), (f"PBphi[{k}]", w2 is None)]
        witness = witness or w1 or w2
    return CartesianResult(witness is None, witness, tuple(squares))


def pillar_check(T: TowerSpec, i: int) -> bool:
    """I_{i+1}^[p] = I_i R_{i+1} and I_1^p = I_0 R_1, as monomial ideals."""
    if i + 1 > T.L:
        raise DepthExceedsLevels(f"level {i + 1} is not materialized")
    if not T.is_mixed:
        return True
    p = T.prime
    spec = T.levels[i + 1]
    # f_i is P at level i (p itself at level 0); f_{i+1} is P at level i+1
    f_i = spec.constant(p) if i == 0 else T.transition(i, T.levels[i].var("P"))
    f_next = spec.var("P")
    return f_next ** p == f_i and _check_f1(T) is None


# -- decomposition ----------------------------------------------------------

def _radical_nonzero(spec: LevelRingSpec, alpha, torsion_free: bool) -> bool:
    """X^alpha survives in (R/I_0)_red (or in the torsion-free version)."""
    supp = {k for k, e in enumerate(alpha) if e}
    for g in spec.generators:
        if g.p_exp and not torsion_free:
            continue
        if {k for k, e in enumerate(g.x_exps) if e} <= supp:
            return False
    return True


@dataclass(frozen=True)
class DecompositionResult:
    torsion_free: TowerSpec
    reduced: TowerSpec
    overlap: TowerSpec
    certificates: tuple[tuple[int, bool, dict | None], ...]
    torsion_meets_radical: tuple[tuple[int, dict | None], ...]

    @property
    def certified(self) -> bool:
        return all(ok for _, ok, _ in self.certificates) and \
            all(w is None for _, w in self.torsion_meets_radical)

    def to_dict(self) -> dict:
        return {
            "certified": self.certified,
            "torsion_free": [str(s) for s in self.torsion_free.levels],
            "reduced": [str(s) for s in self.reduced.levels],
            "overlap": [str(s) for s in self.overlap.levels],
            "squares": [{"level": i, "cartesian": ok, **({"witness": w} if w else {})}
                        for i, ok, w in self.certificates],
            "torsion_cap_radical": [{"level": i, "zero": w is None, **({"witness": w} if w else {})}
                                    for i, w in self.torsion_meets_radical],
        }


def _decomposition_square(lv: _Level, level: int, D: int):
    """0 -> R -> R~ (+) (R/I_0)_red -> (R~/I_0)_red -> 0 exact on each x-degree.

    Every map respects the power of P, so each x-degree splits further into
    P^k pieces; only k = 0 meets the reduced rings.
    """
    spec, p = lv.spec, lv.p
    for alpha in spec.window(D):
        tor = lv.is_torsion(alpha)
        for k in range(1, lv.L):
            if lv.order(k, alpha) and tor:
                return {"level": level, "element": lv.name((k, alpha)),
                        "reason": "map into the direct sum is not injective"}
        o = lv.order(0, alpha)
        A = [o] if o else []
        Bt = [] if tor else list(A)
        Br = [p] if o and _radical_nonzero(spec, alpha, False) else []
        Cm = [p] if o and not tor and _radical_nonzero(spec, alpha, True) else []
        if not (A or Br):
            continue
        f = [[1] * len(A) for _ in Bt + Br]
        g = [[1] * len(Bt) + [-1] * len(Br) for _ in Cm]
        ok, reason = _exact_three((A, Bt + Br, Cm), f, g, need_onto=True)
        if not ok:
            return {"level": level, "element": spec.monomial_str(0, alpha), "reason": reason}
    return None


def _torsion_cap_radical(lv: _Level, level: int, D: int):
    if not lv.mixed:
        return None
    for a, alpha in lv.tor_window(D):
        if a >= 1 or not _radical_nonzero(lv.spec, alpha, False):
            return {"level": level, "element": lv.name((a, alpha)),
                    "reason": "torsion element lies in the radical of I_0"}
    return None


def decompose_tower(T: TowerSpec, window: Window | None = None) -> DecompositionResult:
    """R_i = R~_i x_{(R~_i/I_0)_red} (R_i/I_0)_red, certified level by level."""
    T, L, window, lvs = _levels(T, window)
    if T.is_mixed:
        tf = TowerSpec(tuple(torsion_free_quotient(s) for s in T.levels[:L + 1]))
    else:
        tf = T.truncated(L)
    red = TowerSpec(tuple(radical_quotient(mod_pillar(s)) for s in T.levels[:L + 1]))
    ov = TowerSpec(tuple(radical_quotient(mod_pillar(s)) for s in tf.levels))
    certs, bcs = [], []
    for j, lv in enumerate(lvs):
        if lv.mixed:
            w = _decomposition_square(lv, j, window.degree)
        else:
            w = None
        certs.append((j, w is None, w))
        bcs.append((j, _torsion_cap_radical(lv, j, window.degree)))
    return DecompositionResult(tf, red, ov, tuple(certs), tuple(bcs))


def reducedness_check(T: TowerSpec, degree: int = 8):
    """Return None when no level has a nonzero nilpotent monomial, else a witness."""
    for j, spec in enumerate(T.levels):
        lv = _Level(spec)
        for alpha in spec.window(degree):
            supp = {k for k, e in enumerate(alpha) if e}
            stable = None
            for g in spec.generators:
                if {k for k, e in enumerate(g.x_exps) if e} <= supp:
                    stable = g.p_exp if stable is None else min(stable, g.p_exp)
            for a in range(lv.L if lv.mixed else 1):
                if not lv.order(a, alpha):
                    continue
                if stable == 0 or (a >= 1 and stable is not None):
                    return {"level": j, "element": lv.name((a, alpha)), "reason": "nonzero nilpotent"}
    return None


# -- gluing -----------------------------------------------------------------

def _attaching(perfect_side: LevelRingSpec, S: TowerSpec, attaching: Mapping | None):
    red0 = radical_quotient(mod_pillar(S.levels[0]))
    attaching = dict(attaching or {})
    unknown = set(attaching) - set(perfect_side.variables)
    if unknown:
        raise MapNotDefined(f"attaching map mentions unknown variables {sorted(unknown)}")
    targets = {}
    for v in perfect_side.variables:
        t = attaching.get(v)
        if t in (None, 0, "0"):
            continue
        if t not in red0.variables:
            raise MapNotDefined(f"{v} -> {t}: target is not a variable of (S/I_0)_red")
        targets[v] = t
    if len(set(targets.values())) != len(targets) or set(targets.values()) != set(red0.variables):
        raise MapNotDefined("attaching map must match variables one-to-one with (S/I_0)_red")
    new = tuple(v for v in perfect_side.variables if v not in targets)
    clash = set(new) & set(S.variables)
    if clash:
        raise MapNotDefined(f"variable names {sorted(clash)} occur on both sides")
    # the shared part of the perfect side must be (S/I_0)_red itself
    pos = {t: k for k, t in enumerate(red0.variables)}
    shared = []
    for g in perfect_side.generators:
        names = [v for v, e in zip(perfect_side.variables, g.x_exps) if e]
        if all(v in targets for v in names):
            vec = [0] * red0.nvars
            for v, e in zip(perfect_side.variables, g.x_exps):
                if e:
                    vec[pos[targets[v]]] = e
            shared.append(PMonomial(0, tuple(vec)))
    if replace(red0, generators=tuple(shared)) != red0:
        raise MapNotDefined("attaching map is not an isomorphism on the shared variables")
    return targets, new


def glue_towers(perfect_side: LevelRingSpec, S: TowerSpec,
                attaching: Mapping[str, str | None] | None = None) -> TowerSpec:
    """Levelwise fiber product (R')^(1/p^i) x_{(S_i/I_0)_red} S_i.

    ``attaching`` sends each variable of the reduced characteristic-p ring R'
    to a variable of (S/I_0 S)_red or to 0 (the default).
    """
    if perfect_side.is_mixed:
        raise NotReduced("the perfect side must be a characteristic-p ring")
    if not is_reduced(perfect_side):
        raise NotReduced(f"{perfect_side} is not reduced")
    if perfect_side.prime != S.prime:
        raise MapNotDefined("primes differ")
    targets, new = _attaching(perfect_side, S, attaching)
    levels = []
    for Si in S.levels:
        names = Si.variables + new
        pos = {n: k for k, n in enumerate(names)}
        zero_tail = (0,) * len(new)
        gens = [PMonomial(g.p_exp, g.x_exps + zero_tail) for g in Si.generators]

        def unit(name):
            v = [0] * len(names)
            v[pos[name]] = 1
            return tuple(v)

        if Si.is_mixed:
            gens += [PMonomial(1, unit(z)) for z in new]
        for g in perfect_side.generators:
            vec = [0] * len(names)
            for v, e in zip(perfect_side.variables, g.x_exps):
                if e:
                    vec[pos[targets.get(v, v)]] += e
            if any(g.x_exps[perfect_side.variables.index(z)] for z in new):
                gens.append(PMonomial(0, tuple(vec)))
            else:
                for z in new:
                    gens.append(PMonomial(0, tuple(a + b for a, b in zip(vec, unit(z)))))
        levels.append(LevelRingSpec(Si.prime, Si.precision, Si.level, Si.characteristic, names, tuple(gens)))
    return TowerSpec(tuple(levels))


def check_gluing_conditions(glued: TowerSpec, perfect_side: LevelRingSpec, S: TowerSpec,
                            attaching: Mapping | None = None, window: Window | None = None) -> dict:
    """Conditions (i)-(iv) for the glued tower, each verified on the window."""
    targets, new = _attaching(perfect_side, S, attaching)
    glued, L, window, lvs = _levels(glued, window)
    S = S.with_precision(window.precision)
    D = window.degree
    nS = len(S.variables)
    out = {}
    # (i), (ii): the pillars are (0, f) with f the pillars of S
    for key, which, lvl in (("i", "I0", 0), ("ii", "I1", 1)):
        w = None
        if lvl <= L and glued.pillar_exponent(which, lvl) != S.pillar_exponent(which, lvl):
            w = {"level": lvl, "reason": f"pillar {which} differs from that of S"}
        out[key] = _status(w)
    # (iii): I_0 R_i -> J_0 S_i and I_1 R_{i+1} -> J_1 S_{i+1} are isomorphisms
    w = None
    for j in range(L + 1):
        lv, sv = lvs[j], _Level(S.levels[j])
        for which in ("I0", "I1"):
            thr = glued.pillar_exponent(which, j)
            if thr is None or w:
                continue
            for alpha in lv.spec.window(D):
                beta, gamma = alpha[:nS], alpha[nS:]
                for a in range(thr, lv.spec.cap):
                    mine = lv.order(a, alpha)
                    theirs = sv.order(a, beta) if not any(gamma) else 0
                    if mine != theirs:
                        w = _witness(j, lv, (a, alpha), f"{which}-multiples do not match S")
                        break
                if w:
                    break
    out["iii"] = _status(w)
    # (iv): R'_i (+) tor(S_i) -> (S_i/J_0)_red is onto
    w = None
    red = radical_quotient(mod_pillar(S.levels[0]))
    inv = {t: v for v, t in targets.items()}
    for alpha in red.window(D):
        if red.m(alpha) == 0:
            continue
        pre = [0] * perfect_side.nvars
        for name, e in zip(red.variables, alpha):
            pre[perfect_side.index_of(inv[name])] = e
        if perfect_side.m(tuple(pre)) == 0:
            w = {"level": 0, "element": red.monomial_str(0, alpha), "reason": "not hit by the perfect side"}
            break
    out["iv"] = _status(w)
    return out
