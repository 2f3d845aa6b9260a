"""Truncated small tilts of monomial towers.

A compatible sequence (a_0, ..., a_m) with a_j in R_{i+j}/I_0 and
F_{i+j}(a_{j+1}) = a_j is determined by its last entry, because every
Frobenius projection is surjective.  For monomial towers the sequences
spanning the carrier are the constant ones: the same exponent (a, alpha)
read at every level, zero wherever it vanishes.  Sending the constant
sequence of P to a free variable T identifies the depth-m carrier with a
characteristic-p monomial ring modulo T^(p^(i+m)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DepthExceedsLevels, VariableMismatch
from .levelring import PURE, LevelRingSpec, PMonomial, Window, monomials_up_to
from .tower import FAILED, VERIFIED, AxiomStatus, TowerSpec, _key, _Level


def closed_form(T: TowerSpec, i: int, tilt_var: str | None = None) -> LevelRingSpec:
    """Characteristic-p monomial ring proposed for the level-i small tilt."""
    spec = T.levels[i]
    if not spec.is_mixed:
        return spec
    tilt_var = tilt_var or T.tilt_variable
    if tilt_var in spec.variables:
        raise VariableMismatch(f"tilt variable {tilt_var!r} clashes with a ring variable")
    gens = tuple(PMonomial(0, (g.p_exp,) + g.x_exps) for g in spec.generators)
    return LevelRingSpec(spec.prime, 1, i, PURE, (tilt_var,) + spec.variables, gens)


def _zero_in_closed(spec: LevelRingSpec, mono) -> bool:
    return spec.m(mono) == 0


@dataclass(frozen=True)
class TiltApprox:
    """Depth-m truncation of the level-i small tilt on a degree window.

    ``sequences`` lists, for each window monomial of the carrier, the
    components at levels i..i+m (None where the component vanishes).
    """

    tower: TowerSpec
    level: int
    depth: int
    degree: int
    sequences: tuple = field(repr=False)
    closed: LevelRingSpec
    iso_witness: dict | None = None

    @property
    def mixed(self) -> bool:
        return self.tower.is_mixed

    @property
    def truncation_exponent(self) -> int | None:
        """The carrier is the closed form modulo T to this power."""
        return self.tower.prime ** (self.level + self.depth) if self.mixed else None

    def carrier(self) -> tuple:
        """Nonzero carrier monomials of total degree <= D, as closed-form exponents."""
        return tuple(_closed_exp(self.mixed, mono) for mono, _ in self.sequences)

    def window_part(self) -> frozenset:
        return frozenset(self.carrier())

    def projection(self, j: int, mono):
        """Phi_j of the constant sequence with exponent ``mono``."""
        lv = _Level(self.tower.levels[self.level + j])
        return mono if lv.sf(*mono) else None

    def pillar_sequence(self) -> tuple | None:
        """The sequence of pillar generators, as a closed-form exponent."""
        if not self.mixed:
            return None
        n = self.tower.levels[0].nvars
        return (self.tower.prime ** self.level,) + (0,) * n

    def kernel_generators(self) -> tuple:
        """Minimal carrier monomials in the kernel of Phi_0."""
        ker = [e for (mono, comps), e in zip(self.sequences, self.carrier()) if comps[0] is None]
        return tuple(e for e in ker if not any(f != e and all(x <= y for x, y in zip(f, e)) for f in ker))

    @property
    def carrier_matches_closed_form(self) -> bool:
        return self.iso_witness is None

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "depth": self.depth,
            "closed_form": self.closed.to_dict(),
            "closed_form_text": str(self.closed),
            "truncation_exponent": self.truncation_exponent,
            "carrier_size_on_window": len(self.sequences),
            "carrier_matches_closed_form": self.carrier_matches_closed_form,
        }


def _closed_exp(mixed: bool, mono):
    a, alpha = mono
    return (a,) + tuple(alpha) if mixed else tuple(alpha)


def tilt_level_truncated(T: TowerSpec, i: int, m: int, window: Window | None = None,
                         tilt_var: str | None = None) -> TiltApprox:
    """Materialize the depth-m carrier at level i and compare it with the closed form."""
    if m < 0 or i < 0:
        raise ValueError("level and depth must be nonnegative")
    if i + m > T.L:
        raise DepthExceedsLevels(f"depth {m} at level {i} needs {i + m} levels, tower has {T.L}")
    D = window.degree if window else 8
    if window and T.is_mixed:
        T = T.with_precision(window.precision)
    closed = closed_form(T, i, tilt_var)
    lvs = [_Level(T.levels[i + j]) for j in range(m + 1)]
    top = lvs[-1]
    n = T.levels[0].nvars
    seqs = []
    for a, alpha in _total_window(T.is_mixed, n, D):
        if not top.sf(a, alpha):
            continue
        comps = tuple((a, alpha) if lv.sf(a, alpha) else None for lv in lvs)
        seqs.append(((a, alpha), comps))
    seqs.sort(key=lambda s: _key(s[0]))
    witness = _compare_with_closed(T, closed, seqs, i + m, D)
    return TiltApprox(T, i, m, D, tuple(seqs), closed, witness)


def _total_window(mixed: bool, n: int, D: int):
    if not mixed:
        return [(0, alpha) for alpha in monomials_up_to(n, D)]
    return [(e[0], e[1:]) for e in monomials_up_to(n + 1, D)]


def _compare_with_closed(T, closed, seqs, top_level, D):
    """Carrier monomials must be the nonzero monomials of closed/(T^(p^top))."""
    present = {_closed_exp(T.is_mixed, mono) for mono, _ in seqs}
    bound = T.prime ** top_level if T.is_mixed else None
    for mono in _total_window(T.is_mixed, T.levels[0].nvars, D):
        e = _closed_exp(T.is_mixed, mono)
        nonzero = not _zero_in_closed(closed, e) and (bound is None or e[0] < bound)
        if nonzero != (e in present):
            return {"element": closed.monomial_str(0, e),
                    "reason": "closed form and compatible sequences disagree"}
    return None


@dataclass(frozen=True)
class TiltIsoReport:
    level: int
    checks: tuple[tuple[str, AxiomStatus], ...]
    kernel_generator: str | None
    principal: str

    @property
    def passed(self) -> bool:
        return all(s.ok for _, s in self.checks)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {"level": self.level, "passed": self.passed,
                "checks": {k: s.to_dict() for k, s in self.checks},
                "kernel_generator": self.kernel_generator, "principal": self.principal}


def tilt_iso_check(T: TowerSpec, i: int = 0, window: Window | None = None,
                   tilt_var: str | None = None, depth: int | None = None) -> TiltIsoReport:
    """(alpha) R_i^sb / I_0^sb = R_i / I_0 through Phi_0 and (beta) the torsion parts agree."""
    window = window or Window(levels=max(T.L, 1))
    if depth is None:
        depth = min(window.tilt_depth, T.L - i)
    if depth < 1:
        raise DepthExceedsLevels("the tilt must be materialized at depth >= 1")
    tilt = tilt_level_truncated(T, i, depth, window, tilt_var)
    T = tilt.tower
    D = window.degree
    lv = _Level(T.levels[i])
    checks = [("carrier", AxiomStatus(VERIFIED) if tilt.iso_witness is None
               else AxiomStatus(FAILED, tilt.iso_witness))]

    # (alpha): Phi_0 is onto R_i/I_0 and injective modulo its kernel
    w = None
    images = {comps[0] for _, comps in tilt.sequences if comps[0] is not None}
    for mono in lv.sf_window(D):
        if sum(mono[1]) + mono[0] <= D and mono not in images:
            w = {"level": i, "element": lv.name(mono), "reason": "not in the image of Phi_0"}
            break
    checks.append(("alpha", AxiomStatus(VERIFIED) if w is None else AxiomStatus(FAILED, w)))

    gens = tilt.kernel_generators()
    pillar = tilt.pillar_sequence()
    if not T.is_mixed:
        principal, kgen = ("verified" if not gens else "not-principal"), None
    elif not gens:
        principal, kgen = "outside-window", tilt.closed.monomial_str(0, pillar)
    elif gens == (pillar,):
        principal, kgen = "verified", tilt.closed.monomial_str(0, pillar)
    else:
        principal, kgen = "not-principal", ", ".join(tilt.closed.monomial_str(0, g) for g in gens)

    # (beta): torsion monomials agree, with the same non-unital products
    checks.append(("beta", _torsion_match(T, tilt.closed, i, D)))
    checks.append(("frobenius", _frobenius_injective(tilt.closed, D)))
    return TiltIsoReport(i, tuple(checks), kgen, principal)


def torsion_parts(T: TowerSpec, closed: LevelRingSpec, i: int, D: int) -> tuple[list, list]:
    """Torsion monomials of R_i and of the closed form, as closed-form exponents."""
    lv = _Level(T.levels[i])
    n = T.levels[0].nvars
    mixed = T.is_mixed
    ours, theirs = [], []
    for mono in _total_window(mixed, n, D):
        e = _closed_exp(mixed, mono)
        a, alpha = mono
        if mixed:
            if lv.is_torsion(alpha) and lv.order(a, alpha):
                ours.append(e)
            if _killed_by_t(closed, e) and not _zero_in_closed(closed, e):
                theirs.append(e)
        else:
            # I_0 = 0 kills everything, so the whole ring is torsion on both sides
            if lv.order(0, alpha):
                ours.append(e)
            if not _zero_in_closed(closed, e):
                theirs.append(e)
    return ours, theirs


def _killed_by_t(closed: LevelRingSpec, e) -> bool:
    """Some power of T kills T^a X^alpha in the closed form."""
    return any(all(x <= y for x, y in zip(g.x_exps[1:], e[1:])) for g in closed.generators)


def _torsion_match(T, closed, i, D) -> AxiomStatus:
    ours, theirs = torsion_parts(T, closed, i, D)
    if set(ours) != set(theirs):
        diff = sorted(set(ours) ^ set(theirs))[0]
        return AxiomStatus(FAILED, {"level": i, "element": closed.monomial_str(0, diff),
                                    "reason": "torsion parts differ"})
    lv = _Level(T.levels[i])
    tor = sorted(ours)
    for x in tor:
        for y in tor:
            z = tuple(a + b for a, b in zip(x, y))
            if sum(z) > D:
                continue
            mine = bool(lv.order(z[0], z[1:])) if T.is_mixed else bool(lv.order(0, z))
            if mine == _zero_in_closed(closed, z):
                return AxiomStatus(FAILED, {"level": i, "element": closed.monomial_str(0, z),
                                            "reason": "torsion products disagree"})
    return AxiomStatus(VERIFIED)


def _frobenius_injective(closed: LevelRingSpec, D: int) -> AxiomStatus:
    """The closed form is perfect-like: x nonzero implies x^p nonzero on the window."""
    p = closed.prime
    for e in monomials_up_to(closed.nvars, D):
        if not _zero_in_closed(closed, e) and _zero_in_closed(closed, tuple(p * x for x in e)):
            return AxiomStatus(FAILED, {"element": closed.monomial_str(0, e),
                                        "reason": "p-th power vanishes"})
    return AxiomStatus(VERIFIED)


def tilt_tower(T: TowerSpec, tilt_var: str | None = None) -> TowerSpec:
    """The tower of closed forms R_0^sb -> R_1^sb -> ... (characteristic p)."""
    return TowerSpec(tuple(closed_form(T, i, tilt_var) for i in range(T.L + 1)))


def depth_stable(T: TowerSpec, i: int, m: int, window: Window | None = None) -> bool:
    """Window parts at depth m and m+1 coincide."""
    a = tilt_level_truncated(T, i, m, window)
    b = tilt_level_truncated(T, i, m + 1, window)
    return a.window_part() == b.window_part()

