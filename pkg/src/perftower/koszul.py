"""Koszul homology of monomial sequences on level rings.

Both sides are computed one multidegree at a time.  In characteristic p
every variable (including the tilt variable) has degree 1 and each graded
piece of R is 0 or F_p.  In mixed characteristic p has degree 0, so the
piece of R at an x-exponent alpha is its coefficient module: cyclic
pieces Z/p^e for monomials killed by a power of p and a free Z_p-lattice
otherwise.  No p-adic truncation enters the complex, which keeps the
homology exact instead of picking up spurious classes from Z/p^N.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .errors import NoPillar, NotGraded, WindowTooSmall, WindowUnstable
from .exactlin import BoundedComplex, FinAbPresentation, IntMatrix, homology_of_complex, rank_mod_p
from .levelring import P_SYMBOL, LevelRingSpec, RingElement, Window, leq, monomials_up_to
from .tiltops import closed_form, tilt_iso_check
from .tower import TowerSpec

Group = tuple[int, tuple[int, ...]]


def _monomial_exponent(x: RingElement) -> tuple[int, tuple[int, ...]]:
    """(P-exponent, x-exponent) of a unit multiple of a monomial."""
    spec = x.spec
    p = spec.prime
    if len(x.terms) != 1:
        raise NotGraded(f"{x} is not a monomial")
    alpha, coeffs = x.terms[0]
    nz = [(k, c) for k, c in enumerate(coeffs) if c]
    if len(nz) != 1:
        raise NotGraded(f"{x} is not a monomial")
    k, c = nz[0]
    s = 0
    while c % p == 0:
        c //= p
        s += 1
    return k + s * spec.coeff_length, tuple(alpha)


_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\^(\d+))?$")


def sequence_from_names(ring: LevelRingSpec, names: Sequence[str]) -> tuple[RingElement, ...]:
    """Parse ``p``, ``pillar``, variable names and powers like ``x^3``."""
    out = []
    for name in names:
        if name in ("p", "pillar"):
            if not ring.is_mixed:
                raise NoPillar("a characteristic-p ring has no pillar element p")
            out.append(ring.constant(ring.prime))
            continue
        match = _TOKEN.match(name)
        if not match:
            raise ValueError(f"cannot read sequence element {name!r}")
        base, exp = match.group(1), int(match.group(2) or 1)
        out.append(ring.var(base) ** exp)
    return tuple(out)


@dataclass(frozen=True)
class KoszulInput:
    ring: LevelRingSpec
    sequence: tuple[RingElement, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.sequence:
            raise ValueError("the Koszul sequence needs at least one element")
        for x in self.sequence:
            if x.spec != self.ring:
                raise ValueError("sequence element lives in another ring")
            _monomial_exponent(x)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(x) for x in self.sequence))

    @classmethod
    def from_names(cls, ring: LevelRingSpec, names: Sequence[str]) -> KoszulInput:
        return cls(ring, sequence_from_names(ring, names), tuple(names))

    @property
    def n(self) -> int:
        return len(self.sequence)

    def exponents(self) -> list[tuple[int, tuple[int, ...]]]:
        return [_monomial_exponent(x) for x in self.sequence]


class _Pieces:
    """Graded pieces of R: basis orders (0 = free) and multiplication."""

    def __init__(self, ring: LevelRingSpec):
        self.ring = ring
        self.mixed = ring.is_mixed
        self.p = ring.prime
        self.L = ring.coeff_length
        self._cache: dict = {}

    def orders(self, alpha) -> list[int]:
        got = self._cache.get(alpha)
        if got is not None:
            return got
        ring = self.ring
        if not self.mixed:
            got = [self.p] if ring.m(alpha) else []
        elif not ring.divides_some(alpha):
            got = [0] * self.L
        else:
            m = ring.m(alpha)
            got = [self.p ** (-(-(m - k) // self.L)) for k in range(min(m, self.L))]
        self._cache[alpha] = got
        return got

    def multiply(self, a: int, k: int) -> tuple[int, int]:
        """P^a * P^k = coefficient * P^r."""
        q, r = divmod(k + a, self.L)
        return self.p ** q, r


def _piece_complex(pieces: _Pieces, exps, gamma):
    n = len(exps)
    degs = []
    for q in range(n + 1):
        comps = []
        for S in combinations(range(n), q):
            src = list(gamma)
            ok = True
            for j in S:
                for t, e in enumerate(exps[j][1]):
                    src[t] -= e
                    ok = ok and src[t] >= 0
            if ok:
                orders = pieces.orders(tuple(src))
                if orders:
                    comps.append((S, tuple(src), orders))
        degs.append(comps)
    return degs


def _offsets(comps):
    index, total = {}, 0
    for S, _, orders in comps:
        index[S] = total
        total += len(orders)
    return index, total


def _differential(pieces: _Pieces, exps, lower, upper):
    """Matrix of d: K_{q+1} -> K_q on one multidegree."""
    li, lt = _offsets(lower)
    _, ut = _offsets(upper)
    rows = [[0] * ut for _ in range(lt)]
    col = 0
    for S, _, orders in upper:
        for k in range(len(orders)):
            for pos, j in enumerate(S):
                T = S[:pos] + S[pos + 1:]
                if T not in li:
                    continue
                sign = -1 if pos % 2 else 1
                a = exps[j][0]
                if pieces.mixed:
                    c, r = pieces.multiply(a, k)
                    if r < len(next(o for s, _, o in lower if s == T)):
                        rows[li[T] + r][col] += sign * c
                elif a == 0:
                    rows[li[T]][col] += sign
            col += 1
    return rows, lt, ut


def _piece_homology(pieces: _Pieces, exps, gamma) -> list[Group] | None:
    degs = _piece_complex(pieces, exps, gamma)
    if not any(degs):
        return None
    n = len(exps)
    mats = [_differential(pieces, exps, degs[q], degs[q + 1]) for q in range(n)]
    if not pieces.mixed:
        sizes = [sum(len(o) for _, _, o in c) for c in degs]
        ranks = [rank_mod_p(rows, pieces.p) if lt and ut else 0 for rows, lt, ut in mats]
        out = []
        for q in range(n + 1):
            d = sizes[q] - (ranks[q - 1] if q else 0) - (ranks[q] if q < n else 0)
            out.append((0, (pieces.p,) * d))
        return out
    modules = tuple(FinAbPresentation.cyclic([o or None for _, _, os in c for o in os]) for c in degs)
    diffs = tuple(IntMatrix.from_rows(rows, ut) if lt else IntMatrix.zeros(0, ut) for rows, lt, ut in mats)
    return homology_of_complex(BoundedComplex(modules, diffs))


def _add(a: Group, b: Group) -> Group:
    return a[0] + b[0], tuple(sorted(a[1] + b[1]))


def _group_str(g: Group) -> str:
    free, tors = g
    parts = [f"Z/{t}" for t in tors]
    if free:
        parts.append("Z_p" if free == 1 else f"Z_p^{free}")
    c = Counter(parts)
    return " + ".join(f"({k})^{v}" if v > 1 else k for k, v in c.items()) or "0"


@dataclass(frozen=True)
class KoszulHomology:
    """H_q for q = 0..n summed over the multidegree window.

    ``groups[q]`` is (free rank, sorted invariant factors); in characteristic
    p the F_p-dimension d appears as d copies of p, and ``graded[q]`` maps a
    total degree to its dimension.
    """

    labels: tuple[str, ...]
    groups: tuple[Group, ...]
    graded: tuple[tuple[tuple[int, int], ...], ...] | None
    window: Window

    def top_degree(self) -> int | None:
        nz = [q for q, g in enumerate(self.groups) if g != (0, ())]
        return max(nz) if nz else None

    def group_strings(self) -> list[str]:
        return [_group_str(g) for g in self.groups]

    def to_dict(self) -> dict:
        d = {"sequence": list(self.labels), "window": self.window.to_dict(),
             "H": [{"q": q, "free_rank": g[0], "torsion": list(g[1]), "group": _group_str(g)}
                   for q, g in enumerate(self.groups)]}
        if self.graded is not None:
            d["graded"] = [{str(k): v for k, v in gr} for gr in self.graded]
        return d


def _pieces_for(ring: LevelRingSpec, D: int, box=None):
    if box is not None:
        return [g for g in monomials_up_to(ring.nvars, sum(box)) if leq(g, box)]
    return monomials_up_to(ring.nvars, D)


def _compute(K: KoszulInput, window: Window, box=None) -> KoszulHomology:
    ring = K.ring
    if ring.is_mixed and ring.precision != window.precision:
        ring = LevelRingSpec(ring.prime, window.precision, ring.level, ring.characteristic,
                             ring.variables, ring.generators)
    exps = K.exponents()
    all_degree = [a * (not ring.is_mixed) + sum(b) for a, b in exps]
    if box is None and max(all_degree) > window.degree:
        raise WindowTooSmall(f"a sequence element has degree above D = {window.degree}")
    pieces = _Pieces(ring)
    totals: list[Group] = [(0, ())] * (K.n + 1)
    graded = [Counter() for _ in range(K.n + 1)]
    for gamma in _pieces_for(ring, window.degree, box):
        h = _piece_homology(pieces, exps, gamma)
        if h is None:
            continue
        for q, g in enumerate(h):
            if g != (0, ()):
                totals[q] = _add(totals[q], g)
                if not ring.is_mixed:
                    graded[q][sum(gamma)] += len(g[1])
    gr = None if ring.is_mixed else tuple(tuple(sorted(c.items())) for c in graded)
    return KoszulHomology(K.labels, tuple(totals), gr, window)


def koszul_homology(K: KoszulInput, window: Window | None = None, check_stability: bool = True) -> KoszulHomology:
    """Koszul homology on the window, confirmed at the enlarged window (D+2, N+1)."""
    window = window or Window()
    first = _compute(K, window)
    if check_stability:
        second = _compute(K, window.enlarged())
        if first.groups != second.groups:
            raise WindowUnstable("Koszul homology changes when the window grows", first, second)
    return first


def koszul_complex_truncated(K: KoszulInput, window: Window | None = None) -> BoundedComplex:
    """The Koszul complex as a direct sum over every multidegree piece of the window.

    Differentials never leave a piece, so the result is block diagonal; d∘d = 0
    is verified before returning.
    """
    window = window or Window()
    pieces = _Pieces(K.ring)
    exps = K.exponents()
    blocks = [[] for _ in range(K.n + 1)]
    mats = [[] for _ in range(K.n)]
    for gamma in monomials_up_to(K.ring.nvars, window.degree):
        degs = _piece_complex(pieces, exps, gamma)
        if not any(degs):
            continue
        for q in range(K.n + 1):
            blocks[q].append([o or None for _, _, os in degs[q] for o in os])
        for q in range(K.n):
            mats[q].append(_differential(pieces, exps, degs[q], degs[q + 1]))
    modules = tuple(FinAbPresentation.cyclic([o for b in bl for o in b]) if K.ring.is_mixed
                    else FinAbPresentation.cyclic([K.ring.prime] * sum(len(b) for b in bl))
                    for bl in blocks)
    diffs = []
    for q in range(K.n):
        lt = sum(m[1] for m in mats[q])
        ut = sum(m[2] for m in mats[q])
        rows = [[0] * ut for _ in range(lt)]
        r0 = c0 = 0
        for sub, a, b in mats[q]:
            for i in range(a):
                rows[r0 + i][c0:c0 + b] = sub[i]
            r0, c0 = r0 + a, c0 + b
        diffs.append(IntMatrix.from_rows(rows, ut) if lt else IntMatrix.zeros(0, ut))
    C = BoundedComplex(modules, tuple(diffs))
    C.check()
    return C


def krull_dim_monomial(R: LevelRingSpec) -> int:
    """Largest set of coordinates (p included in mixed characteristic) containing no generator's support."""
    n = R.nvars + (1 if R.is_mixed else 0)
    supports = []
    for g in R.generators:
        s = {k for k, e in enumerate(g.x_exps) if e}
        if R.is_mixed and g.p_exp:
            s.add(R.nvars)
        supports.append(frozenset(s))
    for size in range(n, -1, -1):
        for S in combinations(range(n), size):
            chosen = set(S)
            if not any(s <= chosen for s in supports):
                return size
    return 0


def _lcm_box(R: LevelRingSpec) -> tuple[int, ...]:
    box = [0] * R.nvars
    for g in R.generators:
        box = [max(a, b) for a, b in zip(box, g.x_exps)]
    return tuple(box)


def graded_depth(R: LevelRingSpec) -> int:
    """depth = n - max{q : H_q(x_1..x_n; R) != 0} for a standard-graded F_p[x]/I."""
    if R.is_mixed:
        raise NotGraded("graded depth needs a characteristic-p ring")
    if R.nvars == 0:
        return 0
    K = KoszulInput.from_names(R, R.variables)
    h = _compute(K, Window(), box=_lcm_box(R))
    return R.nvars - h.top_degree()


def _tilt_names(names: Sequence[str], T: TowerSpec, level: int, tilt_var: str) -> list[str]:
    out = []
    for name in names:
        if name in ("p", "pillar"):
            e = T.prime ** level
            out.append(tilt_var if e == 1 else f"{tilt_var}^{e}")
        elif name == P_SYMBOL:
            out.append(tilt_var)
        else:
            out.append(name)
    return out


@dataclass(frozen=True)
class TiltComparison:
    level: int
    mixed: KoszulHomology
    tilt: KoszulHomology
    tilt_iso: bool

    @property
    def matches(self) -> tuple[bool, ...]:
        return tuple(a == b for a, b in zip(self.mixed.groups, self.tilt.groups))

    @property
    def equal(self) -> bool:
        return self.tilt_iso and all(self.matches)

    def to_dict(self) -> dict:
        return {"level": self.level, "equal": self.equal, "tilt_iso": self.tilt_iso,
                "mixed": self.mixed.to_dict(), "tilt": self.tilt.to_dict(),
                "per_q": [{"q": q, "match": m, "mixed": _group_str(a), "tilt": _group_str(b)}
                          for q, (m, a, b) in enumerate(zip(self.matches, self.mixed.groups, self.tilt.groups))]}


def default_sequence(ring: LevelRingSpec) -> list[str]:
    return (["p"] if ring.is_mixed else []) + list(ring.variables)


def tilt_koszul_compare(T: TowerSpec, sequence: Sequence[str] | None = None,
                        window: Window | None = None, level: int = 0,
                        tilt_var: str | None = None) -> TiltComparison:
    """H_q(x; R_i) against H_q(x^sb; R_i^sb), where the pillar p matches its tilt."""
    window = window or Window()
    if not T.is_mixed:
        raise NoPillar("the comparison needs a mixed-characteristic tower")
    tilt_var = tilt_var or T.tilt_variable
    ring = T.levels[level]
    names = list(sequence) if sequence else default_sequence(ring)
    if names[0] not in ("p", "pillar"):
        raise ValueError("the sequence must begin with the pillar generator p")
    iso = tilt_iso_check(T, level, Window(levels=window.levels, degree=window.degree,
                                          precision=window.precision, tilt_depth=window.tilt_depth),
                         tilt_var).passed
    closed = closed_form(T, level, tilt_var)
    mixed = koszul_homology(KoszulInput.from_names(ring, names), window)
    tilt = koszul_homology(KoszulInput.from_names(closed, _tilt_names(names, T, level, tilt_var)), window)
    return TiltComparison(level, mixed, tilt, iso)


@dataclass(frozen=True)
class DimDepthReport:
    dim_mixed: int
    dim_tilt: int
    depth_tilt: int
    depth_mixed: int
    top_mixed: int | None
    top_tilt: int | None

    @property
    def dim_match(self) -> bool:
        return self.dim_mixed == self.dim_tilt

    @property
    def depth_match(self) -> bool:
        return self.top_mixed == self.top_tilt and self.depth_mixed == self.depth_tilt

    @property
    def cm_mixed(self) -> bool:
        return self.dim_mixed == self.depth_mixed

    @property
    def cm_tilt(self) -> bool:
        return self.dim_tilt == self.depth_tilt

    @property
    def cm_equiv(self) -> bool:
        return self.cm_mixed == self.cm_tilt

    def to_dict(self) -> dict:
        return {"dim_mixed": self.dim_mixed, "dim_tilt": self.dim_tilt,
                "depth_mixed": self.depth_mixed, "depth_tilt": self.depth_tilt,
                "koszul_top_mixed": self.top_mixed, "koszul_top_tilt": self.top_tilt,
                "dim_match": self.dim_match, "depth_match": self.depth_match,
                "cm_mixed": self.cm_mixed, "cm_tilt": self.cm_tilt, "cm_equiv": self.cm_equiv}


def dim_depth_compare(T: TowerSpec, window: Window | None = None, level: int = 0,
                      tilt_var: str | None = None) -> DimDepthReport:
    """Krull dimension and depth on both sides of the tilt.

    The mixed-side depth is read off the largest nonvanishing Koszul degree
    of (p, x_1, ..., x_n); the tilt side uses graded_depth.
    """
    window = window or Window()
    tilt_var = tilt_var or T.tilt_variable
    ring = T.levels[level]
    closed = closed_form(T, level, tilt_var)
    depth_tilt = graded_depth(closed)
    names = default_sequence(ring)
    mixed = koszul_homology(KoszulInput.from_names(ring, names), window)
    tilt = koszul_homology(KoszulInput.from_names(closed, _tilt_names(names, T, level, tilt_var)), window)
    top = mixed.top_degree()
    depth_mixed = len(names) - top if top is not None else len(names)
    return DimDepthReport(krull_dim_monomial(ring), krull_dim_monomial(closed), depth_tilt,
                          depth_mixed, top, tilt.top_degree())
