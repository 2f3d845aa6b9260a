"""Simplicial complexes, Stanley–Reisner ideals and Reisner's criterion."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

from .errors import EmptyComplex, NotAFace, ParseError
from .exactlin import BoundedComplex, IntMatrix, homology_of_complex, rank_mod_p
from .levelring import MIXED, PURE, LevelRingSpec, PMonomial
from .tower import TowerSpec, build_monomial_tower

MAX_VERTICES = 16

Face = tuple[int, ...]


@dataclass(frozen=True)
class SimplicialComplex:
    """Vertices v_1..v_n and facets given as sorted tuples of vertex indices.

    The complex consisting of the empty face alone has ``facets == ((),)``.
    """

    vertices: tuple[str, ...]
    facets: tuple[Face, ...]

    def __post_init__(self):
        n = len(self.vertices)
        if n > MAX_VERTICES:
            raise ValueError(f"complexes are capped at {MAX_VERTICES} vertices")
        if len(set(self.vertices)) != n:
            raise ValueError("repeated vertex name")
        sets = {tuple(sorted(set(f))) for f in self.facets}
        for f in sets:
            if any(v < 0 or v >= n for v in f):
                raise ValueError("facet refers to an unknown vertex")
        maximal = [f for f in sets if not any(set(f) < set(g) for g in sets)]
        maximal.sort(key=lambda f: (len(f), f))
        used = {v for f in maximal for v in f}
        if used != set(range(n)):
            raise ValueError("every vertex must lie in some facet")
        object.__setattr__(self, "facets", tuple(maximal))

    @classmethod
    def from_facets(cls, facets: Iterable[Iterable], vertices: Sequence[str] | None = None) -> SimplicialComplex:
        facets = [list(f) for f in facets]
        if vertices is None:
            names = sorted({v for f in facets for v in f}, key=lambda v: (str(type(v)), v))
            vertices = [str(v) for v in names]
            lookup = {v: k for k, v in enumerate(names)}
        else:
            lookup = {v: k for k, v in enumerate(vertices)}
        idx = []
        for f in facets:
            try:
                idx.append(tuple(lookup[v] for v in f))
            except KeyError as e:
                raise ValueError(f"unknown vertex {e.args[0]!r}") from None
        return cls(tuple(str(v) for v in vertices), tuple(idx))

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def dim(self) -> int:
        return max(len(f) for f in self.facets) - 1 if self.facets else -2

    @cached_property
    def faces(self) -> tuple[Face, ...]:
        """Every face including the empty one, ordered by size then lex."""
        out = set()
        for f in self.facets:
            for k in range(len(f) + 1):
                out.update(combinations(f, k))
        return tuple(sorted(out, key=lambda f: (len(f), f)))

    @cached_property
    def _face_set(self) -> frozenset:
        return frozenset(self.faces)

    def is_face(self, face: Iterable[int]) -> bool:
        return tuple(sorted(face)) in self._face_set

    def faces_of_dim(self, q: int) -> list[Face]:
        return [f for f in self.faces if len(f) == q + 1]

    def f_vector(self) -> list[int]:
        return [len(self.faces_of_dim(q)) for q in range(-1, self.dim + 1)]

    def minimal_nonfaces(self) -> list[Face]:
        out = []
        fs = self._face_set
        for k in range(1, self.n + 1):
            for face in (f for f in self.faces if len(f) == k - 1):
                top = face[-1] if face else -1
                for v in range(top + 1, self.n):
                    cand = face + (v,)
                    if cand in fs:
                        continue
                    if all(cand[:j] + cand[j + 1:] in fs for j in range(k)):
                        out.append(cand)
        return sorted(out, key=lambda f: (len(f), f))

    def names(self, face: Iterable[int]) -> list[str]:
        return [self.vertices[v] for v in face]

    def face_index(self, face: Iterable) -> Face:
        """Accept vertex names or indices."""
        out = []
        for v in face:
            if isinstance(v, str):
                if v not in self.vertices:
                    raise NotAFace(f"unknown vertex {v!r}")
                out.append(self.vertices.index(v))
            else:
                out.append(int(v))
        return tuple(sorted(out))

    def __str__(self) -> str:
        return "{" + ", ".join("{" + ",".join(self.names(f)) + "}" for f in self.facets) + "}"


def _require_nonempty(delta: SimplicialComplex) -> None:
    if delta.n == 0:
        raise EmptyComplex("the complex has no vertices")


def stanley_reisner_ideal(delta: SimplicialComplex, p: int) -> LevelRingSpec:
    """k[Δ] over F_p: variables are the vertices, generators the minimal non-faces."""
    _require_nonempty(delta)
    gens = [PMonomial(0, tuple(int(v in s) for v in range(delta.n))) for s in delta.minimal_nonfaces()]
    return LevelRingSpec(p, 1, 0, PURE, delta.vertices, tuple(gens))


def p_stanley_reisner_ideal(delta: SimplicialComplex, p: int, precision: int = 4) -> LevelRingSpec:
    """Mixed-characteristic version where the first vertex is replaced by p."""
    _require_nonempty(delta)
    gens = []
    for s in delta.minimal_nonfaces():
        gens.append(PMonomial(int(0 in s), tuple(int(v in s) for v in range(1, delta.n))))
    return LevelRingSpec(p, precision, 0, MIXED, delta.vertices[1:], tuple(gens))


def p_stanley_reisner_tower(delta: SimplicialComplex, p: int, levels: int = 3,
                            precision: int = 4) -> TowerSpec:
    """Tower of p-th roots over the p-Stanley–Reisner ring; its tilt variable is the first vertex."""
    return build_monomial_tower(p_stanley_reisner_ideal(delta, p, precision), levels, delta.vertices[0])


def link(delta: SimplicialComplex, face: Iterable) -> SimplicialComplex:
    """lk F = {G : G ∩ F = ∅, G ∪ F ∈ Δ}; the link of ∅ is Δ."""
    f = delta.face_index(face)
    if not delta.is_face(f):
        raise NotAFace(f"{delta.names(f)} is not a face")
    if not f:
        return delta
    fs = set(f)
    rest = [tuple(v for v in g if v not in fs) for g in delta.facets if fs <= set(g)]
    used = sorted({v for g in rest for v in g})
    relabel = {v: k for k, v in enumerate(used)}
    return SimplicialComplex(tuple(delta.vertices[v] for v in used),
                             tuple(tuple(relabel[v] for v in g) for g in rest))


def cone(delta: SimplicialComplex, apex: str = "c") -> SimplicialComplex:
    n = delta.n
    return SimplicialComplex(delta.vertices + (apex,), tuple(f + (n,) for f in delta.facets))


def chain_complex(delta: SimplicialComplex) -> BoundedComplex:
    """Augmented simplicial chain complex; index k holds faces of dimension k-1."""
    top = delta.dim
    by_dim = [delta.faces_of_dim(q) for q in range(-1, top + 1)]
    index = [{f: j for j, f in enumerate(fs)} for fs in by_dim]
    diffs = []
    for k in range(1, len(by_dim)):
        rows = [[0] * len(by_dim[k]) for _ in by_dim[k - 1]]
        for j, f in enumerate(by_dim[k]):
            for pos in range(len(f)):
                rows[index[k - 1][f[:pos] + f[pos + 1:]]][j] = -1 if pos % 2 else 1
        diffs.append(IntMatrix.from_rows(rows, len(by_dim[k])))
    return BoundedComplex.free([len(fs) for fs in by_dim], diffs)


def reduced_homology(delta: SimplicialComplex, p: int) -> dict[int, int]:
    """Ranks of reduced homology over F_p, keyed by q = -1..dim."""
    c = chain_complex(delta)
    ranks = [rank_mod_p(d.to_rows(), p) for d in c.differentials]
    out = {}
    for k, m in enumerate(c.modules):
        r_out = ranks[k - 1] if k > 0 else 0
        r_in = ranks[k] if k < len(ranks) else 0
        out[k - 1] = m.num_generators - r_out - r_in
    return out


def integral_reduced_homology(delta: SimplicialComplex) -> dict[int, tuple[int, tuple[int, ...]]]:
    return {k - 1: h for k, h in enumerate(homology_of_complex(chain_complex(delta)))}


@dataclass(frozen=True)
class ReisnerResult:
    cohen_macaulay: bool
    witness: tuple[tuple[str, ...], int] | None = None

    def __bool__(self) -> bool:
        return self.cohen_macaulay


def reisner_cm_check(delta: SimplicialComplex, p: int) -> ReisnerResult:
    """k[Δ] is Cohen–Macaulay iff H̃_q(lk F) = 0 for all faces F and q < dim lk F.

    Faces are swept from ∅ upward; the first failing (F, q) is the witness.
    """
    _require_nonempty(delta)
    for f in delta.faces:
        lk = link(delta, f)
        d = lk.dim
        if d < 1:
            continue
        h = reduced_homology(lk, p)
        for q in range(0, d):
            if h[q]:
                return ReisnerResult(False, (tuple(delta.names(f)), q))
    return ReisnerResult(True)


def parse_cplx(text: str) -> SimplicialComplex:
    """Parse the text format: vertex names on the first line, then one facet per line."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        if body.strip():
            rows.append((lineno, line, body))
    if not rows:
        raise ParseError("empty complex file", 1, 1)
    lineno, _, body = rows[0]
    names = body.split()
    if len(set(names)) != len(names):
        raise ParseError("repeated vertex name", lineno, 1)
    lookup = {v: k for k, v in enumerate(names)}
    facets = []
    for lineno, line, body in rows[1:]:
        face = []
        col = 0
        for tok in body.split():
            col = line.index(tok, col)
            if tok not in lookup:
                raise ParseError(f"unknown vertex {tok!r}", lineno, col + 1)
            face.append(lookup[tok])
            col += len(tok)
        facets.append(tuple(face))
    if not facets:
        raise ParseError("no facets given", rows[0][0] + 1, 1)
    try:
        return SimplicialComplex(tuple(names), tuple(facets))
    except ValueError as e:
        raise ParseError(str(e), rows[-1][0], 1) from None


def format_cplx(delta: SimplicialComplex) -> str:
    lines = [" ".join(delta.vertices)]
    lines += [" ".join(delta.names(f)) for f in delta.facets]
    return "\n".join(lines) + "\n"


# -- named complexes --------------------------------------------------------

def _names(n: int) -> tuple[str, ...]:
    return tuple(f"x{k}" for k in range(1, n + 1))


def simplex(n: int) -> SimplicialComplex:
    """Full simplex on n vertices."""
    return SimplicialComplex(_names(n), (tuple(range(n)),))


def simplex_boundary(n: int) -> SimplicialComplex:
    """Boundary of the simplex on n vertices (a sphere of dimension n-2)."""
    return SimplicialComplex(_names(n), tuple(tuple(v for v in range(n) if v != k) for k in range(n)))


def discrete_points(n: int) -> SimplicialComplex:
    return SimplicialComplex(_names(n), tuple((k,) for k in range(n)))


def path_graph(n: int) -> SimplicialComplex:
    return SimplicialComplex(_names(n), tuple((k, k + 1) for k in range(n - 1)))


def octahedron_boundary() -> SimplicialComplex:
    """Boundary of the octahedron, a shellable 2-sphere; antipodes are (x1,x2), (x3,x4), (x5,x6)."""
    facets = [(a, b, c) for a in (0, 1) for b in (2, 3) for c in (4, 5)]
    return SimplicialComplex(_names(6), tuple(facets))


RP2_FACETS = ((1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6), (1, 2, 6),
              (2, 3, 5), (2, 4, 5), (2, 4, 6), (3, 4, 6), (3, 5, 6))


def rp2_six_vertex() -> SimplicialComplex:
    """The minimal 6-vertex triangulation of the real projective plane."""
    return SimplicialComplex(_names(6), tuple(tuple(v - 1 for v in f) for f in RP2_FACETS))
