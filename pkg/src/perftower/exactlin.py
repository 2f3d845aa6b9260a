"""Exact integer linear algebra: Smith normal form and homology.

Every routine works with Python integers, so entries never overflow.
Finite abelian groups are carried as presentations (generators plus a
relation matrix whose columns are relations), and homology of a bounded
complex of such groups is returned as ``(free_rank, torsion)`` pairs.

>>> d, u, v = smith_normal_form(IntMatrix.from_rows([[2, 0], [0, 3]]))
>>> d.diagonal()
(1, 6)
>>> c = BoundedComplex.free([1, 1], [IntMatrix.from_rows([[2]])])
>>> homology_of_complex(c)
[(0, (2,)), (0, ())]
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ComplexNotComposable, NotAComplex


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative matrix shape")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entry count does not match shape")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> IntMatrix:
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise ValueError("ragged rows")
        return cls(len(rows), cols, tuple(int(x) for r in rows for x in r))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> IntMatrix:
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    @classmethod
    def diag(cls, values: Sequence[int], rows: int | None = None, cols: int | None = None) -> IntMatrix:
        rows = len(values) if rows is None else rows
        cols = len(values) if cols is None else cols
        out = [[0] * cols for _ in range(rows)]
        for k, x in enumerate(values):
            out[k][k] = x
        return cls.from_rows(out, cols)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]

    def to_rows(self) -> list[list[int]]:
        c = self.cols
        return [list(self.entries[i * c:(i + 1) * c]) for i in range(self.rows)]

    def column(self, j: int) -> list[int]:
        return [self.entries[i * self.cols + j] for i in range(self.rows)]

    def transpose(self) -> IntMatrix:
        return IntMatrix.from_rows([self.column(j) for j in range(self.cols)], self.rows)

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if self.cols != other.rows:
            raise ComplexNotComposable(
                f"cannot compose {self.rows}x{self.cols} with {other.rows}x{other.cols}")
        a = self.to_rows()
        b = other.to_rows()
        out = [[0] * other.cols for _ in range(self.rows)]
        for i, row in enumerate(a):
            acc = out[i]
            for k, x in enumerate(row):
                if x:
                    for j, y in enumerate(b[k]):
                        if y:
                            acc[j] += x * y
        return IntMatrix.from_rows(out, other.cols)

    def hstack(self, other: IntMatrix) -> IntMatrix:
        if self.rows != other.rows:
            raise ComplexNotComposable("row counts differ")
        a, b = self.to_rows(), other.to_rows()
        return IntMatrix.from_rows([x + y for x, y in zip(a, b)], self.cols + other.cols)

    def is_zero(self) -> bool:
        return not any(self.entries)

    def diagonal(self) -> tuple[int, ...]:
        return tuple(self[k, k] for k in range(min(self.rows, self.cols)))

    def det(self) -> int:
        """Determinant by fraction-free (Bareiss) elimination."""
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        a = self.to_rows()
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if a[i][k]), None)
                if swap is None:
                    return 0
                a[k], a[swap] = a[swap], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1] if n else 1


def _identity_rows(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _find_pivot(a, t, m, n):
    best, where = 0, None
    for i in range(t, m):
        row = a[i]
        for j in range(t, n):
            x = row[j]
            if x:
                ax = x if x > 0 else -x
                if ax == 1:
                    return i, j
                if where is None or ax < best:
                    best, where = ax, (i, j)
    return where


class _SNF:
    """In-place Smith reduction of a list-of-rows matrix.

    Tracks U, V and optionally U^{-1} so that U*M*V = D.
    """

    def __init__(self, rows, m, n, track=True, inverse=False):
        self.a = [list(r) for r in rows]
        self.m, self.n = m, n
        self.track = track
        self.u = _identity_rows(m) if track else None
        self.v = _identity_rows(n) if track else None
        self.uinv = _identity_rows(m) if inverse else None
        self.rank = 0
        self._run()

    def _swap_rows(self, i, j):
        if i == j:
            return
        a = self.a
        a[i], a[j] = a[j], a[i]
        if self.track:
            self.u[i], self.u[j] = self.u[j], self.u[i]
        if self.uinv is not None:
            for r in self.uinv:
                r[i], r[j] = r[j], r[i]

    def _swap_cols(self, i, j):
        if i == j:
            return
        for r in self.a:
            r[i], r[j] = r[j], r[i]
        if self.track:
            for r in self.v:
                r[i], r[j] = r[j], r[i]

    def _add_row(self, dst, src, q):
        # row_dst += q * row_src
        rs, rd = self.a[src], self.a[dst]
        for k, x in enumerate(rs):
            if x:
                rd[k] += q * x
        if self.track:
            us, ud = self.u[src], self.u[dst]
            for k, x in enumerate(us):
                if x:
                    ud[k] += q * x
        if self.uinv is not None:
            for r in self.uinv:
                if r[dst]:
                    r[src] -= q * r[dst]

    def _add_col(self, dst, src, q):
        # col_dst += q * col_src
        for r in self.a:
            x = r[src]
            if x:
                r[dst] += q * x
        if self.track:
            for r in self.v:
                x = r[src]
                if x:
                    r[dst] += q * x

    def _run(self):
        a, m, n = self.a, self.m, self.n
        t = 0
        while t < min(m, n):
            piv = _find_pivot(a, t, m, n)
            if piv is None:
                break
            self._swap_rows(t, piv[0])
            self._swap_cols(t, piv[1])
            while True:
                p = a[t][t]
                clean = True
                for i in range(t + 1, m):
                    x = a[i][t]
                    if x:
                        self._add_row(i, t, -(x // p))
                        if a[i][t]:
                            clean = False
                row_t = a[t]
                for j in range(t + 1, n):
                    x = row_t[j]
                    if x:
                        self._add_col(j, t, -(x // p))
                        if row_t[j]:
                            clean = False
                if clean:
                    bad = None
                    for i in range(t + 1, m):
                        row = a[i]
                        for j in range(t + 1, n):
                            if row[j] % p:
                                bad = i
                                break
                        if bad is not None:
                            break
                    if bad is None:
                        break
                    self._add_row(t, bad, 1)
                    continue
                piv = _find_pivot(a, t, m, n)
                self._swap_rows(t, piv[0])
                self._swap_cols(t, piv[1])
            if a[t][t] < 0:
                a[t] = [-x for x in a[t]]
                if self.track:
                    self.u[t] = [-x for x in self.u[t]]
                if self.uinv is not None:
                    for r in self.uinv:
                        r[t] = -r[t]
            t += 1
        self.rank = t

    def diagonal(self):
        return [self.a[k][k] for k in range(self.rank)]


def smith_normal_form(M: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return ``(D, U, V)`` with ``U @ M @ V == D`` and U, V unimodular.

    The pivot at each stage is the entry of smallest absolute value in the
    remaining block, ties going to the lowest (row, col).
    """
    s = _SNF(M.to_rows(), M.rows, M.cols)
    return (IntMatrix.from_rows(s.a, M.cols), IntMatrix.from_rows(s.u, M.rows),
            IntMatrix.from_rows(s.v, M.cols))


def invariant_factors(M: IntMatrix) -> list[int]:
    """Nonzero diagonal of the Smith form of M."""
    return _SNF(M.to_rows(), M.rows, M.cols, track=False).diagonal()


def rank_mod_p(rows: Sequence[Sequence[int]], p: int) -> int:
    """Rank over F_p of a list-of-rows integer matrix."""
    a = [[x % p for x in r] for r in rows if any(x % p for x in r)]
    rank = 0
    ncols = len(a[0]) if a else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        prow = a[rank]
        inv = pow(prow[c], -1, p)
        if inv != 1:
            prow = a[rank] = [(x * inv) % p for x in prow]
        for i in range(rank + 1, len(a)):
            f = a[i][c]
            if f:
                ri = a[i]
                a[i] = [(x - f * y) % p for x, y in zip(ri, prow)]
        rank += 1
    return rank


def _apply(rows, vec):
    return [sum(x * y for x, y in zip(r, vec) if x and y) for r in rows]


class _Lattice:
    """Image lattice of a matrix, with a membership test."""

    def __init__(self, gens: IntMatrix):
        self.dim = gens.rows
        self.snf = _SNF(gens.to_rows(), gens.rows, gens.cols)
        self.d = self.snf.diagonal()

    def contains(self, vec) -> bool:
        w = _apply(self.snf.u, vec)
        r = len(self.d)
        if any(w[r:]):
            return False
        return all(x % dk == 0 for x, dk in zip(w, self.d))


def _lattice_basis(vectors: list[list[int]], dim: int) -> list[list[int]]:
    """A Z-basis of the span of the given vectors (each of length dim)."""
    if not vectors:
        return []
    rows = [[v[i] for v in vectors] for i in range(dim)]
    s = _SNF(rows, dim, len(vectors), inverse=True)
    basis = []
    for k, dk in enumerate(s.diagonal()):
        basis.append([s.uinv[i][k] * dk for i in range(dim)])
    return basis


@dataclass(frozen=True)
class FinAbPresentation:
    num_generators: int
    relations: IntMatrix

    def __post_init__(self):
        if self.relations.rows != self.num_generators:
            raise ComplexNotComposable("relation matrix must have one row per generator")

    @classmethod
    def free(cls, n: int) -> FinAbPresentation:
        return cls(n, IntMatrix.zeros(n, 0))

    @classmethod
    def cyclic(cls, orders: Sequence[int | None]) -> FinAbPresentation:
        """Direct sum of cyclic groups; ``None`` or ``0`` means a copy of Z."""
        n = len(orders)
        finite = [k for k, o in enumerate(orders) if o]
        rows = [[0] * len(finite) for _ in range(n)]
        for c, k in enumerate(finite):
            rows[k][c] = orders[k]
        return cls(n, IntMatrix.from_rows(rows, len(finite)))

    def with_modulus(self, q: int) -> FinAbPresentation:
        """Tensor with Z/q by appending q times the identity as relations."""
        return FinAbPresentation(self.num_generators,
                                 self.relations.hstack(IntMatrix.diag([q] * self.num_generators)))

    def invariants(self) -> tuple[int, tuple[int, ...]]:
        d = invariant_factors(self.relations)
        free = self.num_generators - len(d)
        return free, tuple(x for x in d if x != 1)

    def order(self) -> int | None:
        free, tors = self.invariants()
        if free:
            return None
        out = 1
        for x in tors:
            out *= x
        return out

    def is_isomorphic(self, other: FinAbPresentation) -> bool:
        return self.invariants() == other.invariants()


@dataclass(frozen=True)
class BoundedComplex:
    """Chain complex C_0 <- C_1 <- ... <- C_top.

    ``differentials[k]`` is d_{k+1}: C_{k+1} -> C_k, a matrix with one row
    per generator of C_k and one column per generator of C_{k+1}.
    """

    modules: tuple[FinAbPresentation, ...]
    differentials: tuple[IntMatrix, ...]

    def __post_init__(self):
        if len(self.differentials) != max(len(self.modules) - 1, 0):
            raise ComplexNotComposable("need one differential between consecutive modules")
        for k, d in enumerate(self.differentials):
            if d.rows != self.modules[k].num_generators or d.cols != self.modules[k + 1].num_generators:
                raise ComplexNotComposable(f"d_{k + 1} has shape {d.rows}x{d.cols}")

    @classmethod
    def free(cls, ranks: Sequence[int], differentials: Iterable[IntMatrix]) -> BoundedComplex:
        return cls(tuple(FinAbPresentation.free(r) for r in ranks), tuple(differentials))

    def with_modulus(self, q: int) -> BoundedComplex:
        return BoundedComplex(tuple(m.with_modulus(q) for m in self.modules), self.differentials)

    def check(self) -> None:
        """Raise NotAComplex unless each d is well defined and d∘d = 0."""
        lattices = [_Lattice(m.relations) for m in self.modules]
        for k, d in enumerate(self.differentials):
            rel = self.modules[k + 1].relations
            if rel.cols:
                image = d @ rel
                for j in range(image.cols):
                    if not lattices[k].contains(image.column(j)):
                        raise NotAComplex(f"d_{k + 1} does not respect relations (column {j})")
        for k in range(1, len(self.differentials)):
            dd = self.differentials[k - 1] @ self.differentials[k]
            for j in range(dd.cols):
                col = dd.column(j)
                if any(col) and not lattices[k - 1].contains(col):
                    raise NotAComplex(f"d_{k} o d_{k + 1} is nonzero on generator {j}")


def _cycles_basis(d: IntMatrix | None, n: int, target_rel: IntMatrix | None) -> list[list[int]]:
    if d is None:
        return [[int(i == j) for i in range(n)] for j in range(n)]
    m = d if target_rel is None or target_rel.cols == 0 else d.hstack(target_rel)
    s = _SNF(m.to_rows(), m.rows, m.cols)
    kernel = [[s.v[i][c] for i in range(n)] for c in range(s.rank, m.cols)]
    if m is d:
        return kernel
    return _lattice_basis(kernel, n)


def _quotient_invariants(basis: list[list[int]], gens: list[list[int]], n: int) -> tuple[int, tuple[int, ...]]:
    k = len(basis)
    if k == 0:
        return 0, ()
    rows = [[b[i] for b in basis] for i in range(n)]
    s = _SNF(rows, n, k)
    dk = s.diagonal()
    coords = []
    for g in gens:
        w = _apply(s.u, g)
        if any(w[k:]):
            raise NotAComplex("boundary not contained in cycles")
        y = []
        for x, dd in zip(w, dk):
            if x % dd:
                raise NotAComplex("boundary not contained in cycles")
            y.append(x // dd)
        coords.append([sum(s.v[i][j] * y[j] for j in range(k)) for i in range(k)])
    rel = [[c[i] for c in coords] for i in range(k)]
    diag = _SNF(rel, k, len(coords), track=False).diagonal() if coords else []
    return k - len(diag), tuple(x for x in diag if x != 1)


def homology_of_complex(C: BoundedComplex, modulus: int | None = None) -> list[tuple[int, tuple[int, ...]]]:
    """H_q = ker d_q / im d_{q+1} for each q, as (free_rank, torsion factors).

    With ``modulus`` the complex is first tensored with Z/modulus.
    """
    if modulus is not None:
        C = C.with_modulus(modulus)
    C.check()
    out = []
    top = len(C.modules) - 1
    for q, mod in enumerate(C.modules):
        n = mod.num_generators
        d_out = C.differentials[q - 1] if q > 0 else None
        target_rel = C.modules[q - 1].relations if q > 0 else None
        basis = _cycles_basis(d_out, n, target_rel)
        gens = [mod.relations.column(j) for j in range(mod.relations.cols)]
        if q < top:
            d_in = C.differentials[q]
            gens += [d_in.column(j) for j in range(d_in.cols)]
        gens = [g for g in gens if any(g)]
        out.append(_quotient_invariants(basis, gens, n))
    return out


def ranks_mod_p(C: BoundedComplex, p: int) -> list[int]:
    """Dimensions of H_q(C ⊗ F_p) for a complex of free modules."""
    if any(m.relations.cols for m in C.modules):
        raise ValueError("ranks_mod_p expects free modules")
    rk = [rank_mod_p(d.to_rows(), p) for d in C.differentials]
    out = []
    for q, m in enumerate(C.modules):
        r_out = rk[q - 1] if q > 0 else 0
        r_in = rk[q] if q < len(rk) else 0
        out.append(m.num_generators - r_out - r_in)
    return out
