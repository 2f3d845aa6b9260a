"""Arithmetic in the level rings of a monomial tower.

A level-i ring is (Z/p^N)[P, X_2, ..., X_n] / (P^(p^i) - p, I) where P
stands for p^(1/p^i), each X_j for x_j^(1/p^i), and I is generated by
p-monomials P^a X^alpha.  Because the coefficient ring Z_p[P] is a
discrete valuation ring with uniformizer P, an element is determined by
one coefficient per x-exponent alpha, taken modulo P^m(alpha), where
m(alpha) is the least P-exponent of a generator whose x-part divides
alpha (capped at N*p^i, the precision).

In characteristic p ("pure-p") there is no P; coefficients live in F_p.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .errors import SpecMismatch, UnitIdeal, VariableMismatch, NoPillar

MIXED = "mixed"
PURE = "pure-p"
P_SYMBOL = "P"


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


def deglex_key(alpha: Sequence[int]) -> tuple:
    """Sort key: total degree first, then the last variable dominates."""
    return (sum(alpha), tuple(reversed(alpha)))


def monomials_up_to(nvars: int, degree: int) -> list[tuple[int, ...]]:
    """All exponent vectors of total degree <= degree, in deglex order."""
    out = []

    def rec(prefix, left, k):
        if k == nvars:
            out.append(tuple(prefix))
            return
        for e in range(left + 1):
            prefix.append(e)
            rec(prefix, left - e, k + 1)
            prefix.pop()

    rec([], degree, 0)
    out.sort(key=deglex_key)
    return out


def leq(alpha: Sequence[int], beta: Sequence[int]) -> bool:
    return all(a <= b for a, b in zip(alpha, beta))


@dataclass(frozen=True, order=True)
class PMonomial:
    p_exp: int
    x_exps: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "x_exps", tuple(int(e) for e in self.x_exps))
        if self.p_exp < 0 or any(e < 0 for e in self.x_exps):
            raise ValueError("exponents must be nonnegative")

    def divides(self, other: PMonomial) -> bool:
        return self.p_exp <= other.p_exp and leq(self.x_exps, other.x_exps)

    def key(self) -> tuple:
        full = (self.p_exp,) + self.x_exps
        return (sum(full), tuple(reversed(full)))

    def to_dict(self) -> dict:
        return {"p_exp": self.p_exp, "x_exps": list(self.x_exps)}


def minimal_monomials(gens: Iterable[PMonomial]) -> tuple[PMonomial, ...]:
    gens = sorted(set(gens), key=PMonomial.key)
    keep: list[PMonomial] = []
    for g in gens:
        if not any(h.divides(g) for h in keep):
            keep.append(g)
    return tuple(keep)


@dataclass(frozen=True)
class LevelRingSpec:
    prime: int
    precision: int
    level: int
    characteristic: str
    variables: tuple[str, ...]
    generators: tuple[PMonomial, ...] = ()

    def __post_init__(self):
        p = self.prime
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        if self.level < 0 or self.precision < 1:
            raise ValueError("level must be >= 0 and precision >= 1")
        if self.characteristic not in (MIXED, PURE):
            raise ValueError(f"unknown characteristic {self.characteristic!r}")
        names = tuple(self.variables)
        if len(set(names)) != len(names):
            raise VariableMismatch("repeated variable name")
        if self.characteristic == MIXED and P_SYMBOL in names:
            raise VariableMismatch(f"{P_SYMBOL!r} is reserved for p^(1/p^i)")
        if self.characteristic == PURE and self.precision != 1:
            raise ValueError("characteristic-p rings have precision 1")
        gens = []
        for g in self.generators:
            if not isinstance(g, PMonomial):
                g = PMonomial(g["p_exp"], tuple(g["x_exps"])) if isinstance(g, Mapping) else PMonomial(*g)
            if len(g.x_exps) != len(names):
                raise VariableMismatch("generator length does not match variables")
            if self.characteristic == PURE and g.p_exp:
                raise VariableMismatch("characteristic-p generators cannot involve P")
            if g.p_exp == 0 and not any(g.x_exps):
                raise UnitIdeal("a generator equal to 1 gives the zero ring")
            gens.append(g)
        gens = minimal_monomials(gens)
        # a generator equal to a bare variable removes that variable
        killed = {g.x_exps.index(1) for g in gens
                  if g.p_exp == 0 and sum(g.x_exps) == 1}
        if killed:
            keep = [k for k in range(len(names)) if k not in killed]
            names = tuple(names[k] for k in keep)
            gens = tuple(PMonomial(g.p_exp, tuple(g.x_exps[k] for k in keep)) for g in gens
                         if not any(g.x_exps[k] for k in killed))
        object.__setattr__(self, "variables", names)
        object.__setattr__(self, "generators", gens)

    # -- shape -----------------------------------------------------------
    @property
    def nvars(self) -> int:
        return len(self.variables)

    @property
    def is_mixed(self) -> bool:
        return self.characteristic == MIXED

    @property
    def coeff_length(self) -> int:
        """Rank of the coefficient ring over Z_p (p^i mixed, 1 pure)."""
        return self.prime ** self.level if self.is_mixed else 1

    @property
    def cap(self) -> int:
        return self.precision * self.coeff_length

    def at_level(self, level: int) -> LevelRingSpec:
        return replace(self, level=level)

    # -- monomial combinatorics -------------------------------------------
    def m(self, alpha: Sequence[int]) -> int:
        """Exponent of P killing the coefficient of X^alpha (capped)."""
        best = self.cap
        for g in self.generators:
            if g.p_exp < best and leq(g.x_exps, alpha):
                best = g.p_exp
        return best

    def divides_some(self, alpha: Sequence[int]) -> bool:
        return any(leq(g.x_exps, alpha) for g in self.generators)

    def is_zero_monomial(self, a: int, alpha: Sequence[int]) -> bool:
        return a >= self.m(alpha)

    def fiber_order(self, alpha: Sequence[int]) -> int:
        """Number of P-powers surviving at X^alpha modulo I_0 = (p)."""
        m = self.m(alpha)
        return min(m, self.coeff_length) if self.is_mixed else m

    def window(self, degree: int) -> list[tuple[int, ...]]:
        return monomials_up_to(self.nvars, degree)

    def index_of(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise VariableMismatch(f"unknown variable {name!r}") from None

    # -- elements --------------------------------------------------------
    def element(self, raw: Iterable) -> RingElement:
        return normal_form(self, raw)

    def zero(self) -> RingElement:
        return RingElement(self, ())

    def one(self) -> RingElement:
        return self.monomial(0, (0,) * self.nvars)

    def constant(self, c: int) -> RingElement:
        return normal_form(self, [(c, 0, (0,) * self.nvars)])

    def monomial(self, a: int, alpha: Sequence[int], c: int = 1) -> RingElement:
        return normal_form(self, [(c, a, tuple(alpha))])

    def var(self, name: str) -> RingElement:
        if name == P_SYMBOL and self.is_mixed:
            return self.monomial(1, (0,) * self.nvars)
        alpha = [0] * self.nvars
        alpha[self.index_of(name)] = 1
        return self.monomial(0, alpha)

    def generator_elements(self) -> list[RingElement]:
        return [self.monomial(g.p_exp, g.x_exps) for g in self.generators]

    # -- display / serialization ------------------------------------------
    def monomial_str(self, a: int, alpha: Sequence[int]) -> str:
        parts = []
        if a:
            sym = P_SYMBOL if self.level else "p"
            parts.append(sym if a == 1 else f"{sym}^{a}")
        for name, e in zip(self.variables, alpha):
            if e:
                parts.append(name if e == 1 else f"{name}^{e}")
        return "*".join(parts) or "1"

    def to_dict(self) -> dict:
        return {
            "prime": self.prime,
            "precision": self.precision,
            "level": self.level,
            "characteristic": self.characteristic,
            "variables": list(self.variables),
            "generators": [g.to_dict() for g in self.generators],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> LevelRingSpec:
        missing = [k for k in ("prime", "variables") if k not in d]
        if missing:
            raise KeyError(f"ring spec is missing {missing}")
        char = d.get("characteristic", MIXED)
        return cls(
            prime=int(d["prime"]),
            precision=int(d.get("precision", 1 if char == PURE else 4)),
            level=int(d.get("level", 0)),
            characteristic=char,
            variables=tuple(d["variables"]),
            generators=tuple(PMonomial(int(g.get("p_exp", 0)), tuple(g["x_exps"]))
                             for g in d.get("generators", ())),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def __str__(self) -> str:
        if self.is_mixed:
            base = f"Z/{self.prime}^{self.precision}"
            if self.level:
                base += f"[{P_SYMBOL}={self.prime}^(1/{self.prime}^{self.level})]"
        else:
            base = f"F_{self.prime}"
        if self.variables:
            base += "[" + ",".join(self.variables) + "]"
        if self.generators:
            base += "/(" + ", ".join(self.monomial_str(g.p_exp, g.x_exps) for g in self.generators) + ")"
        return base


@dataclass(frozen=True)
class Window:
    """Finite truncation on which every check is exact."""

    levels: int = 3
    degree: int = 8
    precision: int = 4
    tilt_depth: int = 4

    def __post_init__(self):
        if min(self.levels, self.degree, self.precision, self.tilt_depth) < 1:
            raise ValueError("window parameters must be positive")

    def enlarged(self) -> "Window":
        return replace(self, degree=self.degree + 2, precision=self.precision + 1)

    def to_dict(self) -> dict:
        return {"L": self.levels, "D": self.degree, "N": self.precision, "m": self.tilt_depth}


def _reduce(spec: LevelRingSpec, alpha, coeffs) -> tuple[int, ...] | None:
    m = spec.m(alpha)
    if m == 0:
        return None
    L, p = spec.coeff_length, spec.prime
    out = []
    for k, c in enumerate(coeffs):
        e = -(-(m - k) // L) if m > k else 0
        out.append(c % p ** e if e else 0)
    return tuple(out) if any(out) else None


@dataclass(frozen=True)
class RingElement:
    spec: LevelRingSpec
    terms: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...] = field(default=())

    def _check(self, other: RingElement) -> None:
        if not isinstance(other, RingElement):
            raise TypeError("expected a RingElement")
        if other.spec != self.spec:
            raise SpecMismatch("elements live in different rings")

    def _coerce(self, other):
        if isinstance(other, int):
            return self.spec.constant(other)
        self._check(other)
        return other

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def as_dict(self) -> dict:
        return dict(self.terms)

    def __add__(self, other):
        other = self._coerce(other)
        acc = {a: list(c) for a, c in self.terms}
        L = self.spec.coeff_length
        for a, c in other.terms:
            cur = acc.setdefault(a, [0] * L)
            for k, x in enumerate(c):
                cur[k] += x
        return _assemble(self.spec, acc)

    __radd__ = __add__

    def __neg__(self):
        return _assemble(self.spec, {a: [-x for x in c] for a, c in self.terms})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return multiply(self, other)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = self.spec.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        spec = self.spec
        pieces = []
        for alpha, coeffs in self.terms:
            for k, c in enumerate(coeffs):
                if not c:
                    continue
                mono = spec.monomial_str(k, alpha)
                if mono == "1":
                    pieces.append(str(c))
                else:
                    pieces.append(mono if c == 1 else f"{c}*{mono}")
        return " + ".join(pieces)

    def __repr__(self) -> str:
        return f"RingElement({self})"


def _assemble(spec: LevelRingSpec, acc: Mapping) -> RingElement:
    terms = []
    for alpha, coeffs in acc.items():
        red = _reduce(spec, alpha, coeffs)
        if red is not None:
            terms.append((alpha, red))
    terms.sort(key=lambda t: deglex_key(t[0]))
    return RingElement(spec, tuple(terms))


def normal_form(spec: LevelRingSpec, raw: Iterable) -> RingElement:
    """Canonical element from a formal sum of (coeff, p_exp, exponents).

    ``exponents`` is either a tuple over ``spec.variables`` or a mapping
    from variable names to exponents.  Powers of P are carried through
    P^(p^i) = p before truncation.
    """
    L, p = spec.coeff_length, spec.prime
    acc: dict = {}
    for coeff, a, exps in raw:
        if isinstance(exps, Mapping):
            alpha = [0] * spec.nvars
            for name, e in exps.items():
                alpha[spec.index_of(name)] += e
            alpha = tuple(alpha)
        else:
            alpha = tuple(exps)
            if len(alpha) != spec.nvars:
                raise VariableMismatch("exponent vector length does not match variables")
        if a < 0 or any(e < 0 for e in alpha):
            raise ValueError("exponents must be nonnegative")
        if a and not spec.is_mixed:
            raise VariableMismatch(f"{P_SYMBOL} does not exist in characteristic p")
        q, r = divmod(a, L)
        cur = acc.setdefault(alpha, [0] * L)
        cur[r] += coeff * p ** q
    return _assemble(spec, acc)


def multiply(a: RingElement, b: RingElement) -> RingElement:
    """Normal form of a*b; both factors must share one spec."""
    if a.spec != b.spec:
        raise SpecMismatch("elements live in different rings")
    spec = a.spec
    L, p = spec.coeff_length, spec.prime
    acc: dict = {}
    for alpha, c in a.terms:
        for beta, d in b.terms:
            gamma = tuple(x + y for x, y in zip(alpha, beta))
            if spec.m(gamma) == 0:
                continue
            cur = acc.setdefault(gamma, [0] * L)
            for k, x in enumerate(c):
                if not x:
                    continue
                for l, y in enumerate(d):
                    if y:
                        s = k + l
                        if s >= L:
                            cur[s - L] += p * x * y
                        else:
                            cur[s] += x * y
    return _assemble(spec, acc)


# -- derived rings ----------------------------------------------------------

def mod_pillar(R: LevelRingSpec, which: str = "I0") -> LevelRingSpec:
    """R/I_0 R or R/I_1 R as a characteristic-p monomial ring.

    P becomes an ordinary variable named ``P`` with P^(p^i) = 0 (for I_0)
    or P^(p^(i-1)) = 0 (for I_1).
    """
    if which not in ("I0", "I1"):
        raise ValueError("which must be 'I0' or 'I1'")
    if which == "I1" and R.level == 0:
        raise NoPillar("the first pillar needs level >= 1")
    if not R.is_mixed:
        return R
    p, i = R.prime, R.level
    order = p ** i if which == "I0" else p ** (i - 1)
    gens = [PMonomial(0, (order,) + (0,) * R.nvars)]
    gens += [PMonomial(0, (g.p_exp,) + g.x_exps) for g in R.generators]
    return LevelRingSpec(p, 1, i, PURE, (P_SYMBOL,) + R.variables, tuple(gens))


@dataclass(frozen=True)
class TorsionWindow:
    """I_0-torsion monomials of degree <= D with their annihilator exponent."""

    spec: LevelRingSpec
    degree: int
    entries: tuple[tuple[tuple[int, ...], int], ...]

    def contains(self, alpha: Sequence[int]) -> bool:
        return self.spec.divides_some(alpha)

    def monomials(self) -> list[tuple[int, ...]]:
        return [a for a, _ in self.entries]


def torsion_monomials(R: LevelRingSpec, degree: int = 8) -> TorsionWindow:
    """X^alpha is I_0-torsion iff some generator's x-part divides alpha."""
    if not R.is_mixed:
        raise ValueError("torsion_monomials expects a mixed-characteristic ring")
    entries = []
    for alpha in R.window(degree):
        if R.divides_some(alpha):
            m = R.m(alpha)
            if m:
                entries.append((alpha, m))
    return TorsionWindow(R, degree, tuple(entries))


def radical_quotient(R: LevelRingSpec) -> LevelRingSpec:
    """Reduced quotient of a characteristic-p monomial ring."""
    if R.is_mixed:
        raise ValueError("radical_quotient expects a characteristic-p ring; apply mod_pillar first")
    gens = [PMonomial(0, tuple(min(e, 1) for e in g.x_exps)) for g in R.generators]
    return replace(R, generators=tuple(gens))


def torsion_free_quotient(R: LevelRingSpec) -> LevelRingSpec:
    """R modulo its I_0-torsion: every generator loses its P-part."""
    if not R.is_mixed:
        raise ValueError("torsion_free_quotient expects a mixed-characteristic ring")
    gens = [PMonomial(0, g.x_exps) for g in R.generators]
    return replace(R, generators=tuple(gens))


def is_reduced(R: LevelRingSpec) -> bool:
    """True when the characteristic-p monomial ring has no nilpotents."""
    return radical_quotient(R) == R
