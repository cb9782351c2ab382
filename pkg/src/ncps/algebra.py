"""Free unital *-algebra over the exact scalar ring.

Elements are finite sums of scalar-weighted words in abstract noncommuting
generators.  A generator is an atom ``d^alpha(g)`` or ``d^alpha(g*)``: a base
name, a multi-index of formal derivative orders (one slot per torus
direction), and a star flag.  Bases declared self-adjoint absorb the star via
``(d^alpha g)* = (-1)^{|alpha|} d^alpha(g)``.

The formal trace class keeps the cyclic normal form (every word rotated to its
lexicographically minimal position) as its representative.  Its zero test uses
the full set of linear relations every concrete torus trace satisfies:
cyclicity and vanishing on derivation images, ``tau(delta_mu(x)) = 0``; the
latter membership is decided by exact elimination over the finitely many
necklaces of the relevant grade.  Deformation phases never enter at this
level; concrete evaluation lives in :mod:`ncps.numeric`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Optional

from .scalars import DomainError, ExactScalar, RationalLike


class Generator(NamedTuple):
    base: str
    deriv: tuple[int, ...]
    star: bool = False
    selfadj: bool = True

    def order_key(self) -> tuple:
        return (self.base, self.deriv, self.star)

    def render(self) -> str:
        name = self.base + ("*" if self.star else "")
        if any(self.deriv):
            dirs = []
            for i, k in enumerate(self.deriv, start=1):
                dirs.extend([str(i)] * k)
            return f"d({','.join(dirs)})({name})"
        return name


def gen(base: str, dim: int, selfadj: bool = True) -> Generator:
    """A fresh underived generator living on the ``dim``-torus."""
    return Generator(base, (0,) * dim, False, selfadj)


Word = tuple[Generator, ...]


def _word_key(w: Word) -> tuple:
    return tuple(g.order_key() for g in w)


def _min_rotation(w: Word) -> Word:
    if len(w) < 2:
        return w
    best = w
    best_key = _word_key(w)
    for i in range(1, len(w)):
        rot = w[i:] + w[:i]
        key = _word_key(rot)
        if key < best_key:
            best, best_key = rot, key
    return best


def _render_word(w: Word) -> str:
    if not w:
        return "1"
    parts: list[str] = []
    i = 0
    while i < len(w):
        j = i
        while j < len(w) and w[j] == w[i]:
            j += 1
        txt = w[i].render()
        if j - i > 1:
            txt += f"^{j - i}"
        parts.append(txt)
        i = j
    return "[" + " . ".join(parts) + "]"


class AlgebraElement:
    """Finite sum of scalar-weighted words; immutable, zero-free term map."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[dict[Word, ExactScalar]] = None):
        clean: dict[Word, ExactScalar] = {}
        if terms:
            for w, s in terms.items():
                if not s.is_zero():
                    clean[w] = s
        self._terms = clean

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> "AlgebraElement":
        return cls({})

    @classmethod
    def scalar(cls, s: ExactScalar) -> "AlgebraElement":
        return cls({(): s})

    @classmethod
    def unit(cls) -> "AlgebraElement":
        return cls.scalar(ExactScalar.one())

    @classmethod
    def rational(cls, re: RationalLike, im: RationalLike = 0) -> "AlgebraElement":
        return cls.scalar(ExactScalar.rational(re, im))

    @classmethod
    def generator(cls, g: Generator) -> "AlgebraElement":
        return cls({(g,): ExactScalar.one()})

    # -- ring structure -------------------------------------------------------

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        out = dict(self._terms)
        for w, s in other._terms.items():
            if w in out:
                s = out[w] + s
                if s.is_zero():
                    del out[w]
                    continue
            out[w] = s
        return AlgebraElement(out)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement({w: -s for w, s in self._terms.items()})

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + (-other)

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        out: dict[Word, ExactScalar] = {}
        for w1, s1 in self._terms.items():
            for w2, s2 in other._terms.items():
                s = s1 * s2
                if s.is_zero():
                    continue
                w = w1 + w2
                if w in out:
                    s = out[w] + s
                    if s.is_zero():
                        del out[w]
                        continue
                out[w] = s
        return AlgebraElement(out)

    def scale(self, s: ExactScalar) -> "AlgebraElement":
        if s.is_zero():
            return AlgebraElement.zero()
        out = {}
        for w, c in self._terms.items():
            v = c * s
            if not v.is_zero():
                out[w] = v
        return AlgebraElement(out)

    def scale_rational(self, q: RationalLike) -> "AlgebraElement":
        q = Fraction(q)
        if q == 0:
            return AlgebraElement.zero()
        return AlgebraElement({w: s.scale(q) for w, s in self._terms.items()})

    def power(self, k: int) -> "AlgebraElement":
        if k < 0:
            raise DomainError("negative powers are not defined in the free algebra")
        out = AlgebraElement.unit()
        for _ in range(k):
            out = out * self
        return out

    # -- star and derivations ------------------------------------------------

    def adjoint(self) -> "AlgebraElement":
        out = AlgebraElement.zero()
        for w, s in self._terms.items():
            sign = 1
            rev: list[Generator] = []
            for g in reversed(w):
                if sum(g.deriv) % 2:
                    sign = -sign
                rev.append(g if g.selfadj else g._replace(star=not g.star))
            coeff = s.conjugate()
            if sign < 0:
                coeff = -coeff
            out = out + AlgebraElement({tuple(rev): coeff})
        return out

    def delta(self, mu: int) -> "AlgebraElement":
        """Formal derivation in direction ``mu`` (1-based), by the Leibniz rule."""
        out: dict[Word, ExactScalar] = {}
        for w, s in self._terms.items():
            for i, g in enumerate(w):
                if mu < 1 or mu > len(g.deriv):
                    raise DomainError(f"direction {mu} out of range for {g}")
                d = list(g.deriv)
                d[mu - 1] += 1
                nw = w[:i] + (g._replace(deriv=tuple(d)),) + w[i + 1 :]
                if nw in out:
                    v = out[nw] + s
                    if v.is_zero():
                        del out[nw]
                        continue
                    out[nw] = v
                else:
                    out[nw] = s
        return AlgebraElement(out)

    # -- grading and filtering -------------------------------------------------

    def is_zero(self) -> bool:
        return not self._terms

    def terms(self) -> Iterator[tuple[Word, ExactScalar]]:
        return iter(sorted(self._terms.items(), key=lambda kv: _word_key(kv[0])))

    def t_truncate(self, m: int) -> "AlgebraElement":
        return AlgebraElement({w: s.truncate_t(m) for w, s in self._terms.items()})

    def t_grade(self, j: int) -> "AlgebraElement":
        return AlgebraElement({w: s.t_grade(j) for w, s in self._terms.items()})

    def max_t_power(self) -> int:
        return max((s.max_t_power() for s in self._terms.values()), default=0)

    def is_t_nilpotent(self) -> bool:
        """True when every term carries a strictly positive t grade."""
        return all((s.min_t_power() or 0) >= 1 for s in self._terms.values())

    def t_cap_min(self) -> Optional[int]:
        """Tightest t cap carried by any coefficient, or None if uncapped."""
        caps = [s.t_cap for s in self._terms.values() if s.t_cap is not None]
        return min(caps) if caps else None

    def base_degree(self, bases: Iterable[str], word: Word) -> int:
        names = set(bases)
        return sum(1 for g in word if g.base in names)

    def filter_base_degree(self, bases: Iterable[str], cap: int) -> "AlgebraElement":
        """Drop words containing more than ``cap`` letters from ``bases``."""
        names = set(bases)
        return AlgebraElement(
            {
                w: s
                for w, s in self._terms.items()
                if sum(1 for g in w if g.base in names) <= cap
            }
        )

    def unit_coefficient(self) -> ExactScalar:
        return self._terms.get((), ExactScalar.zero())

    def is_scalar(self) -> bool:
        return all(w == () for w in self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset((w, s) for w, s in self._terms.items()))

    def render(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for w, s in self.terms():
            stxt = s.render()
            wtxt = _render_word(w)
            if stxt == "1":
                parts.append(wtxt)
            elif w == ():
                parts.append(f"({stxt})" if " " in stxt else stxt)
            else:
                parts.append(f"({stxt})*{wtxt}")
        return " + ".join(parts)

    __str__ = render

    def __repr__(self) -> str:
        return f"AlgebraElement({self.render()})"


# -- module-level operation names ---------------------------------------------


def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a * b


def adjoint(a: AlgebraElement) -> AlgebraElement:
    return a.adjoint()


def delta_derive(mu: int, a: AlgebraElement) -> AlgebraElement:
    return a.delta(mu)


@dataclass(frozen=True, eq=False)
class TauClass:
    """Trace class of an element.

    The representative is the cyclic normal form (every word rotated to its
    lexicographically minimal position).  The zero test works in the full
    quotient that any concrete torus trace satisfies: cyclicity together with
    vanishing on derivations, ``tau(delta_mu(x)) = 0``; the latter is decided
    by an exact membership test in the span of derivation images.
    """

    representative: AlgebraElement

    def is_zero(self) -> bool:
        return _tau_zero(self.representative)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TauClass):
            return NotImplemented
        return _tau_zero(self.representative - other.representative)

    def __hash__(self) -> int:
        return hash(type(self))

    def t_grade(self, j: int) -> "TauClass":
        return TauClass(self.representative.t_grade(j))

    def scale_rational(self, q: RationalLike) -> "TauClass":
        return TauClass(self.representative.scale_rational(q))

    def __add__(self, other: "TauClass") -> "TauClass":
        return TauClass(self.representative + other.representative)

    def __neg__(self) -> "TauClass":
        return TauClass(-self.representative)

    def render(self) -> str:
        return self.representative.render()

    __str__ = render


def tau_class(a: AlgebraElement) -> TauClass:
    """Rotate every word to its minimal cyclic form and recombine."""
    out = AlgebraElement.zero()
    for w, s in a._terms.items():
        out = out + AlgebraElement({_min_rotation(w): s})
    return TauClass(out)


def _grade_key(w: Word) -> tuple:
    """Invariant of a necklace under derivation moves: base letters with their
    star data (sorted) and the total derivative count."""
    return (
        tuple(sorted((g.base, g.star, g.selfadj) for g in w)),
        sum(sum(g.deriv) for g in w),
    )


def _delta_column(y: Word, mu: int) -> dict[Word, Fraction]:
    """Cyclic normal form of ``delta_mu`` applied to a necklace, with
    rational multiplicities."""
    out: dict[Word, Fraction] = {}
    for i, g in enumerate(y):
        d = list(g.deriv)
        d[mu - 1] += 1
        w = _min_rotation(y[:i] + (g._replace(deriv=tuple(d)),) + y[i + 1 :])
        out[w] = out.get(w, Fraction(0)) + 1
    return {w: c for w, c in out.items() if c}


def _tau_zero(a: AlgebraElement) -> bool:
    rep = AlgebraElement.zero()
    for w, s in a._terms.items():
        rep = rep + AlgebraElement({_min_rotation(w): s})
    if rep.is_zero():
        return True
    groups: dict[tuple, dict[Word, ExactScalar]] = {}
    for w, s in rep._terms.items():
        groups.setdefault(_grade_key(w), {})[w] = s
    return all(_group_in_delta_span(terms) for terms in groups.values())


def _group_in_delta_span(terms: dict[Word, ExactScalar]) -> bool:
    """Membership of a graded slice in the span of derivation images."""
    total_deriv = _grade_key(next(iter(terms)))[1]
    if total_deriv == 0:
        return False  # no derivatives to move; the cyclic form is faithful
    dims = {len(g.deriv) for w in terms for g in w}
    if len(dims) != 1:
        return False
    n = dims.pop()

    # closure: peel a derivative off any reachable necklace, collect sources
    # and every necklace their images touch
    sources: set[Word] = set()
    necklaces: set[Word] = set(terms)
    frontier = set(terms)
    columns: list[dict[Word, Fraction]] = []
    while frontier:
        new_neck: set[Word] = set()
        for w in frontier:
            for i, g in enumerate(w):
                for mu in range(1, n + 1):
                    if g.deriv[mu - 1] == 0:
                        continue
                    d = list(g.deriv)
                    d[mu - 1] -= 1
                    y = _min_rotation(w[:i] + (g._replace(deriv=tuple(d)),) + w[i + 1 :])
                    if y in sources:
                        continue
                    sources.add(y)
                    for nu in range(1, n + 1):
                        col = _delta_column(y, nu)
                        if col:
                            columns.append(col)
                            for neck in col:
                                if neck not in necklaces:
                                    necklaces.add(neck)
                                    new_neck.add(neck)
        frontier = new_neck

    index = {w: i for i, w in enumerate(sorted(necklaces, key=_word_key))}
    mat = [[Fraction(0)] * len(columns) for _ in index]
    for j, col in enumerate(columns):
        for w, c in col.items():
            mat[index[w]][j] = c

    # target vectors, one rational channel per (pi power, t grade, re/im)
    channels: dict[tuple, list[Fraction]] = {}
    for w, s in terms.items():
        for (p, jg), (re, im) in s._terms.items():
            for tag, val in (("re", re), ("im", im)):
                if val:
                    channels.setdefault((p, jg, tag), [Fraction(0)] * len(index))[
                        index[w]
                    ] = val
    targets = list(channels.values())

    # eliminate: reduce [mat | targets] and demand zero residual targets
    rows, cols = len(index), len(columns)
    aug = [mat[i] + [tv[i] for tv in targets] for i in range(rows)]
    pivot_row = 0
    for c in range(cols):
        pr = next((r for r in range(pivot_row, rows) if aug[r][c] != 0), None)
        if pr is None:
            continue
        aug[pivot_row], aug[pr] = aug[pr], aug[pivot_row]
        pv = aug[pivot_row][c]
        aug[pivot_row] = [x / pv for x in aug[pivot_row]]
        for r in range(rows):
            if r != pivot_row and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[pivot_row])]
        pivot_row += 1
        if pivot_row == rows:
            break
    for r in range(pivot_row, rows):
        if any(aug[r][cols + k] != 0 for k in range(len(targets))):
            return False
    return True


def exp_expand(base: Generator, c: RationalLike, m: int) -> AlgebraElement:
    """Order-``m`` expansion of ``exp(c * t * base)`` in the nilpotent grade.

    The result carries ``t_cap = m`` so that subsequent products stay
    truncated at the same order.
    """
    if any(base.deriv) or base.star:
        raise DomainError("exponentials are declared on underived base generators")
    c = Fraction(c)
    out = AlgebraElement.scalar(ExactScalar.one(t_cap=m))
    g = AlgebraElement.generator(base)
    for j in range(1, m + 1):
        coeff = ExactScalar.t_power(j, c**j / math.factorial(j), t_cap=m)
        out = out + g.power(j).scale(coeff)
    return out


# -- perturbed units -----------------------------------------------------------


def _split_unit(a: AlgebraElement) -> tuple[Fraction, AlgebraElement]:
    """Write ``a = c*1 + nil`` with c rational and nil t-nilpotent, or raise."""
    unit = a.unit_coefficient()
    c_re, c_im = unit.t_grade(0).rational_part()
    grade0 = a.t_grade(0)
    if c_im != 0 or not (grade0 - AlgebraElement.rational(c_re)).is_zero():
        raise DomainError(
            "t-degree-zero part is not a rational multiple of the unit: "
            + a.render()
        )
    nil = a - AlgebraElement.rational(c_re)
    return c_re, nil


def invert_perturbed_unit(a: AlgebraElement) -> AlgebraElement:
    """Inverse of ``c*1 + nil`` by a finite Neumann series in the nilpotent part."""
    c, nil = _split_unit(a)
    if c == 0:
        raise DomainError("unit part vanishes; element is not invertible")
    x = nil.scale_rational(Fraction(1, 1) / c)
    out = AlgebraElement.unit()
    power = AlgebraElement.unit()
    k = 0
    while True:
        power = power * x
        if power.is_zero():
            break
        k += 1
        if k > 64:
            raise DomainError("perturbation is not nilpotent")
        out = out + power.scale_rational(Fraction(-1) ** k)
    return out.scale_rational(Fraction(1, 1) / c)


def sqrt_perturbed_unit(a: AlgebraElement) -> AlgebraElement:
    """Square root of ``1 + nil`` by the binomial series in the nilpotent part."""
    c, nil = _split_unit(a)
    if c != 1:
        raise DomainError("square root requires unit part exactly 1")
    out = AlgebraElement.unit()
    power = AlgebraElement.unit()
    coeff = Fraction(1)
    k = 0
    while True:
        power = power * nil
        if power.is_zero():
            break
        k += 1
        if k > 64:
            raise DomainError("perturbation is not nilpotent")
        coeff *= Fraction(3 - 2 * k, 2 * k)  # binom(1/2, k) recurrence
        out = out + power.scale_rational(coeff)
    return out
