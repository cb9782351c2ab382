"""Graded classical-symbol arithmetic for Dirac families on the flat torus.

A symbol is a finite collection of homogeneous components; each component is a
sum of terms

    C * xi^beta * (xi^2)^{-m/2}

with ``C`` a 2x2 matrix over the free algebra, ``beta`` a monomial multi-index
and ``m >= 0``.  The degree of a term is ``|beta| - m``.  Components carry an
exact zero test: within each parity class of ``m`` the terms are cleared to a
common denominator and the resulting polynomial numerator is reduced by the
relation ``sum_i xi_i^2 * (xi^2)^{-(m+2)/2} = (xi^2)^{-m/2}``; a component is
zero iff both reduced numerators vanish identically.

The composition law is the graded star product

    a * b  =  sum_alpha (1/alpha!) (d/dxi)^alpha a . delta^alpha b

truncated below a floor.  Inversion and square roots are solved degree by
degree; the leading components that occur here are central scalar functions
times ``1 + (nilpotent)`` and are handled by finite Neumann / binomial series,
with the square root solving the two-sided equation ``b X + X b = R``
order by order in the nilpotent grade.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Optional

from . import clifford
from .algebra import (
    AlgebraElement,
    exp_expand,
    gen,
    invert_perturbed_unit,
    sqrt_perturbed_unit,
)
from .clifford import GammaMatrix
from .scalars import DomainError, ExactScalar, RationalLike


class EllipticityShapeError(ValueError):
    """Leading component is not a central scalar power times a perturbed unit."""


class InsufficientFloorError(ValueError):
    """A computation needs homogeneous components below the computed floor."""


class FamilyError(ValueError):
    """Malformed operator-family description."""


# -- 2x2 matrices over the free algebra ------------------------------------------


class Mat2:
    __slots__ = ("e",)

    def __init__(self, rows: tuple[tuple[AlgebraElement, AlgebraElement], ...]):
        self.e = rows

    @classmethod
    def zero(cls) -> "Mat2":
        z = AlgebraElement.zero()
        return cls(((z, z), (z, z)))

    @classmethod
    def diag(cls, a: AlgebraElement) -> "Mat2":
        z = AlgebraElement.zero()
        return cls(((a, z), (z, a)))

    @classmethod
    def from_gamma(cls, g: GammaMatrix) -> "Mat2":
        return cls(
            tuple(
                tuple(AlgebraElement.scalar(v) for v in row) for row in g.entries
            )
        )

    def add(self, other: "Mat2") -> "Mat2":
        return Mat2(
            tuple(
                tuple(self.e[i][j] + other.e[i][j] for j in range(2))
                for i in range(2)
            )
        )

    def neg(self) -> "Mat2":
        return Mat2(tuple(tuple(-v for v in row) for row in self.e))

    def mul(self, other: "Mat2") -> "Mat2":
        a, b = self.e, other.e
        return Mat2(
            tuple(
                tuple(a[i][0] * b[0][j] + a[i][1] * b[1][j] for j in range(2))
                for i in range(2)
            )
        )

    def lmul(self, c: AlgebraElement) -> "Mat2":
        return Mat2(tuple(tuple(c * v for v in row) for row in self.e))

    def rmul(self, c: AlgebraElement) -> "Mat2":
        return Mat2(tuple(tuple(v * c for v in row) for row in self.e))

    def scale(self, s: ExactScalar) -> "Mat2":
        return Mat2(tuple(tuple(v.scale(s) for v in row) for row in self.e))

    def scale_rational(self, q: RationalLike) -> "Mat2":
        return Mat2(tuple(tuple(v.scale_rational(q) for v in row) for row in self.e))

    def map(self, fn: Callable[[AlgebraElement], AlgebraElement]) -> "Mat2":
        return Mat2(tuple(tuple(fn(v) for v in row) for row in self.e))

    def trace(self) -> AlgebraElement:
        return self.e[0][0] + self.e[1][1]

    def is_zero(self) -> bool:
        return all(v.is_zero() for row in self.e for v in row)

    def is_scalar(self) -> bool:
        """All entries are scalar multiples of the algebra unit."""
        return all(v.is_scalar() for row in self.e for v in row)

    def max_t_power(self) -> int:
        return max(v.max_t_power() for row in self.e for v in row)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mat2):
            return NotImplemented
        return all(
            self.e[i][j] == other.e[i][j] for i in range(2) for j in range(2)
        )

    def render(self) -> str:
        rows = ", ".join(
            "[" + ", ".join(v.render() for v in row) + "]" for row in self.e
        )
        return f"[{rows}]"

    __repr__ = render


# -- multi-index helpers ----------------------------------------------------------


@lru_cache(maxsize=None)
def multi_indices(dim: int, total: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices over ``dim`` directions with |alpha| = total."""
    if dim == 1:
        return ((total,),)
    out = []
    for first in range(total + 1):
        for rest in multi_indices(dim - 1, total - first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def _alpha_factorial(alpha: tuple[int, ...]) -> int:
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


@lru_cache(maxsize=None)
def xi2_monomials(dim: int, k: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    """Expansion of ``(xi_1^2 + ... + xi_dim^2)^k`` as (beta, coefficient) pairs."""
    out = []
    for alpha in multi_indices(dim, k):
        coeff = math.factorial(k) // _alpha_factorial(alpha)
        out.append((tuple(2 * a for a in alpha), coeff))
    return tuple(out)


TermKey = tuple[tuple[int, ...], int]  # (beta, m)


class Component:
    """Homogeneous component of fixed degree: term map (beta, m) -> matrix."""

    __slots__ = ("dim", "degree", "terms")

    def __init__(self, dim: int, degree: int, terms: Optional[dict[TermKey, Mat2]] = None):
        self.dim = dim
        self.degree = degree
        self.terms: dict[TermKey, Mat2] = {}
        if terms:
            for key, mat in terms.items():
                self.add_term(key[0], key[1], mat)

    @classmethod
    def unit(cls, dim: int) -> "Component":
        c = cls(dim, 0)
        c.add_term((0,) * dim, 0, Mat2.diag(AlgebraElement.unit()))
        return c

    def add_term(self, beta: tuple[int, ...], m: int, mat: Mat2) -> None:
        if mat.is_zero():
            return
        if m < 0:
            raise DomainError("denominator half-power must be >= 0")
        if sum(beta) - m != self.degree:
            raise DomainError(
                f"term xi^{beta} (xi^2)^{{-{m}/2}} has degree {sum(beta) - m}, "
                f"component expects {self.degree}"
            )
        key = (beta, m)
        if key in self.terms:
            s = self.terms[key].add(mat)
            if s.is_zero():
                del self.terms[key]
            else:
                self.terms[key] = s
        else:
            self.terms[key] = mat

    def is_empty(self) -> bool:
        return not self.terms

    # -- linear structure ---------------------------------------------------

    def add(self, other: "Component") -> "Component":
        if other.degree != self.degree:
            raise DomainError("cannot add components of different degrees")
        out = Component(self.dim, self.degree, dict(self.terms))
        for (beta, m), mat in other.terms.items():
            out.add_term(beta, m, mat)
        return out

    def neg(self) -> "Component":
        out = Component(self.dim, self.degree)
        for (beta, m), mat in self.terms.items():
            out.terms[(beta, m)] = mat.neg()
        return out

    def sub(self, other: "Component") -> "Component":
        return self.add(other.neg())

    def scale(self, s: ExactScalar) -> "Component":
        out = Component(self.dim, self.degree)
        for key, mat in self.terms.items():
            v = mat.scale(s)
            if not v.is_zero():
                out.terms[key] = v
        return out

    def scale_rational(self, q: RationalLike) -> "Component":
        out = Component(self.dim, self.degree)
        for key, mat in self.terms.items():
            v = mat.scale_rational(q)
            if not v.is_zero():
                out.terms[key] = v
        return out

    def lmul_elem(self, c: AlgebraElement) -> "Component":
        out = Component(self.dim, self.degree)
        for (beta, m), mat in self.terms.items():
            out.add_term(beta, m, mat.lmul(c))
        return out

    def rmul_elem(self, c: AlgebraElement) -> "Component":
        out = Component(self.dim, self.degree)
        for (beta, m), mat in self.terms.items():
            out.add_term(beta, m, mat.rmul(c))
        return out

    def map_coeffs(self, fn: Callable[[AlgebraElement], AlgebraElement]) -> "Component":
        out = Component(self.dim, self.degree)
        for (beta, m), mat in self.terms.items():
            v = mat.map(fn)
            if not v.is_zero():
                out.add_term(beta, m, v)
        return out

    # -- multiplicative structure ----------------------------------------------

    def mul(self, other: "Component") -> "Component":
        """Pointwise product; matrix factors keep left/right order."""
        out = Component(self.dim, self.degree + other.degree)
        for (b1, m1), mat1 in self.terms.items():
            for (b2, m2), mat2 in other.terms.items():
                beta = tuple(x + y for x, y in zip(b1, b2))
                out.add_term(beta, m1 + m2, mat1.mul(mat2))
        return out

    def mul_xi2(self, half: int) -> "Component":
        """Multiply by ``(xi^2)^{half/2}``, keeping m >= 0 by expanding
        positive powers into monomials."""
        if half == 0:
            return self
        out = Component(self.dim, self.degree + half)
        for (beta, m), mat in self.terms.items():
            m_new = m - half
            if m_new >= 0:
                out.add_term(beta, m_new, mat)
                continue
            pos = -m_new  # leftover positive half-power
            if pos % 2 == 0:
                k, m_final = pos // 2, 0
            else:
                k, m_final = (pos + 1) // 2, 1
            for mono, coeff in xi2_monomials(self.dim, k):
                b = tuple(x + y for x, y in zip(beta, mono))
                out.add_term(b, m_final, mat.scale_rational(coeff))
        return out

    def xi_derivative(self, i: int) -> "Component":
        """d/dxi_i, lowering the degree by one (0-based direction)."""
        out = Component(self.dim, self.degree - 1)
        for (beta, m), mat in self.terms.items():
            if beta[i] > 0:
                b = list(beta)
                b[i] -= 1
                out.add_term(tuple(b), m, mat.scale_rational(beta[i]))
            if m > 0:
                b = list(beta)
                b[i] += 1
                out.add_term(tuple(b), m + 2, mat.scale_rational(-m))
        return out

    def delta(self, mu: int) -> "Component":
        """Entrywise formal derivation on the matrix coefficients (1-based)."""
        return self.map_coeffs(lambda v: v.delta(mu))

    def has_generators(self) -> bool:
        return any(not mat.is_scalar() for mat in self.terms.values())

    def max_xi_degree(self) -> int:
        return max((sum(beta) for (beta, _m) in self.terms), default=-1)

    def is_polynomial(self) -> bool:
        return all(m == 0 for (_beta, m) in self.terms)

    # -- grading in t ----------------------------------------------------------

    def t_grade(self, j: int) -> "Component":
        return self.map_coeffs(lambda v: v.t_grade(j))

    def max_t_power(self) -> int:
        return max((mat.max_t_power() for mat in self.terms.values()), default=0)

    # -- canonical form ----------------------------------------------------------

    def reduced(self) -> "Component":
        """Canonical representative: common denominator per parity class of m,
        then maximal peeling of xi^2 factors out of the numerators."""
        out = Component(self.dim, self.degree)
        for parity in (0, 1):
            group = {k: v for k, v in self.terms.items() if k[1] % 2 == parity}
            if not group:
                continue
            level = max(m for (_b, m) in group)
            numer: dict[tuple[int, ...], Mat2] = {}
            for (beta, m), mat in group.items():
                k = (level - m) // 2
                if k == 0:
                    _acc(numer, beta, mat)
                else:
                    for mono, coeff in xi2_monomials(self.dim, k):
                        b = tuple(x + y for x, y in zip(beta, mono))
                        _acc(numer, b, mat.scale_rational(coeff))
            while True:
                if level < 2:
                    # nothing left to peel at a polynomial or 1/|xi| level
                    for beta, mat in numer.items():
                        out.add_term(beta, level, mat)
                    break
                quot, rem = _xi2_divmod(numer, self.dim)
                for beta, mat in rem.items():
                    out.add_term(beta, level, mat)
                if not quot:
                    break
                level -= 2
                numer = quot
        return out

    def is_zero(self) -> bool:
        return self.reduced().is_empty()

    def equals(self, other: "Component") -> bool:
        return self.sub(other).is_zero()

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (beta, m) in sorted(self.terms, key=lambda k: (k[1], k[0])):
            mat = self.terms[(beta, m)]
            factors = []
            for i, b in enumerate(beta, start=1):
                if b == 1:
                    factors.append(f"xi{i}")
                elif b > 1:
                    factors.append(f"xi{i}^{b}")
            if m:
                factors.append(f"(xi^2)^{{-{m}/2}}")
            head = "*".join(factors) if factors else "1"
            parts.append(f"{head} . {mat.render()}")
        return "  +  ".join(parts)

    __repr__ = render


def _acc(numer: dict[tuple[int, ...], Mat2], beta: tuple[int, ...], mat: Mat2) -> None:
    if beta in numer:
        s = numer[beta].add(mat)
        if s.is_zero():
            del numer[beta]
        else:
            numer[beta] = s
    elif not mat.is_zero():
        numer[beta] = mat


def _xi2_divmod(
    numer: dict[tuple[int, ...], Mat2], dim: int
) -> tuple[dict[tuple[int, ...], Mat2], dict[tuple[int, ...], Mat2]]:
    """Divide a polynomial numerator by ``sum_i xi_i^2`` with leading monomial
    ``xi_1^2`` under lex order; returns (quotient, remainder)."""
    work = dict(numer)
    quot: dict[tuple[int, ...], Mat2] = {}
    while True:
        cand = [beta for beta in work if beta[0] >= 2]
        if not cand:
            return quot, work
        beta = max(cand)
        mat = work.pop(beta)
        q = (beta[0] - 2,) + beta[1:]
        _acc(quot, q, mat)
        for i in range(1, dim):
            b = list(q)
            b[i] += 2
            _acc(work, tuple(b), mat.neg())


def normalize_zero_test(c: Component) -> bool:
    """True iff the component represents the zero function away from xi = 0."""
    return c.reduced().is_empty()


# -- symbols ---------------------------------------------------------------------


class Symbol:
    """Map degree -> homogeneous component, with a floor marking how deep the
    expansion is known.  ``floor=None`` means the symbol is an exact finite sum
    (every absent degree is exactly zero)."""

    __slots__ = ("dim", "components", "floor")

    def __init__(self, dim: int, components: dict[int, Component], floor: Optional[int]):
        self.dim = dim
        self.components = components
        self.floor = floor

    @classmethod
    def make(
        cls, dim: int, components: Iterable[Component], floor: Optional[int] = None
    ) -> "Symbol":
        merged: dict[int, Component] = {}
        for c in components:
            if c.degree in merged:
                merged[c.degree] = merged[c.degree].add(c)
            else:
                merged[c.degree] = c
        comps: dict[int, Component] = {}
        for d, c in merged.items():
            r = c.reduced()
            if not r.is_empty():
                comps[d] = r
        return cls(dim, comps, floor)

    @property
    def order(self) -> int:
        if not self.components:
            raise DomainError("zero symbol has no order")
        return max(self.components)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components.values())

    def component(self, d: int) -> Component:
        if d in self.components:
            return self.components[d]
        return Component(self.dim, d)

    def known_down_to(self, d: int) -> bool:
        return self.floor is None or self.floor <= d

    def reduced(self) -> "Symbol":
        return Symbol.make(self.dim, self.components.values(), self.floor)

    def add(self, other: "Symbol") -> "Symbol":
        floor = _combine_floor(self.floor, other.floor)
        comps = {}
        for d in set(self.components) | set(other.components):
            comps[d] = self.component(d).add(other.component(d))
        sym = Symbol.make(self.dim, comps.values(), floor)
        return sym

    def neg(self) -> "Symbol":
        return Symbol(
            self.dim, {d: c.neg() for d, c in self.components.items()}, self.floor
        )

    def sub(self, other: "Symbol") -> "Symbol":
        return self.add(other.neg())

    def map_coeffs(self, fn: Callable[[AlgebraElement], AlgebraElement]) -> "Symbol":
        return Symbol.make(
            self.dim,
            (c.map_coeffs(fn) for c in self.components.values()),
            self.floor,
        )

    def filter_base_degree(self, bases: Iterable[str], cap: int) -> "Symbol":
        names = tuple(bases)
        return self.map_coeffs(lambda v: v.filter_base_degree(names, cap))

    def truncate_floor(self, floor: int) -> "Symbol":
        comps = {d: c for d, c in self.components.items() if d >= floor}
        return Symbol(self.dim, comps, _combine_floor(self.floor, floor))

    def equals(self, other: "Symbol", down_to: Optional[int] = None) -> bool:
        lo = down_to
        if lo is None:
            floors = [f for f in (self.floor, other.floor) if f is not None]
            if floors:
                lo = max(floors)
        degrees = {d for d in set(self.components) | set(other.components) if lo is None or d >= lo}
        return all(self.component(d).equals(other.component(d)) for d in degrees)

    def render(self) -> str:
        if not self.components:
            return "0"
        lines = []
        for d in sorted(self.components, reverse=True):
            lines.append(f"deg {d}: {self.components[d].render()}")
        if self.floor is not None:
            lines.append(f"(truncated below degree {self.floor})")
        return "\n".join(lines)

    __repr__ = render


def _combine_floor(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def _require_known(a: Symbol, d: int, what: str) -> None:
    if not a.known_down_to(d):
        raise InsufficientFloorError(
            f"{what} needs components down to degree {d}, "
            f"but the symbol is truncated at {a.floor}"
        )


# -- star product ---------------------------------------------------------------


class _DerivCache:
    """Memoized iterated xi-derivatives and delta-derivatives of components."""

    def __init__(self, dim: int):
        self.dim = dim
        self.xi: dict[tuple, Component] = {}
        self.dl: dict[tuple, Component] = {}

    def xi_pow(self, key: tuple, comp: Component, alpha: tuple[int, ...]) -> Component:
        if sum(alpha) == 0:
            return comp
        k = (key, alpha)
        hit = self.xi.get(k)
        if hit is not None:
            return hit
        i = next(idx for idx, a in enumerate(alpha) if a > 0)
        prev = list(alpha)
        prev[i] -= 1
        base = self.xi_pow(key, comp, tuple(prev))
        out = base.xi_derivative(i).reduced()
        self.xi[k] = out
        return out

    def delta_pow(self, key: tuple, comp: Component, alpha: tuple[int, ...]) -> Component:
        if sum(alpha) == 0:
            return comp
        k = (key, alpha)
        hit = self.dl.get(k)
        if hit is not None:
            return hit
        i = next(idx for idx, a in enumerate(alpha) if a > 0)
        prev = list(alpha)
        prev[i] -= 1
        base = self.delta_pow(key, comp, tuple(prev))
        out = base.delta(i + 1).reduced()
        self.dl[k] = out
        return out


def star_product(a: Symbol, b: Symbol, floor: Optional[int] = None) -> Symbol:
    """Composition of symbols, truncated below ``floor``.

    With ``floor=None`` the product is computed exactly, which requires the
    left factor to be polynomial in xi (finite derivative ladder) and both
    factors to be exact finite sums.
    """
    if a.dim != b.dim:
        raise DomainError("symbols live on tori of different dimensions")
    if not a.components or not b.components:
        return Symbol(a.dim, {}, floor)
    if floor is None:
        if a.floor is not None or b.floor is not None:
            raise InsufficientFloorError(
                "exact star product requires exact finite factors"
            )
        if not all(c.is_polynomial() for c in a.components.values()):
            raise InsufficientFloorError(
                "exact star product requires a polynomial left factor; pass a floor"
            )
    else:
        _require_known(a, floor - b.order, "star product")
        _require_known(b, floor - a.order, "star product")

    cache = _DerivCache(a.dim)
    out: dict[int, Component] = {}
    for da, ca in a.components.items():
        rmax_a = ca.max_xi_degree() if ca.is_polynomial() else None
        for db, cb in b.components.items():
            if floor is None:
                rmax = rmax_a
            else:
                rmax = da + db - floor
                if rmax_a is not None:
                    rmax = min(rmax, rmax_a)
            if rmax is None or rmax < 0:
                continue
            if not cb.has_generators():
                rmax = 0
            for r in range(rmax + 1):
                for alpha in multi_indices(a.dim, r):
                    left = cache.xi_pow(("a", da), ca, alpha)
                    if left.is_empty():
                        continue
                    right = cache.delta_pow(("b", db), cb, alpha)
                    if right.is_empty():
                        continue
                    term = left.mul(right)
                    if r:
                        term = term.scale_rational(Fraction(1, _alpha_factorial(alpha)))
                    d = da - r + db
                    if d in out:
                        out[d] = out[d].add(term)
                    else:
                        out[d] = term
    return Symbol.make(a.dim, out.values(), floor)


# -- leading-shape analysis -------------------------------------------------------


def _central_leading(a: Symbol) -> tuple[int, AlgebraElement]:
    """Recognize the top component as ``(xi^2)^{d/2} (c + nilpotent) (x) I``.

    Returns the degree and the algebra element; raises
    :class:`EllipticityShapeError` otherwise.
    """
    a = a.reduced()
    if not a.components:
        raise EllipticityShapeError("zero symbol has no leading component")
    d = a.order
    flat = a.components[d].mul_xi2(-d).reduced()
    keys = set(flat.terms)
    unit_key = ((0,) * a.dim, 0)
    if keys != {unit_key}:
        raise EllipticityShapeError(
            "leading component is not a pure (xi^2) power times a constant matrix"
        )
    mat = flat.terms[unit_key]
    u = mat.e[0][0]
    if not mat.e[0][1].is_zero() or not mat.e[1][0].is_zero() or not (mat.e[1][1] - u).is_zero():
        raise EllipticityShapeError("leading matrix is not a scalar multiple of I")
    return d, u


# -- inversion and square root ----------------------------------------------------


def invert_symbol(a: Symbol, floor: int) -> Symbol:
    """Symbol ``b`` with ``a * b = 1`` modulo degrees below ``floor``."""
    a = a.reduced()
    r, u = _central_leading(a)
    try:
        uinv = invert_perturbed_unit(u)
    except DomainError as exc:
        raise EllipticityShapeError(str(exc)) from exc
    kmax = -floor - r
    if kmax < 0:
        raise DomainError(f"floor {floor} is above the leading inverse degree {-r}")
    _require_known(a, 2 * r + floor, "inversion")

    lead = Component(a.dim, 0)
    lead.add_term((0,) * a.dim, 0, Mat2.diag(uinv))
    lead = lead.mul_xi2(-r).reduced()

    b: dict[int, Component] = {-r: lead}
    cache = _DerivCache(a.dim)
    for k in range(1, kmax + 1):
        target = -r - k
        cross: Optional[Component] = None
        for d, ad in a.components.items():
            for e, be in b.items():
                order = d + e + k
                if order < 0:
                    continue
                for alpha in multi_indices(a.dim, order):
                    left = cache.xi_pow(("a", d), ad, alpha)
                    if left.is_empty():
                        continue
                    right = cache.delta_pow(("b", e), be, alpha)
                    if right.is_empty():
                        continue
                    term = left.mul(right)
                    if order:
                        term = term.scale_rational(
                            Fraction(1, _alpha_factorial(alpha))
                        )
                    cross = term if cross is None else cross.add(term)
        if cross is None:
            continue
        comp = lead.mul(cross).neg().reduced()
        if not comp.is_empty():
            b[target] = comp
    return Symbol(a.dim, b, floor).reduced()


def _solve_symmetric(v: AlgebraElement, rhs: Component) -> Component:
    """Solve ``v X + X v = rhs`` for a perturbed unit ``v = 1 + w``.

    ``w`` is t-nilpotent, so the two-sided equation decouples grade by grade:
    the grade-g slice is ``2 X_g = rhs_g - sum_j (w_j X_{g-j} + X_{g-j} w_j)``.
    """
    w = v - AlgebraElement.unit()
    if w.is_zero():
        return rhs.scale_rational(Fraction(1, 2))
    cap = w.t_cap_min()
    if cap is None:
        raise DomainError("nilpotent perturbation without a t cap")
    w_grades = {
        j: wj
        for j in range(1, w.max_t_power() + 1)
        if not (wj := w.t_grade(j)).is_zero()
    }
    out = Component(rhs.dim, rhs.degree)
    grades: dict[int, Component] = {}
    for g in range(cap + 1):
        acc = rhs.t_grade(g)
        for j, wj in w_grades.items():
            prev = grades.get(g - j)
            if prev is not None and not prev.is_empty():
                acc = acc.sub(prev.lmul_elem(wj)).sub(prev.rmul_elem(wj))
        xg = acc.scale_rational(Fraction(1, 2)).reduced()
        grades[g] = xg
        out = out.add(xg)
    return out


def sqrt_symbol(a: Symbol, floor: int) -> Symbol:
    """Symbol ``b`` of half the order with ``b * b = a`` modulo the floor."""
    a = a.reduced()
    two_r, u = _central_leading(a)
    if two_r % 2:
        raise EllipticityShapeError("square root needs a symbol of even order")
    r = two_r // 2
    try:
        v = sqrt_perturbed_unit(u)
    except DomainError as exc:
        raise EllipticityShapeError(str(exc)) from exc
    kmax = r - floor
    if kmax < 0:
        raise DomainError(f"floor {floor} is above the leading square-root degree {r}")
    _require_known(a, r + floor, "square root")

    lead = Component(a.dim, 0)
    lead.add_term((0,) * a.dim, 0, Mat2.diag(v))
    lead = lead.mul_xi2(r).reduced()

    b: dict[int, Component] = {r: lead}
    cache = _DerivCache(a.dim)
    for k in range(1, kmax + 1):
        target = r - k
        cross: Optional[Component] = None
        for d, bd in list(b.items()):
            for e, be in list(b.items()):
                order = d + e - (2 * r - k)
                if order < 0:
                    continue
                if order == 0:
                    continue  # pointwise pairs at this degree involve the unknown
                for alpha in multi_indices(a.dim, order):
                    left = cache.xi_pow(("b", d), bd, alpha)
                    if left.is_empty():
                        continue
                    right = cache.delta_pow(("b", e), be, alpha)
                    if right.is_empty():
                        continue
                    term = left.mul(right).scale_rational(
                        Fraction(1, _alpha_factorial(alpha))
                    )
                    cross = term if cross is None else cross.add(term)
        # alpha = 0 products of two already-known components
        for d, bd in list(b.items()):
            e = 2 * r - k - d
            if e in b and d != r and e != r:
                term = bd.mul(b[e])
                cross = term if cross is None else cross.add(term)
        rhs = a.component(2 * r - k)
        if cross is not None:
            rhs = rhs.sub(cross)
        rhs = rhs.mul_xi2(-r).reduced()  # divide by the central scalar (xi^2)^{r/2}
        comp = _solve_symmetric(v, rhs).reduced()
        if not comp.is_empty():
            b[target] = comp
    return Symbol(a.dim, b, floor).reduced()


# -- operator families -------------------------------------------------------------


@dataclass(frozen=True)
class OperatorFamily:
    """Declarative recipe for a Dirac-type family on the dim-torus.

    kinds:
      free_dirac      -- the flat Dirac operator
      coupled_dirac   -- free Dirac plus a gauge potential with one abstract
                         self-adjoint generator per direction
      conformal_dirac -- two-sided conformal perturbation by a Weyl factor,
                         expanded in the nilpotent grade up to t_cap
      unitary_flow    -- free Dirac shifted along the commutator with a basic
                         unitary of lattice vector k, at a rational parameter
    """

    kind: str
    dim: int
    t_cap: Optional[int] = None
    weyl: str = "h"
    gauge: tuple[str, ...] = ()
    flow_k: tuple[int, ...] = ()
    flow_t: Fraction = Fraction(0)

    def __post_init__(self):
        if self.kind not in ("free_dirac", "coupled_dirac", "conformal_dirac", "unitary_flow"):
            raise FamilyError(f"unknown family kind {self.kind!r}")
        if self.dim not in (2, 3):
            raise FamilyError("families are modeled in dimensions 2 and 3")
        if self.kind == "coupled_dirac" and len(self.gauge) != self.dim:
            raise FamilyError("coupled family needs one gauge generator per direction")
        if self.kind == "conformal_dirac" and (self.t_cap is None or self.t_cap < 0):
            raise FamilyError("conformal family needs a t cap >= 0")
        if self.kind == "unitary_flow" and len(self.flow_k) != self.dim:
            raise FamilyError("unitary flow needs an integer lattice vector of length dim")

    @classmethod
    def free(cls, dim: int) -> "OperatorFamily":
        return cls("free_dirac", dim)

    @classmethod
    def coupled(cls, dim: int, gauge: Optional[tuple[str, ...]] = None) -> "OperatorFamily":
        if gauge is None:
            gauge = tuple(f"A{m}" for m in range(1, dim + 1))
        return cls("coupled_dirac", dim, gauge=gauge)

    @classmethod
    def conformal(cls, dim: int, t_cap: int, weyl: str = "h") -> "OperatorFamily":
        return cls("conformal_dirac", dim, t_cap=t_cap, weyl=weyl)

    @classmethod
    def unitary(cls, dim: int, k: tuple[int, ...], t: RationalLike) -> "OperatorFamily":
        return cls("unitary_flow", dim, flow_k=tuple(k), flow_t=Fraction(t))

    @classmethod
    def from_dict(cls, data: dict) -> "OperatorFamily":
        try:
            kind = data["kind"]
            dim = int(data["dim"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FamilyError(f"family file needs 'kind' and integer 'dim': {exc}")
        t_cap = data.get("t_cap")
        return cls(
            kind=kind,
            dim=dim,
            t_cap=int(t_cap) if t_cap is not None else None,
            weyl=data.get("weyl", "h"),
            gauge=tuple(data.get("gauge", ())) or (
                tuple(f"A{m}" for m in range(1, dim + 1)) if kind == "coupled_dirac" else ()
            ),
            flow_k=tuple(int(x) for x in data.get("flow_k", ())),
            flow_t=Fraction(str(data.get("flow_t", 0))),
        )

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "dim": self.dim}
        if self.t_cap is not None:
            out["t_cap"] = self.t_cap
        if self.kind == "conformal_dirac":
            out["weyl"] = self.weyl
        if self.gauge:
            out["gauge"] = list(self.gauge)
        if self.kind == "unitary_flow":
            out["flow_k"] = list(self.flow_k)
            out["flow_t"] = str(self.flow_t)
        return out


def _gamma_mat(dim: int, mu: int) -> Mat2:
    return Mat2.from_gamma(clifford.gamma(dim, mu))


def _slash_component(dim: int, coeffs: list[AlgebraElement]) -> Component:
    """Degree-0 component ``sum_mu coeffs[mu] (x) gamma^mu``."""
    comp = Component(dim, 0)
    for mu, c in enumerate(coeffs, start=1):
        comp.add_term((0,) * dim, 0, _gamma_mat(dim, mu).map(lambda v, c=c: c * v))
    return comp


def _xi_slash(dim: int) -> Component:
    comp = Component(dim, 1)
    for mu in range(1, dim + 1):
        beta = tuple(1 if i == mu - 1 else 0 for i in range(dim))
        comp.add_term(beta, 0, _gamma_mat(dim, mu))
    return comp


def dirac_symbol(f: OperatorFamily) -> tuple[Symbol, Symbol]:
    """Symbols of the family operator and of its square."""
    dim = f.dim
    free = Symbol.make(dim, [_xi_slash(dim)])
    if f.kind == "free_dirac":
        sd = free
    elif f.kind == "coupled_dirac":
        coeffs = [AlgebraElement.generator(gen(name, dim)) for name in f.gauge]
        sd = free.add(Symbol.make(dim, [_slash_component(dim, coeffs)]))
    elif f.kind == "unitary_flow":
        coeffs = [
            AlgebraElement.rational(f.flow_t * k) for k in f.flow_k
        ]
        sd = free.add(Symbol.make(dim, [_slash_component(dim, coeffs)]))
    elif f.kind == "conformal_dirac":
        half = exp_expand(gen(f.weyl, dim), Fraction(1, 2), f.t_cap)
        e_comp = Component(dim, 0)
        e_comp.add_term((0,) * dim, 0, Mat2.diag(half))
        e_sym = Symbol.make(dim, [e_comp])
        sd = star_product(e_sym, star_product(free, e_sym))
    else:  # pragma: no cover - guarded by __post_init__
        raise FamilyError(f.kind)
    sd2 = star_product(sd, sd)
    return sd, sd2


def inverse_abs_symbol(f: OperatorFamily, floor: int) -> Symbol:
    """Expansion of the inverse absolute value, via square root then inversion."""
    _sd, sd2 = dirac_symbol(f)
    absd = sqrt_symbol(sd2, floor + 2)
    return invert_symbol(absd, floor)


def sign_symbol(f: OperatorFamily, floor: Optional[int] = None) -> Symbol:
    """Symbol of the sign operator of the family, down to ``floor``.

    Default floor is ``-dim`` so that the residue component is determined.
    """
    if floor is None:
        floor = -f.dim
    sd, sd2 = dirac_symbol(f)
    absd = sqrt_symbol(sd2, floor + 1)
    inv = invert_symbol(absd, floor - 1)
    return star_product(sd, inv, floor)
