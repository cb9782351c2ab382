"""Resolvent recursion and heat-trace coefficients for squared Dirac families.

The resolvent parameter enters through central factors ``(xi^2 - lambda)^{-m}``
and counts with homogeneity degree two, so the recursion for the inverse of
``sigma(D^2) - lambda`` is graded by joint homogeneity: the k-th layer has
degree ``-2 - k``.  All analytic steps are exact:

* the contour integral against ``exp(-lambda)`` reduces to the residue at
  ``lambda = xi^2``, replacing ``(xi^2 - lambda)^{-m}`` by
  ``exp(-xi^2)/(m-1)!`` (orientation pinned so that the flat heat coefficient
  is positive);
* momentum integrals reduce to Gaussian moments, i.e. Gamma products;
* the inverse square root comes from the Mellin representation, where each
  ``(xi^2 + lambda)^{-m}`` integrates to a Beta value, a rational multiple of
  ``(xi^2)^{1/2 - m}``.

This provides a derivation of the inverse-absolute-value expansion that is
independent of the square-root/inversion route in :mod:`ncps.symbols`; the two
must agree component by component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .algebra import AlgebraElement, TauClass, tau_class
from .scalars import DomainError, ExactScalar, gamma_half_pair
from .symbols import (
    Component,
    EllipticityShapeError,
    Mat2,
    OperatorFamily,
    Symbol,
    _central_leading,
    _DerivCache,
    _alpha_factorial,
    dirac_symbol,
    multi_indices,
    xi2_monomials,
)
from .algebra import gen


ResKey = tuple[tuple[int, ...], int]  # (beta, resolvent power m >= 1)


class ResolventComponent:
    """Layer ``r_k``: term map (beta, m) -> matrix, with factors
    ``xi^beta (xi^2 - lambda)^{-m}`` and joint degree ``|beta| - 2m = -2 - k``."""

    __slots__ = ("dim", "k", "terms")

    def __init__(self, dim: int, k: int, terms: Optional[dict[ResKey, Mat2]] = None):
        self.dim = dim
        self.k = k
        self.terms: dict[ResKey, Mat2] = {}
        if terms:
            for (beta, m), mat in terms.items():
                self.add_term(beta, m, mat)

    def add_term(self, beta: tuple[int, ...], m: int, mat: Mat2) -> None:
        if mat.is_zero():
            return
        if m < 1:
            raise DomainError("resolvent power must be >= 1")
        if sum(beta) - 2 * m != -2 - self.k:
            raise DomainError(
                f"term xi^{beta} (xi^2-lam)^{{-{m}}} breaks the homogeneity "
                f"audit for layer {self.k}"
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

    def add(self, other: "ResolventComponent") -> "ResolventComponent":
        out = ResolventComponent(self.dim, self.k, dict(self.terms))
        for (beta, m), mat in other.terms.items():
            out.add_term(beta, m, mat)
        return out

    def neg(self) -> "ResolventComponent":
        out = ResolventComponent(self.dim, self.k)
        for key, mat in self.terms.items():
            out.terms[key] = mat.neg()
        return out

    def scale_rational(self, q) -> "ResolventComponent":
        out = ResolventComponent(self.dim, self.k)
        for key, mat in self.terms.items():
            v = mat.scale_rational(q)
            if not v.is_zero():
                out.terms[key] = v
        return out

    def mul(self, other: "ResolventComponent") -> "ResolventComponent":
        # joint degrees add: (-2-k1) + (-2-k2) = -2 - (k1+k2+2)
        out = ResolventComponent(self.dim, self.k + other.k + 2)
        for (b1, m1), mat1 in self.terms.items():
            for (b2, m2), mat2 in other.terms.items():
                beta = tuple(x + y for x, y in zip(b1, b2))
                out.add_term(beta, m1 + m2, mat1.mul(mat2))
        return out

    def mul_poly_component(self, c: Component) -> "ResolventComponent":
        """Left-multiply by a polynomial homogeneous component."""
        out = ResolventComponent(self.dim, self.k - c.degree)
        for (b1, m1), mat1 in c.terms.items():
            if m1 != 0:
                raise DomainError("resolvent recursion needs polynomial input symbols")
            for (b2, m2), mat2 in self.terms.items():
                beta = tuple(x + y for x, y in zip(b1, b2))
                out.add_term(beta, m2, mat1.mul(mat2))
        return out

    def xi_derivative(self, i: int) -> "ResolventComponent":
        out = ResolventComponent(self.dim, self.k + 1)
        for (beta, m), mat in self.terms.items():
            if beta[i] > 0:
                b = list(beta)
                b[i] -= 1
                out.add_term(tuple(b), m, mat.scale_rational(beta[i]))
            b = list(beta)
            b[i] += 1
            out.add_term(tuple(b), m + 1, mat.scale_rational(-2 * m))
        return out

    def delta(self, mu: int) -> "ResolventComponent":
        out = ResolventComponent(self.dim, self.k)
        for (beta, m), mat in self.terms.items():
            v = mat.map(lambda e: e.delta(mu))
            if not v.is_zero():
                out.add_term(beta, m, v)
        return out

    def has_generators(self) -> bool:
        return any(not mat.is_scalar() for mat in self.terms.values())

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (beta, m) in sorted(self.terms, key=lambda k: (k[1], k[0])):
            mat = self.terms[(beta, m)]
            factors = []
            for i, b in enumerate(beta, start=1):
                if b:
                    factors.append(f"xi{i}" + (f"^{b}" if b > 1 else ""))
            factors.append(f"(xi^2-lam)^{{-{m}}}")
            parts.append("*".join(factors) + f" . {mat.render()}")
        return "  +  ".join(parts)

    __repr__ = render


def _resolvent_leading(sd2: Symbol) -> ResolventComponent:
    """``r_0``: inverse of the leading part, as a finite Neumann series in the
    nilpotent perturbation of the central symbol."""
    two, u = _central_leading(sd2)
    if two != 2:
        raise EllipticityShapeError("resolvent recursion expects an order-2 symbol")
    dim = sd2.dim
    unit = AlgebraElement.unit()
    c0 = u.t_grade(0)
    if not (c0 - unit).is_zero():
        raise EllipticityShapeError("leading symbol must be xi^2 (1 + nilpotent)")
    nu = u - unit
    r0 = ResolventComponent(dim, 0)
    r0.add_term((0,) * dim, 1, Mat2.diag(unit))
    power = AlgebraElement.unit()
    j = 0
    while True:
        power = power * nu
        if power.is_zero():
            break
        j += 1
        if j > 64:
            raise EllipticityShapeError("leading perturbation is not nilpotent")
        sign = Fraction(-1) ** j
        for mono, coeff in xi2_monomials(dim, j):
            r0.add_term(mono, j + 1, Mat2.diag(power).scale_rational(sign * coeff))
    return r0


def resolvent_symbols(sd2: Symbol, count: int) -> list[ResolventComponent]:
    """Layers ``r_0 .. r_count`` of the resolvent of an order-2 polynomial symbol."""
    dim = sd2.dim
    if sd2.floor is not None:
        raise DomainError("resolvent recursion expects an exact differential symbol")
    for c in sd2.components.values():
        if not c.is_polynomial():
            raise DomainError("resolvent recursion expects polynomial components")
    r0 = _resolvent_leading(sd2)
    layers = [r0]
    dcache: dict[tuple, ResolventComponent] = {}

    def xi_pow(tag: tuple, rc: ResolventComponent, alpha: tuple[int, ...]) -> ResolventComponent:
        if sum(alpha) == 0:
            return rc
        key = (tag, alpha)
        hit = dcache.get(key)
        if hit is not None:
            return hit
        i = next(idx for idx, a in enumerate(alpha) if a > 0)
        prev = list(alpha)
        prev[i] -= 1
        out = xi_pow(tag, rc, tuple(prev)).xi_derivative(i)
        dcache[key] = out
        return out

    del_cache: dict[tuple, ResolventComponent] = {}

    def delta_pow(tag: tuple, rc: ResolventComponent, alpha: tuple[int, ...]) -> ResolventComponent:
        if sum(alpha) == 0:
            return rc
        key = (tag, alpha)
        hit = del_cache.get(key)
        if hit is not None:
            return hit
        i = next(idx for idx, a in enumerate(alpha) if a > 0)
        prev = list(alpha)
        prev[i] -= 1
        out = delta_pow(tag, rc, tuple(prev)).delta(i + 1)
        del_cache[key] = out
        return out

    sym_cache = _DerivCache(dim)
    for k in range(1, count + 1):
        cross: Optional[ResolventComponent] = None
        for d, ad in sd2.components.items():
            for j, rj in enumerate(layers):
                order = d + k - 2 - j  # joint degree of the pairing must be -k
                if order < 0 or rj.is_empty():
                    continue
                if order > 0 and not rj.has_generators():
                    continue  # delta derivatives kill constant-coefficient layers
                for alpha in multi_indices(dim, order):
                    left = sym_cache.xi_pow(("a", d), ad, alpha)
                    if left.is_empty():
                        continue
                    right = delta_pow(("r", j), rj, alpha)
                    if right.is_empty():
                        continue
                    term = right.mul_poly_component(left)
                    if order:
                        term = term.scale_rational(Fraction(1, _alpha_factorial(alpha)))
                    cross = term if cross is None else cross.add(term)
        if cross is None:
            layers.append(ResolventComponent(dim, k))
        else:
            layers.append(r0.mul(cross).neg())
    return layers


# -- contour integral and Gaussian moments ------------------------------------------


class GaussianIntegrand:
    """Momentum-space integrand ``sum_beta M_beta xi^beta exp(-xi^2)``."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int):
        self.dim = dim
        self.terms: dict[tuple[int, ...], Mat2] = {}

    def add_term(self, beta: tuple[int, ...], mat: Mat2) -> None:
        if mat.is_zero():
            return
        if beta in self.terms:
            s = self.terms[beta].add(mat)
            if s.is_zero():
                del self.terms[beta]
            else:
                self.terms[beta] = s
        else:
            self.terms[beta] = mat


def lambda_contour_integral(rc: ResolventComponent) -> GaussianIntegrand:
    """Close the resolvent parameter against ``exp(-lambda)``.

    Each factor ``(xi^2 - lambda)^{-m}`` reduces to the residue at
    ``lambda = xi^2``, giving ``exp(-xi^2) / (m-1)!``; the orientation is
    pinned so the flat case comes out positive.
    """
    out = GaussianIntegrand(rc.dim)
    for (beta, m), mat in rc.terms.items():
        out.add_term(beta, mat.scale_rational(Fraction(1, math.factorial(m - 1))))
    return out


def gaussian_moment(beta: tuple[int, ...]) -> ExactScalar:
    """Exact moment ``int_{R^n} xi^beta exp(-xi^2) dxi``; zero for odd exponents."""
    if any(b % 2 for b in beta):
        return ExactScalar.zero()
    coeff = Fraction(1)
    p = 0
    for b in beta:
        c, half = gamma_half_pair(b + 1)
        coeff *= c
        p += half
    return ExactScalar.pi_half(p, coeff)


def momentum_integral(g: GaussianIntegrand) -> Mat2:
    out = Mat2.zero()
    for beta, mat in g.terms.items():
        w = gaussian_moment(beta)
        if not w.is_zero():
            out = out.add(mat.scale(w))
    return out


@dataclass
class HeatCoefficient:
    """One coefficient of the short-time heat expansion, with trace data.

    ``matrix`` is the raw momentum integral; ``traced`` applies the optional
    localizer from the left and takes the matrix trace; ``tau`` is its trace
    class.
    """

    index: int
    matrix: Mat2
    traced: AlgebraElement
    tau: TauClass


def heat_coefficients(
    sd2: Symbol, count: int, localizer: Optional[AlgebraElement] = None
) -> list[HeatCoefficient]:
    """Exact heat coefficients ``beta_0 .. beta_count`` of an order-2 family."""
    layers = resolvent_symbols(sd2, count)
    out = []
    for i, rc in enumerate(layers):
        mat = momentum_integral(lambda_contour_integral(rc))
        loc = mat if localizer is None else mat.lmul(localizer)
        traced = loc.trace()
        out.append(HeatCoefficient(i, mat, traced, tau_class(traced)))
    return out


# -- inverse powers through the Mellin representation --------------------------------


def _mellin_half_factor(m: int) -> Fraction:
    """``(1/pi) * Beta(1/2, m - 1/2)`` = Gamma(m-1/2) / (sqrt(pi) (m-1)!)."""
    c, half = gamma_half_pair(2 * m - 1)
    if half != 1:
        raise DomainError("unexpected pi bookkeeping in the Mellin factor")
    return c / math.factorial(m - 1)


def mellin_inverse_power(sd2: Symbol, floor: int) -> Symbol:
    """Expansion of the inverse square root of an order-2 family.

    Uses ``A^{-1/2} = (1/pi) int_0^inf lam^{-1/2} (A + lam)^{-1} dlam``
    termwise on the resolvent layers: each ``(xi^2 + lam)^{-m}`` integrates to
    a rational multiple of ``(xi^2)^{1/2 - m}``.  Independent of the
    square-root/inversion route, against which it is tested.
    """
    count = -floor - 1
    if count < 0:
        raise DomainError("floor must be at most -1 for an order -1 expansion")
    layers = resolvent_symbols(sd2, count)
    comps = []
    for j, rc in enumerate(layers):
        comp = Component(sd2.dim, -1 - j)
        for (beta, m), mat in rc.terms.items():
            comp.add_term(beta, 2 * m - 1, mat.scale_rational(_mellin_half_factor(m)))
        comps.append(comp)
    return Symbol.make(sd2.dim, comps, floor)


def resolvent_at_zero(sd2: Symbol, floor: int) -> Symbol:
    """Expansion of the inverse of an order-2 family: the resolvent at
    ``lambda = 0``, so ``(xi^2 - lambda)^{-m}`` becomes ``(xi^2)^{-m}``."""
    count = -floor - 2
    if count < 0:
        raise DomainError("floor must be at most -2 for an order -2 expansion")
    layers = resolvent_symbols(sd2, count)
    comps = []
    for j, rc in enumerate(layers):
        comp = Component(sd2.dim, -2 - j)
        for (beta, m), mat in rc.terms.items():
            comp.add_term(beta, 2 * m, mat)
        comps.append(comp)
    return Symbol.make(sd2.dim, comps, floor)


# -- localized densities ----------------------------------------------------------


def anomaly_density(f: OperatorFamily, t_order: Optional[int] = None) -> dict[int, TauClass]:
    """Conformal variation density of the log-determinant on the 2-torus.

    Returns ``-2 tr(h beta_2)`` per t grade for the squared conformal family;
    the flat grade vanishes and grade one is the local anomaly integrand.
    """
    if f.kind != "conformal_dirac" or f.dim != 2:
        raise DomainError("the anomaly density is defined for conformal families in dimension 2")
    order = f.t_cap if t_order is None else t_order
    _sd, sd2 = dirac_symbol(f)
    h = AlgebraElement.generator(gen(f.weyl, f.dim))
    coeffs = heat_coefficients(sd2, 2, localizer=h)
    density = coeffs[2].traced.scale_rational(-2)
    return {j: tau_class(density.t_grade(j)) for j in range(order + 1)}


@dataclass
class ResHeatPair:
    """Both sides of the residue / heat-coefficient identity, for assertion."""

    lhs_traced: AlgebraElement
    rhs_traced: AlgebraElement
    lhs_tau: TauClass
    rhs_tau: TauClass

    def agree(self) -> bool:
        return (self.lhs_traced - self.rhs_traced).is_zero()


def res_heat_crosscheck(k: int, f: OperatorFamily) -> ResHeatPair:
    """Residue of the k-th inverse power of the squared family against the
    matching heat coefficient: ``res(Delta^{-k}) = (2/(k-1)!) beta_{n-2k}``.
    """
    from .functionals import sphere_integral_component

    n = f.dim
    if k < 1 or n - 2 * k < 0:
        raise DomainError("need k >= 1 and n - 2k >= 0 for the order-2 crosscheck")
    _sd, sd2 = dirac_symbol(f)
    inv = resolvent_at_zero(sd2, floor=-n)
    lhs_mat = sphere_integral_component(inv.component(-n), n)
    lhs = lhs_mat.trace()
    beta = heat_coefficients(sd2, n - 2 * k)[n - 2 * k]
    rhs = beta.traced.scale_rational(Fraction(2, math.factorial(k - 1)))
    return ResHeatPair(lhs, rhs, tau_class(lhs), tau_class(rhs))
