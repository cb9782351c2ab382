"""Exact coefficient ring for the symbolic engine.

Scalars are finite sums

    (a + b i) * pi^{p/2} * t^j

with ``a, b`` arbitrary-precision rationals, ``p >= 0`` an integer exponent of
the formal square root of pi, and ``j >= 0`` the grade of a nilpotent
deformation parameter ``t``.  A scalar may carry a cap ``t_cap = M``; grades
``j > M`` are identically dropped by every operation, which makes ``t``
nilpotent of order ``M + 1``.  A cap of ``None`` means "no truncation".

pi is never evaluated numerically on the symbolic path: sphere and Gaussian
integrals produce exact rational multiples of half-integer powers of pi and
all vanishing statements are decided by exact zero tests.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterator, Mapping, Optional, Union

RationalLike = Union[int, Fraction]


class DomainError(ValueError):
    """Raised when an operation is applied outside its mathematical domain."""


def _min_cap(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _fmt_rational(q: Fraction) -> str:
    return str(q)


def _fmt_complex(re: Fraction, im: Fraction) -> str:
    if im == 0:
        return _fmt_rational(re)
    if re == 0:
        if im == 1:
            return "i"
        if im == -1:
            return "-i"
        return f"{_fmt_rational(im)} i"
    sign = "+" if im > 0 else "-"
    mag = abs(im)
    imtxt = "i" if mag == 1 else f"{_fmt_rational(mag)} i"
    return f"{_fmt_rational(re)} {sign} {imtxt}"


class ExactScalar:
    """Immutable element of the coefficient ring.

    The term map sends ``(p, j)`` (pi half-power, t grade) to a complex
    rational stored as a pair of :class:`fractions.Fraction`.  Zero values are
    never stored, so ``is_zero`` is a trivial emptiness check.
    """

    __slots__ = ("_terms", "t_cap")

    def __init__(
        self,
        terms: Optional[Mapping[tuple[int, int], tuple[Fraction, Fraction]]] = None,
        t_cap: Optional[int] = None,
    ):
        if t_cap is not None and t_cap < 0:
            raise DomainError("t_cap must be >= 0")
        clean: dict[tuple[int, int], tuple[Fraction, Fraction]] = {}
        if terms:
            for (p, j), (re, im) in terms.items():
                if p < 0 or j < 0:
                    raise DomainError("pi half-power and t grade must be >= 0")
                if t_cap is not None and j > t_cap:
                    continue
                if re == 0 and im == 0:
                    continue
                clean[(p, j)] = (Fraction(re), Fraction(im))
        self._terms = clean
        self.t_cap = t_cap

    @classmethod
    def _raw(
        cls,
        terms: dict[tuple[int, int], tuple[Fraction, Fraction]],
        t_cap: Optional[int],
    ) -> "ExactScalar":
        """Trusted constructor for internal arithmetic: the term map must
        already be zero-free, Fraction-valued and cap-respecting."""
        obj = object.__new__(cls)
        obj._terms = terms
        obj.t_cap = t_cap
        return obj

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, t_cap: Optional[int] = None) -> "ExactScalar":
        return cls({}, t_cap)

    @classmethod
    def rational(
        cls,
        re: RationalLike,
        im: RationalLike = 0,
        t_cap: Optional[int] = None,
    ) -> "ExactScalar":
        return cls({(0, 0): (Fraction(re), Fraction(im))}, t_cap)

    @classmethod
    def one(cls, t_cap: Optional[int] = None) -> "ExactScalar":
        return cls.rational(1, 0, t_cap)

    @classmethod
    def i(cls, t_cap: Optional[int] = None) -> "ExactScalar":
        return cls.rational(0, 1, t_cap)

    @classmethod
    def pi_half(cls, p: int, coeff: RationalLike = 1, t_cap: Optional[int] = None) -> "ExactScalar":
        """``coeff * pi^{p/2}``."""
        return cls({(p, 0): (Fraction(coeff), Fraction(0))}, t_cap)

    @classmethod
    def t_power(cls, j: int, coeff: RationalLike = 1, t_cap: Optional[int] = None) -> "ExactScalar":
        """``coeff * t^j``."""
        return cls({(0, j): (Fraction(coeff), Fraction(0))}, t_cap)

    # -- ring structure ----------------------------------------------------

    def __add__(self, other: "ExactScalar") -> "ExactScalar":
        cap = _min_cap(self.t_cap, other.t_cap)
        if cap is not None and (self.t_cap != cap or other.t_cap != cap):
            return self.truncate_t(cap) + other.truncate_t(cap)
        out = dict(self._terms)
        for key, (re, im) in other._terms.items():
            if key in out:
                a, b = out[key]
                re, im = a + re, b + im
                if re == 0 and im == 0:
                    del out[key]
                    continue
            out[key] = (re, im)
        return ExactScalar._raw(out, cap)

    def __neg__(self) -> "ExactScalar":
        return ExactScalar._raw(
            {k: (-re, -im) for k, (re, im) in self._terms.items()}, self.t_cap
        )

    def __sub__(self, other: "ExactScalar") -> "ExactScalar":
        return self + (-other)

    def __mul__(self, other: "ExactScalar") -> "ExactScalar":
        cap = _min_cap(self.t_cap, other.t_cap)
        out: dict[tuple[int, int], tuple[Fraction, Fraction]] = {}
        for (p1, j1), (a1, b1) in self._terms.items():
            for (p2, j2), (a2, b2) in other._terms.items():
                j = j1 + j2
                if cap is not None and j > cap:
                    continue
                key = (p1 + p2, j)
                re = a1 * a2 - b1 * b2
                im = a1 * b2 + b1 * a2
                if key in out:
                    c, d = out[key]
                    re, im = c + re, d + im
                if re == 0 and im == 0:
                    out.pop(key, None)
                else:
                    out[key] = (re, im)
        return ExactScalar._raw(out, cap)

    def scale(self, q: RationalLike) -> "ExactScalar":
        q = Fraction(q)
        if q == 0:
            return ExactScalar.zero(self.t_cap)
        return ExactScalar._raw(
            {k: (re * q, im * q) for k, (re, im) in self._terms.items()}, self.t_cap
        )

    def conjugate(self) -> "ExactScalar":
        return ExactScalar._raw(
            {k: (re, -im) for k, (re, im) in self._terms.items()}, self.t_cap
        )

    # -- structure queries ---------------------------------------------------

    def is_zero(self) -> bool:
        return not self._terms

    def terms(self) -> Iterator[tuple[tuple[int, int], tuple[Fraction, Fraction]]]:
        return iter(sorted(self._terms.items()))

    def min_t_power(self) -> Optional[int]:
        """Lowest t grade present, or None for the zero scalar."""
        if not self._terms:
            return None
        return min(j for (_, j) in self._terms)

    def max_t_power(self) -> int:
        if not self._terms:
            return 0
        return max(j for (_, j) in self._terms)

    def t_grade(self, j: int) -> "ExactScalar":
        """The sub-sum of terms with t grade exactly ``j`` (t factor kept)."""
        return ExactScalar._raw(
            {k: v for k, v in self._terms.items() if k[1] == j}, self.t_cap
        )

    def truncate_t(self, m: int) -> "ExactScalar":
        if m < 0:
            raise DomainError("truncation order must be >= 0")
        cap = m if self.t_cap is None else min(self.t_cap, m)
        return ExactScalar._raw(
            {k: v for k, v in self._terms.items() if k[1] <= m}, cap
        )

    def rational_part(self) -> tuple[Fraction, Fraction]:
        """Coefficient of the pi-free, t-free term."""
        return self._terms.get((0, 0), (Fraction(0), Fraction(0)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExactScalar):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def to_complex(self, t: float = 1.0) -> complex:
        """Numerical value with pi evaluated and the t grade read at ``t``."""
        total = 0j
        for (p, j), (re, im) in self._terms.items():
            total += complex(re, im) * math.pi ** (p / 2.0) * t**j
        return total

    # -- rendering ---------------------------------------------------------

    def render(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (p, j) in sorted(self._terms, key=lambda k: (k[1], k[0])):
            re, im = self._terms[(p, j)]
            body = _fmt_complex(re, im)
            factors = []
            if p:
                factors.append(f"pi^{{{p}/2}}" if p % 2 else "pi" if p == 2 else f"pi^{p // 2}")
            if j:
                factors.append("t" if j == 1 else f"t^{j}")
            if not factors:
                parts.append(body)
                continue
            if body == "1":
                parts.append(" * ".join(factors))
            elif body == "-1":
                parts.append("-" + " * ".join(factors))
            else:
                if " " in body or body.startswith("-"):
                    body = f"({body})"
                parts.append(" * ".join([body] + factors))
        return " + ".join(parts)

    __str__ = render

    def __repr__(self) -> str:
        return f"ExactScalar({self.render()})"


ZERO = ExactScalar.zero()
ONE = ExactScalar.one()


def gamma_half_pair(two_x: int) -> tuple[Fraction, int]:
    """Gamma(two_x / 2) as (rational coefficient, pi half-power).

    Integer arguments give factorials; half-odd arguments give a rational
    multiple of pi^{1/2}.
    """
    if two_x <= 0:
        raise DomainError("gamma argument must be a positive half-integer")
    if two_x % 2 == 0:
        return Fraction(math.factorial(two_x // 2 - 1)), 0
    # Gamma(1/2) = sqrt(pi); Gamma(x + 1) = x Gamma(x)
    coeff = Fraction(1)
    k = two_x
    while k > 1:
        k -= 2
        coeff *= Fraction(k, 2)
    return coeff, 1


def half_gamma(x: RationalLike) -> ExactScalar:
    """Gamma at a positive half-integer, exactly."""
    x = Fraction(x)
    if x <= 0 or (2 * x).denominator != 1:
        raise DomainError(f"half_gamma is defined for positive half-integers, got {x}")
    coeff, p = gamma_half_pair(int(2 * x))
    return ExactScalar({(p, 0): (coeff, Fraction(0))})


def truncate_t(s: ExactScalar, m: int) -> ExactScalar:
    """Drop all grades above ``m`` and pin the cap there."""
    return s.truncate_t(m)
