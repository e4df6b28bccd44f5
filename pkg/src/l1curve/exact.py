"""Exact rational polynomials, coefficient-sum bounds and bisection enclosures.

Scalars are :class:`fractions.Fraction` throughout. A :class:`Polynomial` is an
immutable dense coefficient tuple in the monomial basis (index ``j`` holds the
coefficient of ``x**j``), normalized so that the zero polynomial is ``()``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence, Union

Number = Union[int, Fraction]


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction (never floats)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` (or a bare integer / decimal literal) into a Fraction.

    Raises:
        ValueError: on a zero denominator or unparsable text.
    """
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        try:
            p, q = int(num), int(den)
        except ValueError:
            raise ValueError(f"malformed rational {text!r}") from None
        if q == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(p, q)
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"malformed rational {text!r}") from None


def format_rational(value: Fraction) -> str:
    """Render a rational as ``"numerator/denominator"`` in lowest terms."""
    value = as_fraction(value)
    return f"{value.numerator}/{value.denominator}"


class Polynomial:
    """Immutable polynomial with exact rational coefficients."""

    __slots__ = ("_coeffs", "_hash")

    def __init__(self, coeffs: Iterable = ()):
        cs = [as_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self._coeffs = tuple(cs)
        self._hash = None

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls((c,))

    @classmethod
    def x(cls) -> "Polynomial":
        return cls((0, 1))

    @property
    def coeffs(self) -> tuple:
        return self._coeffs

    @property
    def degree(self) -> int:
        """Degree, with ``-1`` for the zero polynomial."""
        return len(self._coeffs) - 1

    def is_zero(self) -> bool:
        return not self._coeffs

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self._coeffs == other._coeffs
        if isinstance(other, (int, Fraction)):
            return self._coeffs == Polynomial.constant(other)._coeffs
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._coeffs)
        return self._hash

    def __repr__(self):
        return f"Polynomial([{', '.join(format_rational(c) for c in self._coeffs)}])"

    def __len__(self):
        return len(self._coeffs)

    def __getitem__(self, j):
        return self._coeffs[j]

    def __add__(self, other):
        return poly_add(self, _lift(other))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-c for c in self._coeffs)

    def __sub__(self, other):
        return poly_add(self, -_lift(other))

    def __rsub__(self, other):
        return poly_add(_lift(other), -self)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return poly_mul(self, other)
        c = as_fraction(other)
        return Polynomial(c * a for a in self._coeffs)

    __rmul__ = __mul__

    def __call__(self, x):
        return eval_rational(self, x)

    def to_json(self) -> list:
        return [format_rational(c) for c in self._coeffs]

    @classmethod
    def from_json(cls, items: Sequence[str]) -> "Polynomial":
        if not isinstance(items, list):
            raise ValueError("polynomial must be a JSON array of 'p/q' strings")
        return cls(parse_rational(s) if isinstance(s, str) else as_fraction(s) for s in items)


def _lift(value) -> Polynomial:
    if isinstance(value, Polynomial):
        return value
    return Polynomial.constant(as_fraction(value))


ZERO = Polynomial()
ONE = Polynomial.constant(1)
X = Polynomial.x()


@dataclass(frozen=True)
class Enclosure:
    """Closed rational interval ``[lo, hi]`` certified to contain a real quantity."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, value) -> bool:
        return self.lo <= as_fraction(value) <= self.hi

    def scale(self, factor) -> "Enclosure":
        factor = as_fraction(factor)
        a, b = self.lo * factor, self.hi * factor
        return Enclosure(min(a, b), max(a, b))

    def to_json(self) -> dict:
        return {"lo": format_rational(self.lo), "hi": format_rational(self.hi),
                "width": format_rational(self.width)}


def poly_add(p: Polynomial, q: Polynomial) -> Polynomial:
    a, b = p.coeffs, q.coeffs
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for j, c in enumerate(b):
        out[j] += c
    return Polynomial(out)


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    if p.is_zero() or q.is_zero():
        return ZERO
    a, b = p.coeffs, q.coeffs
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca == 0:
            continue
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return Polynomial(out)


def poly_derivative(p: Polynomial, m: int = 1) -> Polynomial:
    """Exact ``m``-th derivative (``m >= 1``)."""
    if m < 1:
        raise ValueError("derivative order must be >= 1")
    cs = p.coeffs
    if m > len(cs) - 1:
        return ZERO
    out = []
    for j in range(m, len(cs)):
        falling = 1
        for k in range(j - m + 1, j + 1):
            falling *= k
        out.append(cs[j] * falling)
    return Polynomial(out)


def poly_antiderivative(p: Polynomial) -> Polynomial:
    """Antiderivative vanishing at 0."""
    if p.is_zero():
        return ZERO
    return Polynomial([Fraction(0)] + [c / (j + 1) for j, c in enumerate(p.coeffs)])


def integral_01(p: Polynomial) -> Fraction:
    return sum((c / (j + 1) for j, c in enumerate(p.coeffs)), Fraction(0))


def eval_rational(p: Polynomial, x) -> Fraction:
    x = as_fraction(x)
    acc = Fraction(0)
    for c in reversed(p.coeffs):
        acc = acc * x + c
    return acc


def eval_gaussian(p: Polynomial, re, im) -> tuple:
    """Evaluate exactly at the Gaussian rational ``re + i*im``; returns ``(Re, Im)``."""
    re, im = as_fraction(re), as_fraction(im)
    ar, ai = Fraction(0), Fraction(0)
    for c in reversed(p.coeffs):
        ar, ai = ar * re - ai * im + c, ar * im + ai * re
    return ar, ai


def sup_bound_unit(p: Polynomial) -> Fraction:
    """Sum of absolute coefficients, an upper bound for ``max |p|`` on [0, 1]."""
    return sum((abs(c) for c in p.coeffs), Fraction(0))


def sup_bound_disc(p: Polynomial, radius) -> Fraction:
    """Upper bound for ``max |p(z)|`` over the closed disc ``|z| <= radius``."""
    radius = as_fraction(radius)
    if radius <= 0:
        raise ValueError("disc radius must be positive")
    total = Fraction(0)
    power = Fraction(1)
    for c in p.coeffs:
        total += abs(c) * power
        power *= radius
    return total


def isolate_level_crossing(U: Polynomial, level, eps) -> Enclosure:
    """Bracket the point where a nondecreasing ``U`` crosses ``level`` on [0, 1].

    Bisection on dyadic rationals; the returned ``[lo, hi]`` satisfies
    ``U(lo) <= level <= U(hi)`` exactly and ``hi - lo <= eps``.

    Raises:
        ValueError: if ``level`` is not strictly between ``U(0)`` and ``U(1)``,
            or ``eps <= 0``.
    """
    level, eps = as_fraction(level), as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    lo, hi = Fraction(0), Fraction(1)
    if not eval_rational(U, lo) < level < eval_rational(U, hi):
        raise ValueError(f"level {level} is not crossed strictly inside [0, 1]")
    while hi - lo > eps:
        mid = (lo + hi) / 2
        if eval_rational(U, mid) <= level:
            lo = mid
        else:
            hi = mid
    return Enclosure(lo, hi)


def integral_abs_split(U: Polynomial, G: Polynomial, eps) -> Enclosure:
    """Enclose ``int_0^1 |1 - 2U(x)| G(x) dx`` to width at most ``eps``.

    ``G`` must be nonnegative on [0, 1] and ``U`` its normalized cumulative, so
    ``1 - 2U`` changes sign exactly once, at the median ``m``. With ``A`` the
    antiderivative of ``(1 - 2U) G`` the integral is ``2 A(m) - A(0) - A(1)``;
    ``A`` peaks at ``m``, so the endpoint values of the median bracket give a
    lower bound and a Lipschitz step gives the upper one.
    """
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    mass = integral_01(G)
    if mass == 0:
        raise ValueError("G has zero mass on [0, 1]")
    integrand = (ONE - 2 * U) * G
    A = poly_antiderivative(integrand)
    lip = sup_bound_unit(integrand)
    step = eps / (2 * lip) if lip > 0 else eps
    m = isolate_level_crossing(U, Fraction(1, 2), step)
    a_lo, a_hi = eval_rational(A, m.lo), eval_rational(A, m.hi)
    ends = eval_rational(A, 0) + eval_rational(A, 1)
    peak_lo = max(a_lo, a_hi)
    peak_hi = min(a_lo + lip * (m.hi - m.lo), a_hi + lip * (m.hi - m.lo))
    return Enclosure(2 * peak_lo - ends, 2 * peak_hi - ends)
