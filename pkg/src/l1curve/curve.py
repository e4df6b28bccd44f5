"""Evaluation of the curve ``t -> F_t``.

At dyadic parameters ``F_t`` is an exact polynomial obtained by descending the
binary digits of ``t``. At other rational ``t`` it is the limit of the
projections ``F_{p(r,t)}``; truncating after ``r_max`` terms leaves a tail of
at most ``2^(1-r_max)`` on every disc of radius ``<= r_max``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from decimal import Context, Decimal
from fractions import Fraction
from typing import Iterable

import mpmath
from mpmath import libmp

from .exact import (
    ONE,
    ZERO,
    Polynomial,
    as_fraction,
    eval_gaussian,
    eval_rational,
    parse_rational,
    poly_derivative,
    sup_bound_disc,
    sup_bound_unit,
)
from .schedule import CurveModel

CONVERSION_ALLOWANCE = Fraction(1, 2 ** 50)
DEFAULT_PRECISION = 64


@dataclass(frozen=True)
class Dyadic:
    """Binary point ``i / 2**n`` in canonical form."""

    i: int
    n: int

    def __post_init__(self):
        if self.n < 0 or not 0 <= self.i <= 2 ** self.n:
            raise ValueError(f"{self.i}/2^{self.n} is not a binary point of [0, 1]")
        if self.i % 2 == 0 and (self.i, self.n) not in ((0, 0),):
            raise ValueError(f"{self.i}/2^{self.n} is not in canonical form")

    @classmethod
    def of(cls, value) -> "Dyadic":
        if isinstance(value, Dyadic):
            return value
        q = as_fraction(value)
        den = q.denominator
        if den & (den - 1) or not 0 <= q <= 1:
            raise ValueError(f"{q} is not a binary point of [0, 1]")
        return cls(q.numerator, den.bit_length() - 1)

    @property
    def generation(self) -> int:
        return self.n

    @property
    def value(self) -> Fraction:
        return Fraction(self.i, 2 ** self.n)

    def __str__(self):
        return f"{self.i}/{2 ** self.n}"


def is_dyadic(t) -> bool:
    den = as_fraction(t).denominator
    return den & (den - 1) == 0


def generation(t) -> int:
    return Dyadic.of(t).n


def _check_generation(model: CurveModel, n: int) -> None:
    if n > model.max_generation:
        raise ValueError(f"generation {n} beyond built range (last n_R = {model.max_generation})")


def interval_word(model: CurveModel, n: int, i: int) -> str:
    """Shape word of the generation-``n`` interval ``[(i-1)/2^n, i/2^n]``.

    One letter per direction-change generation ``n_s <= n``: the binary digit
    of the interval's position at generation ``n_s`` (0 -> L, 1 -> R).
    """
    if n < 0:
        raise ValueError("generation must be nonnegative")
    _check_generation(model, n)
    if not 1 <= i <= 2 ** n:
        raise ValueError(f"interval index {i} outside 1..2^{n}")
    j = i - 1
    return "".join("R" if (j >> (n - ns)) & 1 else "L"
                   for ns in model.change_generations if ns <= n)


def shape_word(model: CurveModel, q) -> str:
    """Word of the interval of ``q``'s own generation that ends at ``q``."""
    q = Dyadic.of(q)
    if q.n == 0:
        return ""
    return interval_word(model, q.n, q.i)


def consecutive_difference(model: CurveModel, n: int, i: int) -> Polynomial:
    """``F_{i/2^n} - F_{(i-1)/2^n}``, always ``2^-n`` times a shape density."""
    word = interval_word(model, n, i)
    return Fraction(1, 2 ** n) * model.shape(word).g


def eval_F_dyadic(model: CurveModel, q) -> Polynomial:
    """Exact polynomial ``F_q`` for a binary point ``q``.

    Walks the binary digits of ``q`` from the top; each 1-digit steps over the
    left half of the current interval and adds that half's difference.
    """
    q = Dyadic.of(q)
    if q.i == 2 ** q.n:
        return ONE
    _check_generation(model, q.n)
    changes = set(model.change_generations)
    F = ZERO
    word = ""
    for gen in range(1, q.n + 1):
        bit = (q.i >> (q.n - gen)) & 1
        change = gen in changes
        if bit:
            left = word + "L" if change else word
            F = F + Fraction(1, 2 ** gen) * model.shape(left).g
        if change:
            word += "R" if bit else "L"
    return F


def dyadic_cover(s, t) -> list:
    """Split ``[s, t]`` (binary points, ``s <= t``) into maximal aligned
    dyadic intervals; returns ``(n, i)`` pairs naming ``[(i-1)/2^n, i/2^n]``."""
    s, t = Dyadic.of(s), Dyadic.of(t)
    n = max(s.n, t.n)
    a = s.i << (n - s.n)
    b = t.i << (n - t.n)
    if a > b:
        raise ValueError("expected s <= t")
    out = []
    while a < b:
        k = (a & -a).bit_length() - 1 if a else n
        while a + (1 << k) > b:
            k -= 1
        out.append((n - k, (a >> k) + 1))
        a += 1 << k
    return out


def difference_terms(model: CurveModel, s, t) -> list:
    """``F_t - F_s`` as a list of ``(scale, word)`` with every scale positive.

    Summing ``scale * g_word`` reproduces the difference exactly; nonnegativity
    of each density then certifies ``F_s <= F_t`` pointwise.
    """
    return [(Fraction(1, 2 ** n), interval_word(model, n, i)) for n, i in dyadic_cover(s, t)]


def p_sequence(model: CurveModel, t, r: int) -> Dyadic:
    """Nearest binary point to ``t`` of generation at most ``n_r - 1``.

    Ties go to the smaller point.
    """
    t = as_fraction(t)
    if not 0 <= t <= 1:
        raise ValueError("t must lie in [0, 1]")
    n = model.n(r) - 1
    scale = 2 ** n
    j = math.floor(t * scale)
    lo, hi = Fraction(j, scale), Fraction(j + 1, scale)
    best = lo if t - lo <= hi - t or j == scale else hi
    return Dyadic.of(best)


def projection(model: CurveModel, t, r: int) -> Polynomial:
    return eval_F_dyadic(model, p_sequence(model, t, r))


def series_term(model: CurveModel, t, r: int) -> Polynomial:
    """``F_{p(r+1,t)} - F_{p(r,t)}``; needs ``r + 1 <= levels``."""
    return projection(model, t, r + 1) - projection(model, t, r)


def term_envelope(model: CurveModel, t, r: int) -> Polynomial:
    """Generation-``n_r`` difference whose ``[0, 1]`` multiple is the ``r``-th
    series term (up to sign).

    ``p(r+1, t)`` lies in the generation-``n_r`` interval next to ``p(r, t)``
    that contains ``t``, and between generation-``n_r`` points the projections
    interpolate linearly, so coefficient-sum and disc bounds of this polynomial
    also bound the term. Usable for ``r = levels`` where the term itself is
    out of reach.
    """
    t = as_fraction(t)
    p = p_sequence(model, t, r).value
    n = model.n(r)
    step = Fraction(1, 2 ** n)
    if t == p:
        return ZERO
    right = p + step if t > p else p
    i = int(right * 2 ** n)
    return consecutive_difference(model, n, i)


def _truncation(model: CurveModel, t, r_max: int) -> Fraction:
    t = as_fraction(t)
    if is_dyadic(t) and generation(t) <= model.n(r_max) - 1:
        return Fraction(0)
    return Fraction(2, 2 ** r_max)


def _to_mpf(q: Fraction, prec: int):
    raw = libmp.from_rational(q.numerator, q.denominator, prec, libmp.round_nearest)
    with mpmath.workprec(prec):
        return mpmath.mpf(raw)


def _allowance(magnitude: Fraction, prec: int) -> Fraction:
    # Nearest rounding is off by at most |v| 2^-prec per component.
    return max(CONVERSION_ALLOWANCE, 2 * magnitude / 2 ** prec)


@dataclass(frozen=True)
class EvalResult:
    value: object
    error_bound: Fraction
    truncation: Fraction
    exact: object


def _check_r_max(model: CurveModel, r_max: int) -> None:
    if not 1 <= r_max <= model.levels:
        raise ValueError(f"r_max={r_max} outside 1..{model.levels}")


def eval_F_real(model: CurveModel, t, x, r_max: int | None = None,
                prec: int = DEFAULT_PRECISION) -> EvalResult:
    """Approximate ``F_t(x)`` for rational ``t, x`` in [0, 1]."""
    r_max = model.levels if r_max is None else r_max
    _check_r_max(model, r_max)
    if prec < 64:
        raise ValueError("precision must be at least 64 bits")
    x = as_fraction(x)
    exact = eval_rational(projection(model, t, r_max), x)
    trunc = _truncation(model, t, r_max)
    return EvalResult(_to_mpf(exact, prec), trunc + _allowance(abs(exact), prec), trunc, exact)


def parse_complex(z) -> tuple:
    """Exact ``(re, im)`` from a complex, a pair, or text like ``"1/2+3/4i"``."""
    if isinstance(z, complex):
        return Fraction(z.real), Fraction(z.imag)
    if isinstance(z, tuple):
        return as_fraction(z[0]), as_fraction(z[1])
    if isinstance(z, (int, Fraction)):
        return as_fraction(z), Fraction(0)
    text = str(z).replace(" ", "").replace("j", "i")
    if not text.endswith("i"):
        return parse_rational(text), Fraction(0)
    body = text[:-1]
    cut = max(body.rfind("+"), body.rfind("-"))
    if cut <= 0:
        real, imag = "0", body
    else:
        real, imag = body[:cut], body[cut:]
    if imag in ("", "+", "-"):
        imag += "1"
    return parse_rational(real), parse_rational(imag)


def eval_F_complex(model: CurveModel, t, z, r_max: int | None = None,
                   prec: int = DEFAULT_PRECISION) -> EvalResult:
    """Approximate the entire extension of ``F_t`` at complex ``z``.

    Requires ``|z| <= r_max`` so that every omitted term is controlled.
    """
    r_max = model.levels if r_max is None else r_max
    _check_r_max(model, r_max)
    re, im = parse_complex(z)
    if re * re + im * im > r_max * r_max:
        raise ValueError(f"|z| exceeds r_max={r_max}; omitted terms are not controlled")
    exact = eval_gaussian(projection(model, t, r_max), re, im)
    trunc = _truncation(model, t, r_max)
    with mpmath.workprec(prec):
        value = mpmath.mpc(_to_mpf(exact[0], prec), _to_mpf(exact[1], prec))
    allowance = _allowance(abs(exact[0]), prec) + _allowance(abs(exact[1]), prec)
    return EvalResult(value, trunc + allowance, trunc, exact)


def derivative_head(model: CurveModel, t, m: int, r_max: int) -> Fraction:
    """Coefficient-sum bound of ``F_{p(r_max,t)}^(m)`` on [0, 1]."""
    return sup_bound_unit(poly_derivative(projection(model, t, r_max), m))


def derivative_bound(model: CurveModel, t, m: int, r_max: int | None = None) -> Fraction:
    """Certified upper bound for ``max |F_t^(m)|`` over [0, 1]."""
    if m < 1:
        raise ValueError("m must be >= 1")
    r_max = model.levels if r_max is None else r_max
    _check_r_max(model, r_max)
    return derivative_head(model, t, m, r_max) + model.omega(m) * Fraction(2, 2 ** r_max)


def term_disc_bound(model: CurveModel, t, r: int, radius=None) -> Fraction:
    """Coefficient bound of the ``r``-th series term on the disc of radius
    ``radius`` (default ``r``), exact for ``r < levels`` and via
    :func:`term_envelope` at ``r = levels``."""
    radius = r if radius is None else radius
    term = series_term(model, t, r) if r < model.levels else term_envelope(model, t, r)
    return sup_bound_disc(term, radius)


# -- CSV export --------------------------------------------------------------

_DEC = Context(prec=17)


def decimal17(q) -> str:
    q = as_fraction(q)
    return str(_DEC.divide(Decimal(q.numerator), Decimal(q.denominator)))


def unit_grid(points: int) -> list:
    if points < 1:
        raise ValueError("grid needs at least one point")
    if points == 1:
        return [Fraction(0)]
    return [Fraction(j, points - 1) for j in range(points)]


def sample_rows(model: CurveModel, ts: Iterable, xs: Iterable, r_max: int | None = None):
    xs = [as_fraction(x) for x in xs]
    for t in ts:
        t = as_fraction(t)
        F = projection(model, t, model.levels if r_max is None else r_max)
        trunc = _truncation(model, t, model.levels if r_max is None else r_max)
        for x in xs:
            value = eval_rational(F, x)
            yield t, x, value, trunc + _allowance(abs(value), DEFAULT_PRECISION)


def export_csv(model: CurveModel, ts, xs, r_max: int | None = None, out=None) -> str:
    """Write ``t,x,value,error_bound`` rows; returns the text when ``out`` is None."""
    buf = io.StringIO() if out is None else out
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "x", "value", "error_bound"])
    for t, x, value, err in sample_rows(model, ts, xs, r_max):
        writer.writerow([decimal17(t), decimal17(x), decimal17(value), decimal17(err)])
    return buf.getvalue() if out is None else ""
