"""Checks of the construction's claims on a built model.

Verdicts:

* ``pass-exact``: established by exact rational identities;
* ``pass-enclosure``: established by a rigorous rational enclosure;
* ``inconclusive``: a coefficient-sum bound was too coarse to decide;
* ``fail``: an exact contradiction (never issued on a coarse bound).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .curve import (
    Dyadic,
    derivative_bound,
    derivative_head,
    difference_terms,
    eval_F_dyadic,
    interval_word,
)
from .exact import (
    ONE,
    ZERO,
    Enclosure,
    Polynomial,
    as_fraction,
    format_rational,
    integral_01,
    integral_abs_split,
    poly_antiderivative,
    poly_derivative,
    sup_bound_disc,
    sup_bound_unit,
)
from .schedule import CurveModel

PASS_EXACT = "pass-exact"
PASS_ENCLOSURE = "pass-enclosure"
INCONCLUSIVE = "inconclusive"
FAIL = "fail"
VERDICTS = (PASS_EXACT, PASS_ENCLOSURE, INCONCLUSIVE, FAIL)

SUITES = ("bisection", "direction-change", "isometry", "term-bounds",
          "derivative-bounds", "secant")

DEFAULT_EPS = Fraction(1, 2 ** 20)
DEFAULT_T_VALUES = (Fraction(1, 3), Fraction(2, 7), Fraction(5, 11), Fraction(1, 4))


@dataclass
class CheckReport:
    name: str
    params: dict
    verdict: str
    witness: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict in (PASS_EXACT, PASS_ENCLOSURE)

    def to_json(self) -> dict:
        return {"check": self.name, "params": _jsonable(self.params),
                "verdict": self.verdict, "witness": _jsonable(self.witness)}


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, Enclosure):
        return obj.to_json()
    if isinstance(obj, Polynomial):
        return obj.to_json()
    if isinstance(obj, Dyadic):
        return format_rational(obj.value)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _F(model: CurveModel, i: int, n: int) -> Polynomial:
    return eval_F_dyadic(model, Fraction(i, 2 ** n))


def _check_odd_point(model: CurveModel, n: int, i: int) -> None:
    if n < 1 or n > model.max_generation:
        raise ValueError(f"generation {n} outside 1..{model.max_generation}")
    if i % 2 == 0 or not 1 <= i <= 2 ** n - 1:
        raise ValueError(f"i={i} must be odd with 1 <= i <= 2^{n} - 1")


# -- structural nonnegativity --------------------------------------------------

def certified_words(model: CurveModel) -> set:
    """Words whose density is certified nonnegative on [0, 1].

    The root density must be the constant 1. A child is certified when its
    parent is, the parent's cumulative is exactly the antiderivative of its
    density with total mass 1, and the child equals ``2 (1 - U) g`` (L) or
    ``2 U g`` (R). Such a cumulative runs monotonically from 0 to 1, so both
    factors are nonnegative.
    """
    good = set()
    root = model.shapes.get("")
    if root is None or root.g != ONE:
        return good
    stack = [""]
    while stack:
        word = stack.pop()
        node = model.shapes[word]
        if node.U != poly_antiderivative(node.g) or integral_01(node.g) != 1:
            continue
        good.add(word)
        for letter, factor in (("L", 2 * (ONE - node.U)), ("R", 2 * node.U)):
            child = model.shapes.get(word + letter)
            if child is not None and child.g == factor * node.g:
                stack.append(word + letter)
    return good


def nonnegativity_certificate(model: CurveModel, s, t, certified=None) -> tuple:
    """Decompose ``F_t - F_s`` into positively scaled certified densities.

    Returns ``(ok, terms)``; ``ok`` requires every word to be certified and
    the scaled sum to equal the difference exactly.
    """
    certified = certified_words(model) if certified is None else certified
    terms = difference_terms(model, s, t)
    total = ZERO
    for scale, word in terms:
        total = total + scale * model.shape(word).g
    ok = all(word in certified for _, word in terms)
    ok = ok and total == eval_F_dyadic(model, t) - eval_F_dyadic(model, s)
    return ok, terms


# -- individual checks --------------------------------------------------------

def check_bisection(model: CurveModel, n: int, i: int) -> CheckReport:
    """Both halves around ``i/2^n`` carry area exactly ``2^-n``."""
    _check_odd_point(model, n, i)
    lo, mid, hi = _F(model, i - 1, n), _F(model, i, n), _F(model, i + 1, n)
    left, right = integral_01(mid - lo), integral_01(hi - mid)
    target = Fraction(1, 2 ** n)
    verdict = PASS_EXACT if left == right == target else FAIL
    return CheckReport("bisection", {"n": n, "i": i}, verdict,
                       {"left": left, "right": right, "expected": target})


def second_difference(model: CurveModel, n: int, i: int) -> Polynomial:
    return _F(model, i - 1, n) + _F(model, i + 1, n) - 2 * _F(model, i, n)


def check_direction_change(model: CurveModel, r: int, i: int, eps=None) -> CheckReport:
    """Enclose ``||F_{(i-1)/2^n} + F_{(i+1)/2^n} - 2F_{i/2^n}||_1`` at ``n = n_r``
    and compare with ``2^-n``."""
    n = model.n(r)
    _check_odd_point(model, n, i)
    eps = Fraction(1, 2 ** (n + 10)) if eps is None else as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    params = {"r": r, "n": n, "i": i, "eps": eps}
    lo, mid, hi = _F(model, i - 1, n), _F(model, i, n), _F(model, i + 1, n)
    G = hi - lo
    mass = integral_01(G)
    target = Fraction(1, 2 ** n)
    if mass != 2 * target:
        return CheckReport("direction-change", params, FAIL, {"mass": mass})
    U = poly_antiderivative(G) * (1 / mass)
    D2 = lo + hi - 2 * mid
    if D2 != (2 * U - ONE) * G:
        return CheckReport("direction-change", params, FAIL,
                           {"reason": "midpoint is not the cumulative split"})
    word = interval_word(model, n - 1, (i + 1) // 2)
    if word not in certified_words(model) or G != 2 * target * model.shape(word).g:
        return CheckReport("direction-change", params, FAIL,
                           {"reason": "difference lacks a nonnegativity certificate"})
    enc = integral_abs_split(U, G, eps)
    if not enc.contains(target):
        verdict = FAIL
    elif enc.width > eps:
        verdict = INCONCLUSIVE
    else:
        verdict = PASS_ENCLOSURE
    return CheckReport("direction-change", params, verdict,
                       {"enclosure": enc, "expected": target, "word": word})


def check_midpoint_flat(model: CurveModel, n: int, i: int) -> CheckReport:
    """At a midpoint generation the second difference vanishes identically."""
    _check_odd_point(model, n, i)
    if n in model.change_generations:
        raise ValueError(f"generation {n} is a direction-change generation")
    D2 = second_difference(model, n, i)
    return CheckReport("midpoint-flat", {"n": n, "i": i}, PASS_EXACT if D2.is_zero() else FAIL,
                       {"second_difference": D2})


def check_isometry(model: CurveModel, s, t, certified=None) -> CheckReport:
    """``int (F_t - F_s) = t - s`` exactly, with a nonnegativity certificate."""
    s, t = Dyadic.of(s), Dyadic.of(t)
    if not s.value < t.value:
        raise ValueError("expected s < t")
    diff = eval_F_dyadic(model, t) - eval_F_dyadic(model, s)
    norm = integral_01(diff)
    ok, terms = nonnegativity_certificate(model, s, t, certified)
    verdict = PASS_EXACT if ok and norm == t.value - s.value else FAIL
    return CheckReport("isometry", {"s": s, "t": t}, verdict,
                       {"integral": norm, "expected": t.value - s.value,
                        "certificate_terms": len(terms), "certified": ok})


def check_term_bounds(model: CurveModel, r: int) -> CheckReport:
    """Every generation-``n_r`` difference obeys ``|D^(m)| <= omega_m / 2^r`` on
    [0, 1] and ``|D| <= 2^-r`` on the disc of radius ``r`` (coefficient sums)."""
    n = model.n(r)
    scale = Fraction(1, 2 ** n)
    cap = Fraction(1, 2 ** r)
    worst_ratio = Fraction(0)
    violations = []
    for node in model.nodes_at_depth(r):
        D = scale * node.g
        disc = sup_bound_disc(D, r)
        worst_ratio = max(worst_ratio, disc / cap)
        if disc > cap:
            violations.append({"word": node.word, "m": 0, "bound": disc, "limit": cap})
        for m in range(1, D.degree + 1):
            b = sup_bound_unit(poly_derivative(D, m))
            limit = model.omega(m) * cap
            worst_ratio = max(worst_ratio, b / limit)
            if b > limit:
                violations.append({"word": node.word, "m": m, "bound": b, "limit": limit})
    return CheckReport("term-bounds", {"r": r, "n": n}, FAIL if violations else PASS_EXACT,
                       {"worst_ratio": worst_ratio, "violations": violations[:8]})


def check_derivative_bounds(model: CurveModel, t, m_max: int) -> CheckReport:
    """Certified ``max |F_t^(m)| <= omega_m`` for ``m = 1..m_max``."""
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    t = as_fraction(t)
    R = model.levels
    rows = []
    verdict = PASS_ENCLOSURE
    for m in range(1, m_max + 1):
        bound = derivative_bound(model, t, m, R)
        head = derivative_head(model, t, m, R)
        rows.append({"m": m, "head": head, "bound": bound, "omega": model.omega(m)})
        if bound > model.omega(m):
            verdict = INCONCLUSIVE
    return CheckReport("derivative-bounds", {"t": t, "m_max": m_max, "r_max": R}, verdict,
                       {"bounds": rows})


def bracket_index(t, n: int) -> int:
    """Odd ``i`` with ``t`` in ``[(i-1)/2^n, (i+1)/2^n]``."""
    t = as_fraction(t)
    N = 2 ** n
    j = min(int(t * N), N - 1)
    return j if j % 2 else j + 1


def secant_probe(model: CurveModel, t, eps=None) -> list:
    """Scaled second differences ``2^n_r ||...||_1`` bracketing ``t``.

    Returns ``(r, i, enclosure)`` per level; each enclosure should contain 1.
    ``eps`` is the width wanted for the scaled enclosure (default ``2^-10``).
    """
    eps = Fraction(1, 2 ** 10) if eps is None else as_fraction(eps)
    out = []
    for r in range(1, model.levels + 1):
        n = model.n(r)
        i = bracket_index(t, n)
        rep = check_direction_change(model, r, i, eps / 2 ** n)
        enc = rep.witness.get("enclosure")
        out.append((r, i, enc.scale(2 ** n) if enc is not None else None))
    return out


def check_secant(model: CurveModel, t, eps=None) -> CheckReport:
    probes = secant_probe(model, t, eps)
    ok = all(enc is not None and enc.contains(1) for _, _, enc in probes)
    return CheckReport("secant", {"t": as_fraction(t)}, PASS_ENCLOSURE if ok else FAIL,
                       {"probes": [{"r": r, "i": i, "ratio": enc} for r, i, enc in probes]})


def indicator_combination_norm(terms) -> Fraction:
    """L1 norm on [0, 1] of ``sum c * 1_[0, a]`` for ``(c, a)`` pairs."""
    cuts = sorted({Fraction(0), Fraction(1)} | {as_fraction(a) for _, a in terms})
    total = Fraction(0)
    for left, right in zip(cuts, cuts[1:]):
        height = sum((as_fraction(c) for c, a in terms if a >= right), Fraction(0))
        total += abs(height) * (right - left)
    return total


def clarkson_second_difference(n: int, i: int) -> Fraction:
    """``||1_[0,(i-1)/2^n] + 1_[0,(i+1)/2^n] - 2 * 1_[0,i/2^n]||_1``."""
    if i % 2 == 0 or not 1 <= i <= 2 ** n - 1:
        raise ValueError(f"i={i} must be odd with 1 <= i <= 2^{n} - 1")
    N = 2 ** n
    return indicator_combination_norm([(1, Fraction(i - 1, N)), (1, Fraction(i + 1, N)),
                                       (-2, Fraction(i, N))])


# -- suites -------------------------------------------------------------------

def representative_points(model: CurveModel, r: int) -> dict:
    """One odd index at generation ``n_r`` per parent shape word of depth ``r-1``."""
    n = model.n(r)
    parents = {}
    for node in model.nodes_at_depth(r - 1):
        j = 0
        for letter, ns in zip(node.word, model.change_generations):
            if letter == "R":
                j |= 1 << (n - 1 - ns)
        parents[node.word] = 2 * j + 1
    return parents


def _random_dyadic(rng: random.Random, max_gen: int) -> Fraction:
    n = rng.randint(0, max_gen)
    return Fraction(rng.randint(0, 2 ** n), 2 ** n)


def run_suite(model: CurveModel, suites=SUITES, *, eps=DEFAULT_EPS, seed: int = 0,
              t_values=DEFAULT_T_VALUES, isometry_pairs: int = 200,
              exhaustive_cap: int = 8, m_max: int | None = None) -> list:
    """Run the selected check families; deterministic for a given seed."""
    unknown = set(suites) - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suites: {sorted(unknown)}")
    rng = random.Random(seed)
    eps = as_fraction(eps)
    R = model.levels
    top = model.max_generation
    reports = []
    if "bisection" in suites:
        cap = min(top, exhaustive_cap)
        for n in range(1, cap + 1):
            for i in range(1, 2 ** n, 2):
                reports.append(check_bisection(model, n, i))
        for _ in range(64 if top > cap else 0):
            n = rng.randint(cap + 1, top)
            reports.append(check_bisection(model, n, 2 * rng.randrange(2 ** (n - 1)) + 1))
    if "direction-change" in suites:
        for r in range(1, R + 1):
            # eps is relative to the expected norm 2^-n_r
            n = model.n(r)
            for i in representative_points(model, r).values():
                reports.append(check_direction_change(model, r, i, eps / 2 ** n))
        flat = [n for n in range(1, top + 1) if n not in model.change_generations]
        for _ in range(5 if flat else 0):
            n = rng.choice(flat)
            reports.append(check_midpoint_flat(model, n, 2 * rng.randrange(2 ** (n - 1)) + 1))
    if "isometry" in suites:
        certified = certified_words(model)
        for _ in range(isometry_pairs):
            s, t = _random_dyadic(rng, top), _random_dyadic(rng, top)
            while s == t:
                t = _random_dyadic(rng, top)
            s, t = min(s, t), max(s, t)
            reports.append(check_isometry(model, s, t, certified))
    if "term-bounds" in suites:
        for r in range(1, R + 1):
            reports.append(check_term_bounds(model, r))
    if "derivative-bounds" in suites:
        mm = 2 ** R if m_max is None else m_max
        for t in t_values:
            reports.append(check_derivative_bounds(model, t, mm))
    if "secant" in suites:
        for t in t_values:
            reports.append(check_secant(model, t))
    return reports


def summarize(reports) -> dict:
    counts = {v: 0 for v in VERDICTS}
    for rep in reports:
        counts[rep.verdict] += 1
    return counts


def report_document(reports) -> dict:
    return {"checks": [rep.to_json() for rep in reports], "summary": summarize(reports)}


def exit_status(reports, allow_inconclusive: bool = False) -> int:
    counts = summarize(reports)
    if counts[FAIL] or (counts[INCONCLUSIVE] and not allow_inconclusive):
        return 1
    return 0
