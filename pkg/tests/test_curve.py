from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l1curve.curve import (
    Dyadic,
    consecutive_difference,
    decimal17,
    derivative_bound,
    derivative_head,
    difference_terms,
    dyadic_cover,
    eval_F_complex,
    eval_F_dyadic,
    eval_F_real,
    export_csv,
    interval_word,
    p_sequence,
    parse_complex,
    projection,
    series_term,
    shape_word,
    term_disc_bound,
    term_envelope,
)
from l1curve.exact import (
    ONE,
    ZERO,
    Polynomial,
    eval_rational,
    integral_01,
    poly_antiderivative,
    poly_derivative,
    sup_bound_disc,
    sup_bound_unit,
)

unit_rationals = st.fractions(min_value=0, max_value=1, max_denominator=1000)


def grid_oracle(change_generations, top):
    """Materialize F on every binary point up to generation ``top`` straight
    from the midpoint and cumulative-split rules."""
    F = {(0, 0): ZERO, (1, 0): ONE}
    values = {Fraction(0): ZERO, Fraction(1): ONE}
    for n in range(1, top + 1):
        N = 2 ** n
        for i in range(1, N, 2):
            lo, hi = values[Fraction(i - 1, N)], values[Fraction(i + 1, N)]
            if n in change_generations:
                G = hi - lo
                U = poly_antiderivative(G) * (1 / integral_01(G))
                mid = U * lo + (ONE - U) * hi
            else:
                mid = Fraction(1, 2) * (lo + hi)
            values[Fraction(i, N)] = mid
    return values


@pytest.fixture(scope="module")
def grid2(model2):
    return grid_oracle(set(model2.change_generations), model2.max_generation)


def test_dyadic_canonical():
    assert Dyadic.of(Fraction(3, 8)) == Dyadic(3, 3)
    assert Dyadic.of(0).generation == 0
    assert Dyadic.of(1) == Dyadic(1, 0)
    with pytest.raises(ValueError):
        Dyadic(2, 3)
    with pytest.raises(ValueError):
        Dyadic.of(Fraction(1, 3))
    with pytest.raises(ValueError):
        Dyadic(9, 3)


def test_shape_words(model1):
    assert interval_word(model1, 3, 1) == "L"
    assert interval_word(model1, 3, 8) == "R"
    assert interval_word(model1, 2, 1) == ""
    assert shape_word(model1, Fraction(1, 8)) == "L"
    assert shape_word(model1, Fraction(1, 4)) == ""
    with pytest.raises(ValueError):
        interval_word(model1, 4, 1)


def test_constant_prefix(model3):
    k1 = model3.k(1)
    for n in range(1, k1 + 1):
        for i in range(2 ** n + 1):
            assert eval_F_dyadic(model3, Fraction(i, 2 ** n)) == Polynomial([Fraction(i, 2 ** n)])
        for i in range(1, 2 ** n + 1):
            assert consecutive_difference(model3, n, i) == Polynomial([Fraction(1, 2 ** n)])


def test_first_change_point(model1):
    # descent sum versus the direct split with F_0 = 0, F_1/4 = 1/4
    U1 = Polynomial([0, 1])
    direct = U1 * ZERO + (ONE - U1) * Polynomial([Fraction(1, 4)])
    assert eval_F_dyadic(model1, Fraction(1, 8)) == direct == Polynomial([Fraction(1, 4), Fraction(-1, 4)])
    assert consecutive_difference(model1, 3, 1) == direct


def test_endpoints(model3):
    assert eval_F_dyadic(model3, 0) == ZERO
    assert eval_F_dyadic(model3, 1) == ONE


def test_descent_matches_grid_oracle(model2, grid2):
    for q, poly in grid2.items():
        assert eval_F_dyadic(model2, q) == poly, q


def test_consecutive_differences_against_grid(model2, grid2):
    for n in range(1, model2.max_generation + 1):
        N = 2 ** n
        for i in range(1, N + 1):
            d = consecutive_difference(model2, n, i)
            assert d == grid2[Fraction(i, N)] - grid2[Fraction(i - 1, N)]
            assert integral_01(d) == Fraction(1, N)


def test_generation_beyond_range(model1):
    with pytest.raises(ValueError):
        eval_F_dyadic(model1, Fraction(1, 16))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 20), st.data())
def test_telescoping(model3_h, n, data):
    i = data.draw(st.integers(1, 2 ** n))
    lhs = eval_F_dyadic(model3_h, Fraction(i, 2 ** n)) - eval_F_dyadic(model3_h, Fraction(i - 1, 2 ** n))
    assert lhs == consecutive_difference(model3_h, n, i)


@pytest.fixture(scope="module")
def model3_h(model3):
    return model3


def test_dyadic_cover_sums():
    cover = dyadic_cover(Fraction(3, 16), Fraction(13, 16))
    assert sum(Fraction(1, 2 ** n) for n, _ in cover) == Fraction(10, 16)
    assert dyadic_cover(Fraction(1, 2), Fraction(1, 2)) == []
    assert dyadic_cover(0, 1) == [(0, 1)]


def test_difference_terms_reassemble(model3):
    s, t = Fraction(5, 2 ** 20), Fraction(700001, 2 ** 20)
    terms = difference_terms(model3, s, t)
    total = sum((c * model3.shape(w).g for c, w in terms), ZERO)
    assert total == eval_F_dyadic(model3, t) - eval_F_dyadic(model3, s)


def test_p_sequence_examples(model1):
    assert p_sequence(model1, Fraction(1, 3), 1).value == Fraction(1, 4)
    assert p_sequence(model1, Fraction(3, 4), 1).value == Fraction(3, 4)
    assert p_sequence(model1, Fraction(3, 8), 1).value == Fraction(1, 4)
    assert p_sequence(model1, 1, 1).value == 1


@settings(max_examples=100, deadline=None)
@given(unit_rationals)
def test_p_sequence_distance(model3_h, t):
    for r in range(1, 4):
        p = p_sequence(model3_h, t, r)
        assert abs(t - p.value) <= Fraction(1, 2 ** model3_h.n(r))
        assert p.generation <= model3_h.n(r) - 1


def test_eval_real_constant_region(model3):
    res = eval_F_real(model3, Fraction(1, 4), Fraction(7, 10), 1)
    assert res.exact == Fraction(1, 4) and res.truncation == 0
    res = eval_F_real(model3, 0, Fraction(1, 2), 3)
    assert res.exact == 0 and res.truncation == 0
    assert res.value == 0


def test_eval_real_series_head(model3):
    t = Fraction(12345, 2 ** 19)
    x = Fraction(2, 7)
    res = eval_F_real(model3, t, x, 3)
    assert res.exact == eval_rational(eval_F_dyadic(model3, t), x)
    assert res.truncation == 0


def test_eval_real_successive(model3):
    t, x = Fraction(1, 3), Fraction(1, 2)
    a = eval_F_real(model3, t, x, 3)
    b = eval_F_real(model3, t, x, 2)
    assert abs(a.exact - b.exact) <= Fraction(2, 2 ** 2)
    assert a.error_bound >= Fraction(1, 4)
    assert abs(a.value - mpmath.mpf(a.exact.numerator) / a.exact.denominator) <= float(a.error_bound)


def test_eval_real_rejects_r_max(model3):
    with pytest.raises(ValueError):
        eval_F_real(model3, Fraction(1, 3), 0, 4)
    with pytest.raises(ValueError):
        eval_F_real(model3, Fraction(1, 3), 0, 3, prec=53)


def test_eval_complex(model3):
    res = eval_F_complex(model3, Fraction(1, 4), 0, 1)
    assert res.exact == (Fraction(1, 4), 0)
    real = eval_F_real(model3, Fraction(1, 3), 1, 3)
    cplx = eval_F_complex(model3, Fraction(1, 3), "1+0i", 3)
    assert cplx.exact == (real.exact, 0)
    with pytest.raises(ValueError):
        eval_F_complex(model3, Fraction(1, 3), "2+2i", 2)


def test_parse_complex():
    assert parse_complex("1/2+3/4i") == (Fraction(1, 2), Fraction(3, 4))
    assert parse_complex("i") == (0, 1)
    assert parse_complex("-i") == (0, -1)
    assert parse_complex("2") == (2, 0)
    assert parse_complex(1j) == (0, 1)


def test_partial_sums_on_unit_disc(model3):
    t = Fraction(1, 3)
    for z in [(0, 1), (Fraction(7, 10), Fraction(7, 10))]:
        for r in (1, 2):
            a = eval_F_complex(model3, t, z, r + 1).exact
            b = eval_F_complex(model3, t, z, max(r, 1)).exact
            diff2 = (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2
            assert diff2 <= Fraction(1, 4 ** r)


@settings(max_examples=40, deadline=None)
@given(unit_rationals)
def test_series_terms_obey_bounds(model3_h, t):
    for r in (1, 2):
        term = series_term(model3_h, t, r)
        assert sup_bound_disc(term, r) <= Fraction(1, 2 ** r)
        for m in range(1, term.degree + 1):
            assert sup_bound_unit(poly_derivative(term, m)) <= model3_h.omega(m) / 2 ** r
        env = term_envelope(model3_h, t, r)
        assert sup_bound_disc(term, r) <= sup_bound_disc(env, r)
    assert term_disc_bound(model3_h, t, 3) <= Fraction(1, 8)


def test_term_envelope_is_parallel(model3):
    t = Fraction(1, 3)
    for r in (1, 2):
        term, env = series_term(model3, t, r), term_envelope(model3, t, r)
        lam = integral_01(term) / integral_01(env)
        assert abs(lam) <= 1
        assert term == lam * env


def test_derivative_bound_examples(model3):
    for m in range(1, 5):
        assert derivative_bound(model3, Fraction(1, 4), m, 1) == model3.omega(m)
        assert derivative_head(model3, Fraction(1, 4), m, 3) == 0
    assert derivative_bound(model3, Fraction(1, 3), 20, 3) == Fraction(1, 4)
    for m in range(1, 8):
        assert derivative_bound(model3, Fraction(1, 3), m, 3) <= 1


def test_monotone_grid_values(model2, grid2):
    xs = [Fraction(j, 8) for j in range(9)]
    points = sorted(grid2)
    for x in xs:
        vals = [eval_rational(grid2[q], x) for q in points]
        assert vals == sorted(vals)
        assert 0 <= vals[0] and vals[-1] <= 1


def test_csv_export(model3):
    text = export_csv(model3, [0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1],
                      [Fraction(j, 100) for j in range(101)])
    lines = text.strip().splitlines()
    assert lines[0] == "t,x,value,error_bound"
    assert len(lines) == 1 + 505
    assert export_csv(model3, [], [0]) == "t,x,value,error_bound\n"
    assert decimal17(Fraction(1, 3)) == "0.33333333333333333"
