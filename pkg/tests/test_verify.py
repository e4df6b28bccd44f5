import copy
import random
from fractions import Fraction

import pytest

from l1curve.curve import interval_word
from l1curve.exact import Polynomial
from l1curve.schedule import ScheduleEntry
from l1curve.verify import (
    FAIL,
    INCONCLUSIVE,
    PASS_ENCLOSURE,
    PASS_EXACT,
    bracket_index,
    certified_words,
    check_bisection,
    check_derivative_bounds,
    check_direction_change,
    check_isometry,
    check_midpoint_flat,
    check_secant,
    check_term_bounds,
    clarkson_second_difference,
    exit_status,
    indicator_combination_norm,
    report_document,
    representative_points,
    run_suite,
    secant_probe,
)


def corrupt(model, word="L", j=0, delta=Fraction(1, 1000)):
    bad = copy.deepcopy(model)
    node = bad.shapes[word]
    cs = list(node.g.coeffs)
    cs[j] += delta
    node.g = Polynomial(cs)
    return bad


def decremented(model, r):
    out, n = [], 0
    for e in model.schedule:
        k = e.k - 1 if e.r == r else e.k
        n += k + 1
        out.append(ScheduleEntry(e.r, k, n))
    return model.with_schedule(out)


def test_bisection_constant_region(model3):
    for n in (1, 2):
        for i in range(1, 2 ** n, 2):
            rep = check_bisection(model3, n, i)
            assert rep.verdict == PASS_EXACT
            assert rep.witness["left"] == rep.witness["right"] == Fraction(1, 2 ** n)


def test_bisection_first_change(model3):
    assert check_bisection(model3, 3, 1).verdict == PASS_EXACT


def test_bisection_corrupt_model(model3):
    assert check_bisection(corrupt(model3), 3, 1).verdict == FAIL


def test_bisection_out_of_range(model3):
    with pytest.raises(ValueError):
        check_bisection(model3, 21, 1)
    with pytest.raises(ValueError):
        check_bisection(model3, 3, 2)


def test_direction_change_first_level(model3):
    rep = check_direction_change(model3, 1, 1)
    assert rep.verdict == PASS_ENCLOSURE
    assert rep.witness["enclosure"].contains(Fraction(1, 8))


def test_direction_change_every_shape(model3):
    for r in (1, 2, 3):
        reps = representative_points(model3, r)
        assert len(reps) == 2 ** (r - 1)
        for word, i in reps.items():
            rep = check_direction_change(model3, r, i)
            assert rep.verdict == PASS_ENCLOSURE
            assert rep.witness["word"] == word


def test_direction_change_rejects_zero_eps(model3):
    with pytest.raises(ValueError):
        check_direction_change(model3, 1, 1, 0)
    with pytest.raises(ValueError):
        check_direction_change(model3, 1, 2)


def test_direction_change_corrupt(model3):
    i = representative_points(model3, 3)["RL"]
    assert check_direction_change(model3, 3, i).verdict == PASS_ENCLOSURE
    assert check_direction_change(corrupt(model3, "RL", 1), 3, i).verdict == FAIL


def test_midpoint_generations_are_flat(model3):
    rng = random.Random(3)
    for n in (1, 2, 4, 8, 12, 19):
        i = 2 * rng.randrange(2 ** (n - 1)) + 1
        assert check_midpoint_flat(model3, n, i).verdict == PASS_EXACT
    with pytest.raises(ValueError):
        check_midpoint_flat(model3, 3, 1)


def test_isometry_examples(model3):
    rep = check_isometry(model3, Fraction(1, 4), Fraction(1, 2))
    assert rep.verdict == PASS_EXACT and rep.witness["integral"] == Fraction(1, 4)
    assert check_isometry(model3, 0, 1).verdict == PASS_EXACT


def test_isometry_random_pairs(model3):
    rng = random.Random(11)
    certified = certified_words(model3)
    for _ in range(50):
        n = rng.randint(1, 20)
        a, b = sorted(rng.sample(range(2 ** n + 1), 2))
        assert check_isometry(model3, Fraction(a, 2 ** n), Fraction(b, 2 ** n), certified).verdict == PASS_EXACT


def test_isometry_detects_uncertified_shape(model3):
    bad = copy.deepcopy(model3)
    node = bad.shapes["LR"]
    node.U = node.U + Polynomial([0, Fraction(1, 100)])  # density intact, cumulative broken
    assert "LR" not in certified_words(bad)
    assert interval_word(bad, 9, 2) == "LR"
    rep = check_isometry(bad, Fraction(1, 2 ** 9), Fraction(2, 2 ** 9))
    assert rep.witness["integral"] == Fraction(1, 2 ** 9)
    assert rep.verdict == FAIL


def test_term_bounds_pass(model3):
    for r in (1, 2, 3):
        assert check_term_bounds(model3, r).verdict == PASS_EXACT


def test_term_bounds_first_level_values(model1):
    # generation-3 differences are (1-x)/4 and x/4
    rep = check_term_bounds(model1, 1)
    assert rep.verdict == PASS_EXACT
    assert rep.witness["worst_ratio"] == 1


@pytest.mark.parametrize("r", [1, 2, 3])
def test_term_bounds_negative_control(model3, r):
    assert check_term_bounds(decremented(model3, r), r).verdict == FAIL


def test_derivative_bounds(model3):
    rep = check_derivative_bounds(model3, Fraction(1, 4), 7)
    assert rep.verdict == PASS_ENCLOSURE
    assert all(row["head"] == 0 for row in rep.witness["bounds"])
    assert check_derivative_bounds(model3, Fraction(1, 3), 40).verdict == PASS_ENCLOSURE
    # regression fixture: observed verdict at t = 1/3
    assert check_derivative_bounds(model3, Fraction(1, 3), 7).verdict == PASS_ENCLOSURE


def test_derivative_bounds_inconclusive_not_fail(model3):
    coarse = model3.with_schedule(decremented(model3, 2).schedule)
    rep = check_derivative_bounds(coarse, Fraction(1, 3), 7)
    assert rep.verdict in (PASS_ENCLOSURE, INCONCLUSIVE)
    assert rep.verdict != FAIL


@pytest.mark.parametrize("t", [Fraction(1, 3), Fraction(0), Fraction(1), Fraction(5, 11)])
def test_secant_probe_contains_one(model3, t):
    probes = secant_probe(model3, t)
    assert [r for r, _, _ in probes] == [1, 2, 3]
    for r, i, enc in probes:
        n = model3.n(r)
        assert Fraction(i - 1, 2 ** n) <= t <= Fraction(i + 1, 2 ** n)
        assert enc.contains(1) and enc.width <= Fraction(1, 2 ** 10)
    assert check_secant(model3, t).verdict == PASS_ENCLOSURE


def test_bracket_index():
    assert bracket_index(0, 3) == 1
    assert bracket_index(1, 3) == 7
    assert bracket_index(Fraction(1, 3), 3) == 3


def test_clarkson():
    assert clarkson_second_difference(1, 1) == 1
    assert clarkson_second_difference(3, 5) == Fraction(1, 4)
    for n in range(1, 7):
        for i in range(1, 2 ** n, 2):
            assert 2 ** n * clarkson_second_difference(n, i) == 2
    with pytest.raises(ValueError):
        clarkson_second_difference(3, 4)


def test_indicator_norm_brute_force():
    # independent midpoint sampling on a fine grid
    terms = [(1, Fraction(1, 4)), (1, Fraction(3, 4)), (-2, Fraction(1, 2))]
    N = 64
    sampled = sum(abs(sum(c for c, a in terms if Fraction(2 * j + 1, 2 * N) <= a)) for j in range(N))
    assert indicator_combination_norm(terms) == Fraction(sampled, N)


def test_run_suite_all_pass(model3):
    reports = run_suite(model3, seed=5)
    doc = report_document(reports)
    assert doc["summary"]["fail"] == 0 and doc["summary"]["inconclusive"] == 0
    assert exit_status(reports) == 0
    names = {rep.name for rep in reports}
    assert names >= {"bisection", "direction-change", "midpoint-flat", "isometry",
                     "term-bounds", "derivative-bounds", "secant"}


def test_run_suite_corrupt_fails(model3):
    reports = run_suite(corrupt(model3, "R", 1), ["bisection", "isometry"], seed=1)
    assert exit_status(reports) == 1


def test_run_suite_rejects_unknown(model3):
    with pytest.raises(ValueError):
        run_suite(model3, ["nope"])
