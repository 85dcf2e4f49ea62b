import math
from fractions import Fraction as F

import pytest

from mmeixner.errors import DomainError, ParameterError
from mmeixner.polyfam import CharlierParams, MeixnerFirstParams, MeixnerSecondParams, meixner_classical
from mmeixner.summability import (
    CONVERGES,
    DIVERGES,
    INCONCLUSIVE,
    box_sum,
    classical_closed_form,
    classify,
    duality_check,
    expected_verdict,
    meixner_at_zero,
    norm_series_partials,
    normalization_constant,
    radius_probe,
    region_membership,
)

# admissible (kind, params, t) choices for r = 1, 2, 3
ADMISSIBLE = [
    ("first", MeixnerFirstParams(1, [F(1, 2)]), [F(1, 2)]),
    ("first", MeixnerFirstParams(1, [F(1, 3), F(1, 2)]), [2, F(1, 10)]),
    ("second", MeixnerSecondParams([F(1, 2)], F(1, 2)), [F(1, 2)]),
    ("second", MeixnerSecondParams([F(1, 2), F(3, 4)], F(1, 2)), [F(1, 2), F(1, 2)]),
    ("charlier", CharlierParams([1, F(5, 2)]), [1, 1]),
]


def test_region_membership():
    p = MeixnerFirstParams(1, [F(1, 3), F(1, 2)])
    m = region_membership("first", [2, F(1, 10)], p)
    assert m.in_a and m.in_b == (True, False) and m.admissible
    assert not region_membership("first", [1, 1], p).in_a
    q = MeixnerSecondParams([F(1, 2), F(3, 4)], F(1, 2))
    assert not region_membership("second", [F(1, 8), F(1, 8)], q).admissible
    with pytest.raises(ParameterError):
        region_membership("second", [0, 1], q)


def test_expected_verdict():
    assert expected_verdict(3) == CONVERGES
    assert expected_verdict(F(1, 2)) == DIVERGES
    assert expected_verdict(-1) == DIVERGES


@pytest.mark.parametrize("kind,p,t", ADMISSIBLE)
def test_dichotomy(kind, p, t):
    assert region_membership(kind, t, p).admissible
    for x in (0, 1, 2, F(1, 2), F(3, 2)):
        probe = norm_series_partials(kind, x, t, p)
        assert probe.verdict == expected_verdict(x), (kind, x)


def test_classifier_edge_cases():
    assert classify([F(1)] * 3, [F(1)] * 3, F(1, 1000)) == INCONCLUSIVE
    grow = [F(2) ** k for k in range(12)]
    assert classify(grow, grow, F(1, 1000)) == DIVERGES
    halves = [F(1, 2**k) for k in range(30)]
    partial = [sum(halves[: i + 1]) for i in range(30)]
    assert classify(partial, halves, F(1, 1000)) == CONVERGES


def test_charlier_zero_gives_e():
    probe = norm_series_partials("charlier", 0, [1], CharlierParams([1]), depth=30)
    assert abs(float(probe.partials[-1]) - math.e) < 1e-12


@pytest.mark.parametrize("beta", [F(1, 2), 1, F(5, 2)])
@pytest.mark.parametrize("c", [F(1, 3), F(1, 4)])
def test_closed_form_limit(beta, c):
    p = MeixnerFirstParams(beta, [c])
    t = [(1 - c) ** 2 / c]
    for k in range(4):
        probe = norm_series_partials("first", k, t, p, depth=60)
        assert abs(float(probe.partials[-1]) - classical_closed_form(k, beta, c)) < 1e-9


def test_meixner_at_zero():
    for n in range(7):
        assert meixner_at_zero(n, F(5, 2), F(1, 3)) == meixner_classical(n, F(5, 2), F(1, 3))(0)


def test_box_sum_vs_shells():
    kind, p, t = ADMISSIBLE[1]
    probe = norm_series_partials(kind, 2, t, p, depth=6)
    total = box_sum(kind, 2, t, p, (6, 6))
    # the box contains every shell up to 6 and part of the shells above
    assert total >= probe.partials[-1]
    assert box_sum(kind, 2, t, p, (0, 0)) == 1


def test_normalization_constant():
    p = MeixnerFirstParams(1, [F(1, 2)])
    nc = normalization_constant("first", 0, [F(1, 2)], p)
    assert abs(nc.value - 1 / math.sqrt(2)) < 1e-8
    assert nc.value - nc.bound <= 1 / math.sqrt(2) <= nc.value + 1e-15
    with pytest.raises(DomainError):
        normalization_constant("first", F(1, 2), [F(1, 2)], p)
    with pytest.raises(ParameterError):
        normalization_constant("first", 0, [5], p)


def test_duality():
    for n in range(11):
        for k in range(11):
            lhs, rhs = duality_check("meixner", n, k, (F(5, 2), F(1, 3)))
            assert lhs == rhs
            lhs, rhs = duality_check("charlier", n, k, F(3, 2))
            assert lhs == rhs


def test_radius_probe_non_integer():
    probe = radius_probe(F(1, 2), 1, F(1, 2), 40)
    assert probe.expected == 2.0
    assert probe.root_error < 0.15


def test_radius_ratio_estimate_at_integer():
    # the successive-ratio estimator converges faster than the root estimate
    probe = radius_probe(3, 1, F(1, 2), 40)
    assert probe.expected == 1.0
    assert probe.ratio_error < 0.1
    assert probe.root_error > probe.ratio_error


def test_negative_non_integer_diverges():
    for kind, p, t in (ADMISSIBLE[0], ADMISSIBLE[3]):
        assert norm_series_partials(kind, F(-1, 4), t, p).verdict == DIVERGES


@pytest.mark.parametrize("t", [F(1, 2), 1, 2])
def test_charlier_any_positive_t(t):
    p = CharlierParams([1])
    assert [norm_series_partials("charlier", x, [t], p).verdict for x in (0, 1, 3, F(1, 2))] == \
        [CONVERGES, CONVERGES, CONVERGES, DIVERGES]


def test_monotone_in_t():
    p = MeixnerFirstParams(1, [F(1, 3), F(1, 2)])
    lo = norm_series_partials("first", 2, [1, F(1, 10)], p, depth=12).partials[-1]
    hi = norm_series_partials("first", 2, [2, F(1, 10)], p, depth=12).partials[-1]
    assert lo < hi


def test_region_example_with_edge_weights():
    p = MeixnerFirstParams(1, [F(1, 3), F(1, 2)])
    assert region_membership("first", [F(4, 3), F(1, 2)], p).admissible
    assert not region_membership("first", [F(1, 10**6)] * 2, p).admissible
