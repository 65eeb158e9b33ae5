import itertools
import random

import pytest

from ldpir.errors import InfeasibleParameters, NoSolution
from ldpir.field import FieldModulus
from ldpir.listdecode import (
    WeightedBivariate,
    interpolate,
    monomial_count,
    polynomial_roots,
)
from ldpir.poly import HermiteSample, Poly

F5 = FieldModulus(5)
F7 = FieldModulus(7)
F131 = FieldModulus(131)


def honest_samples(f, points):
    df = f.derivative()
    return [HermiteSample(x, f(x), df(x)) for x in points]


def random_bivariate(rng, field, alpha_weight, degree_cap):
    rho = degree_cap // alpha_weight
    while True:
        polys = [
            Poly(
                field,
                [rng.randrange(field.p) for _ in range(degree_cap - s * alpha_weight + 1)],
            )
            for s in range(rho + 1)
        ]
        if not all(q.is_zero for q in polys):
            return WeightedBivariate(field, alpha_weight, degree_cap, polys)


def test_monomial_count_examples():
    # k=20, b=12, t=1: D = 15
    assert monomial_count(3, 15) == 51  # 16+13+10+7+4+1
    assert monomial_count(4, 15) == 40  # 16+12+8+4
    assert monomial_count(1, 5) == 21


def test_interpolate_zero_error_case():
    # k=4, b=1, wt=1 -> D=5, num=21 > 8
    f = Poly(F131, [7, 3])
    samples = honest_samples(f, [1, 2, 3, 4])
    Q = interpolate(samples, 1, 5, F131)
    assert Q.compose(f).is_zero
    # all 2k constraints hold by direct evaluation
    for s in samples:
        assert Q.eval_base(s.point, s.value) == 0
        assert Q.eval_derivative(s.point, s.value, s.derivative) == 0


def test_interpolate_infeasible():
    rng = random.Random(0)
    samples = [
        HermiteSample(x, rng.randrange(131), rng.randrange(131))
        for x in range(1, 21)
    ]
    # k=20, wt=4, D=15: num = 40 = 2k
    with pytest.raises(InfeasibleParameters):
        interpolate(samples, 4, 15, F131)
    # wt=3 is feasible: num = 51 > 40
    Q = interpolate(samples, 3, 15, F131)
    for s in samples:
        assert Q.eval_base(s.point, s.value) == 0
        assert Q.eval_derivative(s.point, s.value, s.derivative) == 0


def test_interpolate_random_instances_all_constraints_vanish():
    rng = random.Random(42)
    for _ in range(300):
        p = rng.choice([7, 11, 13, 131])
        fp = FieldModulus(p)
        k = rng.randrange(2, 7)
        wt = rng.randrange(1, 3)
        cap = rng.randrange(wt, 12)
        if monomial_count(wt, cap) <= 2 * k or k >= p:
            continue
        pts = rng.sample(range(p), k)
        samples = [
            HermiteSample(x, rng.randrange(p), rng.randrange(p)) for x in pts
        ]
        Q = interpolate(samples, wt, cap, fp)
        assert not all(q.is_zero for q in Q.coeff_polys)
        for s in samples:
            assert Q.eval_base(s.point, s.value) == 0
            assert Q.eval_derivative(s.point, s.value, s.derivative) == 0


def test_interpolate_deterministic():
    rng = random.Random(9)
    samples = [
        HermiteSample(x, rng.randrange(131), rng.randrange(131))
        for x in range(1, 7)
    ]
    q1 = interpolate(samples, 1, 5, F131)
    q2 = interpolate(samples, 1, 5, F131)
    assert q1.coeff_polys == q2.coeff_polys


def test_qext_constant_coefficients():
    # with constant q_s the x-derivative terms vanish:
    # ext(x,y,dy) = dy * sum_s s q_s y^(s-1)
    Q = WeightedBivariate(
        F7, 1, 3, [Poly(F7, [2]), Poly(F7, [3]), Poly(F7, [1])]
    )
    for x, y, dy in itertools.product(range(7), repeat=3):
        expected = dy * (3 + 2 * y) % 7
        assert Q.eval_derivative(x, y, dy) == expected


def test_qext_hand_example():
    # Q = y^2 - x^2 over F_7: total derivative 2*y*dy - 2*x
    Q = WeightedBivariate(
        F7, 1, 2, [Poly(F7, [0, 0, 6]), Poly(F7), Poly(F7, [1])]
    )
    assert Q.eval_derivative(2, 2, 1) == 0
    for x, y, dy in itertools.product(range(7), repeat=3):
        assert Q.eval_derivative(x, y, dy) == (2 * y * dy - 2 * x) % 7


def test_qext_chain_rule_identity():
    rng = random.Random(67)
    for _ in range(300):
        p = rng.choice([7, 11, 131])
        fp = FieldModulus(p)
        wt = rng.randrange(1, 4)
        cap = rng.randrange(wt, 10)
        Q = random_bivariate(rng, fp, wt, cap)
        g = Poly(fp, [rng.randrange(p) for _ in range(wt + 1)])
        composed = Q.compose(g)
        d_composed = composed.derivative()
        dg = g.derivative()
        for x in rng.sample(range(p), min(5, p)):
            assert d_composed(x) == Q.eval_derivative(x, g(x), dg(x))


def test_weighted_degree_cap_under_composition():
    rng = random.Random(5)
    for _ in range(200):
        wt = rng.randrange(1, 4)
        cap = rng.randrange(wt, 12)
        Q = random_bivariate(rng, F131, wt, cap)
        g = Poly(F131, [rng.randrange(131) for _ in range(wt + 1)])
        assert Q.compose(g).degree <= cap


def test_roots_two_factor_example():
    # Q = (y - x)(y - (x+1)) = y^2 - (2x+1) y + x^2 + x over F_5
    Q = WeightedBivariate(
        F5,
        1,
        2,
        [Poly(F5, [0, 1, 1]), Poly(F5, [-1, -2]), Poly(F5, [1])],
    )
    roots = polynomial_roots(Q, 1)
    assert roots == sorted(
        [Poly(F5, [0, 1]), Poly(F5, [1, 1])], key=lambda f: (len(f.coeffs), f.coeffs)
    )
    for f in roots:
        assert Q.compose(f).is_zero


def test_roots_constant_factor():
    # Q = y - c
    for c in range(5):
        Q = WeightedBivariate(F5, 1, 3, [Poly(F5, [-c]), Poly(F5, [1])])
        assert polynomial_roots(Q, 1) == [Poly(F5, [c])]
        assert polynomial_roots(Q, 0) == [Poly(F5, [c])]


def test_roots_contains_honest_polynomial():
    rng = random.Random(1)
    for _ in range(100):
        p = rng.choice([11, 13, 17])
        fp = FieldModulus(p)
        k = 5
        wt = rng.randrange(1, 3)
        cap = 2 * k - 1
        if monomial_count(wt, cap) <= 2 * k:
            continue
        f = Poly(fp, [rng.randrange(p) for _ in range(wt + 1)])
        samples = honest_samples(f, rng.sample(range(p), k))
        Q = interpolate(samples, wt, cap, fp)
        assert f in polynomial_roots(Q, wt)


def test_roots_completeness_vs_enumeration():
    # identical to brute force over all p^(wt+1) candidates on tiny fields
    rng = random.Random(77)
    for _ in range(60):
        p = rng.choice([5, 7, 11, 13, 17])
        fp = FieldModulus(p)
        wt = rng.randrange(1, 3)
        cap = rng.randrange(wt, 7)
        Q = random_bivariate(rng, fp, wt, cap)
        got = set(polynomial_roots(Q, wt))
        expected = set()
        for coeffs in itertools.product(range(p), repeat=wt + 1):
            f = Poly(fp, coeffs)
            if Q.compose(f).is_zero:
                expected.add(f)
        assert got == expected
        assert len(got) <= Q.alpha_degree


def test_roots_soundness_random():
    rng = random.Random(31)
    for _ in range(100):
        wt = rng.randrange(1, 4)
        cap = rng.randrange(wt, 10)
        Q = random_bivariate(rng, F131, wt, cap)
        for f in polynomial_roots(Q, wt):
            assert f.degree <= wt
            assert Q.compose(f).is_zero
