import itertools

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from polypen import (
    INTERCEPT,
    Monomial,
    PolynomialCoefficients,
    PolynomialModel,
    complete_closure,
    completeness_check,
    evaluate_polynomial,
    full_model,
    parse_model,
    total_degree,
    translate_polynomial,
)
from polypen.polynomial import format_model, format_monomial, parse_monomial

from conftest import X1, X2, X3, X1X2


def brute_force_divisors(m, p):
    """Every exponent vector bounded componentwise by ``m``'s, by enumeration."""
    bounds = [m.as_dict().get(k, 0) for k in range(p)]
    out = set()
    for powers in itertools.product(*(range(b + 1) for b in bounds)):
        out.add(Monomial.from_map(dict(enumerate(powers))))
    return out


def sympy_translate(f, shift):
    """Independent expansion of f(x + shift) with exact rational arithmetic."""
    xs = sympy.symbols(f"x0:{f.model.num_variables}")
    expr = 0
    for m, a in zip(f.model.monomials, f.values):
        term = sympy.Rational(float(a))
        for k, d in m.exponents:
            term *= (xs[k] + sympy.Rational(float(shift[k]))) ** d
        expr += term
    poly = sympy.Poly(sympy.expand(expr), *xs)
    return {Monomial.from_map(dict(enumerate(powers))): float(c) for powers, c in poly.terms()}


class TestMonomial:
    def test_total_degree(self):
        assert total_degree(INTERCEPT) == 0
        assert total_degree(Monomial.from_map({1: 1, 2: 1})) == 2
        assert total_degree(Monomial.from_map({1: 2})) == 2

    def test_zero_exponents_dropped(self):
        assert Monomial.from_map({0: 0, 1: 1}) == X2

    def test_commutative(self):
        assert Monomial.of(0, 1) == Monomial.of(1, 0)
        assert hash(Monomial.of(0, 1)) == hash(Monomial.of(1, 0))

    @pytest.mark.parametrize("bad", [{0: -1}, {-1: 1}, {0: 9}, {0: 5, 1: 4}])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            Monomial(tuple(bad.items()))

    def test_graded_order(self):
        mons = [Monomial.of(0, 0), X1X2, X2, INTERCEPT, X1, Monomial.of(0, 0, 1)]
        assert sorted(mons) == [INTERCEPT, X1, X2, X1X2, Monomial.of(0, 0), Monomial.of(0, 0, 1)]

    def test_evaluate(self):
        assert Monomial.of(0, 1).evaluate([2.0, 2.0]) == 4.0
        np.testing.assert_array_equal(Monomial.of(0, 0).evaluate(np.array([[3.0], [-1.0]])), [9.0, 1.0])


class TestModel:
    def test_intercept_first_and_sorted(self):
        model = PolynomialModel((X1X2, X2, INTERCEPT, X1), 2)
        assert model.monomials == (INTERCEPT, X1, X2, X1X2)

    def test_duplicates_forbidden(self):
        with pytest.raises(ValueError):
            PolynomialModel((X1, X1), 2)

    def test_variable_out_of_range(self):
        with pytest.raises(ValueError):
            PolynomialModel((X3,), 2)

    def test_full_model_epistasis(self):
        assert full_model(2, 2).monomials == (INTERCEPT, X1, X2, X1X2)
        assert len(full_model(4, 2)) == 1 + 4 + 6


class TestCompleteness:
    def test_epistasis_model_complete(self, epistasis_model):
        assert completeness_check(epistasis_model) == (True, [])

    def test_missing_additive_term(self):
        model = PolynomialModel((INTERCEPT, X1, X1X2), 2)
        assert completeness_check(model) == (False, [X2])

    def test_intercept_only(self):
        assert completeness_check(PolynomialModel((INTERCEPT,), 1)) == (True, [])

    def test_missing_listed_once_and_sorted(self):
        model = PolynomialModel((Monomial.of(0, 1, 2), Monomial.of(0, 1)), 3)
        ok, missing = completeness_check(model)
        assert not ok
        assert missing == sorted(set(missing))
        assert missing == [INTERCEPT, X1, X2, X3, Monomial.of(0, 2), Monomial.of(1, 2)]

    def test_closure_examples(self):
        model = PolynomialModel((INTERCEPT, X1, X1X2), 2)
        assert complete_closure(model).monomials == (INTERCEPT, X1, X2, X1X2)
        cubic = PolynomialModel((Monomial.of(0, 0, 1),), 2)
        expected = {INTERCEPT, X1, X2, Monomial.of(0, 0), X1X2, Monomial.of(0, 0, 1)}
        assert set(complete_closure(cubic).monomials) == expected
        assert expected == brute_force_divisors(Monomial.of(0, 0, 1), 2)

    def test_closure_fixed_point(self, epistasis_model):
        assert complete_closure(epistasis_model) == epistasis_model

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.dictionaries(st.integers(0, 3), st.integers(1, 2), max_size=3), min_size=1, max_size=4))
    def test_closure_matches_enumeration(self, maps):
        mons = list(dict.fromkeys(Monomial.from_map(d) for d in maps))
        model = PolynomialModel(tuple(mons), 4)
        closure = complete_closure(model)
        expected = set().union(*(brute_force_divisors(m, 4) for m in mons))
        assert set(closure.monomials) == expected
        assert completeness_check(closure)[0]
        assert complete_closure(closure) == closure
        # monotone: a larger model has a larger closure
        bigger = PolynomialModel.from_monomials(mons + [Monomial.of(3)], 4)
        assert set(closure.monomials) <= set(complete_closure(bigger).monomials)


class TestTranslate:
    def test_product_expansion(self):
        f = PolynomialCoefficients.from_dict({X1X2: 1.0}, 2)
        g = translate_polynomial(f, [1.0, 2.0])
        assert g.as_dict() == {INTERCEPT: 2.0, X1: 2.0, X2: 1.0, X1X2: 1.0}

    def test_zero_shift_is_identity(self):
        f = PolynomialCoefficients.from_dict({INTERCEPT: 0.3, X1: -1.0, X1X2: 2.5, Monomial.of(1, 1): 0.1}, 2)
        g = translate_polynomial(f, [0.0, 0.0])
        assert g.model == f.model
        assert g.values.tobytes() == f.values.tobytes()

    def test_top_degree_copied(self):
        f = PolynomialCoefficients.from_dict({INTERCEPT: 1.83, X1: -0.97, X2: 1.88, X1X2: -1.14}, 2)
        g = translate_polynomial(f, [1.6, 1.0])
        assert g[X1X2] == -1.14

    def test_dimension_mismatch(self):
        f = PolynomialCoefficients.from_dict({X1: 1.0}, 2)
        with pytest.raises(ValueError):
            translate_polynomial(f, [1.0])

    def test_matches_sympy_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            p = int(rng.integers(1, 4))
            mons = {}
            for _ in range(int(rng.integers(1, 5))):
                powers = {k: int(rng.integers(0, 3)) for k in range(p)}
                mons[Monomial.from_map(powers)] = float(np.round(rng.normal(), 3))
            f = PolynomialCoefficients.from_dict(mons, p)
            shift = np.round(rng.uniform(-2, 2, size=p), 2)
            expected = sympy_translate(f, shift)
            got = translate_polynomial(f, shift).as_dict()
            for m in set(expected) | set(got):
                assert got.get(m, 0.0) == pytest.approx(expected.get(m, 0.0), rel=1e-12, abs=1e-12)

    def test_result_within_closure(self):
        f = PolynomialCoefficients.from_dict({INTERCEPT: 1.0, Monomial.of(0, 0, 1): 2.0}, 2)
        g = translate_polynomial(f, [0.5, -1.0])
        assert set(g.model.monomials) <= set(complete_closure(f.model).monomials)


@st.composite
def polynomials(draw):
    p = draw(st.integers(1, 3))
    terms = draw(st.dictionaries(
        st.tuples(*[st.integers(0, 2)] * p),
        st.floats(-10, 10, allow_nan=False),
        min_size=1, max_size=6,
    ))
    f = PolynomialCoefficients.from_dict(
        {Monomial.from_map(dict(enumerate(k))): v for k, v in terms.items()}, p)
    shift = np.array(draw(st.lists(st.floats(-2, 2), min_size=p, max_size=p)))
    return f, shift


class TestTranslateProperties:
    @settings(max_examples=100, deadline=None)
    @given(polynomials(), st.data())
    def test_pointwise_identity(self, fs, data):
        f, shift = fs
        x = np.array(data.draw(st.lists(st.floats(-3, 3), min_size=len(shift), max_size=len(shift))))
        g = translate_polynomial(f, shift)
        fx = evaluate_polynomial(f, x)
        assert abs(evaluate_polynomial(g, x - shift) - fx) <= 1e-9 * (1 + abs(fx))

    @settings(max_examples=100, deadline=None)
    @given(polynomials())
    def test_top_degree_bitwise(self, fs):
        f, shift = fs
        g = translate_polynomial(f, shift)
        assert g.model.degree == f.model.degree
        for m in f.model.top_degree_monomials():
            assert np.float64(g[m]).tobytes() == np.float64(f[m]).tobytes()

    @settings(max_examples=60, deadline=None)
    @given(polynomials(), st.data())
    def test_composition(self, fs, data):
        f, P = fs
        Q = np.array(data.draw(st.lists(st.floats(-2, 2), min_size=len(P), max_size=len(P))))
        twice = translate_polynomial(translate_polynomial(f, P), Q).as_dict()
        once = translate_polynomial(f, P + Q).as_dict()
        scale = np.sum(np.abs(f.values)) * 3.0 ** f.model.degree * 10
        for m in set(twice) | set(once):
            assert twice.get(m, 0.0) == pytest.approx(once.get(m, 0.0), rel=1e-12, abs=1e-12 * (1 + scale))


def test_evaluate_examples():
    assert evaluate_polynomial(PolynomialCoefficients.from_dict({INTERCEPT: 2.0, X1: 3.0}, 1), [0.0]) == 2.0
    assert evaluate_polynomial(PolynomialCoefficients.from_dict({X1X2: 1.0}, 2), [2.0, 2.0]) == 4.0
    with pytest.raises(ValueError):
        evaluate_polynomial(PolynomialCoefficients.from_dict({X1X2: 1.0}, 2), [2.0])


def test_evaluate_random_translation_pairs():
    rng = np.random.default_rng(11)
    for _ in range(50):
        p = int(rng.integers(1, 4))
        f = PolynomialCoefficients(full_model(p, 2, max_power=2), rng.normal(size=len(full_model(p, 2, max_power=2))))
        P, x = rng.uniform(-2, 2, p), rng.uniform(-2, 2, p)
        g = translate_polynomial(f, P)
        assert evaluate_polynomial(g, x - P) == pytest.approx(evaluate_polynomial(f, x), rel=1e-9, abs=1e-9)


class TestTextFormat:
    @pytest.mark.parametrize("text,mono", [
        ("1", INTERCEPT), ("2", X2), ("1^1", X1), ("1*2", X1X2), ("1^2", Monomial.of(0, 0)),
        ("2*1", X1X2), ("3^2*1", Monomial.of(2, 2, 0)),
    ])
    def test_parse(self, text, mono):
        assert parse_monomial(text) == mono

    @pytest.mark.parametrize("bad", ["", "0", "a", "1^0", "2^x"])
    def test_parse_errors(self, bad):
        with pytest.raises(ValueError):
            parse_monomial(bad)

    def test_roundtrip(self):
        model = PolynomialModel((INTERCEPT, X1, X2, X1X2, Monomial.of(0, 0), Monomial.of(1, 1, 0)), 2)
        assert parse_model(format_model(model), 2) == model
        assert [format_monomial(m) for m in model] == ["1", "1^1", "2", "1*2", "1^2", "1*2^2"]

    def test_auto_degree(self):
        model = parse_model("auto-degree:2", 3)
        assert len(model) == 7
        assert completeness_check(model)[0]
        assert all(d <= 1 for m in model for _, d in m.exponents)
