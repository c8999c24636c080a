import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matdist.exceptions import DimensionMismatch, DomainError, IndexOutOfRange, ParseError, UnknownLaw
from matdist.jets import Jet, coordinate_count, identity_jet, random_jet
from matdist.laws import (BinOp, Call, Neg, Num, Var, catalog, catalog_names, evaluate, evaluate_batch,
                          parse_law, to_text)

NONLINEAR = [
    "log(yA[1][1]^2 + 1)",
    "sqrt(yB[2][2]^2 + x[1]^2 + 1)",
    "exp(sin(yC[1][2][1])) * cos(x[2]) / (2 + yA[1][2]^2)",
    "(yA[1][1]^2 + 1)^x[1]",
    "y[1] * yB[1][2] - yC[2][2][1]^3 / (1.5 + cos(yA[2][1]))",
    "-yA[1][1]^2 ; 2^yB[1][1]",
]


def central_differences(law, X, h=1e-5):
    B, N = X.shape
    out = np.empty((B, law.d, N))
    for c in range(N):
        e = np.zeros(N)
        e[c] = h
        vp, _ = evaluate_batch(law, X + e, want_grad=False)
        vm, _ = evaluate_batch(law, X - e, want_grad=False)
        out[:, :, c] = (vp - vm) / (2 * h)
    return out


def jets(rng, n, count):
    return np.stack([random_jet(rng, n).as_vector() for _ in range(count)])


class TestParser:
    def test_single_variable(self):
        law = parse_law("yA[1][1]", 2, 1)
        assert law.components == (Var("yA", (1, 1)),)

    def test_two_components(self):
        law = parse_law("x[3] ; yA[1][2]^2 + sin(x[1])", 3, 2)
        assert law.d == 2
        assert law.components[1] == BinOp("+", BinOp("^", Var("yA", (1, 2)), Num(2.0)),
                                          Call("sin", Var("x", (1,))))

    def test_precedence(self):
        (e,) = parse_law("1 + 2 * 3 ^ 2 ^ 1 - -x[1]", 2).components
        pow_ = BinOp("^", Num(3.0), BinOp("^", Num(2.0), Num(1.0)))
        assert e == BinOp("-", BinOp("+", Num(1.0), BinOp("*", Num(2.0), pow_)), Neg(Var("x", (1,))))

    def test_unary_binds_tighter_than_power(self):
        (e,) = parse_law("-x[1]^2", 2).components
        assert e == BinOp("^", Neg(Var("x", (1,))), Num(2.0))

    def test_whitespace_insensitive(self):
        a = parse_law("yA[1][2]*x[1];yB[2][1]", 2)
        b = parse_law("  yA [1] [2] *\n x[1] ;\n\t yB[2][1] ", 2)
        assert a.components == b.components

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRange) as info:
            parse_law("yA[4][1]", 3)
        assert info.value.column == 4

    def test_zero_index(self):
        with pytest.raises(IndexOutOfRange):
            parse_law("x[0]", 2)

    def test_error_position_and_expected(self):
        with pytest.raises(ParseError) as info:
            parse_law("yA[1][1] +\n * 2", 2)
        assert (info.value.line, info.value.column) == (2, 2)
        assert "variable" in info.value.expected

    def test_unknown_name(self):
        with pytest.raises(ParseError, match="unknown name"):
            parse_law("tan(x[1])", 2)

    def test_bad_character(self):
        with pytest.raises(ParseError):
            parse_law("x[1] $ 2", 2)

    def test_empty(self):
        with pytest.raises(ParseError):
            parse_law("   ", 2)

    def test_component_count(self):
        with pytest.raises(ParseError):
            parse_law("x[1]; x[2]", 2, d=3)

    def test_trailing_garbage(self):
        with pytest.raises(ParseError):
            parse_law("x[1] x[2]", 2)

    @pytest.mark.parametrize("text", NONLINEAR)
    def test_print_roundtrip(self, text):
        law = parse_law(text, 2)
        assert parse_law(law.text, 2).components == law.components


def _trees():
    nums = st.floats(min_value=0, max_value=1e6, allow_nan=False, allow_infinity=False).filter(
        lambda v: math.copysign(1.0, v) > 0).map(Num)
    idx = st.integers(1, 3)
    vars_ = st.one_of(
        st.builds(lambda i: Var("x", (i,)), idx),
        st.builds(lambda i: Var("y", (i,)), idx),
        st.builds(lambda k, i, j: Var(k, (i, j)), st.sampled_from(["yA", "yB"]), idx, idx),
        st.builds(lambda i, j, k: Var("yC", (i, j, k)), idx, idx, idx),
    )

    def extend(children):
        return st.one_of(
            st.builds(Neg, children),
            st.builds(BinOp, st.sampled_from("+-*/^"), children, children),
            st.builds(Call, st.sampled_from(["exp", "log", "sin", "cos", "sqrt"]), children),
        )

    return st.recursive(st.one_of(nums, vars_), extend, max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(st.lists(_trees(), min_size=1, max_size=3))
def test_parse_print_roundtrip_property(components):
    text = to_text(components)
    assert parse_law(text, 3).components == tuple(components)


class TestEvaluate:
    def test_identity_frame_entry(self):
        ev = evaluate(parse_law("yA[1][1]", 2), identity_jet([0.0, 0.0]))
        np.testing.assert_array_equal(ev.value, [1.0])
        expected = np.zeros((1, 2, 2))
        expected[0, 0, 0] = 1.0
        np.testing.assert_array_equal(ev.d_yA, expected)
        for block in (ev.d_x, ev.d_y, ev.d_yB, ev.d_yC):
            np.testing.assert_array_equal(block, 0.0)

    def test_position_gradient(self):
        ev = evaluate(parse_law("x[2]", 3), identity_jet([0.1, 0.2, 0.3]))
        np.testing.assert_array_equal(ev.d_x, [[0.0, 1.0, 0.0]])
        assert np.all(ev.gradient[:, 3:] == 0)

    def test_square(self):
        A = np.eye(2)
        A[0, 1] = 3.0
        g = Jet([0, 0], [0, 0], A, np.eye(2), np.zeros((2, 2, 2)))
        ev = evaluate(parse_law("yA[1][2]^2", 2), g)
        assert ev.value[0] == 9.0
        assert ev.d_yA[0, 0, 1] == 6.0

    def test_deterministic(self, rng):
        law = parse_law(NONLINEAR[2], 2)
        X = jets(rng, 2, 10)
        a = evaluate_batch(law, X)
        b = evaluate_batch(law, X)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionMismatch):
            evaluate(parse_law("x[1]", 3), random_jet(rng, 2))

    @pytest.mark.parametrize("text", NONLINEAR)
    def test_derivatives_match_central_differences(self, rng, text):
        law = parse_law(text, 2)
        X = jets(rng, 2, 50)
        _, G = evaluate_batch(law, X)
        fd = central_differences(law, X)
        assert np.all(np.abs(G - fd) <= 1e-6 * np.maximum(np.abs(G), 1.0))

    @pytest.mark.parametrize("name", ["uniform_frame", "fgm_axis", "strict_cosserat", "prolonged"])
    def test_catalog_derivatives(self, rng, name):
        law = catalog(name, 3)
        X = jets(rng, 3, 30)
        _, G = evaluate_batch(law, X)
        fd = central_differences(law, X)
        assert np.all(np.abs(G - fd) <= 1e-6 * np.maximum(np.abs(G), 1.0))

    def test_row_scaling_scales_gradient(self, rng):
        X = jets(rng, 2, 5)
        _, G1 = evaluate_batch(parse_law(NONLINEAR[0], 2), X)
        _, G2 = evaluate_batch(parse_law(f"2 * ({NONLINEAR[0]})", 2), X)
        np.testing.assert_allclose(G2, 2 * G1, rtol=1e-15)


class TestDomainErrors:
    def test_log(self):
        with pytest.raises(DomainError) as info:
            evaluate(parse_law("log(x[1] - x[1])", 2), identity_jet([0.3, 0.1]))
        assert info.value.subexpression == "log((x[1] - x[1]))"

    def test_sqrt_of_negative(self):
        with pytest.raises(DomainError):
            evaluate(parse_law("sqrt(x[1])", 2), identity_jet([-0.5, 0.0]))

    def test_division_by_zero(self):
        with pytest.raises(DomainError, match="division by zero"):
            evaluate(parse_law("1 / x[2]", 2), identity_jet([1.0, 0.0]))

    def test_fractional_power_of_negative(self):
        with pytest.raises(DomainError):
            evaluate(parse_law("x[1]^0.5", 2), identity_jet([-1.0, 0.0]))

    def test_integer_power_of_negative_is_fine(self):
        ev = evaluate(parse_law("x[1]^3", 2), identity_jet([-2.0, 0.0]))
        assert ev.value[0] == -8.0
        assert ev.d_x[0, 0] == 12.0


class TestCatalog:
    def test_names(self):
        assert catalog_names() == ["fgm_axis", "prolonged", "strict_cosserat", "uniform_frame"]

    def test_uniform_frame(self):
        law = catalog("uniform_frame", 2)
        assert law.components == tuple(Var("yA", (j, i)) for j in (1, 2) for i in (1, 2))

    def test_fgm_axis(self):
        law = catalog("fgm_axis", 2)
        assert law.components[0] == Var("x", (2,))
        assert law.d == 5

    def test_strict_cosserat(self, rng):
        g = random_jet(rng, 2)
        ev = evaluate(catalog("strict_cosserat", 2), g)
        np.testing.assert_allclose(ev.value, (g.yA - g.yB).ravel(), rtol=0, atol=0)

    def test_prolonged_values(self, rng):
        g = random_jet(rng, 3)
        ev = evaluate(catalog("prolonged", 3), g)
        anti = g.yC - g.yC.transpose(0, 2, 1)
        expected = [anti[j, i, k] for j in range(3) for i in range(3) for k in range(i + 1, 3)]
        np.testing.assert_array_equal(ev.value[:9], (g.yA - g.yB).ravel())
        np.testing.assert_allclose(ev.value[9:], expected, atol=0)

    def test_unknown(self):
        with pytest.raises(UnknownLaw):
            catalog("nope", 2)

    def test_coordinate_count(self):
        assert coordinate_count(3) == 51
