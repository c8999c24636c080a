import numpy as np
import pytest

from matdist.equations import directional_derivative, is_material_isomorphism
from matdist.field import BodyGrid, analyze_grid
from matdist.foliation import foliate
from matdist.homogeneity import (CHART_NOTE, HomogeneityAnsatz, homogeneity_residual_rows,
                                 homogeneous_section_at, implies_smooth_uniformity, induced_field,
                                 leafwise_homogeneity, monomial_exponents, section_probe,
                                 solve_homogeneity, verdict_for)
from matdist.jets import Jet, compose, left_translate_tangent, random_jet
from matdist.laws import catalog, parse_law

GRID = BodyGrid([0.0, 0.0], [1.0, 1.0], [3, 3])
GRADED = "yA[1][1]*exp(x[1]); yA[1][2]; yA[2][1]*exp(x[1]); yA[2][2]"
SECOND_ORDER = "yA[1][1]*exp(x[1]); yA[1][2]; yA[2][1]*exp(x[2]); yA[2][2] + yC[1][2][1]*yA[1][1]"


def random_ansatz(rng, n, degree):
    a = HomogeneityAnsatz.zero(n, degree)
    return HomogeneityAnsatz(n, degree, a.exponents, rng.normal(size=a.coeffs.shape))


class TestMonomials:
    def test_counts(self):
        # over (x1, x2, u1, u2): u1, u2, then x_i u_j (4) and u_i u_j (3)
        exps = monomial_exponents(2, 2)
        assert len(exps) == 2 + 4 + 3
        assert all(e[2:].sum() >= 1 for e in exps)
        assert len(monomial_exponents(2, 2, 1, 1)) == 2 + 4
        assert len(monomial_exponents(2, 2, 0, 0)) == 6

    def test_identity_on_diagonal(self, rng):
        a = random_ansatz(rng, 3, 3)
        x = rng.normal(size=3)
        np.testing.assert_allclose(a.value(x, x), np.eye(3), atol=1e-15)


class TestSection:
    def test_derivatives_match_finite_differences(self, rng):
        a = random_ansatz(rng, 2, 3)
        x, y = rng.uniform(-0.3, 0.3, 2), rng.uniform(-0.3, 0.3, 2)
        h = 1e-6
        for k in range(2):
            e = np.eye(2)[k] * h
            np.testing.assert_allclose(a.d_x(x, y)[:, :, k], (a.value(x + e, y) - a.value(x - e, y)) / (2 * h),
                                       atol=1e-8)
            np.testing.assert_allclose(a.d_y(x, y)[:, :, k], (a.value(x, y + e) - a.value(x, y - e)) / (2 * h),
                                       atol=1e-8)

    def test_induced_field_matches_moving_source(self, rng):
        a = HomogeneityAnsatz(2, 2, HomogeneityAnsatz.zero(2, 2).exponents,
                              0.3 * rng.normal(size=HomogeneityAnsatz.zero(2, 2).coeffs.shape))
        x, y = np.array([0.1, 0.2]), np.array([0.3, -0.1])
        h = 1e-6
        for k in range(2):
            e = np.eye(2)[k] * h
            fd = (homogeneous_section_at(a, x + e, y).as_vector()
                  - homogeneous_section_at(a, x - e, y).as_vector()) / (2 * h)
            np.testing.assert_allclose(induced_field(a, x, y, k).as_vector(), fd, atol=1e-7)

    def test_section_on_diagonal_is_identity(self, rng):
        a = random_ansatz(rng, 2, 2)
        x = np.array([0.4, 0.1])
        g = homogeneous_section_at(a, x, x)
        np.testing.assert_allclose(g.yA, np.eye(2), atol=1e-15)
        assert g.n == 2 and np.array_equal(g.yB, np.eye(2))


class TestResidualRows:
    def test_constant_law(self, rng):
        a = random_ansatz(rng, 2, 2)
        row, const = homogeneity_residual_rows(parse_law("1", 2), random_jet(rng, 2), a, 0)
        np.testing.assert_array_equal(row, 0.0)
        np.testing.assert_array_equal(const, 0.0)

    def test_base_map_block_law(self, rng):
        # W = flatten(yB) ignores the frame block, so no coefficient enters
        law = parse_law("yB[1][1]; yB[1][2]; yB[2][1]; yB[2][2]", 2)
        row, const = homogeneity_residual_rows(law, random_jet(rng, 2), random_ansatz(rng, 2, 2), 1)
        np.testing.assert_array_equal(row, 0.0)
        np.testing.assert_array_equal(const, 0.0)

    @pytest.mark.parametrize("text", [GRADED, SECOND_ORDER, "sin(yC[2][1][2]) + x[2]*yA[1][2]"])
    def test_derived_term_is_left_invariant_derivative(self, rng, text):
        law = parse_law(text, 2)
        a = random_ansatz(rng, 2, 2)
        g = random_jet(rng, 2)
        for k in range(2):
            row, const = homogeneity_residual_rows(law, g, a, k, extra_term="derived")
            oracle = directional_derivative(law, left_translate_tangent(g, induced_field(a, g.x, g.x, k)))
            np.testing.assert_allclose(row @ a.coeffs.ravel() + const, oracle, atol=1e-12)

    def test_first_order_laws_ignore_extra_term(self, rng):
        law = parse_law(GRADED, 2)
        a = random_ansatz(rng, 2, 2)
        g = random_jet(rng, 2)
        off = homogeneity_residual_rows(law, g, a, 0, "off")
        derived = homogeneity_residual_rows(law, g, a, 0, "derived")
        np.testing.assert_array_equal(off[0], derived[0])

    def test_options_validated(self, rng):
        a = random_ansatz(rng, 2, 1)
        g = random_jet(rng, 2)
        with pytest.raises(ValueError):
            homogeneity_residual_rows(parse_law("1", 2), g, a, 0, extra_term="bogus")
        with pytest.raises(ValueError):
            homogeneity_residual_rows(parse_law("1", 2), g, a, 0, point="bogus")


class TestVerdict:
    def test_thresholds(self):
        assert verdict_for(0.0, 1e-8) == "homogeneous"
        assert verdict_for(1e-8, 1e-8) == "homogeneous"
        assert verdict_for(5e-7, 1e-8) == "inconclusive"
        assert verdict_for(1e-6, 1e-8) == "inconclusive"
        assert verdict_for(1.1e-6, 1e-8) == "not_homogeneous_at_degree"


class TestSolve:
    def test_uniform_frame(self):
        law = catalog("uniform_frame", 2)
        sol = solve_homogeneity(law, GRID)
        assert sol.verdict == "homogeneous"
        assert sol.residual <= 1e-10
        assert sol.statement.startswith(CHART_NOTE)
        assert section_probe(law, sol.ansatz, GRID.points) <= 1e-8

    def test_uniform_frame_sections_compose(self):
        sol = solve_homogeneity(catalog("uniform_frame", 2), GRID)
        x, y, z = GRID.points[[0, 4, 8]]
        a = sol.ansatz
        lhs = compose(homogeneous_section_at(a, y, z), homogeneous_section_at(a, x, y))
        np.testing.assert_allclose(lhs.as_vector(), homogeneous_section_at(a, x, z).as_vector(), atol=1e-8)

    @pytest.mark.parametrize("degree", [1, 2, 3])
    def test_graded_axis_not_homogeneous(self, degree):
        sol = solve_homogeneity(catalog("fgm_axis", 2), GRID, degree)
        assert sol.verdict == "not_homogeneous_at_degree"
        assert sol.relative
        assert "given chart" in sol.statement

    @pytest.mark.parametrize("extra_term", ["off", "derived", "free"])
    @pytest.mark.parametrize("point", ["diagonal", "source_target"])
    def test_graded_law_all_modes(self, extra_term, point):
        sol = solve_homogeneity(parse_law(GRADED, 2), GRID, 1, extra_term=extra_term, point=point)
        assert sol.verdict == "homogeneous"
        # P(x, y) = diag(exp(y1 - x1), 1) to first order in y - x
        dP = sol.ansatz.d_y(GRID.points[4], GRID.points[4])
        np.testing.assert_allclose(dP[0, 0], [1.0, 0.0], atol=1e-8)

    def test_distribution_directions(self):
        sol = solve_homogeneity(catalog("fgm_axis", 2), GRID, directions="distribution")
        assert sol.verdict == "homogeneous"
        assert sol.per_k.shape == (1,)

    def test_constant_law_absolute(self):
        sol = solve_homogeneity(parse_law("1", 2), GRID, 1)
        assert sol.verdict == "homogeneous" and not sol.relative

    def test_scaling_law_keeps_verdict(self):
        a = solve_homogeneity(catalog("fgm_axis", 2), GRID, 1)
        text = " ; ".join(f"2 * ({c})" for c in catalog("fgm_axis", 2).text.split(" ; "))
        b = solve_homogeneity(parse_law(text, 2), GRID, 1)
        assert a.verdict == b.verdict
        np.testing.assert_allclose(a.residual, b.residual, rtol=1e-12)

    def test_deterministic(self):
        a = solve_homogeneity(catalog("fgm_axis", 2), GRID, 2)
        b = solve_homogeneity(catalog("fgm_axis", 2), GRID, 2, threads=3)
        np.testing.assert_array_equal(a.ansatz.coeffs, b.ansatz.coeffs)
        assert a.residual == b.residual

    @pytest.mark.parametrize("kw", [{"degree": 0}, {"degree": 5}, {"directions": "x"}, {"point": "x"}])
    def test_invalid_options(self, kw):
        with pytest.raises(ValueError):
            solve_homogeneity(catalog("uniform_frame", 2), GRID, **kw)


class TestLeafwise:
    def test_graded_axis_leaves(self):
        law = catalog("fgm_axis", 2)
        r = analyze_grid(law, GRID)
        leaves = foliate(law, GRID, report=r, curves=False)
        out = leafwise_homogeneity(law, leaves, 2, report=r)
        assert sorted(out) == [0, 1, 2]
        for sol in out.values():
            assert sol.verdict == "homogeneous"
            assert sol.probe_ok and sol.probe_deviation <= 1e-8

    def test_point_leaves_vacuous(self):
        law = parse_law("x[1]; x[2]", 2)
        leaves = foliate(law, GRID, curves=False)
        out = leafwise_homogeneity(law, leaves, 1)
        assert len(out) == GRID.size
        assert all(s.verdict == "homogeneous" and s.row_count == 0 for s in out.values())


class TestImplication:
    def test_catalog(self):
        for name in ("uniform_frame", "fgm_axis", "strict_cosserat", "prolonged"):
            law = catalog(name, 2)
            assert implies_smooth_uniformity(solve_homogeneity(law, GRID, 1), analyze_grid(law, GRID))

    def test_detects_contradiction(self):
        law = catalog("fgm_axis", 2)
        r = analyze_grid(law, GRID)
        fake = solve_homogeneity(catalog("uniform_frame", 2), GRID, 1)
        assert not implies_smooth_uniformity(fake, r)


def test_material_isomorphism_of_graded_section():
    # exact section for the graded law: the first frame column scales by exp(y1 - x1);
    # P depends on y - x only, so its second block vanishes
    law = parse_law(GRADED, 2)
    x, y = np.array([0.1, 0.3]), np.array([0.7, 0.2])
    g = Jet(x, y, np.diag([np.exp(y[0] - x[0]), 1.0]), np.eye(2), np.zeros((2, 2, 2)))
    assert is_material_isomorphism(law, g).is_iso
    wrong = Jet(x, y, np.diag([np.exp(x[0] - y[0]), 1.0]), np.eye(2), np.zeros((2, 2, 2)))
    assert not is_material_isomorphism(law, wrong).is_iso
