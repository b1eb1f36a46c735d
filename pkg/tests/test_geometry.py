import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from safebandits.geometry import (GeometryError, Polytope, ScalingTransform,
                                  SimplexSpec, apply_scaling, build_simplex,
                                  geometry_from_text, max_shrinkage, project,
                                  sharpness, shrink, vertices)

from conftest import sample_inside, untag


class TestBuildSimplex:
    def test_experiment_simplex(self):
        poly = build_simplex(SimplexSpec(np.array([1.0, 0.25, 0.5])))
        np.testing.assert_allclose(poly.A, [[1, 4, 2], [-1, 0, 0],
                                            [0, -1, 0], [0, 0, -1]])
        np.testing.assert_allclose(poly.b, [0.5, 1 / 14, 1 / 14, 1 / 14])

    def test_symmetric_two_agents(self):
        poly = build_simplex(SimplexSpec(np.array([1.0, 1.0])))
        np.testing.assert_allclose(poly.A, [[1, 1], [-1, 0], [0, -1]])
        np.testing.assert_allclose(poly.b, [0.5, 0.25, 0.25])

    def test_single_agent(self):
        poly = build_simplex(SimplexSpec(np.array([2.0])))
        np.testing.assert_allclose(poly.A, [[0.5], [-1.0]])
        np.testing.assert_allclose(poly.b, [0.5, 1.0])

    def test_origin_interior(self):
        poly = build_simplex(SimplexSpec(np.array([0.3, 2.0, 1.0])))
        assert poly.contains(np.zeros(3))
        assert np.all(poly.b > 0)

    def test_rejects_nonpositive_scale(self):
        with pytest.raises(GeometryError):
            SimplexSpec(np.array([1.0, -0.5]))
        with pytest.raises(GeometryError):
            SimplexSpec(np.array([0.0, 1.0]))


class TestPolytopeValidation:
    def test_rejects_unbounded(self):
        with pytest.raises(GeometryError, match="unbounded"):
            Polytope(np.array([[1.0, 0.0]]), np.array([1.0]))

    def test_rejects_empty(self):
        A = np.array([[1.0], [-1.0]])
        with pytest.raises(GeometryError, match="empty"):
            Polytope(A, np.array([-1.0, -1.0]))

    def test_rejects_nonfinite(self):
        with pytest.raises(GeometryError):
            Polytope(np.array([[np.inf, 0.0]]), np.array([1.0]))


class TestApplyScaling:
    def test_identity(self, experiment_simplex):
        out = apply_scaling(experiment_simplex, ScalingTransform(np.ones(3)))
        np.testing.assert_array_equal(out.A, experiment_simplex.A)
        np.testing.assert_array_equal(out.b, experiment_simplex.b)

    def test_uniform_scaling_doubles_columns(self, experiment_simplex):
        out = apply_scaling(experiment_simplex, ScalingTransform(np.full(3, 2.0)))
        np.testing.assert_allclose(out.A, [[2, 8, 4], [-2, 0, 0],
                                           [0, -2, 0], [0, 0, -2]])
        np.testing.assert_array_equal(out.b, experiment_simplex.b)

    def test_membership_duality(self):
        rng = np.random.default_rng(7)
        poly = Polytope(np.array([[1.0, 0.5], [-1.0, 0.3], [0.2, -1.0]]),
                        np.array([1.0, 0.8, 0.9]))
        beta = np.array([0.7, 2.3])
        scaled = apply_scaling(poly, ScalingTransform(beta))
        B = np.diag(1.0 / beta)
        pts = rng.uniform(-3, 3, size=(10_000, 2))
        inside = np.all(pts @ poly.A.T <= poly.b, axis=1)
        mapped_inside = np.all((pts @ B.T) @ scaled.A.T <= scaled.b + 1e-12, axis=1)
        np.testing.assert_array_equal(inside, mapped_inside)

    def test_round_trip_recovers(self, experiment_simplex):
        t = ScalingTransform(np.array([0.3, 1.7, 4.2]))
        back = apply_scaling(apply_scaling(experiment_simplex, t), t.inverse())
        np.testing.assert_allclose(back.A, experiment_simplex.A, rtol=1e-15)

    def test_dimension_mismatch(self, experiment_simplex):
        with pytest.raises(GeometryError, match="dimension"):
            apply_scaling(experiment_simplex, ScalingTransform(np.ones(2)))


class TestShrink:
    def test_zero_is_identity(self, experiment_simplex):
        out = shrink(experiment_simplex, 0.0)
        assert np.array_equal(out.b, experiment_simplex.b)

    def test_experiment_simplex_collapses_to_origin(self, experiment_simplex):
        out = shrink(experiment_simplex, 1 / 14)
        for v in vertices(Polytope(out.A, out.b, check_region=False)):
            np.testing.assert_allclose(v, 0.0, atol=1e-12)

    def test_unit_box(self, unit_box_2d):
        out = shrink(unit_box_2d, 0.5)
        np.testing.assert_allclose(out.b, 0.5)

    def test_negative_delta_rejected(self, experiment_simplex):
        with pytest.raises(GeometryError):
            shrink(experiment_simplex, -0.1)

    def test_emptiness_is_queryable(self, experiment_simplex):
        assert shrink(experiment_simplex, 0.2).is_empty()
        assert not shrink(experiment_simplex, 0.01).is_empty()

    def test_nesting(self, experiment_simplex):
        rng = np.random.default_rng(3)
        inner = shrink(experiment_simplex, 0.04)
        outer = shrink(experiment_simplex, 0.015)
        pts = sample_inside(inner, 10_000, rng)
        assert np.all(pts @ outer.A.T <= outer.b + 1e-12)


class TestMaxShrinkage:
    def test_experiment_simplex_closed_form(self, experiment_simplex):
        assert max_shrinkage(experiment_simplex) == pytest.approx(1 / 14, abs=1e-15)

    def test_unit_box(self, unit_box_2d):
        assert max_shrinkage(unit_box_2d) == pytest.approx(1.0, abs=1e-8)

    def test_bisection_matches_closed_form(self, experiment_simplex):
        oracle = max_shrinkage(untag(experiment_simplex))
        assert oracle == pytest.approx(1 / 14, abs=1e-6)

    def test_random_triangle_against_grid(self):
        # dense-grid emptiness scan as the independent oracle
        A = np.array([[1.0, 1.0], [-1.0, 0.2], [0.1, -1.0]])
        b = np.array([0.6, 0.5, 0.4])
        poly = Polytope(A, b)
        H = max_shrinkage(poly)
        norms = np.abs(A).sum(axis=1)
        xs = np.linspace(-1.5, 1.5, 3001)
        Xg, Yg = np.meshgrid(xs, xs)
        pts = np.column_stack([Xg.ravel(), Yg.ravel()])
        vals = pts @ A.T
        def grid_nonempty(delta):
            return np.any(np.all(vals <= (b - delta * norms) + 1e-12, axis=1))
        assert grid_nonempty(H - 5e-3)
        assert not grid_nonempty(H + 1e-3)

    def test_empty_input_rejected(self, experiment_simplex):
        empty = shrink(untag(experiment_simplex), 0.2)
        with pytest.raises(GeometryError, match="empty"):
            max_shrinkage(empty)


class TestVertices:
    def test_symmetric_simplex_by_hand(self):
        poly = build_simplex(SimplexSpec(np.array([1.0, 1.0])))
        got = sorted(map(tuple, np.round(vertices(poly), 12)))
        assert got == [(-0.25, -0.25), (-0.25, 0.75), (0.75, -0.25)]

    def test_unit_box_corners(self, unit_box_2d):
        got = sorted(map(tuple, np.round(vertices(unit_box_2d), 12)))
        assert got == [(-1, -1), (-1, 1), (1, -1), (1, 1)]

    def test_experiment_simplex_vertices_on_three_facets(self, experiment_simplex):
        verts = vertices(experiment_simplex)
        assert len(verts) == 4
        for v in verts:
            active = np.sum(np.abs(experiment_simplex.A @ v
                                   - experiment_simplex.b) < 1e-9)
            assert active == 3

    def test_simplex_and_enumeration_agree(self, experiment_simplex):
        tagged = {tuple(np.round(v, 10)) for v in vertices(experiment_simplex)}
        plain = {tuple(np.round(v, 10)) for v in vertices(untag(experiment_simplex))}
        assert tagged == plain

    def test_degenerate_simplex_raises(self):
        # duplicate direction makes a row-deletion system singular
        A = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, -1.0]])
        poly = Polytope(A, np.array([0.5, 0.25, 0.25]), check_region=False,
                        simplex_c=np.array([1.0, 1.0]),
                        simplex_beta=np.ones(2))
        with pytest.raises(GeometryError, match="degenerate"):
            vertices(poly)


class TestProject:
    def test_interior_point_fixed(self, experiment_simplex):
        p = np.zeros(3)
        np.testing.assert_allclose(project(p, experiment_simplex), p)

    def test_outside_unit_box(self, unit_box_2d):
        np.testing.assert_allclose(project(np.array([2.0, 0.0]), unit_box_2d),
                                   [1.0, 0.0], atol=1e-10)

    def test_matches_boundary_grid_oracle(self):
        rng = np.random.default_rng(11)
        A = np.array([[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
        b = np.array([0.5, 0.25, 0.25])
        tri = Polytope(A, b)
        verts = np.array(vertices(tri))
        # dense sampling of the triangle boundary
        ts = np.linspace(0, 1, 4000)[:, None]
        edges = [verts[i] * (1 - ts) + verts[j] * ts
                 for i, j in [(0, 1), (1, 2), (2, 0)]]
        boundary = np.vstack(edges)
        for _ in range(10):
            p = rng.uniform(-1.5, 1.5, 2)
            if tri.contains(p):
                continue
            proj = project(p, tri)
            best = np.min(np.linalg.norm(boundary - p, axis=1))
            assert np.linalg.norm(proj - p) <= best + 1e-4
            assert tri.contains(proj, tol=1e-8)

    def test_empty_polytope_rejected(self, experiment_simplex):
        empty = shrink(untag(experiment_simplex), 0.2)
        with pytest.raises(GeometryError):
            project(np.zeros(3), empty)


class TestSharpness:
    def test_zero_delta(self, experiment_simplex):
        assert sharpness(experiment_simplex, 0.0) == 0.0

    def test_symmetric_simplex_formula(self):
        # all per-axis ratios equal -> delta * sqrt((M-1) + (2M-1)^2)
        poly = build_simplex(SimplexSpec(np.array([0.7, 0.7, 0.7])))
        delta = 0.3 * max_shrinkage(poly)
        assert sharpness(poly, delta) == pytest.approx(delta * np.sqrt(27),
                                                       rel=1e-12)

    def test_closed_form_matches_vertex_projection(self, experiment_simplex):
        scaled = apply_scaling(experiment_simplex,
                               ScalingTransform(np.array([1.3, 0.4, 2.2])))
        for frac in (0.2, 0.7, 1.0):
            delta = frac * max_shrinkage(scaled)
            assert sharpness(scaled, delta) == pytest.approx(
                sharpness(untag(scaled), delta), abs=1e-6)

    def test_homogeneity(self, experiment_simplex):
        H = max_shrinkage(experiment_simplex)
        s1 = sharpness(experiment_simplex, 0.25 * H)
        s2 = sharpness(experiment_simplex, 0.5 * H)
        assert s2 == pytest.approx(2 * s1, rel=1e-9)

    def test_out_of_range_rejected(self, experiment_simplex):
        with pytest.raises(GeometryError, match="exceeds"):
            sharpness(experiment_simplex, 1 / 14 + 1e-6)

    @given(st.lists(st.floats(0.2, 3.0), min_size=2, max_size=4),
           st.lists(st.floats(0.2, 3.0), min_size=4, max_size=4),
           st.floats(0.05, 1.0))
    @settings(max_examples=25, deadline=None)
    def test_lower_bound_over_random_simplices(self, c, beta, frac):
        c = np.array(c)
        beta = np.array(beta[: len(c)])
        poly = apply_scaling(build_simplex(SimplexSpec(c)),
                             ScalingTransform(beta))
        M = len(c)
        delta = frac * max_shrinkage(poly)
        floor = delta * np.sqrt((M - 1) + (2 * M - 1) ** 2)
        assert sharpness(poly, delta) >= floor - 1e-9


class TestSerialization:
    def test_polytope_round_trip(self, experiment_simplex):
        poly = Polytope(experiment_simplex.A * np.pi,
                        experiment_simplex.b * np.e, check_region=False)
        back = geometry_from_text(poly.to_text())
        np.testing.assert_array_equal(back.A, poly.A)
        np.testing.assert_array_equal(back.b, poly.b)

    def test_simplex_round_trip_is_tagged(self):
        spec = SimplexSpec(np.array([1.0, 0.25, 0.5]))
        back = geometry_from_text(spec.to_text())
        assert back.is_simplex
        np.testing.assert_array_equal(back.simplex_c, spec.c)

    def test_rejects_malformed(self):
        with pytest.raises(GeometryError):
            geometry_from_text("polytope 2 2\nA\n1 0\nb\n1 1")
        with pytest.raises(GeometryError):
            geometry_from_text("wedge\n1 2 3")
