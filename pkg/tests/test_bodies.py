import math

import numpy as np
import pytest

from waistlab._util import sphere_points
from waistlab.bodies import (BodySpec, ball, construct_body, cross_polytope, cube,
                             difference_body, ellipsoid, intersect, mc_volume,
                             minkowski_sum, neighborhood, polar, product_body,
                             reflect_body, rotate_body, scale_body, slab_body,
                             truncated_cylinder, unit_ball_volume, vertex_polytope,
                             volume_ratio)
from waistlab.errors import ContainmentError, DomainError, SpecError


def rotation2(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def catalog3():
    return [ball(3, 1.5), cube(3, 0.8), cross_polytope(3, 1.2),
            ellipsoid([1.0, 2.0, 0.5]), slab_body(np.eye(3)[:2], [0.9, 0.6]),
            vertex_polytope([[1, 1, 1], [1, 1, -1], [1, -1, 1], [-1, 1, 1],
                             [-1, -1, 1], [-1, 1, -1], [1, -1, -1], [-1, -1, -1]])]


# ---------------------------------------------------------------------------
# catalog constructors
# ---------------------------------------------------------------------------


def test_cube_anchors():
    K = cube(4, 1.0)
    assert K.support(np.eye(4)[0]) == 1.0
    assert K.gauge(np.ones(4)) == 1.0
    assert K.contains(np.ones(4))


def test_cross_polytope_support_anchor():
    K = cross_polytope(2, 1.0)
    u = np.array([1.0, 1.0]) / math.sqrt(2.0)
    # the l1-ball support is the sup-norm of the direction
    assert K.support(u) == pytest.approx(max(abs(u)), abs=1e-15)
    assert K.support(u) == pytest.approx(0.70711, abs=5e-6)


def test_ellipsoid_anchor():
    E = ellipsoid([1.0, 2.0])
    assert E.gauge([0.0, 2.0]) == pytest.approx(1.0, abs=1e-15)
    assert E.contains([0.0, 2.0])
    assert not E.contains([0.0, 2.0 + 1e-6])


def test_ellipsoid_projection_matches_bisection_oracle():
    E = ellipsoid([1.0, 2.0, 0.5])
    rng = np.random.default_rng(0)
    X = rng.normal(size=(50, 3)) * 3.0
    P = E.project(X)
    assert np.all(np.asarray(E.gauge(P)) <= 1.0 + 1e-9)
    # optimality: the residual must be normal to the ellipsoid at the projection
    for x, p in zip(X, P):
        if float(E.gauge(x)) <= 1.0:
            assert np.allclose(x, p)
            continue
        grad = p / np.array([1.0, 2.0, 0.5]) ** 2
        cosang = (x - p) @ grad / (np.linalg.norm(x - p) * np.linalg.norm(grad))
        assert cosang == pytest.approx(1.0, abs=1e-6)


def test_degenerate_ball_is_origin():
    Z = ball(3, 0.0)
    assert Z.distance([0.3, 0.4, 0.0]) == pytest.approx(0.5, abs=1e-15)
    assert Z.contains([0.0, 0.0, 0.0])
    assert not Z.contains([1e-6, 0.0, 0.0])
    assert math.isinf(Z.gauge([1.0, 0.0, 0.0]))


def test_slab_body_evaluators():
    K = slab_body([[1.0, 0.0], [-1.0, 1.0]], [1.0, 0.5])
    # widths divide by the normal length: second slab is |x2-x1| <= 0.5
    assert K.contains([1.0, 1.2])
    assert not K.contains([1.0, 1.6])
    assert K.gauge([1.0, 1.5]) == pytest.approx(1.0, abs=1e-12)
    assert K.support([1.0, 0.0]) == pytest.approx(1.0, abs=1e-9)
    assert K.support([0.0, 1.0]) == pytest.approx(1.5, abs=1e-9)


def test_slab_body_unbounded_support():
    K = slab_body([[1.0, 0.0, 0.0]], [0.5])
    assert math.isinf(K.outer_radius)
    assert math.isinf(K.support([0.0, 1.0, 0.0]))


def test_vertex_polytope_triangle():
    T = vertex_polytope([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert T.contains([0.2, 0.2])
    assert not T.contains([0.6, 0.6])
    assert T.support([1.0, 1.0]) == pytest.approx(1.0, abs=1e-15)
    assert not T.symmetric


def test_vertex_polytope_symmetric_detection():
    P = vertex_polytope([[1, 0], [-1, 0], [0, 1], [0, -1]])
    assert P.symmetric
    with pytest.raises(SpecError):
        vertex_polytope([[0, 0], [1, 0], [0, 1]], symmetric=True)


def test_product_body_split():
    P = product_body(cube(1, 1.0), ball(2, 0.0))  # segment in R^3
    x = np.array([math.cos(math.pi / 6), 0.5, 0.0])
    assert P.distance(x) == pytest.approx(0.5, abs=1e-12)
    assert P.support([1.0, 0.0, 0.0]) == pytest.approx(1.0, abs=1e-15)
    assert math.isinf(P.gauge([0.5, 0.1, 0.0]))


def test_truncated_cylinder_flags():
    C = truncated_cylinder(ball(2, 0.5), 5, truncation_radius=100.0)
    assert C.truncated
    assert C.dim == 5
    assert C.contains([0.3, 0.0, 50.0, 0.0, 0.0])
    C2 = truncated_cylinder(ball(2, 0.5), 5, transverse_radius=2.0, truncation_radius=100.0)
    assert not C2.truncated


# ---------------------------------------------------------------------------
# declarative specs
# ---------------------------------------------------------------------------


def test_spec_roundtrip():
    spec = BodySpec.from_json_dict({"kind": "product",
                                    "first": {"kind": "ball", "dim": 2, "radius": 0.5},
                                    "second": {"kind": "cube", "dim": 3, "half_width": 1.0}})
    assert BodySpec.from_json_dict(spec.to_json_dict()) == spec
    K = construct_body(spec)
    assert K.dim == 5


def test_spec_unknown_field_named():
    with pytest.raises(SpecError, match="hlaf_width"):
        BodySpec.from_json_dict({"kind": "cube", "dim": 2, "hlaf_width": 1.0})


def test_spec_missing_field_named():
    with pytest.raises(SpecError, match="radius"):
        BodySpec.from_json_dict({"kind": "ball", "dim": 2})


def test_spec_invalid_value_named():
    with pytest.raises(SpecError, match="half_width"):
        construct_body(BodySpec.from_json_dict({"kind": "cube", "dim": 2, "half_width": -1.0}))


# ---------------------------------------------------------------------------
# combinators
# ---------------------------------------------------------------------------


def test_intersect_cube_ball_membership():
    K = intersect(cube(2, 1.0), ball(2, 1.0))
    x = np.array([0.9, 0.9])
    assert K.gauge(x) == pytest.approx(0.9 * math.sqrt(2.0), abs=1e-12)
    assert not K.contains(x)
    assert not K.support_exact


def test_intersect_self_is_identity():
    K = cube(3, 0.7)
    KK = intersect(K, K)
    u = sphere_points(np.random.default_rng(1), 50, 3)
    assert np.allclose(KK.gauge(u), np.asarray(K.gauge(u)), atol=1e-14)


def test_intersect_rotated_diamonds_radial():
    B = cross_polytope(2, 1.0)
    K = intersect(B, rotate_body(B, rotation2(math.pi / 4)))
    u = np.array([math.cos(math.pi / 8), math.sin(math.pi / 8)])
    oracle = 1.0 / (math.cos(math.pi / 8) + math.sin(math.pi / 8))
    assert K.radial(u) == pytest.approx(oracle, abs=1e-12)
    assert K.radial(u) == pytest.approx(0.76537, abs=5e-6)


def test_minkowski_support_additivity():
    S = minkowski_sum(cube(3, 1.0), ball(3, 1.0))
    assert S.support(np.eye(3)[0]) == pytest.approx(2.0, abs=1e-12)
    rng = np.random.default_rng(2)
    u = sphere_points(rng, 80, 3)
    expect = np.asarray(cube(3, 1.0).support(u)) + 1.0
    assert np.allclose(S.support(u), expect, atol=1e-12)


def test_minkowski_zero_identity():
    K = cube(2, 0.6)
    S = minkowski_sum(K, ball(2, 0.0))
    u = sphere_points(np.random.default_rng(3), 40, 2)
    assert np.allclose(S.support(u), np.asarray(K.support(u)), atol=1e-15)


def test_minkowski_segments_cross():
    seg1 = product_body(cube(1, 1.0), ball(1, 0.0))
    seg2 = product_body(ball(1, 0.0), cube(1, 1.0))
    S = minkowski_sum(seg1, seg2)
    for phi in np.linspace(0, 2 * math.pi, 37):
        u = np.array([math.cos(phi), math.sin(phi)])
        assert float(S.support(u)) == pytest.approx(abs(u[0]) + abs(u[1]), abs=1e-12)


def test_neighborhood_of_ball_is_ball():
    N = neighborhood(ball(3, 1.0), 0.5)
    u = sphere_points(np.random.default_rng(4), 50, 3)
    assert np.allclose(N.support(u), 1.5, atol=1e-12)
    assert N.contains(np.array([1.5, 0.0, 0.0]))


def test_neighborhood_zero_is_same_body():
    K = cube(2, 1.0)
    assert neighborhood(K, 0.0) is K
    with pytest.raises(DomainError):
        neighborhood(K, -0.1)


def test_neighborhood_segment_cap_membership():
    seg = product_body(cube(1, 1.0), ball(2, 0.0))
    N = neighborhood(seg, 0.5)
    p = np.array([math.cos(math.pi / 6), 0.5, 0.0])  # 30 degrees off the axis
    assert N.contains(p)
    assert N.distance(p) == 0.0


def test_rotate_identity_and_invariance():
    K = cube(3, 1.0)
    R = rotate_body(K, np.eye(3))
    u = sphere_points(np.random.default_rng(5), 40, 3)
    assert np.allclose(R.support(u), np.asarray(K.support(u)), atol=1e-15)
    B = ball(3, 1.0)
    from waistlab.geometry import haar_rotation

    U = haar_rotation(3, seed=9)
    RB = rotate_body(B, U)
    assert np.allclose(RB.gauge(u), 1.0, atol=1e-12)


def test_rotate_diamond_anchor():
    B = cross_polytope(2, 1.0)
    R = rotate_body(B, rotation2(math.pi / 4))
    v = R.support(np.array([1.0, 0.0]))
    assert v == pytest.approx(math.sqrt(2.0) / 2.0, abs=1e-12)


def test_rotate_rejects_non_orthogonal():
    with pytest.raises(DomainError):
        rotate_body(cube(2, 1.0), np.array([[1.0, 0.1], [0.0, 1.0]]))


def test_polar_cube_is_cross():
    P = polar(cube(2, 1.0))
    assert P.gauge([1.0, 1.0]) == pytest.approx(2.0, abs=1e-15)
    C = cross_polytope(2, 1.0)
    u = sphere_points(np.random.default_rng(6), 60, 2)
    assert np.allclose(P.support(u), np.asarray(C.support(u)), atol=1e-15)


def test_polar_ball_scaling():
    P = polar(ball(3, 2.0))
    assert P.support(np.eye(3)[1]) == pytest.approx(0.5, abs=1e-15)
    assert P.outer_radius == pytest.approx(0.5)


def test_polar_involution_on_ellipsoid():
    E = ellipsoid([1.0, 2.0])
    PP = polar(polar(E))
    rng = np.random.default_rng(7)
    X = rng.normal(size=(100, 2))
    assert np.max(np.abs(np.asarray(PP.gauge(X)) - np.asarray(E.gauge(X)))) < 1e-10


def test_polar_rejects_flat():
    flat = product_body(ball(1, 1.0), ball(1, 0.0))
    with pytest.raises(DomainError):
        polar(flat)


def test_difference_body_anchors():
    D = difference_body(ball(2, 1.0))
    assert D.support(np.eye(2)[0]) == pytest.approx(2.0, abs=1e-15)
    K = ellipsoid([1.0, 0.5, 2.0])
    DK = difference_body(K)
    u = sphere_points(np.random.default_rng(8), 40, 3)
    assert np.allclose(DK.support(u), 2.0 * np.asarray(K.support(u)), atol=1e-12)


def test_difference_body_simplex_exact_ratio():
    # shoelace-oracle: simplex difference body has 6x the area
    tri = vertex_polytope([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    diff = difference_body(tri)
    assert diff.symmetric

    def shoelace(V):
        from scipy.spatial import ConvexHull

        hull = ConvexHull(V)
        P = V[hull.vertices]
        x, y = P[:, 0], P[:, 1]
        return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    area_tri = shoelace(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    area_diff = shoelace(diff._vertices)
    assert area_diff / area_tri == pytest.approx(6.0, abs=1e-12)
    assert area_diff / area_tri == pytest.approx(math.comb(4, 2), abs=1e-12)


def test_scale_and_reflect():
    K = cube(2, 1.0)
    S = scale_body(K, 2.5)
    assert S.support(np.eye(2)[0]) == pytest.approx(2.5)
    assert S.gauge([2.5, 0.0]) == pytest.approx(1.0)
    T = vertex_polytope([[0, 0], [1, 0], [0, 1]])
    R = reflect_body(T)
    assert R.contains([-0.2, -0.2]) and not R.contains([0.2, 0.2])


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        intersect(cube(2, 1.0), cube(3, 1.0))


# ---------------------------------------------------------------------------
# oracle-bundle invariants
# ---------------------------------------------------------------------------


def test_radial_gauge_roundtrip_and_membership_flip():
    rng = np.random.default_rng(10)
    for K in catalog3():
        u = sphere_points(rng, 200, K.dim)
        r = np.asarray(K.radial(u), dtype=float)
        ok = np.isfinite(r) & (r > 0)
        pts = u[ok] * r[ok][:, None]
        assert np.max(np.abs(np.asarray(K.gauge(pts)) - 1.0)) < 1e-9
        assert np.all(K.contains(u[ok] * (r[ok] * (1 - 1e-6))[:, None]))
        assert not np.any(K.contains(u[ok] * (r[ok] * (1 + 1e-6))[:, None]))
        assert np.all(r[ok] >= K.inner_radius - 1e-9)
        assert np.all(r[ok] <= K.outer_radius + 1e-9)


def test_boundary_ties_are_members():
    K = cube(2, 1.0)
    assert K.contains([1.0, 0.5])
    assert ball(2, 1.0).contains([1.0, 0.0])


def test_support_dominates_members():
    rng = np.random.default_rng(11)
    for K in catalog3():
        u = sphere_points(rng, 30, K.dim)
        r = np.asarray(K.radial(u), dtype=float)
        ok = np.isfinite(r)
        members = u[ok] * r[ok][:, None]
        h = np.asarray(K.support(u), dtype=float)
        inner = members @ u.T  # <x_i, u_j>
        assert np.all(inner.max(axis=0) <= h + 1e-9)


def test_support_gauge_duality_dense_2d():
    # sampled members approach the support value in the plane
    for K in [cube(2, 1.0), cross_polytope(2, 1.3), ellipsoid([0.7, 1.4])]:
        phis = np.linspace(0, 2 * math.pi, 4000, endpoint=False)
        dirs = np.stack([np.cos(phis), np.sin(phis)], axis=1)
        members = dirs * np.asarray(K.radial(dirs))[:, None]
        for u in np.stack([np.cos(phis[::571]), np.sin(phis[::571])], axis=1):
            sup = float(np.max(members @ u))
            assert sup <= float(K.support(u)) + 1e-9
            assert sup >= float(K.support(u)) - 5e-3


def test_distance_zero_iff_member():
    rng = np.random.default_rng(12)
    for K in catalog3():
        pts = rng.normal(size=(100, K.dim))
        d = np.asarray(K.distance(pts), dtype=float)
        inside = np.asarray(K.contains(pts), dtype=bool)
        assert np.all(d[inside] <= 1e-8)
        assert np.all(d[~inside] > 0)


def test_support_homogeneity():
    rng = np.random.default_rng(13)
    for K in catalog3()[:4]:
        u = sphere_points(rng, 20, K.dim)
        assert np.allclose(np.asarray(K.support(3.5 * u)),
                           3.5 * np.asarray(K.support(u)), rtol=1e-12)


# ---------------------------------------------------------------------------
# volume estimation
# ---------------------------------------------------------------------------


def test_mc_volume_ball_anchor():
    vol, se = mc_volume(ball(3, 1.0), 400_000, seed=1)
    assert abs(vol - 4.0 * math.pi / 3.0) <= max(3 * se, 1e-12)


def test_mc_volume_cube_anchor():
    vol, se = mc_volume(cube(2, 1.0), 400_000, seed=2)
    assert abs(vol - 4.0) <= 3 * se


def test_mc_volume_flat_is_zero():
    seg = product_body(cube(1, 1.0), ball(1, 0.0))
    vol, se = mc_volume(seg, 50_000, seed=3)
    assert vol == 0.0


def test_mc_volume_rejects_unbounded():
    with pytest.raises(DomainError):
        mc_volume(slab_body([[1.0, 0.0]], [1.0]), 1000, seed=0)


def test_volume_ratio_anchors():
    assert volume_ratio(ball(3, 1.0), 10_000, seed=4) == pytest.approx(1.0, abs=1e-12)
    assert volume_ratio(ball(4, 2.0), 10_000, seed=5) == pytest.approx(2.0, abs=1e-12)
    A = volume_ratio(cube(2, 1.0), 400_000, seed=6)
    assert A == pytest.approx(math.sqrt(4.0 / math.pi), abs=0.005)


def test_volume_ratio_containment_witness():
    with pytest.raises(ContainmentError) as exc:
        volume_ratio(ball(3, 0.5), 1000, seed=7)
    assert exc.value.direction is not None


def test_rogers_shephard_random_polytopes():
    # difference-body volume ratio stays below the central binomial bound
    rng = np.random.default_rng(14)
    for n in (2, 3, 4):
        V = rng.normal(size=(n + 4, n))
        K = vertex_polytope(V)
        D = difference_body(K)
        v1, se1 = mc_volume(K, 120_000, seed=int(rng.integers(1 << 30)))
        v2, se2 = mc_volume(D, 120_000, seed=int(rng.integers(1 << 30)))
        ratio = v2 / v1
        slack = 3 * ratio * math.hypot(se1 / v1, se2 / v2)
        assert ratio <= math.comb(2 * n, n) + slack


def test_unit_ball_volume_values():
    assert unit_ball_volume(2) == pytest.approx(math.pi, rel=1e-14)
    assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-14)
