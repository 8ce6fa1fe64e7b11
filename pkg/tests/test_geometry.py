import numpy as np
import pytest

from nfmasim.geometry import (RegionBox, SystemLayout, check_rotation,
                              count_spacing_violations, local_to_global,
                              min_pairwise_distance, project_into_box,
                              random_rotation)


def test_local_to_global_identity_rotation():
    out = local_to_global(np.array([100.0, 0.0, 0.0]), np.eye(3),
                          np.array([0.001, 0.0, 0.002]))
    np.testing.assert_allclose(out, [100.001, 0.0, 0.002], rtol=0, atol=1e-15)


def test_local_to_global_half_turn_about_z():
    rot = np.array([[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]])
    out = local_to_global(np.zeros(3), rot, np.array([1.0, 0.0, 0.0]))
    np.testing.assert_allclose(out, [-1.0, 0.0, 0.0], atol=1e-15)


def test_local_to_global_preserves_norm_for_random_rotations():
    rng = np.random.default_rng(42)
    for _ in range(50):
        rot = random_rotation(rng)
        origin = rng.uniform(-50, 50, 3)
        local = rng.uniform(-1, 1, 3)
        out = local_to_global(origin, rot, local)
        assert np.linalg.norm(out - origin) == pytest.approx(
            np.linalg.norm(local), rel=1e-12)


def test_local_to_global_is_an_isometry():
    rng = np.random.default_rng(7)
    rot = random_rotation(rng)
    origin = rng.uniform(-10, 10, 3)
    a, b = rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3)
    ga = local_to_global(origin, rot, a)
    gb = local_to_global(origin, rot, b)
    assert np.linalg.norm(ga - gb) == pytest.approx(
        np.linalg.norm(a - b), rel=1e-12)


def test_random_rotation_is_orthogonal_with_unit_determinant():
    rng = np.random.default_rng(3)
    for _ in range(50):
        rot = random_rotation(rng)
        assert np.max(np.abs(rot @ rot.T - np.eye(3))) <= 1e-12
        assert abs(np.linalg.det(rot) - 1.0) <= 1e-12
        assert check_rotation(rot)


def test_min_pairwise_distance_two_points():
    pts = np.array([[0.0, 0.0, 0.0], [0.00535, 0.0, 0.0]])
    assert min_pairwise_distance(pts) == pytest.approx(0.00535)


def test_min_pairwise_distance_collinear():
    pts = np.array([[0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0]])
    assert min_pairwise_distance(pts) == pytest.approx(1.0)


def test_min_pairwise_distance_matches_brute_force():
    rng = np.random.default_rng(11)
    pts = rng.uniform(-1, 1, size=(10, 3))
    expected = min(np.linalg.norm(pts[i] - pts[j])
                   for i in range(10) for j in range(i + 1, 10))
    assert min_pairwise_distance(pts) == pytest.approx(expected, rel=1e-15)


def test_min_pairwise_distance_single_point_is_infinite():
    assert min_pairwise_distance(np.array([[0.0, 0, 0]])) == np.inf


def test_violations_two_coincident_antennas():
    pts = np.zeros((2, 3))
    assert count_spacing_violations(pts, 0.00535) == 2


def test_violations_none_when_spacing_met():
    pts = np.array([[0.0, 0, 0], [1.0, 0, 0], [0, 0, 1.0]])
    assert count_spacing_violations(pts, 0.5) == 0


def test_violations_boundary_distance_is_allowed():
    pts = np.array([[0.0, 0, 0], [0.5, 0, 0]])
    assert count_spacing_violations(pts, 0.5) == 0


def test_violations_match_exhaustive_pair_scan():
    rng = np.random.default_rng(5)
    for _ in range(20):
        pts = rng.uniform(0, 1, size=(5, 3))
        d_min = float(rng.uniform(0.1, 0.8))
        flagged = set()
        for i in range(5):
            for j in range(5):
                if i != j and np.linalg.norm(pts[i] - pts[j]) < d_min:
                    flagged.add(i)
        assert count_spacing_violations(pts, d_min) == len(flagged)


def test_violations_antenna_in_multiple_pairs_counted_once():
    pts = np.array([[0.0, 0, 0], [0.1, 0, 0], [-0.1, 0, 0]])
    assert count_spacing_violations(pts, 0.5) == 3


def test_violations_consistent_with_min_distance():
    rng = np.random.default_rng(17)
    for _ in range(50):
        pts = rng.uniform(0, 1, size=(6, 3))
        d_min = float(rng.uniform(0.05, 0.9))
        no_violation = count_spacing_violations(pts, d_min) == 0
        assert no_violation == (min_pairwise_distance(pts) >= d_min)


def test_project_clamps_outside_points():
    out = project_into_box(np.array([2.0, -3.0]), np.array([-1.0, -1.0]),
                           np.array([1.0, 1.0]))
    np.testing.assert_array_equal(out, [1.0, -1.0])


def test_project_identity_on_interior():
    u = np.array([0.3, -0.7, 0.0])
    out = project_into_box(u, -np.ones(3), np.ones(3))
    np.testing.assert_array_equal(out, u)


def test_project_is_idempotent_and_stays_in_box():
    rng = np.random.default_rng(23)
    for _ in range(50):
        lower = rng.uniform(-2, 0, 6)
        upper = lower + rng.uniform(0, 3, 6)
        u = rng.uniform(-5, 5, 6)
        once = project_into_box(u, lower, upper)
        twice = project_into_box(once, lower, upper)
        np.testing.assert_array_equal(once, twice)
        assert np.all(once >= lower) and np.all(once <= upper)


def test_project_respects_degenerate_bounds():
    lower = np.array([0.0, -1.0])
    upper = np.array([0.0, 1.0])
    out = project_into_box(np.array([5.0, 0.5]), lower, upper)
    np.testing.assert_array_equal(out, [0.0, 0.5])


def test_region_box_bounds_pin_plane_coordinate():
    box = RegionBox.square(2.0, center=(1.0, 2.0, 3.0), plane="xz")
    np.testing.assert_array_equal(box.lower, [0.0, 2.0, 2.0])
    np.testing.assert_array_equal(box.upper, [2.0, 2.0, 4.0])
    assert box.contains([0.5, 2.0, 3.9])
    assert not box.contains([0.5, 2.1, 3.9])


def test_region_box_degenerate_is_a_point():
    box = RegionBox.square(0.0)
    np.testing.assert_array_equal(box.lower, box.upper)


def test_region_box_rejects_negative_extent_and_bad_plane():
    with pytest.raises(ValueError):
        RegionBox(center=np.zeros(3), half_extents=(-0.1, 0.1))
    with pytest.raises(ValueError):
        RegionBox(center=np.zeros(3), half_extents=(0.1, 0.1), plane="ab")


def test_system_layout_receive_global_applies_rotations():
    rng = np.random.default_rng(9)
    rot = random_rotation(rng)
    layout = SystemLayout(
        transmit_positions=np.zeros((2, 3)) + [[0, 0, 0], [1, 0, 0]],
        receive_local=np.array([[0.01, 0.0, 0.02]]),
        user_origins=np.array([[100.0, 0.0, 0.0]]),
        rotations=rot[None, :, :],
        min_spacing=0.5)
    expected = np.array([100.0, 0.0, 0.0]) + rot @ np.array([0.01, 0.0, 0.02])
    np.testing.assert_allclose(layout.receive_global()[0], expected,
                               rtol=1e-14)
    assert layout.spacing_violations() == 0
