import math

import numpy as np
import pytest

from tfmonad.errors import LoopNotClosedError, PathNotInLeafError
from tfmonad.services.foliation_service import foliation_service


def circle_loop(t):
    return (0.0, 1.0 + 2 * math.pi * t)


def test_cylinder_leaf_is_a_circle(cylinder):
    cloud = foliation_service.sample_leaf(cylinder, (0.0, 1.0), count=20)
    assert cloud.dimension == 1
    assert cloud.tame
    assert len(cloud.points) == 20
    assert all(p[0] == pytest.approx(0.0) for p in cloud.points)


def test_radial_leaf_is_a_ray(radial):
    cloud = foliation_service.sample_leaf(radial, (1.0, 0.0), count=20)
    assert cloud.dimension == 1
    assert all(p[0] > 0 and p[1] == pytest.approx(0.0) for p in cloud.points)


def test_radial_origin_is_a_point_leaf(radial):
    cloud = foliation_service.sample_leaf(radial, (0.0, 0.0), count=10)
    assert cloud.dimension == 0
    assert all(p == pytest.approx((0.0, 0.0)) for p in cloud.points)


def test_lift_once_around_the_cylinder(cylinder):
    lifted = foliation_service.lift_path(cylinder, (0.0, 1.0), circle_loop)
    assert lifted.endpoint == pytest.approx((2 * math.pi, 0.0), abs=1e-6)
    assert lifted.max_residual < 1e-6


def test_lift_rotation_arc(rotation):
    # alpha at (1, 0) is -u1, so an arc of angle t/2 lifts to (-t/2, 0)
    lifted = foliation_service.lift_path(rotation, (1.0, 0.0), lambda t: (math.cos(t / 2), math.sin(t / 2)), steps=4)
    assert lifted.endpoint == pytest.approx((-0.5, 0.0), abs=1e-6)


def test_path_leaving_the_leaf_is_rejected(cylinder):
    with pytest.raises(PathNotInLeafError):
        foliation_service.validate_leaf_path(cylinder, (0.0, 1.0), lambda t: (t, 1.0))


def test_path_inside_the_leaf_is_accepted(cylinder):
    distances = foliation_service.validate_leaf_path(cylinder, (0.0, 1.0), circle_loop, samples=8)
    assert max(distances) < 1e-6


def test_path_must_start_at_the_base_point(cylinder):
    with pytest.raises(PathNotInLeafError):
        foliation_service.lift_path(cylinder, (0.0, 1.0), lambda t: (0.0, 2.0 + t))


def test_cylinder_holonomy_is_trivial(cylinder):
    result = foliation_service.holonomy_linear_map(cylinder, (0.0, 1.0), circle_loop)
    assert result.matrix.shape == (1, 1)
    assert result.matrix[0, 0] == pytest.approx(1.0)
    assert result.has_eigenvalue_one
    assert result.loop_parameter[0] == pytest.approx(2 * math.pi, abs=1e-6)


def test_open_loop_is_rejected(cylinder):
    with pytest.raises(LoopNotClosedError):
        foliation_service.holonomy_linear_map(cylinder, (0.0, 1.0), lambda t: (0.0, 1.0 + t))


def test_cylinder_leaves_partition(cylinder):
    report = foliation_service.check_partition(cylinder, (0.0, 1.0), trials=5)
    assert report.passed
    assert report.successes == 5
    assert not report.failures


def test_eigenvalue_one():
    assert foliation_service.check_eigenvalue_one(np.eye(2))
    assert not foliation_service.check_eigenvalue_one([[2.0]])
    assert foliation_service.check_eigenvalue_one(np.zeros((0, 0)))
