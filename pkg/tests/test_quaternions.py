import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skelact.errors import InvalidRotationError
from skelact.quaternions import (
    orthonormalize,
    quaternion_to_rotation,
    quats_from_matrices,
    rotation_to_halfspace_quaternion,
)

from .conftest import random_rotation, rotation_about


def test_identity_maps_to_unit_quaternion():
    q = rotation_to_halfspace_quaternion(np.eye(3))
    assert np.allclose(q, [1.0, 0.0, 0.0, 0.0])


def test_half_turn_about_z_hits_w_zero_boundary():
    # rotation by pi about z: w = 0, sign rule forces +z
    q = rotation_to_halfspace_quaternion(np.diag([-1.0, -1.0, 1.0]))
    assert np.allclose(q, [0.0, 0.0, 0.0, 1.0], atol=1e-12)


def test_quarter_turn_about_z_closed_form():
    q = rotation_to_halfspace_quaternion(rotation_about([0, 0, 1], np.pi / 2))
    expected = [np.cos(np.pi / 4), 0.0, 0.0, np.sin(np.pi / 4)]
    assert np.allclose(q, expected, atol=1e-12)


def test_round_trip_many_random_rotations(rng):
    for _ in range(1000):
        r = random_rotation(rng)
        q = rotation_to_halfspace_quaternion(r)
        assert np.abs(quaternion_to_rotation(q) - r).max() < 1e-6


def test_unit_norm_and_halfspace_invariant(rng):
    for _ in range(500):
        q = rotation_to_halfspace_quaternion(random_rotation(rng))
        assert abs(np.linalg.norm(q) - 1.0) < 1e-9
        w, x, y, z = q
        assert w >= 0.0
        if w == 0.0:
            nonzero = [c for c in (x, y, z) if c != 0.0]
            assert nonzero[0] >= 0.0


@settings(max_examples=100, deadline=None)
@given(
    ax=st.floats(-1, 1), ay=st.floats(-1, 1), az=st.floats(-1, 1),
    angle=st.floats(0.0, np.pi),
)
def test_halfspace_invariant_property(ax, ay, az, angle):
    axis = np.array([ax, ay, az])
    if np.linalg.norm(axis) < 1e-6:
        axis = np.array([1.0, 0.0, 0.0])
    q = rotation_to_halfspace_quaternion(rotation_about(axis, angle))
    assert q[0] >= 0.0
    assert abs(np.linalg.norm(q) - 1.0) < 1e-9


def test_batched_conversion_matches_scalar(rng):
    mats = np.stack([random_rotation(rng) for _ in range(64)])
    batch = quats_from_matrices(mats)
    singles = np.stack([rotation_to_halfspace_quaternion(m) for m in mats])
    assert np.array_equal(batch, singles)


def test_rejects_non_orthonormal_matrix():
    bad = np.eye(3) + 0.01
    with pytest.raises(InvalidRotationError):
        rotation_to_halfspace_quaternion(bad)


def test_rejects_reflection():
    with pytest.raises(InvalidRotationError):
        rotation_to_halfspace_quaternion(np.diag([1.0, 1.0, -1.0]))


def test_orthonormalize_recovers_noisy_rotation(rng):
    r = random_rotation(rng)
    noisy = r + rng.normal(0.0, 1e-3, size=(3, 3))
    fixed = orthonormalize(noisy)
    assert np.abs(fixed.T @ fixed - np.eye(3)).max() < 1e-12
    assert abs(np.linalg.det(fixed) - 1.0) < 1e-12
    assert np.abs(fixed - r).max() < 5e-3


def test_orthonormalize_restores_positive_determinant():
    fixed = orthonormalize(np.diag([1.0, 1.0, -1.0]))
    assert np.linalg.det(fixed) > 0.0
