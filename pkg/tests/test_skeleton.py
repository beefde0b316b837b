import numpy as np
import pytest

from skelact.errors import FieldCountError, NonFiniteValueError, NonOrthonormalError
from skelact.quaternions import rotation_to_halfspace_quaternion
from skelact.skeleton import (
    FIELDS_PER_LINE,
    LEFT_HAND,
    NUM_JOINTS,
    NUM_ORIENTED,
    ORTHONORMAL_REPAIR_TOL,
    RIGHT_HAND,
    LabeledSequence,
    SkeletonFrame,
    mirror_sequence,
    parse_frame,
    read_pgm,
    read_ppm,
    read_skeleton_frames,
    serialize_frame,
    write_pgm,
    write_ppm,
)

from .conftest import random_frame, rotation_about


def make_line(frame_index=0, rotations=None, positions=None, ori_conf=1.0):
    """Assemble a 171-field record; defaults to identity rotations."""
    fields = [str(frame_index)]
    for j in range(NUM_ORIENTED):
        rot = np.eye(3) if rotations is None else rotations[j]
        fields.extend(repr(float(v)) for v in np.asarray(rot).ravel())
        fields.append(repr(float(ori_conf)))
        pos = (10.0 * j, 20.0 * j, 2000.0) if positions is None else positions[j]
        fields.extend(repr(float(v)) for v in pos)
        fields.append("1")
    for j in range(4):
        pos = (5.0 * j, -10.0 * j, 2200.0) if positions is None else positions[NUM_ORIENTED + j]
        fields.extend(repr(float(v)) for v in pos)
        fields.append("1")
    return ",".join(fields)


def test_identity_rotations_parse_to_identity_quaternions():
    frame = parse_frame(make_line())
    for j in range(NUM_ORIENTED):
        q = rotation_to_halfspace_quaternion(frame.orientations[j])
        assert np.allclose(q, [1, 0, 0, 0])


def test_field_count_mismatch():
    line = make_line()
    truncated = ",".join(line.split(",")[:-1])
    with pytest.raises(FieldCountError):
        parse_frame(truncated)
    assert len(line.split(",")) == FIELDS_PER_LINE


def test_non_finite_value_rejected():
    fields = make_line().split(",")
    fields[30] = "nan"
    with pytest.raises(NonFiniteValueError):
        parse_frame(",".join(fields))


def test_known_rotation_round_trips_through_parser():
    # rotation about z by 90 degrees, row-major 0,-1,0, 1,0,0, 0,0,1
    rot = rotation_about([0, 0, 1], np.pi / 2)
    assert np.allclose(rot, [[0, -1, 0], [1, 0, 0], [0, 0, 1]], atol=1e-12)
    rotations = [rot] * NUM_ORIENTED
    frame = parse_frame(make_line(rotations=rotations))
    assert np.abs(frame.orientations[0] - rot).max() < 1e-9


def test_badly_non_orthonormal_block_rejected():
    rot = np.eye(3) * (1.0 + 2 * ORTHONORMAL_REPAIR_TOL)
    with pytest.raises(NonOrthonormalError):
        parse_frame(make_line(rotations=[rot] * NUM_ORIENTED))


def test_slightly_noisy_block_is_repaired(rng):
    rot = rotation_about([1, 2, 3], 0.7)
    noisy = rot + rng.normal(0, 5e-3, (3, 3))
    frame = parse_frame(make_line(rotations=[noisy] * NUM_ORIENTED))
    r = frame.orientations[3]
    assert np.abs(r.T @ r - np.eye(3)).max() <= 1e-6
    assert abs(np.linalg.det(r) - 1.0) <= 1e-6


def test_parse_serialize_parse_identity(rng):
    line = serialize_frame(random_frame(rng, frame_index=17))
    frame = parse_frame(line)
    again = parse_frame(serialize_frame(frame))
    assert again.frame_index == 17
    assert np.abs(again.positions - frame.positions).max() < 1e-9
    assert np.abs(again.orientations - frame.orientations).max() < 1e-9
    assert np.abs(
        again.position_confidence - frame.position_confidence
    ).max() < 1e-9


def test_end_line_and_blank_lines_ignored():
    lines = [make_line(0), "", make_line(1), "END"]
    frames = read_skeleton_frames(lines)
    assert [f.frame_index for f in frames] == [0, 1]


def test_zero_confidence_orientation_carries_forward():
    rot = rotation_about([0, 1, 0], 0.5)
    first = make_line(0, rotations=[rot] * NUM_ORIENTED, ori_conf=1.0)
    second = make_line(1, rotations=[np.eye(3)] * NUM_ORIENTED, ori_conf=0.0)
    frames = read_skeleton_frames([first, second])
    assert np.abs(frames[1].orientations[0] - rot).max() < 1e-9


def test_zero_confidence_on_first_frame_falls_back_to_identity():
    line = make_line(0, rotations=[rotation_about([1, 0, 0], 1.0)] * NUM_ORIENTED,
                     ori_conf=0.0)
    frames = read_skeleton_frames([line])
    # stored matrix is parsed as-is; downstream treats confidence 0 via carry,
    # and with no prior frame the parser output stands
    assert frames[0].orientation_confidence[0] == 0.0


def test_timestamp_is_frame_index_over_30():
    frame = parse_frame(make_line(frame_index=45))
    assert frame.timestamp == pytest.approx(1.5)


def make_sequence(rng, n=5, label="act", location="desk", subject="s0"):
    frames = tuple(random_frame(rng, i) for i in range(n))
    return LabeledSequence(
        frames=frames, activity_label=label, location=location, subject_id=subject
    )


def test_mirror_is_involution(rng):
    seq = make_sequence(rng)
    back = mirror_sequence(mirror_sequence(seq))
    for a, b in zip(seq.frames, back.frames):
        assert np.abs(a.positions - b.positions).max() < 1e-9
        assert np.abs(a.orientations - b.orientations).max() < 1e-9


def test_mirror_swaps_hands_and_negates_x(rng):
    seq = make_sequence(rng, n=2)
    frame = seq.frames[0]
    mirrored = mirror_sequence(seq).frames[0]
    expected = frame.positions[RIGHT_HAND] * np.array([-1.0, 1.0, 1.0])
    assert np.allclose(mirrored.positions[LEFT_HAND], expected)


def test_mirror_left_hand_example():
    frames = []
    positions = np.tile([0.0, 0.0, 2000.0], (NUM_JOINTS, 1))
    positions[LEFT_HAND] = [200.0, 0.0, 1500.0]
    frames.append(
        SkeletonFrame(
            frame_index=0,
            positions=positions,
            orientations=np.tile(np.eye(3), (NUM_ORIENTED, 1, 1)),
        )
    )
    seq = LabeledSequence(tuple(frames), "a", "desk", "s")
    mirrored = mirror_sequence(seq)
    assert np.allclose(mirrored.frames[0].positions[RIGHT_HAND], [-200.0, 0.0, 1500.0])


def test_mirror_preserves_count_labels_timestamps(rng):
    seq = make_sequence(rng, n=7, label="x", location="kitchen", subject="p1")
    mirrored = mirror_sequence(seq)
    assert len(mirrored) == 7
    assert mirrored.activity_label == "x"
    assert mirrored.location == "kitchen"
    assert [f.timestamp for f in mirrored.frames] == [f.timestamp for f in seq.frames]


def test_mirror_rotations_stay_proper(rng):
    seq = make_sequence(rng)
    for frame in mirror_sequence(seq).frames:
        for r in frame.orientations:
            assert np.abs(r.T @ r - np.eye(3)).max() <= 1e-6
            assert abs(np.linalg.det(r) - 1.0) <= 1e-6


def test_strictly_increasing_frame_indices_enforced(rng):
    frames = (random_frame(rng, 3), random_frame(rng, 3))
    with pytest.raises(ValueError):
        LabeledSequence(frames, "a", "desk", "s")


def test_pgm_ppm_round_trip(tmp_path, rng):
    gray = rng.integers(0, 255, size=(12, 16)).astype(float)
    write_pgm(tmp_path / "img.pgm", gray)
    assert np.array_equal(read_pgm(tmp_path / "img.pgm"), gray)

    deep = rng.integers(0, 60000, size=(8, 9)).astype(float)
    write_pgm(tmp_path / "deep.pgm", deep, maxval=65535)
    assert np.array_equal(read_pgm(tmp_path / "deep.pgm"), deep)

    rgb = rng.integers(0, 255, size=(6, 7, 3), dtype=np.uint8)
    write_ppm(tmp_path / "img.ppm", rgb)
    assert np.array_equal(read_ppm(tmp_path / "img.ppm"), rgb)
