"""Skeleton sequence parsing, generation helpers, mirroring, and persistence.

The on-disk text format is one frame per line with 171 comma-separated
fields: a frame index, then for each of the 11 oriented joints a row-major
3x3 rotation matrix, its confidence, the joint position (millimeters, sensor
frame) and its confidence, then for each of the 4 position-only joints the
position and its confidence. A trailing line reading ``END`` is permitted
and ignored. Sensor axes: x right, y up, z away from the camera.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import FieldCountError, NonFiniteValueError, NonOrthonormalError
from .quaternions import orthonormalize, rotation_deviation

FRAME_RATE_HZ = 30.0

# Canonical joint order. The first 11 carry orientation, the last 4 are
# position-only. Matches the public dataset layout; remappable at load time.
HEAD = 0
NECK = 1
TORSO = 2
LEFT_SHOULDER = 3
LEFT_ELBOW = 4
RIGHT_SHOULDER = 5
RIGHT_ELBOW = 6
LEFT_HIP = 7
LEFT_KNEE = 8
RIGHT_HIP = 9
RIGHT_KNEE = 10
LEFT_HAND = 11
RIGHT_HAND = 12
LEFT_FOOT = 13
RIGHT_FOOT = 14

JOINT_NAMES = (
    "head",
    "neck",
    "torso",
    "left_shoulder",
    "left_elbow",
    "right_shoulder",
    "right_elbow",
    "left_hip",
    "left_knee",
    "right_hip",
    "right_knee",
    "left_hand",
    "right_hand",
    "left_foot",
    "right_foot",
)

NUM_JOINTS = 15
NUM_ORIENTED = 11
ORIENTED_JOINTS = tuple(range(NUM_ORIENTED))
POSITION_ONLY_JOINTS = (LEFT_HAND, RIGHT_HAND, LEFT_FOOT, RIGHT_FOOT)

MIRROR_PAIRS = (
    (LEFT_SHOULDER, RIGHT_SHOULDER),
    (LEFT_ELBOW, RIGHT_ELBOW),
    (LEFT_HIP, RIGHT_HIP),
    (LEFT_KNEE, RIGHT_KNEE),
    (LEFT_HAND, RIGHT_HAND),
    (LEFT_FOOT, RIGHT_FOOT),
)

# Ground-truth label for footage of unscripted movement; never trained on.
RANDOM = "random"

FIELDS_PER_LINE = 1 + NUM_ORIENTED * (9 + 1 + 3 + 1) + 4 * (3 + 1)  # 171
ORTHONORMAL_REPAIR_TOL = 0.1
WORLD_UP = np.array([0.0, 1.0, 0.0])


@dataclass(frozen=True)
class JointRecord:
    """One joint observation: position in millimeters, optional orientation."""

    position: np.ndarray
    orientation: np.ndarray | None
    position_confidence: float = 1.0
    orientation_confidence: float = 1.0


@dataclass(frozen=True)
class SkeletonFrame:
    """A timestamped skeleton observation.

    ``positions`` is (15, 3) in millimeters, ``orientations`` is (11, 3, 3)
    with proper rotations for the oriented joints.
    """

    frame_index: int
    positions: np.ndarray
    orientations: np.ndarray
    position_confidence: np.ndarray = field(
        default_factory=lambda: np.ones(NUM_JOINTS)
    )
    orientation_confidence: np.ndarray = field(
        default_factory=lambda: np.ones(NUM_ORIENTED)
    )

    @property
    def timestamp(self) -> float:
        return self.frame_index / FRAME_RATE_HZ

    @property
    def joints(self) -> tuple[JointRecord, ...]:
        return tuple(
            JointRecord(
                position=self.positions[j],
                orientation=self.orientations[j] if j < NUM_ORIENTED else None,
                position_confidence=float(self.position_confidence[j]),
                orientation_confidence=(
                    float(self.orientation_confidence[j]) if j < NUM_ORIENTED else 0.0
                ),
            )
            for j in range(NUM_JOINTS)
        )


@dataclass(frozen=True)
class LabeledSequence:
    """An ordered skeleton stream with its ground truth annotations."""

    frames: tuple[SkeletonFrame, ...]
    activity_label: str
    location: str
    subject_id: str
    rgb_images: tuple[np.ndarray, ...] | None = None
    depth_images: tuple[np.ndarray, ...] | None = None

    def __post_init__(self) -> None:
        indices = [f.frame_index for f in self.frames]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError("frame indices must be strictly increasing")
        for images in (self.rgb_images, self.depth_images):
            if images is not None and len(images) != len(self.frames):
                raise ValueError("images must align one-to-one with frames")

    def __len__(self) -> int:
        return len(self.frames)


def _parse_floats(fields: Sequence[str]) -> np.ndarray:
    try:
        values = np.array([float(f) for f in fields])
    except ValueError as exc:
        raise NonFiniteValueError(f"unparseable numeric field: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise NonFiniteValueError("record contains non-finite values")
    return values


def parse_frame(line: str, joint_order: Sequence[int] | None = None) -> SkeletonFrame:
    """Parse one 171-field text record into a SkeletonFrame.

    Rotation blocks are re-orthonormalized to the nearest proper rotation;
    blocks deviating by more than 0.1 (inf-norm of R^T R - I or |det - 1|)
    are rejected. ``joint_order`` remaps file joint slots onto the canonical
    order (entry i names the canonical joint stored in file slot i).
    """
    fields = [f for f in line.strip().split(",") if f != ""]
    if len(fields) != FIELDS_PER_LINE:
        raise FieldCountError(
            f"expected {FIELDS_PER_LINE} fields, got {len(fields)}"
        )
    values = _parse_floats(fields)
    order = tuple(joint_order) if joint_order is not None else tuple(range(NUM_JOINTS))
    if sorted(order) != list(range(NUM_JOINTS)):
        raise ValueError("joint_order must be a permutation of 0..14")

    frame_index = int(values[0])
    positions = np.zeros((NUM_JOINTS, 3))
    orientations = np.tile(np.eye(3), (NUM_ORIENTED, 1, 1))
    pos_conf = np.ones(NUM_JOINTS)
    ori_conf = np.zeros(NUM_ORIENTED)

    cursor = 1
    for slot in range(NUM_ORIENTED):
        joint = order[slot]
        rot = values[cursor : cursor + 9].reshape(3, 3)
        deviation = rotation_deviation(rot)
        if deviation > ORTHONORMAL_REPAIR_TOL:
            raise NonOrthonormalError(
                f"rotation block for joint {JOINT_NAMES[joint]} deviates by "
                f"{deviation:.3g} (> {ORTHONORMAL_REPAIR_TOL})"
            )
        orientations[joint] = orthonormalize(rot)
        ori_conf[joint] = min(max(values[cursor + 9], 0.0), 1.0)
        positions[joint] = values[cursor + 10 : cursor + 13]
        pos_conf[joint] = min(max(values[cursor + 13], 0.0), 1.0)
        cursor += 14
    for slot in range(4):
        joint = order[NUM_ORIENTED + slot]
        positions[joint] = values[cursor : cursor + 3]
        pos_conf[joint] = min(max(values[cursor + 3], 0.0), 1.0)
        cursor += 4

    return SkeletonFrame(
        frame_index=frame_index,
        positions=positions,
        orientations=orientations,
        position_confidence=pos_conf,
        orientation_confidence=ori_conf,
    )


def serialize_frame(frame: SkeletonFrame) -> str:
    """Inverse of parse_frame (canonical joint order, full float precision)."""
    parts = [str(int(frame.frame_index))]
    for j in ORIENTED_JOINTS:
        parts.extend(repr(float(v)) for v in frame.orientations[j].ravel())
        parts.append(repr(float(frame.orientation_confidence[j])))
        parts.extend(repr(float(v)) for v in frame.positions[j])
        parts.append(repr(float(frame.position_confidence[j])))
    for j in POSITION_ONLY_JOINTS:
        parts.extend(repr(float(v)) for v in frame.positions[j])
        parts.append(repr(float(frame.position_confidence[j])))
    return ",".join(parts)


def read_skeleton_frames(
    lines: Iterable[str], joint_order: Sequence[int] | None = None
) -> list[SkeletonFrame]:
    """Parse a frame stream, carrying orientations over zero-confidence gaps.

    A joint whose orientation confidence is 0 reuses the previous frame's
    orientation for that joint; on the first frame it falls back to identity
    (which parse_frame already stored).
    """
    frames: list[SkeletonFrame] = []
    for line in lines:
        stripped = line.strip()
        if not stripped or stripped.upper() == "END":
            continue
        frame = parse_frame(stripped, joint_order)
        if frames:
            missing = frame.orientation_confidence == 0.0
            if np.any(missing):
                orientations = frame.orientations.copy()
                orientations[missing] = frames[-1].orientations[missing]
                frame = replace(frame, orientations=orientations)
        frames.append(frame)
    return frames


def load_skeleton_file(
    path: str | Path,
    activity_label: str,
    location: str,
    subject_id: str,
    joint_order: Sequence[int] | None = None,
) -> LabeledSequence:
    with open(path, "r", encoding="ascii") as fh:
        frames = read_skeleton_frames(fh, joint_order)
    return LabeledSequence(
        frames=tuple(frames),
        activity_label=activity_label,
        location=location,
        subject_id=subject_id,
    )


def write_skeleton_file(path: str | Path, frames: Sequence[SkeletonFrame]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for frame in frames:
            fh.write(serialize_frame(frame) + "\n")
        fh.write("END\n")


# -- manifest ----------------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    file: str
    activity: str
    location: str
    subject: str


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    """Read the file,activity,location,subject CSV that indexes a dataset."""
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"file", "activity", "location", "subject"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"manifest must have columns {sorted(required)}")
        for row in reader:
            entries.append(
                ManifestEntry(
                    file=row["file"],
                    activity=row["activity"],
                    location=row["location"],
                    subject=row["subject"],
                )
            )
    return entries


def write_manifest(path: str | Path, entries: Sequence[ManifestEntry]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["file", "activity", "location", "subject"])
        for e in entries:
            writer.writerow([e.file, e.activity, e.location, e.subject])


def load_dataset(
    data_dir: str | Path,
    manifest_path: str | Path | None = None,
    joint_order: Sequence[int] | None = None,
) -> list[LabeledSequence]:
    data_dir = Path(data_dir)
    manifest_path = Path(manifest_path or data_dir / "manifest.csv")
    sequences = []
    for entry in read_manifest(manifest_path):
        sequences.append(
            load_skeleton_file(
                data_dir / entry.file,
                activity_label=entry.activity,
                location=entry.location,
                subject_id=entry.subject,
                joint_order=joint_order,
            )
        )
    return sequences


# -- mirroring ---------------------------------------------------------------

_MIRROR = np.diag([-1.0, 1.0, 1.0])
_MIRROR_INDEX = np.arange(NUM_JOINTS)
for _l, _r in MIRROR_PAIRS:
    _MIRROR_INDEX[_l], _MIRROR_INDEX[_r] = _r, _l


def mirror_frame(frame: SkeletonFrame) -> SkeletonFrame:
    """Reflect a frame across the sensor's vertical mid-plane.

    Positions have x negated, left/right joint identities swap, and each
    rotation R becomes M R M with M = diag(-1, 1, 1) (a proper rotation
    again), re-orthonormalized.
    """
    positions = frame.positions[_MIRROR_INDEX].copy()
    positions[:, 0] *= -1.0
    orientations = frame.orientations[_MIRROR_INDEX[:NUM_ORIENTED]]
    orientations = np.einsum("ij,njk,kl->nil", _MIRROR, orientations, _MIRROR)
    orientations = np.stack([orthonormalize(r) for r in orientations])
    return SkeletonFrame(
        frame_index=frame.frame_index,
        positions=positions,
        orientations=orientations,
        position_confidence=frame.position_confidence[_MIRROR_INDEX],
        orientation_confidence=frame.orientation_confidence[
            _MIRROR_INDEX[:NUM_ORIENTED]
        ],
    )


def mirror_sequence(seq: LabeledSequence) -> LabeledSequence:
    frames = tuple(mirror_frame(f) for f in seq.frames)
    rgb = None
    if seq.rgb_images is not None:
        rgb = tuple(np.ascontiguousarray(img[:, ::-1]) for img in seq.rgb_images)
    depth = None
    if seq.depth_images is not None:
        depth = tuple(np.ascontiguousarray(img[:, ::-1]) for img in seq.depth_images)
    return LabeledSequence(
        frames=frames,
        activity_label=seq.activity_label,
        location=seq.location,
        subject_id=seq.subject_id,
        rgb_images=rgb,
        depth_images=depth,
    )


# -- portable anymap images ---------------------------------------------------

def _read_pnm_header(fh) -> tuple[bytes, int, int, int]:
    def token():
        tok = b""
        while True:
            ch = fh.read(1)
            if not ch:
                raise ValueError("truncated PNM header")
            if ch in b" \t\r\n":
                if tok:
                    return tok
                continue
            if ch == b"#":
                while fh.read(1) not in (b"\n", b""):
                    pass
                continue
            tok += ch

    magic = token()
    width, height, maxval = int(token()), int(token()), int(token())
    return magic, width, height, maxval


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a binary P5 graymap as a (H, W) float array (16-bit supported)."""
    with open(path, "rb") as fh:
        magic, width, height, maxval = _read_pnm_header(fh)
        if magic != b"P5":
            raise ValueError(f"not a P5 graymap: {magic!r}")
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        data = np.frombuffer(fh.read(width * height * dtype.itemsize), dtype=dtype)
    return data.reshape(height, width).astype(float)


def read_ppm(path: str | Path) -> np.ndarray:
    """Read a binary P6 pixmap as a (H, W, 3) uint8 array."""
    with open(path, "rb") as fh:
        magic, width, height, maxval = _read_pnm_header(fh)
        if magic != b"P6":
            raise ValueError(f"not a P6 pixmap: {magic!r}")
        if maxval > 255:
            raise ValueError("16-bit pixmaps are not supported")
        data = np.frombuffer(fh.read(width * height * 3), dtype=np.uint8)
    return data.reshape(height, width, 3).copy()


def write_pgm(path: str | Path, image: np.ndarray, maxval: int = 255) -> None:
    image = np.asarray(image)
    dtype = np.dtype(">u2") if maxval > 255 else np.uint8
    with open(path, "wb") as fh:
        fh.write(f"P5\n{image.shape[1]} {image.shape[0]}\n{maxval}\n".encode())
        fh.write(np.clip(np.rint(image), 0, maxval).astype(dtype).tobytes())


def write_ppm(path: str | Path, image: np.ndarray) -> None:
    image = np.asarray(image, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{image.shape[1]} {image.shape[0]}\n255\n".encode())
        fh.write(image.tobytes())
