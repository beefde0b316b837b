"""Histogram-of-oriented-gradients descriptors over grayscale grids.

A descriptor covers one bounding box with 2x2 spatial cells of 8 unsigned
orientation bins over [0, 180): 32 values, L2-normalized. Grids are plain
2-D float arrays (row-major, origin top-left).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateBoxError, JointBehindCameraError
from .skeleton import (
    HEAD,
    LEFT_ELBOW,
    LEFT_HAND,
    LEFT_HIP,
    LEFT_SHOULDER,
    NECK,
    RIGHT_ELBOW,
    RIGHT_HAND,
    RIGHT_HIP,
    RIGHT_SHOULDER,
    TORSO,
    SkeletonFrame,
)

HOG_DIM = 32
N_BINS = 8
MIN_BOX_SIDE = 4
_NORM_EPS = 1e-6


@dataclass(frozen=True)
class BoundingBox:
    """Half-open pixel rectangle [x0, x1) x [y0, y1)."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self) -> None:
        if self.x0 >= self.x1 or self.y0 >= self.y1:
            raise DegenerateBoxError(f"empty box {self}")

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole projection u = fx*x/z + cx, v = fy*y/z + cy."""

    fx: float = 575.0
    fy: float = 575.0
    cx: float = 320.0
    cy: float = 240.0
    width: int = 640
    height: int = 480


def hog_descriptor(grid: np.ndarray, box: BoundingBox) -> np.ndarray:
    """32-value descriptor of the box: 2x2 cells x 8 orientation bins.

    Gradients are centered differences with edge replication at the box
    border; each pixel votes its gradient magnitude, split linearly between
    the two nearest orientation bins. A box with no gradient at all yields
    the zero vector.
    """
    grid = np.asarray(grid, dtype=float)
    if box.width < MIN_BOX_SIDE or box.height < MIN_BOX_SIDE:
        raise DegenerateBoxError(f"box side below {MIN_BOX_SIDE}px: {box}")
    if box.x0 < 0 or box.y0 < 0 or box.x1 > grid.shape[1] or box.y1 > grid.shape[0]:
        raise DegenerateBoxError(f"box {box} exceeds grid {grid.shape}")

    patch = grid[box.y0 : box.y1, box.x0 : box.x1]
    padded = np.pad(patch, 1, mode="edge")
    gx = 0.5 * (padded[1:-1, 2:] - padded[1:-1, :-2])
    gy = 0.5 * (padded[2:, 1:-1] - padded[:-2, 1:-1])

    magnitude = np.hypot(gx, gy)
    angle = np.mod(np.arctan2(gy, gx), np.pi)  # unsigned, [0, pi)

    # linear split between bins centered at i*pi/8
    position = angle * (N_BINS / np.pi)
    lower = np.floor(position).astype(int) % N_BINS
    upper = (lower + 1) % N_BINS
    frac = position - np.floor(position)

    h, w = patch.shape
    rows, cols = np.indices(patch.shape)
    cell = (2 * rows // h) * 2 + (2 * cols // w)  # 0..3 row-major

    hist = np.zeros((4, N_BINS))
    np.add.at(hist, (cell.ravel(), lower.ravel()), (magnitude * (1.0 - frac)).ravel())
    np.add.at(hist, (cell.ravel(), upper.ravel()), (magnitude * frac).ravel())

    vec = hist.ravel()
    return vec / np.sqrt(vec @ vec + _NORM_EPS**2)


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """Luminance grayscale of an (H, W, 3) image."""
    rgb = np.asarray(rgb, dtype=float)
    return rgb @ np.array([0.299, 0.587, 0.114])


def fill_depth_holes(depth: np.ndarray) -> np.ndarray:
    """Replace zero-depth pixels with the nearest valid value in their row."""
    depth = np.asarray(depth, dtype=float).copy()
    for row in depth:
        holes = row == 0.0
        if not holes.any() or holes.all():
            continue
        valid = np.flatnonzero(~holes)
        targets = np.flatnonzero(holes)
        right = np.searchsorted(valid, targets)
        left = np.clip(right - 1, 0, len(valid) - 1)
        right = np.clip(right, 0, len(valid) - 1)
        nearest = np.where(
            np.abs(valid[left] - targets) <= np.abs(valid[right] - targets),
            valid[left],
            valid[right],
        )
        row[targets] = row[nearest]
    return depth


def project_joint(position: np.ndarray, intrinsics: CameraIntrinsics) -> tuple[float, float]:
    x, y, z = position
    if z <= 0.0:
        raise JointBehindCameraError(f"joint depth {z} <= 0")
    return (
        intrinsics.fx * x / z + intrinsics.cx,
        intrinsics.fy * y / z + intrinsics.cy,
    )


def _joints_bbox(
    frame: SkeletonFrame, joints: Sequence[int], intrinsics: CameraIntrinsics
) -> BoundingBox:
    uv = np.array([project_joint(frame.positions[j], intrinsics) for j in joints])
    u_min, v_min = uv.min(axis=0)
    u_max, v_max = uv.max(axis=0)
    # 20% padding per side, at least 4px so near-colinear joints stay usable
    pad_u = max(0.2 * (u_max - u_min), 4.0)
    pad_v = max(0.2 * (v_max - v_min), 4.0)
    x0 = max(int(np.floor(u_min - pad_u)), 0)
    x1 = min(int(np.ceil(u_max + pad_u)), intrinsics.width)
    y0 = max(int(np.floor(v_min - pad_v)), 0)
    y1 = min(int(np.ceil(v_max + pad_v)), intrinsics.height)
    if x0 >= x1 or y0 >= y1:
        raise DegenerateBoxError("projected joints fall outside the image")
    return BoundingBox(x0, y0, x1, y1)


_BOX_MEMBERS = (
    ("head", (HEAD, NECK)),
    ("torso", (NECK, TORSO, LEFT_SHOULDER, RIGHT_SHOULDER, LEFT_HIP, RIGHT_HIP)),
    ("left_arm", (LEFT_SHOULDER, LEFT_ELBOW, LEFT_HAND)),
    ("right_arm", (RIGHT_SHOULDER, RIGHT_ELBOW, RIGHT_HAND)),
)


def skeletal_bboxes(
    frame: SkeletonFrame, intrinsics: CameraIntrinsics = CameraIntrinsics()
) -> tuple[BoundingBox, BoundingBox, BoundingBox, BoundingBox]:
    """Head, torso, left-arm and right-arm boxes from projected joints."""
    return tuple(_joints_bbox(frame, members, intrinsics) for _, members in _BOX_MEMBERS)


def person_bbox(
    frame: SkeletonFrame, intrinsics: CameraIntrinsics = CameraIntrinsics()
) -> BoundingBox:
    """Whole-person box from all 15 projected joints."""
    return _joints_bbox(frame, range(len(frame.positions)), intrinsics)


def simple_hog(rgb: np.ndarray, depth: np.ndarray, person_box: BoundingBox) -> np.ndarray:
    """64 values: whole-person descriptor on the RGB grid then the depth grid."""
    return np.concatenate(
        [
            hog_descriptor(rgb, person_box),
            hog_descriptor(fill_depth_holes(depth), person_box),
        ]
    )


def skeletal_hog(
    rgb: np.ndarray,
    depth: np.ndarray,
    frame: SkeletonFrame,
    intrinsics: CameraIntrinsics = CameraIntrinsics(),
) -> np.ndarray:
    """256 values: head/torso/left-arm/right-arm boxes, RGB block then depth
    block per box."""
    depth = fill_depth_holes(depth)
    blocks = []
    for box in skeletal_bboxes(frame, intrinsics):
        blocks.append(hog_descriptor(rgb, box))
        blocks.append(hog_descriptor(depth, box))
    return np.concatenate(blocks)
