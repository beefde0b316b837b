"""Skeletal feature extraction: 47 body pose + 16 hand + 396 motion values.

All operations are pure and causal: frame t only ever sees frames <= t.
Histories shorter than a window are padded by replicating the earliest
available frame, so every frame of a stream is featurizable online.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .quaternions import quats_from_matrices
from .skeleton import (
    HEAD,
    LEFT_FOOT,
    LEFT_HAND,
    LEFT_HIP,
    NUM_ORIENTED,
    RIGHT_FOOT,
    RIGHT_HAND,
    RIGHT_HIP,
    TORSO,
    WORLD_UP,
    LabeledSequence,
    SkeletonFrame,
)

BODY_POSE_DIM = 47
HAND_DIM = 16
MOTION_DIM = 396
SKELETAL_DIM = BODY_POSE_DIM + HAND_DIM + MOTION_DIM  # 459

# oriented joints minus the torso, which is the reference frame
POSE_JOINTS = tuple(j for j in range(NUM_ORIENTED) if j != TORSO)

# lookbacks (in frames) spanning the last ~2.2 s of motion
MOTION_OFFSETS = (5, 9, 14, 20, 27, 35, 44, 54, 65)
MOTION_BUFFER = MOTION_OFFSETS[-1] + 1  # 66

HAND_WINDOW = 6  # samples (current frame plus five preceding)


@dataclass(frozen=True)
class FeatureVector:
    """One frame's features, split into the documented blocks."""

    body_pose: np.ndarray
    hand: np.ndarray
    motion: np.ndarray
    hog_simple: np.ndarray | None = None
    hog_skeletal: np.ndarray | None = None

    def concat(self) -> np.ndarray:
        blocks = [self.body_pose, self.hand, self.motion]
        if self.hog_simple is not None:
            blocks.append(self.hog_simple)
        if self.hog_skeletal is not None:
            blocks.append(self.hog_skeletal)
        return np.concatenate(blocks)


def _pad_history(history: Sequence[SkeletonFrame], length: int) -> list[SkeletonFrame]:
    """Last ``length`` frames of history, replicating the earliest if short."""
    if not history:
        raise ValueError("history must hold at least one frame")
    frames = list(history[-length:])
    return [frames[0]] * (length - len(frames)) + frames


def body_pose_features(frame: SkeletonFrame) -> np.ndarray:
    """47 values: 10 torso-relative joint quaternions, both feet in the
    torso frame (mm), and the upper-body lean angle against vertical."""
    torso_rot = frame.orientations[TORSO]
    rel = torso_rot.T @ frame.orientations[list(POSE_JOINTS)]
    quats = quats_from_matrices(rel).ravel()

    feet = np.empty(6)
    for i, joint in enumerate((LEFT_FOOT, RIGHT_FOOT)):
        feet[3 * i : 3 * i + 3] = torso_rot.T @ (
            frame.positions[joint] - frame.positions[TORSO]
        )

    hip_center = 0.5 * (frame.positions[LEFT_HIP] + frame.positions[RIGHT_HIP])
    spine = frame.positions[HEAD] - hip_center
    norm = np.linalg.norm(spine)
    lean = 0.0 if norm < 1e-12 else float(
        np.arccos(np.clip(spine @ WORLD_UP / norm, -1.0, 1.0))
    )
    return np.concatenate([quats, feet, [lean]])


def _hand_block(window: list[SkeletonFrame], hand: int) -> np.ndarray:
    frame = window[-1]
    torso_rot = frame.orientations[TORSO]
    head_rot = frame.orientations[HEAD]
    rel_torso = torso_rot.T @ (frame.positions[hand] - frame.positions[TORSO])
    rel_head = head_rot.T @ (frame.positions[hand] - frame.positions[HEAD])
    verticals = [f.positions[hand] @ WORLD_UP for f in window]
    return np.concatenate([rel_torso, rel_head, [max(verticals), min(verticals)]])


def hand_features(history: Sequence[SkeletonFrame]) -> np.ndarray:
    """16 values per frame: each hand relative to the torso and head frames,
    plus its extreme world-vertical positions over the last 6 samples."""
    window = _pad_history(history, HAND_WINDOW)
    return np.concatenate(
        [_hand_block(window, LEFT_HAND), _hand_block(window, RIGHT_HAND)]
    )


def motion_features(history: Sequence[SkeletonFrame]) -> np.ndarray:
    """396 values: for each lookback offset and oriented joint, the rotation
    since that frame (R_now R_then^T) as a half-space quaternion; ordered
    offset-major, joint-minor, (w, x, y, z)."""
    window = _pad_history(history, MOTION_BUFFER)
    current = window[-1]
    rel = np.empty((len(MOTION_OFFSETS), NUM_ORIENTED, 3, 3))
    for i, k in enumerate(MOTION_OFFSETS):
        past = window[-1 - k]
        rel[i] = np.einsum(
            "njk,nlk->njl", current.orientations, past.orientations
        )
    return quats_from_matrices(rel).ravel()


def frame_features(history: Sequence[SkeletonFrame]) -> FeatureVector:
    """Featurize the newest frame of ``history`` (oldest first)."""
    return FeatureVector(
        body_pose=body_pose_features(history[-1]),
        hand=hand_features(history),
        motion=motion_features(history),
    )


def sequence_features(
    frames: Sequence[SkeletonFrame] | LabeledSequence,
) -> np.ndarray:
    """(T, 459) matrix of skeletal features for a whole stream."""
    if isinstance(frames, LabeledSequence):
        frames = frames.frames
    out = np.empty((len(frames), SKELETAL_DIM))
    for t in range(len(frames)):
        history = frames[max(0, t - MOTION_BUFFER + 1) : t + 1]
        out[t] = frame_features(history).concat()
    return out


class SkeletalFeatureExtractor:
    """Stateless transformer from skeleton sequences to feature matrices.

    transform accepts a single sequence (LabeledSequence or list of frames)
    or a list of sequences, returning one (T, 459) array per sequence.
    """

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        if isinstance(X, LabeledSequence) or (
            len(X) > 0 and isinstance(X[0], SkeletonFrame)
        ):
            return sequence_features(X)
        return [sequence_features(seq) for seq in X]

    def fit_transform(self, X, y=None):
        return self.fit(X, y).transform(X)

    def get_params(self, deep=True):
        return {}

    def set_params(self, **params):
        if params:
            raise ValueError(f"unknown parameters: {sorted(params)}")
        return self
