import numpy as np
import pytest

from skelact.skeleton import NUM_JOINTS, NUM_ORIENTED, SkeletonFrame


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random rotation from a random unit axis and angle."""
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0.0, np.pi)
    k = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def rotation_about(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    k = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def random_frame(rng: np.random.Generator, frame_index: int = 0) -> SkeletonFrame:
    positions = rng.uniform(-500.0, 500.0, size=(NUM_JOINTS, 3))
    positions[:, 2] += 2500.0
    orientations = np.stack([random_rotation(rng) for _ in range(NUM_ORIENTED)])
    return SkeletonFrame(
        frame_index=frame_index, positions=positions, orientations=orientations
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
