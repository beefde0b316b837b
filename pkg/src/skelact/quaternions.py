"""Rotation-matrix / unit-quaternion conversions.

Quaternions are scalar-first (w, x, y, z) and normalized to the half space
w >= 0; when w == 0 the first nonzero vector component is made non-negative,
so q and -q collapse to a single representative.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidRotationError

ORTHONORMAL_TOL = 1e-6


def rotation_deviation(matrix: np.ndarray) -> float:
    """Max of ||R^T R - I||_inf and |det(R) - 1| for a 3x3 matrix."""
    matrix = np.asarray(matrix, dtype=float)
    gram = matrix.T @ matrix - np.eye(3)
    return max(float(np.abs(gram).max()), abs(float(np.linalg.det(matrix)) - 1.0))


def _check_rotation(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (3, 3):
        raise InvalidRotationError(f"expected a 3x3 matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise InvalidRotationError("rotation matrix contains non-finite entries")
    if rotation_deviation(matrix) > ORTHONORMAL_TOL:
        raise InvalidRotationError("matrix is not orthonormal with det +1 within 1e-6")
    return matrix


def halfspace(q: np.ndarray) -> np.ndarray:
    """Flip the sign of a unit quaternion so it lies in the canonical half space."""
    w, x, y, z = q
    if w < 0.0:
        return -q
    if w == 0.0:
        for c in (x, y, z):
            if c != 0.0:
                return q if c > 0.0 else -q
    return q


def quats_from_matrices(matrices: np.ndarray) -> np.ndarray:
    """Convert a (..., 3, 3) stack of rotation matrices to half-space quaternions.

    Uses the numerically stable branch on the largest of (trace, R00, R11, R22)
    so the divisor is always well away from zero. Inputs are assumed to be
    proper rotations; no validation is performed here.
    """
    m = np.asarray(matrices, dtype=float)
    batch = m.shape[:-2]
    m = m.reshape(-1, 3, 3)
    n = m.shape[0]

    m00, m01, m02 = m[:, 0, 0], m[:, 0, 1], m[:, 0, 2]
    m10, m11, m12 = m[:, 1, 0], m[:, 1, 1], m[:, 1, 2]
    m20, m21, m22 = m[:, 2, 0], m[:, 2, 1], m[:, 2, 2]

    tr = m00 + m11 + m22
    q = np.empty((n, 4))

    branch_tr = tr > 0.0
    branch_x = (~branch_tr) & (m00 >= m11) & (m00 >= m22)
    branch_y = (~branch_tr) & (~branch_x) & (m11 >= m22)
    branch_z = ~(branch_tr | branch_x | branch_y)

    b = branch_tr
    s = np.sqrt(tr[b] + 1.0) * 2.0
    q[b, 0] = 0.25 * s
    q[b, 1] = (m21[b] - m12[b]) / s
    q[b, 2] = (m02[b] - m20[b]) / s
    q[b, 3] = (m10[b] - m01[b]) / s

    b = branch_x
    s = np.sqrt(np.maximum(1.0 + m00[b] - m11[b] - m22[b], 1e-300)) * 2.0
    q[b, 0] = (m21[b] - m12[b]) / s
    q[b, 1] = 0.25 * s
    q[b, 2] = (m01[b] + m10[b]) / s
    q[b, 3] = (m02[b] + m20[b]) / s

    b = branch_y
    s = np.sqrt(np.maximum(1.0 - m00[b] + m11[b] - m22[b], 1e-300)) * 2.0
    q[b, 0] = (m02[b] - m20[b]) / s
    q[b, 1] = (m01[b] + m10[b]) / s
    q[b, 2] = 0.25 * s
    q[b, 3] = (m12[b] + m21[b]) / s

    b = branch_z
    s = np.sqrt(np.maximum(1.0 - m00[b] - m11[b] + m22[b], 1e-300)) * 2.0
    q[b, 0] = (m10[b] - m01[b]) / s
    q[b, 1] = (m02[b] + m20[b]) / s
    q[b, 2] = (m12[b] + m21[b]) / s
    q[b, 3] = 0.25 * s

    q /= np.linalg.norm(q, axis=1, keepdims=True)

    # half-space sign: w >= 0, ties broken by first nonzero vector component
    flip = q[:, 0] < 0.0
    zero_w = q[:, 0] == 0.0
    if np.any(zero_w):
        for col in (1, 2, 3):
            sel = zero_w & (q[:, col] != 0.0)
            flip |= sel & (q[:, col] < 0.0)
            zero_w &= ~sel
    q[flip] *= -1.0
    return q.reshape(*batch, 4)


def rotation_to_halfspace_quaternion(matrix: np.ndarray) -> np.ndarray:
    """Convert a single rotation matrix to its half-space unit quaternion.

    Raises InvalidRotationError if the matrix is not orthonormal with det +1
    within 1e-6.
    """
    matrix = _check_rotation(matrix)
    return quats_from_matrices(matrix[np.newaxis])[0]


def quaternion_to_rotation(q: np.ndarray) -> np.ndarray:
    """Rotation matrix of a unit quaternion (w, x, y, z)."""
    w, x, y, z = np.asarray(q, dtype=float)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def orthonormalize(matrix: np.ndarray) -> np.ndarray:
    """Nearest proper rotation to ``matrix`` via SVD polar decomposition."""
    u, _, vt = np.linalg.svd(np.asarray(matrix, dtype=float))
    r = u @ vt
    if np.linalg.det(r) < 0.0:
        r = u @ np.diag([1.0, 1.0, -1.0]) @ vt
    return r
