"""Rigid transforms (position + unit quaternion) and the SO(3) maps used by the solver.

Quaternions are stored as ``[w, x, y, z]``. Orientation differences are
expressed as rotation vectors (axis * angle, the quaternion log map).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_QUAT_NORM_TOL = 1e-9


def quat_identity() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 0.0])


def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise ValueError("cannot normalize a near-zero quaternion")
    return q / n


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate a 3-vector by a unit quaternion (v + 2(w u x v + u x (u x v)))."""
    w, ux, uy, uz = q[0], q[1], q[2], q[3]
    vx, vy, vz = v[0], v[1], v[2]
    cx = uy * vz - uz * vy
    cy = uz * vx - ux * vz
    cz = ux * vy - uy * vx
    dx = uy * cz - uz * cy
    dy = uz * cx - ux * cz
    dz = ux * cy - uy * cx
    return np.array([vx + 2.0 * (w * cx + dx), vy + 2.0 * (w * cy + dy), vz + 2.0 * (w * cz + dz)])


def quat_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n < 1e-12:
        raise ValueError("axis has near-zero norm")
    half = 0.5 * angle
    return np.concatenate(([np.cos(half)], (np.sin(half) / n) * axis))


def quat_from_rotvec(rv: np.ndarray) -> np.ndarray:
    rv = np.asarray(rv, dtype=float)
    angle = np.linalg.norm(rv)
    if angle < 1e-12:
        # second-order series keeps the map smooth through zero
        return quat_normalize(np.concatenate(([1.0], 0.5 * rv)))
    return np.concatenate(([np.cos(0.5 * angle)], (np.sin(0.5 * angle) / angle) * rv))


def quat_to_rotvec(q: np.ndarray) -> np.ndarray:
    """Quaternion log map, canonicalized to rotation angle in [0, pi]."""
    w, x, y, z = q[0], q[1], q[2], q[3]
    if w < 0.0:
        w, x, y, z = -w, -x, -y, -z
    s = math.sqrt(x * x + y * y + z * z)
    if s < 1e-12:
        return np.array([2.0 * x, 2.0 * y, 2.0 * z])  # angle ~ 2*s, axis ~ v/s
    k = 2.0 * math.atan2(s, min(w, 1.0)) / s
    return np.array([k * x, k * y, k * z])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_slerp(a: np.ndarray, b: np.ndarray, u: float) -> np.ndarray:
    """Spherical interpolation along the shorter arc; exact at u=0 and u=1."""
    if u <= 0.0:
        return np.array(a, dtype=float)
    if u >= 1.0:
        return np.array(b, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    dot = float(np.dot(a, b))
    if dot < 0.0:
        b = -b
        dot = -dot
    if dot > 1.0 - 1e-12:
        return quat_normalize(a + u * (b - a))
    theta = np.arccos(min(dot, 1.0))
    s = np.sin(theta)
    return (np.sin((1.0 - u) * theta) / s) * a + (np.sin(u * theta) / s) * b


def skew(v: np.ndarray) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rotvec_left_jacobian(rv: np.ndarray) -> np.ndarray:
    """Left Jacobian of SO(3): spatial angular velocity = J_l(rv) @ d(rv)/dt."""
    theta = np.linalg.norm(rv)
    K = skew(rv)
    if theta < 1e-6:
        t2 = theta * theta
        c1 = 0.5 - t2 / 24.0
        c2 = 1.0 / 6.0 - t2 / 120.0
    else:
        c1 = (1.0 - np.cos(theta)) / (theta * theta)
        c2 = (theta - np.sin(theta)) / (theta ** 3)
    return np.eye(3) + c1 * K + c2 * (K @ K)


def rotvec_left_jacobian_inv(rv: np.ndarray) -> np.ndarray:
    theta = np.linalg.norm(rv)
    K = skew(rv)
    if theta < 1e-6:
        c = 1.0 / 12.0 + theta * theta / 720.0
    else:
        c = 1.0 / (theta * theta) - (1.0 + np.cos(theta)) / (2.0 * theta * np.sin(theta))
    return np.eye(3) - 0.5 * K + c * (K @ K)


@dataclass(eq=False)
class Pose:
    """Rigid transform: rotate by ``quaternion`` then translate by ``position``."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    quaternion: np.ndarray = field(default_factory=quat_identity)

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        q = np.asarray(self.quaternion, dtype=float).reshape(4)
        n = np.linalg.norm(q)
        if n < 1e-6:
            raise ValueError("quaternion norm too small to normalize")
        if abs(n - 1.0) > _QUAT_NORM_TOL:
            q = q / n
        self.quaternion = q
        if not (np.isfinite(self.position).all() and np.isfinite(self.quaternion).all()):
            raise ValueError("pose entries must be finite")

    @classmethod
    def identity(cls) -> "Pose":
        return cls()

    @classmethod
    def from_xyz(cls, x: float, y: float, z: float) -> "Pose":
        return cls(position=np.array([x, y, z], dtype=float))

    def compose(self, other: "Pose") -> "Pose":
        """self ∘ other: apply ``other`` in this pose's frame."""
        return Pose(
            position=self.position + quat_rotate(self.quaternion, other.position),
            quaternion=quat_multiply(self.quaternion, other.quaternion),
        )

    def inverse(self) -> "Pose":
        q_inv = quat_conjugate(self.quaternion)
        return Pose(position=-quat_rotate(q_inv, self.position), quaternion=q_inv)

    def transform_point(self, p: np.ndarray) -> np.ndarray:
        return self.position + quat_rotate(self.quaternion, np.asarray(p, dtype=float))

    def rotate_vector(self, v: np.ndarray) -> np.ndarray:
        return quat_rotate(self.quaternion, np.asarray(v, dtype=float))

    def rotation_matrix(self) -> np.ndarray:
        return quat_to_matrix(self.quaternion)

    def copy(self) -> "Pose":
        return Pose(position=self.position.copy(), quaternion=self.quaternion.copy())
