"""Serial revolute chains: declarative description, forward kinematics, geometric Jacobian."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .poses import Pose

_AXIS_TOL = 1e-9


class ChainFormatError(ValueError):
    """Raised for malformed or invalid chain descriptions."""


@dataclass
class JointDescriptor:
    """Revolute joint: fixed offset from the previous frame, then rotation about ``axis``."""

    parent_offset: Pose
    axis: np.ndarray
    limit_min: float
    limit_max: float

    def __post_init__(self):
        self.axis = np.asarray(self.axis, dtype=float).reshape(3)
        if abs(np.linalg.norm(self.axis) - 1.0) > _AXIS_TOL:
            raise ChainFormatError(f"joint axis {self.axis.tolist()} is not a unit vector")
        if not self.limit_min < self.limit_max:
            raise ChainFormatError(
                f"joint limits must satisfy limit_min < limit_max, got [{self.limit_min}, {self.limit_max}]"
            )


@dataclass
class KinematicChain:
    base_pose: Pose
    joints: tuple
    tool_offset: Pose
    name: str = "chain"
    _fk: "_CompiledChain" = field(init=False, repr=False, default=None)

    def __post_init__(self):
        self.joints = tuple(self.joints)
        if len(self.joints) < 1:
            raise ChainFormatError("chain needs at least one joint")
        self._fk = _CompiledChain(self)

    @property
    def dof(self) -> int:
        return len(self.joints)

    @property
    def limits_min(self) -> np.ndarray:
        return self._fk.limit_min

    @property
    def limits_max(self) -> np.ndarray:
        return self._fk.limit_max

    def with_base(self, base: Pose) -> "KinematicChain":
        """New chain mounted at ``base`` (composed in front of the described base pose)."""
        return KinematicChain(
            base_pose=base.compose(self.base_pose),
            joints=self.joints,
            tool_offset=self.tool_offset,
            name=self.name,
        )


class _CompiledChain:
    """Per-chain constant arrays so the per-tick FK loop stays allocation-light."""

    def __init__(self, chain: KinematicChain):
        n = len(chain.joints)
        self.n = n
        self.base_R = chain.base_pose.rotation_matrix()
        self.base_p = chain.base_pose.position.copy()
        self.off_R = np.empty((n, 3, 3))
        self.off_p = np.empty((n, 3))
        self.axis = np.empty((n, 3))
        self.limit_min = np.empty(n)
        self.limit_max = np.empty(n)
        for i, j in enumerate(chain.joints):
            self.off_R[i] = j.parent_offset.rotation_matrix()
            self.off_p[i] = j.parent_offset.position
            self.axis[i] = j.axis
            self.limit_min[i] = j.limit_min
            self.limit_max[i] = j.limit_max
        self.tool_R = chain.tool_offset.rotation_matrix()
        self.tool_p = chain.tool_offset.position.copy()
        # Rodrigues terms per joint: R(q) = cos q I + sin q K + (1 - cos q) aa^T
        self.I3 = np.eye(3)
        self.K = np.stack([_skew(a) for a in self.axis])
        self.A = np.stack([np.outer(a, a) for a in self.axis])
        self.off_p_is_zero = [bool(not self.off_p[i].any()) for i in range(n)]
        self.tool_R_is_identity = bool(np.array_equal(self.tool_R, self.I3))
        # world joint axis before the joint's own rotation: R_prev @ (off_R @ axis)
        self.axis_pre = np.stack([self.off_R[i] @ self.axis[i] for i in range(n)])
        # flat-assignment fast path when every axis is a signed coordinate axis:
        # rod starts from the constant aa^T pattern, then cos/sin entries are written
        coord = all(np.count_nonzero(self.axis[i]) == 1 for i in range(n))
        self._coord_axes = coord
        if coord:
            base = self.A.copy()
            cos_flat, cos_j, sin_flat, sin_j, sin_val = [], [], [], [], []
            for i in range(n):
                k = int(np.flatnonzero(self.axis[i])[0])
                for d in range(3):
                    if d != k:
                        cos_flat.append(i * 9 + d * 3 + d)
                        cos_j.append(i)
                for r in range(3):
                    for c in range(3):
                        if self.K[i, r, c] != 0.0:
                            sin_flat.append(i * 9 + r * 3 + c)
                            sin_j.append(i)
                            sin_val.append(self.K[i, r, c])
            self._rod_base = base
            self._cos_flat = np.array(cos_flat, dtype=np.intp)
            self._cos_j = np.array(cos_j, dtype=np.intp)
            self._sin_flat = np.array(sin_flat, dtype=np.intp)
            self._sin_j = np.array(sin_j, dtype=np.intp)
            self._sin_val = np.array(sin_val)

    def _rodrigues(self, q: np.ndarray) -> np.ndarray:
        c = np.cos(q)
        s = np.sin(q)
        if self._coord_axes:
            rod = self._rod_base.copy()
            flat = rod.reshape(-1)
            flat[self._cos_flat] = c[self._cos_j]
            flat[self._sin_flat] = s[self._sin_j] * self._sin_val
            return rod
        return (
            c[:, None, None] * self.I3
            + s[:, None, None] * self.K
            + (1.0 - c)[:, None, None] * self.A
        )

    def frames(self, q: np.ndarray):
        """World origins and axes of every joint plus the end-effector frame."""
        M = np.matmul(self.off_R, self._rodrigues(q))
        R = self.base_R
        p = self.base_p
        origins = np.empty((self.n, 3))
        axes = np.empty((self.n, 3))
        for i in range(self.n):
            if not self.off_p_is_zero[i]:
                p = p + R @ self.off_p[i]
            origins[i] = p
            axes[i] = R @ self.axis_pre[i]
            R = R @ M[i]
        p_ee = p + R @ self.tool_p
        R_ee = R @ self.tool_R if not self.tool_R_is_identity else R
        return origins, axes, p_ee, R_ee

    def ee_frame(self, q: np.ndarray):
        """(p_ee, R_ee) only; the cheap path for line-search energy evaluations."""
        M = np.matmul(self.off_R, self._rodrigues(q))
        R = self.base_R
        p = self.base_p
        for i in range(self.n):
            if not self.off_p_is_zero[i]:
                p = p + R @ self.off_p[i]
            R = R @ M[i]
        p_ee = p + R @ self.tool_p
        R_ee = R @ self.tool_R if not self.tool_R_is_identity else R
        return p_ee, R_ee


def _skew(v):
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def _check_q(chain: KinematicChain, q) -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape[0] != chain.dof:
        raise ValueError(f"joint vector length {q.shape[0]} != chain dof {chain.dof}")
    if not np.isfinite(q).all():
        raise ValueError("joint vector entries must be finite")
    return q


def fk_frames(chain: KinematicChain, q) -> tuple:
    """(joint_origins, joint_axes_world, p_ee, R_ee) for the given configuration."""
    q = _check_q(chain, q)
    return chain._fk.frames(q)


def fk_ee(chain: KinematicChain, q) -> tuple:
    """(p_ee, R_ee) without the per-joint frame bookkeeping."""
    q = _check_q(chain, q)
    return chain._fk.ee_frame(q)


def forward_kinematics(chain: KinematicChain, q) -> Pose:
    _, _, p_ee, R_ee = fk_frames(chain, q)
    return Pose(position=p_ee, quaternion=_matrix_to_quat(R_ee))


def geometric_jacobian(chain: KinematicChain, q) -> np.ndarray:
    """6 x dof world-frame Jacobian: rows 0-2 linear, rows 3-5 angular."""
    origins, axes, p_ee, _ = fk_frames(chain, q)
    d = p_ee - origins
    ax, ay, az = axes[:, 0], axes[:, 1], axes[:, 2]
    dx, dy, dz = d[:, 0], d[:, 1], d[:, 2]
    J = np.empty((6, chain.dof))
    J[0] = ay * dz - az * dy
    J[1] = az * dx - ax * dz
    J[2] = ax * dy - ay * dx
    J[3:6] = axes.T
    return J


def _matrix_to_quat(R: np.ndarray) -> np.ndarray:
    """Shepperd's method, numerically stable for all rotation matrices."""
    r00, r01, r02 = R[0, 0], R[0, 1], R[0, 2]
    r10, r11, r12 = R[1, 0], R[1, 1], R[1, 2]
    r20, r21, r22 = R[2, 0], R[2, 1], R[2, 2]
    t = r00 + r11 + r22
    if t > 0.0:
        s = math.sqrt(t + 1.0) * 2.0
        return np.array([0.25 * s, (r21 - r12) / s, (r02 - r20) / s, (r10 - r01) / s])
    if r00 >= r11 and r00 >= r22:
        s = math.sqrt(1.0 + r00 - r11 - r22) * 2.0
        return np.array([(r21 - r12) / s, 0.25 * s, (r01 + r10) / s, (r02 + r20) / s])
    if r11 >= r22:
        s = math.sqrt(1.0 - r00 + r11 - r22) * 2.0
        return np.array([(r02 - r20) / s, (r01 + r10) / s, 0.25 * s, (r12 + r21) / s])
    s = math.sqrt(1.0 - r00 - r11 + r22) * 2.0
    return np.array([(r10 - r01) / s, (r02 + r20) / s, (r12 + r21) / s, 0.25 * s])


# ---------------------------------------------------------------------------
# Declarative chain descriptions
# ---------------------------------------------------------------------------

DATA_DIR = Path(__file__).parent / "data"


def _parse_pose(node, what: str) -> Pose:
    if node is None:
        return Pose.identity()
    if not isinstance(node, dict):
        raise ChainFormatError(f"{what} must be a mapping with position/quaternion")
    try:
        position = node.get("position", [0.0, 0.0, 0.0])
        quaternion = node.get("quaternion", [1.0, 0.0, 0.0, 0.0])
        return Pose(position=np.asarray(position, dtype=float), quaternion=np.asarray(quaternion, dtype=float))
    except (TypeError, ValueError) as exc:
        raise ChainFormatError(f"bad {what}: {exc}") from exc


def chain_from_dict(doc: dict, name: str = "chain") -> KinematicChain:
    if not isinstance(doc, dict):
        raise ChainFormatError("chain description must be a mapping")
    if "joints" not in doc or not doc["joints"]:
        raise ChainFormatError("chain description lists no joints")
    joints = []
    for k, jnode in enumerate(doc["joints"]):
        if not isinstance(jnode, dict):
            raise ChainFormatError(f"joint {k} must be a mapping")
        offset = Pose(
            position=np.asarray(jnode.get("offset_position", [0.0, 0.0, 0.0]), dtype=float),
            quaternion=np.asarray(jnode.get("offset_quaternion", [1.0, 0.0, 0.0, 0.0]), dtype=float),
        )
        try:
            axis = np.asarray(jnode["axis"], dtype=float)
            limit_min = float(jnode["limit_min"])
            limit_max = float(jnode["limit_max"])
        except KeyError as exc:
            raise ChainFormatError(f"joint {k} is missing required field {exc}") from exc
        joints.append(JointDescriptor(offset, axis, limit_min, limit_max))
    return KinematicChain(
        base_pose=_parse_pose(doc.get("base_pose"), "base_pose"),
        joints=tuple(joints),
        tool_offset=_parse_pose(doc.get("tool_offset"), "tool_offset"),
        name=doc.get("name", name),
    )


def load_chain(source) -> KinematicChain:
    """Load a chain description from a path, a YAML/JSON string, or a dict.

    Bare names resolve against the bundled data directory (``ur5_like.chain``,
    ``redundant7.chain``, ``planar2r.chain``).
    """
    if isinstance(source, KinematicChain):
        return source
    if isinstance(source, dict):
        return chain_from_dict(source)
    path = Path(source)
    if not path.exists() and not path.is_absolute():
        bundled = DATA_DIR / path.name
        if bundled.exists():
            path = bundled
    if path.exists():
        text = path.read_text()
        name = path.stem
    else:
        text = str(source)
        name = "chain"
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ChainFormatError(f"cannot parse chain description: {exc}") from exc
    if not isinstance(doc, dict):
        raise ChainFormatError(f"chain description not found or not a mapping: {source!r}")
    return chain_from_dict(doc, name=name)
