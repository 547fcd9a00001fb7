"""Per-arm optimization-based inverse kinematics.

Minimizes

    w_err * ||pose_error(K(q), target)||^2 + w_reg * ||q - q_seed||^2 + w_lim * barrier(q)

with a damped-Newton iteration (Gauss-Newton curvature for the pose term,
exact curvature for regularizer and barrier) and a backtracking line search
that only ever accepts energy decreases.

Orientation handling: the angular residual is the rotation vector of the
relative rotation expressed in the target frame. When one axis is released
(free handle rotation), the twist about that axis is removed from the
relative rotation before taking the log, so any amount of rotation about the
released axis contributes exactly zero residual and zero gradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kinematics import KinematicChain, _matrix_to_quat
from .poses import (
    Pose,
    quat_conjugate,
    quat_multiply,
    quat_to_matrix,
    quat_to_rotvec,
    rotvec_left_jacobian,
    rotvec_left_jacobian_inv,
)

BARRIER_MARGIN = 0.02  # rad inside each limit where the quadratic barrier engages

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class OrientationMask:
    """Axes of the target's local frame whose rotation is left unconstrained."""

    released_axes: frozenset = frozenset()

    def __post_init__(self):
        axes = frozenset(self.released_axes)
        if not axes <= {"x", "y", "z"}:
            raise ValueError(f"released axes must be a subset of x/y/z, got {set(axes)}")
        object.__setattr__(self, "released_axes", axes)

    @property
    def released_indices(self) -> tuple:
        return tuple(sorted(_AXIS_INDEX[a] for a in self.released_axes))


MASK_NONE = OrientationMask()
MASK_FREE_X = OrientationMask(frozenset({"x"}))


@dataclass(frozen=True)
class IkWeights:
    w_err: float = 1000.0
    w_reg: float = 0.01
    w_lim: float = 10000.0

    def __post_init__(self):
        if min(self.w_err, self.w_reg, self.w_lim) < 0:
            raise ValueError("IK weights must be non-negative")


@dataclass(frozen=True)
class NewtonSettings:
    max_steps: int = 10
    residual_tol: float = 1e-5
    hessian_regularization: float = 1e-8
    backtracking_factor: float = 0.5
    max_backtracks: int = 8

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.residual_tol <= 0:
            raise ValueError("residual_tol must be positive")


@dataclass
class IkSolution:
    q: np.ndarray
    position_error: float
    orientation_error: float
    steps_taken: int
    converged: bool
    energy: float = 0.0
    energy_trace: tuple = ()


# ---------------------------------------------------------------------------
# Residuals
# ---------------------------------------------------------------------------


def _swing_twist(q_rel: np.ndarray, axis: int):
    """Split q_rel = twist ⊗ swing with the twist about the given target-frame axis.

    The swing's vector part has zero component along the axis, so its rotation
    vector is exactly orthogonal to the released direction.
    """
    w = q_rel[0]
    va = q_rel[1 + axis]
    n = math.hypot(w, va)
    if n < 1e-12:
        # 180 degree swing; the twist is undefined, identity is the usual choice
        return np.array([1.0, 0.0, 0.0, 0.0]), np.array(q_rel)
    twist = np.zeros(4)
    twist[0] = w / n
    twist[1 + axis] = va / n
    swing = quat_multiply(quat_conjugate(twist), q_rel)
    return twist, swing


def _rotation_residual(q_rel: np.ndarray, released: tuple) -> np.ndarray:
    if len(released) == 0:
        return quat_to_rotvec(q_rel)
    if len(released) == 3:
        return np.zeros(3)
    if len(released) == 1:
        _, swing = _swing_twist(q_rel, released[0])
        rv = quat_to_rotvec(swing)
        rv[released[0]] = 0.0
        if abs(rv[0]) + abs(rv[1]) + abs(rv[2]) < 1e-12:
            return np.zeros(3)  # pure released-axis twist reads as exactly zero
        return rv
    rv = quat_to_rotvec(q_rel)
    rv[list(released)] = 0.0
    return rv


def pose_error(current: Pose, target: Pose, mask: OrientationMask = MASK_NONE) -> np.ndarray:
    """6-vector residual: position difference, then the masked rotation vector."""
    q_rel = quat_multiply(quat_conjugate(target.quaternion), current.quaternion)
    r = np.empty(6)
    r[0:3] = current.position - target.position
    r[3:6] = _rotation_residual(q_rel, mask.released_indices)
    return r


def _rotation_residual_jacobian(q_rel, released, R_tgt_T, J_w) -> np.ndarray:
    """Exact 3 x n Jacobian of the masked rotation residual.

    Differentiates the log map (and, for a single released axis, the
    twist-removed log map) so the analytic gradient matches finite
    differences, not just the Gauss-Newton direction.
    """
    if len(released) == 3:
        return np.zeros((3, J_w.shape[1]))
    omega_t = R_tgt_T @ J_w  # angular velocity columns in the target frame
    if len(released) == 0:
        sigma = quat_to_rotvec(q_rel)
        return rotvec_left_jacobian_inv(sigma) @ omega_t
    if len(released) == 1:
        a = released[0]
        twist, swing = _swing_twist(q_rel, a)
        sigma = quat_to_rotvec(swing)
        sigma[a] = 0.0
        keep = [i for i in range(3) if i != a]
        P = np.zeros((3, 2))
        P[keep[0], 0] = 1.0
        P[keep[1], 1] = 1.0
        # omega_t = theta_dot * e_a + R_twist @ J_l(sigma) @ P @ u, solve for u
        A = np.empty((3, 3))
        A[:, 0] = np.eye(3)[a]
        A[:, 1:] = quat_to_matrix(twist) @ rotvec_left_jacobian(sigma) @ P
        try:
            U = np.linalg.solve(A, omega_t)
        except np.linalg.LinAlgError:
            # degenerate swing (measure-zero); keep the solver running
            U = np.linalg.lstsq(A, omega_t, rcond=None)[0]
        return P @ U[1:, :]
    sigma = quat_to_rotvec(q_rel)
    rows = rotvec_left_jacobian_inv(sigma) @ omega_t
    rows[list(released)] = 0.0
    return rows


def _residual_and_jacobian(chain, q, target, mask):
    origins, axes, p_ee, R_ee = chain._fk.frames(q)
    d = p_ee - origins
    ax, ay, az = axes[:, 0], axes[:, 1], axes[:, 2]
    J_v = np.empty((3, chain.dof))
    J_v[0] = ay * d[:, 2] - az * d[:, 1]
    J_v[1] = az * d[:, 0] - ax * d[:, 2]
    J_v[2] = ax * d[:, 1] - ay * d[:, 0]
    J_w = axes.T
    R_tgt_T = target.rotation_matrix().T
    q_ee = _matrix_to_quat(R_ee)
    q_rel = quat_multiply(quat_conjugate(target.quaternion), q_ee)
    released = mask.released_indices
    r = np.empty(6)
    r[0:3] = p_ee - target.position
    r[3:6] = _rotation_residual(q_rel, released)
    Jr = np.empty((6, chain.dof))
    Jr[0:3] = J_v
    Jr[3:6] = _rotation_residual_jacobian(q_rel, released, R_tgt_T, J_w)
    return r, Jr


def _residual_only(chain, q, target, mask):
    p_ee, R_ee = chain._fk.ee_frame(q)
    q_ee = _matrix_to_quat(R_ee)
    q_rel = quat_multiply(quat_conjugate(target.quaternion), q_ee)
    r = np.empty(6)
    r[0:3] = p_ee - target.position
    r[3:6] = _rotation_residual(q_rel, mask.released_indices)
    return r


# ---------------------------------------------------------------------------
# Energy
# ---------------------------------------------------------------------------


def _barrier_terms(q, lim_min, lim_max):
    """(value, gradient, hessian diagonal) of the one-sided quadratic barrier."""
    n = len(q)
    value = 0.0
    grad = np.zeros(n)
    hess = np.zeros(n)
    for i in range(n):
        qi = q[i]
        hi = lim_max[i] - BARRIER_MARGIN
        lo = lim_min[i] + BARRIER_MARGIN
        if qi > hi:
            e = qi - hi
        elif qi < lo:
            e = qi - lo
        else:
            continue
        value += e * e
        grad[i] = 2.0 * e
        hess[i] = 2.0
    return value, grad, hess


def _barrier_value(q, lim_min, lim_max) -> float:
    value = 0.0
    for i in range(len(q)):
        qi = q[i]
        hi = lim_max[i] - BARRIER_MARGIN
        lo = lim_min[i] + BARRIER_MARGIN
        if qi > hi:
            e = qi - hi
        elif qi < lo:
            e = qi - lo
        else:
            continue
        value += e * e
    return value


def objective(
    chain: KinematicChain,
    q,
    target: Pose,
    seed_reference,
    weights: IkWeights = IkWeights(),
    mask: OrientationMask = MASK_NONE,
) -> float:
    """Scalar IK energy at q (pose term + regularizer + joint-limit barrier)."""
    q = np.asarray(q, dtype=float)
    q0 = np.asarray(seed_reference, dtype=float)
    r = _residual_only(chain, q, target, mask)
    dq = q - q0
    bval, _, _ = _barrier_terms(q, chain.limits_min, chain.limits_max)
    return weights.w_err * float(r @ r) + weights.w_reg * float(dq @ dq) + weights.w_lim * bval


def solve(
    chain: KinematicChain,
    target: Pose,
    seed,
    weights: IkWeights = IkWeights(),
    mask: OrientationMask = MASK_NONE,
    settings: NewtonSettings = NewtonSettings(),
) -> IkSolution:
    """Damped-Newton minimization of the IK energy, warm-started at ``seed``.

    Never raises on unreachable targets: the best-effort iterate is returned
    with ``converged=False``. Accepted iterates are clamped to the limit box
    widened by the barrier margin, so joints can exceed their limits by at
    most BARRIER_MARGIN no matter how hard the pose term pulls.
    """
    q = np.asarray(seed, dtype=float).reshape(-1).copy()
    if q.shape[0] != chain.dof:
        raise ValueError(f"seed length {q.shape[0]} != chain dof {chain.dof}")
    if not np.isfinite(q).all():
        raise ValueError("seed entries must be finite")
    q0 = q.copy()
    lim_min, lim_max = chain.limits_min, chain.limits_max
    box_lo = lim_min - BARRIER_MARGIN
    box_hi = lim_max + BARRIER_MARGIN
    n = chain.dof
    eye = np.eye(n)
    w_err, w_reg, w_lim = weights.w_err, weights.w_reg, weights.w_lim
    tol = settings.residual_tol

    def energy(qv):
        r = _residual_only(chain, qv, target, mask)
        dq = qv - q0
        return w_err * float(r @ r) + w_reg * float(dq @ dq) + w_lim * _barrier_value(qv, lim_min, lim_max)

    def gradient(qv):
        r, Jr = _residual_and_jacobian(chain, qv, target, mask)
        _, bgrad, bhess = _barrier_terms(qv, lim_min, lim_max)
        g = 2.0 * w_err * (Jr.T @ r) + 2.0 * w_reg * (qv - q0) + w_lim * bgrad
        return g, Jr, bhess

    E = energy(q)
    trace = [E]
    steps = 0
    converged = False
    for _ in range(settings.max_steps):
        g, Jr, bhess = gradient(q)
        if np.max(np.abs(g)) < tol:
            converged = True
            break
        H = 2.0 * w_err * (Jr.T @ Jr) + (2.0 * w_reg) * eye
        if bhess.any():
            H += w_lim * np.diag(bhess)
        mu = settings.hessian_regularization
        while True:
            try:
                np.linalg.cholesky(H + mu * eye)
                break
            except np.linalg.LinAlgError:
                mu *= 2.0
        delta = np.linalg.solve(H + mu * eye, -g)
        t = 1.0
        accepted = False
        for _bt in range(settings.max_backtracks + 1):
            q_trial = np.clip(q + t * delta, box_lo, box_hi)
            E_trial = energy(q_trial)
            if E_trial < E:
                accepted = True
                break
            t *= settings.backtracking_factor
        if not accepted:
            break
        q = q_trial
        E = E_trial
        trace.append(E)
        steps += 1
    if not converged:
        # a tolerance exit on the very last step still counts as converged
        g, _, _ = gradient(q)
        converged = bool(np.max(np.abs(g)) < tol)
    r = _residual_only(chain, q, target, mask)
    return IkSolution(
        q=q,
        position_error=math.sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]),
        orientation_error=math.sqrt(r[3] * r[3] + r[4] * r[4] + r[5] * r[5]),
        steps_taken=steps,
        converged=converged,
        energy=E,
        energy_trace=tuple(trace),
    )
