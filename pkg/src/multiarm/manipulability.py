"""Manipulability index and the free-axis seed nudge.

The nudge probes a first-order joint update that rotates the end effector
about the handle's free x-axis in both directions; if one direction improves
the manipulability index by at least theta_m (and stays inside the allowed
deviation band), it becomes the IK seed for the next tick.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .kinematics import KinematicChain, geometric_jacobian

_DET_NOISE = 1e-14


@dataclass(frozen=True)
class ManipSettings:
    delta_t: float = 0.007
    theta_m: float = 1e-4
    damping_lambda: float = 1e-6
    max_deviation: float = np.pi / 2

    def __post_init__(self):
        if self.delta_t <= 0:
            raise ValueError("delta_t must be positive")
        if self.theta_m < 0:
            raise ValueError("theta_m must be non-negative")
        if self.max_deviation <= 0:
            raise ValueError("max_deviation must be positive")


# Empirically tuned per robot model (see scenario configs).
UR5_MANIP = ManipSettings(delta_t=0.007, theta_m=1e-4)
YUMI_MANIP = ManipSettings(delta_t=0.005, theta_m=1e-3)


@dataclass(frozen=True)
class FreeAxisState:
    """Signed handle-axis rotation accumulated from accepted nudges."""

    accumulated_angle: float = 0.0


def manipulability_index(J: np.ndarray) -> float:
    """sqrt(det(J J^T)); determinants inside the round-off noise band are zero."""
    J = np.asarray(J, dtype=float)
    d = float(np.linalg.det(J @ J.T))
    if d < _DET_NOISE:
        return 0.0
    return float(np.sqrt(d))


def generalized_inverse(J: np.ndarray, damping: float = 1e-6) -> np.ndarray:
    """Damped right pseudoinverse J^T (J J^T + damping I)^-1.

    Coincides with the plain generalized inverse for square full-rank J and
    damping 0; rank-deficient J with damping 0 falls back to the
    Moore-Penrose inverse of J J^T.
    """
    J = np.asarray(J, dtype=float)
    G = J @ J.T + damping * np.eye(J.shape[0])
    try:
        np.linalg.cholesky(G)
        return np.linalg.solve(G, J).T
    except np.linalg.LinAlgError:
        return (np.linalg.pinv(G) @ J).T


def nudge_candidates(
    chain: KinematicChain,
    q: np.ndarray,
    handle_x_world: np.ndarray,
    delta_t: float,
    damping: float = 1e-6,
) -> tuple:
    """First-order joint updates rotating the end effector +/- delta_t about the handle axis."""
    q = np.asarray(q, dtype=float)
    xi = np.concatenate([np.zeros(3), np.asarray(handle_x_world, dtype=float)])
    J = geometric_jacobian(chain, q)
    dq = generalized_inverse(J, damping) @ xi * delta_t
    return q + dq, q - dq


def select_seed(
    chain: KinematicChain,
    q: np.ndarray,
    q_plus: np.ndarray,
    q_minus: np.ndarray,
    settings: ManipSettings,
    state: FreeAxisState,
) -> tuple:
    """Pick the next IK seed among {q, q_plus, q_minus} by manipulability gain.

    A candidate is accepted only if it beats m(q) by at least theta_m (to
    avoid oscillating around a local optimum) and the accumulated handle
    rotation stays within +/- max_deviation. Returns (seed, new state).
    """
    m0 = manipulability_index(geometric_jacobian(chain, q))
    m_plus = manipulability_index(geometric_jacobian(chain, q_plus))
    m_minus = manipulability_index(geometric_jacobian(chain, q_minus))
    if m_plus >= m_minus:
        best_m, cand, sign = m_plus, q_plus, 1.0
    else:
        best_m, cand, sign = m_minus, q_minus, -1.0
    if best_m - m0 < settings.theta_m:
        return q, state
    new_angle = state.accumulated_angle + sign * settings.delta_t
    if abs(new_angle) > settings.max_deviation:
        return q, state
    return cand, dataclasses.replace(state, accumulated_angle=new_angle)
