import numpy as np
import pytest

from multiarm.kinematics import JointDescriptor, KinematicChain, forward_kinematics, load_chain
from multiarm.poses import Pose, quat_conjugate, quat_multiply, quat_to_rotvec


def random_unit_quat(rng):
    q = rng.standard_normal(4)
    return q / np.linalg.norm(q)


def random_chain(rng, dof=None, max_dof=8):
    """Random serial revolute chain with bounded offsets and wide limits."""
    n = int(dof) if dof is not None else int(rng.integers(2, max_dof + 1))
    joints = []
    for _ in range(n):
        axis = rng.standard_normal(3)
        axis /= np.linalg.norm(axis)
        offset = Pose(position=rng.uniform(-0.3, 0.3, 3), quaternion=random_unit_quat(rng))
        joints.append(JointDescriptor(offset, axis, -3.5, 3.5))
    return KinematicChain(
        base_pose=Pose(position=rng.uniform(-0.2, 0.2, 3), quaternion=random_unit_quat(rng)),
        joints=tuple(joints),
        tool_offset=Pose(position=rng.uniform(-0.2, 0.2, 3), quaternion=random_unit_quat(rng)),
    )


def planar_2r(l1=1.0, l2=1.0):
    z = np.array([0.0, 0.0, 1.0])
    return KinematicChain(
        base_pose=Pose.identity(),
        joints=(
            JointDescriptor(Pose.identity(), z, -2 * np.pi, 2 * np.pi),
            JointDescriptor(Pose.from_xyz(l1, 0, 0), z, -2 * np.pi, 2 * np.pi),
        ),
        tool_offset=Pose.from_xyz(l2, 0, 0),
    )


def fd_jacobian(chain, q, h=1e-6):
    """Finite-difference oracle for the geometric Jacobian (world frame).

    Angular columns come from the quaternion log of the relative rotation,
    independent of the analytic Jacobian implementation.
    """
    q = np.asarray(q, dtype=float)
    J = np.zeros((6, chain.dof))
    for i in range(chain.dof):
        qp, qm = q.copy(), q.copy()
        qp[i] += h
        qm[i] -= h
        Pp = forward_kinematics(chain, qp)
        Pm = forward_kinematics(chain, qm)
        J[0:3, i] = (Pp.position - Pm.position) / (2 * h)
        rel = quat_multiply(Pp.quaternion, quat_conjugate(Pm.quaternion))
        J[3:6, i] = quat_to_rotvec(rel) / (2 * h)
    return J


@pytest.fixture(scope="session")
def ur5():
    return load_chain("ur5_like.chain")


@pytest.fixture(scope="session")
def redundant7():
    return load_chain("redundant7.chain")


@pytest.fixture(scope="session")
def planar():
    return load_chain("planar2r.chain")
