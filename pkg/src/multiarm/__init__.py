"""Multi-arm payload manipulation: per-arm IK with a released handle axis plus
a local manipulability-improvement step, scenario runner, and a live
teleoperation service."""

from .poses import Pose
from .kinematics import (
    ChainFormatError,
    JointDescriptor,
    KinematicChain,
    forward_kinematics,
    geometric_jacobian,
    load_chain,
)
from .ik import (
    MASK_FREE_X,
    MASK_NONE,
    IkSolution,
    IkWeights,
    NewtonSettings,
    OrientationMask,
    objective,
    pose_error,
    solve,
)
from .manipulability import (
    FreeAxisState,
    ManipSettings,
    generalized_inverse,
    manipulability_index,
    nudge_candidates,
    select_seed,
)

__version__ = "0.1.0"
