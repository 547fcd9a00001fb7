"""Payload, handles, and robot placement: maps a payload pose to per-arm targets.

Handle frame convention: x-axis along the handle bar (the axis scenarios B/C
release), z-axis pointing away from the payload center, grasp point on the
payload equator at ``radius + HANDLE_CLEARANCE`` from the center.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .ik import MASK_NONE, IkWeights, NewtonSettings, solve
from .kinematics import DATA_DIR, KinematicChain, load_chain
from .poses import Pose

HANDLE_CLEARANCE = 0.05  # m between payload surface and handle bar
_SETUP_TOL = 5e-3  # m: initial grasp must solve at least this well


class SceneSetupError(RuntimeError):
    """Raised when a scene cannot be built (missing files, infeasible grasp)."""


@dataclass(frozen=True)
class HandleSpec:
    arm_id: str
    local_pose: Pose  # payload frame -> handle grasp frame


@dataclass(frozen=True)
class PayloadModel:
    radius: float = 0.15
    handles: tuple = ()

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("payload radius must be positive")
        for h in self.handles:
            d = float(np.linalg.norm(h.local_pose.position))
            want = self.radius + HANDLE_CLEARANCE
            if abs(d - want) > 1e-6:
                raise ValueError(
                    f"handle {h.arm_id} grasp point at {d:.6f} m from center, expected {want:.6f}"
                )


@dataclass(frozen=True)
class ArmSpec:
    arm_id: str
    chain: str  # chain file (bundled name or path)
    base_pose: Pose
    rest_pose: tuple
    handle_local_pose: Pose


@dataclass(frozen=True)
class SceneConfig:
    arms: tuple
    payload_radius: float = 0.15
    payload_start: Pose = field(default_factory=Pose.identity)
    name: str = "scene"

    def __post_init__(self):
        if len(self.arms) < 1:
            raise ValueError("scene needs at least one arm")


@dataclass
class Arm:
    arm_id: str
    chain: KinematicChain
    rest_pose: np.ndarray


@dataclass
class Scene:
    name: str
    arms: tuple
    payload: PayloadModel
    payload_start: Pose
    initial_seeds: dict  # arm_id -> JointVector solved at payload_start

    @property
    def arm_ids(self) -> tuple:
        return tuple(a.arm_id for a in self.arms)


def handle_targets(payload_pose: Pose, payload: PayloadModel) -> list:
    """Per-arm end-effector targets: rigid composition payload_pose ∘ handle local pose."""
    return [(h.arm_id, payload_pose.compose(h.local_pose)) for h in payload.handles]


def _parse_pose_node(node) -> Pose:
    if node is None:
        return Pose.identity()
    return Pose(
        position=np.asarray(node.get("position", [0, 0, 0]), dtype=float),
        quaternion=np.asarray(node.get("quaternion", [1, 0, 0, 0]), dtype=float),
    )


def load_scene_config(source) -> SceneConfig:
    """Load a scene from a preset name (``ur5_triple``, ``yumi_dual``), a path, or a dict."""
    if isinstance(source, SceneConfig):
        return source
    if isinstance(source, dict):
        doc = source
        name = doc.get("name", "scene")
        base = None
    else:
        path = Path(source)
        if not path.exists():
            bundled = DATA_DIR / f"{source}.scene"
            if bundled.exists():
                path = bundled
            else:
                raise SceneSetupError(f"scene file or preset not found: {source!r}")
        doc = yaml.safe_load(path.read_text())
        name = doc.get("name", path.stem)
        base = path.parent
    if not isinstance(doc, dict) or "arms" not in doc:
        raise SceneSetupError(f"scene description has no arms: {source!r}")
    torsos = {t["torso_id"]: _parse_pose_node(t.get("base_pose")) for t in doc.get("torsos", [])}
    arms = []
    for node in doc["arms"]:
        chain_ref = node["chain"]
        if base is not None and (base / chain_ref).exists():
            chain_ref = str(base / chain_ref)
        mount = _parse_pose_node(node.get("base_pose"))
        if "torso" in node:
            if node["torso"] not in torsos:
                raise SceneSetupError(f"arm {node['arm_id']} references unknown torso {node['torso']}")
            mount = torsos[node["torso"]].compose(mount)
        arms.append(
            ArmSpec(
                arm_id=str(node["arm_id"]),
                chain=chain_ref,
                base_pose=mount,
                rest_pose=tuple(float(v) for v in node["rest_pose"]),
                handle_local_pose=_parse_pose_node(node["handle"]["local_pose"]),
            )
        )
    payload = doc.get("payload", {})
    return SceneConfig(
        arms=tuple(arms),
        payload_radius=float(payload.get("radius", 0.15)),
        payload_start=_parse_pose_node(doc.get("payload_start")),
        name=name,
    )


def build_scene(config, setup_steps: int = 100) -> Scene:
    """Load chains, attach handles, and solve the initial grasp from each rest pose.

    Raises SceneSetupError if a chain file is missing or any arm cannot reach
    its initial handle target within 5 mm.
    """
    config = load_scene_config(config)
    arms = []
    handles = []
    for spec in config.arms:
        try:
            chain = load_chain(spec.chain)
        except FileNotFoundError as exc:
            raise SceneSetupError(f"chain file missing for arm {spec.arm_id}: {exc}") from exc
        chain = chain.with_base(spec.base_pose)
        if len(spec.rest_pose) != chain.dof:
            raise SceneSetupError(
                f"arm {spec.arm_id}: rest pose length {len(spec.rest_pose)} != dof {chain.dof}"
            )
        arms.append(Arm(arm_id=spec.arm_id, chain=chain, rest_pose=np.asarray(spec.rest_pose)))
        handles.append(HandleSpec(arm_id=spec.arm_id, local_pose=spec.handle_local_pose))
    payload = PayloadModel(radius=config.payload_radius, handles=tuple(handles))
    targets = dict(handle_targets(config.payload_start, payload))
    seeds = {}
    settings = NewtonSettings(max_steps=setup_steps)
    for arm in arms:
        sol = solve(arm.chain, targets[arm.arm_id], arm.rest_pose, IkWeights(), MASK_NONE, settings)
        if sol.position_error > _SETUP_TOL:
            raise SceneSetupError(
                f"arm {arm.arm_id}: initial grasp infeasible, position error "
                f"{sol.position_error * 1e3:.2f} mm > {_SETUP_TOL * 1e3:.0f} mm"
            )
        seeds[arm.arm_id] = sol.q
    return Scene(
        name=config.name,
        arms=tuple(arms),
        payload=payload,
        payload_start=config.payload_start,
        initial_seeds=seeds,
    )
