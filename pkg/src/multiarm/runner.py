"""Scenario orchestration: ticks a payload trajectory through per-arm IK,
the scenario-C manipulability nudge, and the metrics recorder.

Scenarios:
  A - fully constrained IK (position + orientation),
  B - orientation x-axis released (free handle rotation),
  C - released axis plus the manipulability-improving seed nudge.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .ik import MASK_FREE_X, MASK_NONE, IkWeights, NewtonSettings, solve
from .kinematics import geometric_jacobian
from .manipulability import (
    FreeAxisState,
    ManipSettings,
    UR5_MANIP,
    YUMI_MANIP,
    manipulability_index,
    nudge_candidates,
    select_seed,
)
from .metrics import MetricsRecorder, frames_to_csv, summarize
from .poses import Pose, quat_from_axis_angle, quat_multiply
from .scene import Scene, build_scene, handle_targets
from .trajectories import (
    CircleParams,
    SquareParams,
    circle_sample,
    load_recording,
    square_sample,
)

SCENARIOS = ("A", "B", "C")


class ConfigError(ValueError):
    """Raised for invalid scenario configurations."""


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "A"
    scene: str = "ur5_triple"
    trajectory: str = "circle"  # circle | square | hold | <path>.traj
    tick_rate: float = 100.0
    loops: float = 3.0
    ticks: int = 0  # 0 = derive from loops / recording duration
    weights: IkWeights = IkWeights()
    newton: NewtonSettings = NewtonSettings()
    manip: ManipSettings = None  # None = per-robot-model default (6-DOF: UR5, else YuMi)
    circle: CircleParams = None  # None = centered on the scene payload start
    square: SquareParams = None
    out_dir: str = ""
    seed: int = 0

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.tick_rate <= 0:
            raise ConfigError("tick_rate must be positive")
        if self.loops < 0:
            raise ConfigError("loops must be non-negative")

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        doc = dict(doc)
        kwargs = {}
        for name, sub in (
            ("weights", IkWeights),
            ("newton", NewtonSettings),
            ("manip", ManipSettings),
            ("circle", CircleParams),
            ("square", SquareParams),
        ):
            if name in doc and doc[name] is not None:
                node = doc.pop(name)
                try:
                    kwargs[name] = sub(**{k: _coerce(v) for k, v in node.items()})
                except TypeError as exc:
                    raise ConfigError(f"bad {name} section: {exc}") from exc
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        kwargs.update({k: _coerce(v) for k, v in doc.items()})
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        doc = yaml.safe_load(Path(path).read_text())
        if not isinstance(doc, dict):
            raise ConfigError(f"config file {path} is not a mapping")
        return cls.from_dict(doc)


def _coerce(v):
    if isinstance(v, dict):
        return {k: _coerce(x) for k, x in v.items()}
    if isinstance(v, list):
        return tuple(_coerce(x) for x in v)
    return v


def resolve_manip_settings(config: ScenarioConfig, scene: Scene) -> ManipSettings:
    if config.manip is not None:
        return config.manip
    if all(arm.chain.dof == 6 for arm in scene.arms):
        return UR5_MANIP
    return YUMI_MANIP


def make_trajectory(config: ScenarioConfig, scene: Scene):
    """(sample_fn, total_duration) for the configured payload-pose source."""
    start = scene.payload_start
    center = (float(start.position[0]), float(start.position[1]))
    height = float(start.position[2])
    name = config.trajectory
    if name == "circle":
        params = config.circle or CircleParams(center=center, height=height)
        return (lambda t: circle_sample(params, t)), params.approach_time + config.loops * params.period
    if name == "square":
        params = config.square or SquareParams(center=center, height=height)
        return (lambda t: square_sample(params, t)), config.loops * params.period
    if name == "hold":
        hold_for = config.loops if config.loops > 0 else 1.0
        return (lambda t: start), hold_for
    rec = load_recording(name)
    t0 = rec.t_start
    return (lambda t: rec.sample_at(t0 + t)), rec.duration


@dataclass
class TickResult:
    t: float
    solutions: dict
    frame: object
    targets: dict


class RunnerState:
    """Per-run mutable state: IK seeds, free-axis accumulators, metrics."""

    def __init__(self, scene: Scene, config: ScenarioConfig):
        self.scene = scene
        self.config = config
        self.mask = MASK_NONE if config.scenario == "A" else MASK_FREE_X
        self.manip_settings = resolve_manip_settings(config, scene)
        self.seeds = {}
        self.free_states = {a.arm_id: FreeAxisState() for a in scene.arms}
        self.recorder = MetricsRecorder(scene.arm_ids, 1.0 / config.tick_rate)
        self.tick_index = 0
        self.solve_seconds = 0.0
        self.nudge_seconds = 0.0

    def warm_up(self, payload_pose: Pose) -> None:
        """Solve the first-tick seeds from the scene rest solution at the initial pose.

        Always fully constrained: the free-axis deviation of scenarios B/C is
        measured from the fully constrained grasp configuration.
        """
        targets = dict(handle_targets(payload_pose, self.scene.payload))
        for arm in self.scene.arms:
            sol = solve(
                arm.chain,
                targets[arm.arm_id],
                self.scene.initial_seeds[arm.arm_id],
                self.config.weights,
                MASK_NONE,
                NewtonSettings(max_steps=100),
            )
            self.seeds[arm.arm_id] = sol.q


def step(state: RunnerState, payload_pose: Pose) -> TickResult:
    """One tick: per-arm targets -> IK solve -> (scenario C) nudge -> metrics."""
    config = state.config
    t = state.tick_index / config.tick_rate
    targets = dict(handle_targets(payload_pose, state.scene.payload))
    solutions = {}
    manips = {}
    t_solve0 = time.perf_counter()
    nudge_elapsed = 0.0
    for arm in state.scene.arms:
        target = targets[arm.arm_id]
        sol = solve(
            arm.chain, target, state.seeds[arm.arm_id], config.weights, state.mask, config.newton
        )
        solutions[arm.arm_id] = sol
        manips[arm.arm_id] = manipulability_index(geometric_jacobian(arm.chain, sol.q))
        if config.scenario == "C":
            t_n0 = time.perf_counter()
            ms = state.manip_settings
            handle_x_world = target.rotate_vector(np.array([1.0, 0.0, 0.0]))
            q_plus, q_minus = nudge_candidates(
                arm.chain, sol.q, handle_x_world, ms.delta_t, ms.damping_lambda
            )
            seed, new_state = select_seed(
                arm.chain, sol.q, q_plus, q_minus, ms, state.free_states[arm.arm_id]
            )
            state.seeds[arm.arm_id] = seed
            state.free_states[arm.arm_id] = new_state
            nudge_elapsed += time.perf_counter() - t_n0
        else:
            state.seeds[arm.arm_id] = sol.q
    state.solve_seconds += time.perf_counter() - t_solve0 - nudge_elapsed
    state.nudge_seconds += nudge_elapsed
    frame = state.recorder.add(t, solutions, manips)
    state.tick_index += 1
    return TickResult(t=t, solutions=solutions, frame=frame, targets=targets)


@dataclass
class Report:
    config: ScenarioConfig
    summary: dict
    frames: list
    csv_text: str
    tick_count: int
    mean_tick_ms: float
    mean_nudge_ms: float
    csv_path: str = ""
    summary_path: str = ""


def run_scenario(config: ScenarioConfig, scene: Scene = None) -> Report:
    """Batch run: deterministic fixed-timestep simulation of the configured scenario."""
    if scene is None:
        scene = build_scene(config.scene)
    sample, duration = make_trajectory(config, scene)
    n_ticks = config.ticks if config.ticks else int(round(duration * config.tick_rate)) + 1
    if n_ticks <= 0:
        raise ConfigError("run would produce no frames (duration or ticks is zero)")
    state = RunnerState(scene, config)
    state.warm_up(sample(0.0))
    for k in range(n_ticks):
        step(state, sample(k / config.tick_rate))
    frames = state.recorder.frames
    csv_text = frames_to_csv(frames)
    report = Report(
        config=config,
        summary=summarize(frames),
        frames=frames,
        csv_text=csv_text,
        tick_count=n_ticks,
        mean_tick_ms=(state.solve_seconds + state.nudge_seconds) / n_ticks * 1e3,
        mean_nudge_ms=state.nudge_seconds / n_ticks * 1e3,
    )
    if config.out_dir:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"frames_{config.scenario}.csv"
        csv_path.write_text(csv_text)
        summary_path = out / f"summary_{config.scenario}.json"
        summary_path.write_text(_summary_json(report))
        report.csv_path = str(csv_path)
        report.summary_path = str(summary_path)
    return report


def _summary_json(report: Report) -> str:
    import json

    doc = {
        "scenario": report.config.scenario,
        "scene": report.config.scene,
        "trajectory": report.config.trajectory,
        "ticks": report.tick_count,
        "metrics": {k: {"mean": v.mean, "std": v.std} for k, v in report.summary.items()},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Brute-force free-axis sweep (test oracle for the hill climb)
# ---------------------------------------------------------------------------


def sweep_free_axis(
    scene: Scene,
    payload_pose: Pose = None,
    angle_steps: int = 2000,
    max_deviation: float = None,
    weights: IkWeights = IkWeights(),
    newton: NewtonSettings = None,
) -> dict:
    """Re-solve fully-constrained IK over a grid of free-axis angles per arm.

    Returns, per arm, the angle grid, the manipulability landscape, the argmax
    angle, and whether the sweep shows a unique interior local maximum.
    """
    if payload_pose is None:
        payload_pose = scene.payload_start
    if max_deviation is None:
        max_deviation = float(ManipSettings().max_deviation)
    newton = newton or NewtonSettings(max_steps=40)
    angles = np.linspace(-max_deviation, max_deviation, angle_steps)
    i0 = int(np.argmin(np.abs(angles)))
    targets = dict(handle_targets(payload_pose, scene.payload))
    out = {}
    for arm in scene.arms:
        target = targets[arm.arm_id]
        base = solve(arm.chain, target, scene.initial_seeds[arm.arm_id], weights, MASK_NONE,
                     NewtonSettings(max_steps=100))
        m_curve = np.empty(angle_steps)

        def rotated_target(alpha):
            spin = quat_from_axis_angle(np.array([1.0, 0.0, 0.0]), alpha)
            return Pose(target.position, quat_multiply(target.quaternion, spin))

        def sweep_from(start_idx, indices, seed0):
            seed = seed0
            for i in indices:
                sol = solve(arm.chain, rotated_target(angles[i]), seed, weights, MASK_NONE, newton)
                m_curve[i] = manipulability_index(geometric_jacobian(arm.chain, sol.q))
                seed = sol.q

        sweep_from(i0, range(i0, angle_steps), base.q)
        sweep_from(i0, range(i0 - 1, -1, -1), base.q)
        peaks = _significant_maxima(m_curve, prominence=1e-5)
        best = int(np.argmax(m_curve))
        out[arm.arm_id] = {
            "angles": angles.tolist(),
            "manip": m_curve.tolist(),
            "argmax_angle": float(angles[best]),
            "argmax_manip": float(m_curve[best]),
            "unique_interior_max": len(peaks) == 1 and 0 < best < angle_steps - 1,
        }
    return out


def _significant_maxima(m: np.ndarray, prominence: float) -> list:
    """Indices of local maxima whose prominence exceeds the solver noise floor."""
    n = len(m)
    peaks = []
    for i in range(1, n - 1):
        if not (m[i] > m[i - 1] and m[i] > m[i + 1]):
            continue
        lo = m[i]
        j = i - 1
        while j >= 0 and m[j] <= m[i]:
            lo = min(lo, m[j])
            j -= 1
        left_saddle = lo
        lo = m[i]
        j = i + 1
        while j < n and m[j] <= m[i]:
            lo = min(lo, m[j])
            j += 1
        right_saddle = lo
        if m[i] - max(left_saddle, right_saddle) > prominence:
            peaks.append(i)
    return peaks


def run_static_climb(scene: Scene, config: ScenarioConfig, payload_pose: Pose = None, ticks: int = 600):
    """Hold the payload still and run the scenario-C loop; returns final free-axis state."""
    config = dataclasses.replace(config, scenario="C")
    state = RunnerState(scene, config)
    pose = payload_pose if payload_pose is not None else scene.payload_start
    state.warm_up(pose)
    for _ in range(ticks):
        step(state, pose)
    return state
