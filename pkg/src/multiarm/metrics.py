"""Per-tick and aggregate tracking metrics.

Joint velocity/acceleration/jerk use backward differences over the last four
tick configurations so everything is computable online during teleoperation.
Summaries pool all arms and ticks into one mean +/- std per metric, reported
in the units used by the result tables: position in mm, jerk in 1e-3 rad/s^3.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CSV_HEADER = "t,arm,pos_err_m,manip,vel,acc,jerk"

METRIC_NAMES = ("pos_err_mm", "vel", "acc", "jerk_millis", "manip")


@dataclass(frozen=True)
class ArmFrame:
    arm_id: str
    position_error: float
    manipulability: float
    joint_velocity: np.ndarray  # per joint, rad/s
    velocity: float  # norm across joints
    acceleration: float
    jerk: float


@dataclass(frozen=True)
class MetricsFrame:
    t: float
    arms: tuple


@dataclass(frozen=True)
class MetricStats:
    mean: float
    std: float  # population


@dataclass(frozen=True)
class SummaryTable:
    """Rows keyed by label (e.g. 'UR5 scenario C'), one MetricStats per metric."""

    rows: dict = field(default_factory=dict)

    def add_row(self, label: str, stats: dict) -> "SummaryTable":
        rows = dict(self.rows)
        rows[label] = stats
        return SummaryTable(rows=rows)

    def to_dict(self) -> dict:
        return {
            label: {k: {"mean": v.mean, "std": v.std} for k, v in row.items()}
            for label, row in self.rows.items()
        }


def finite_diff_derivatives(q_window, dt: float):
    """Backward differences over the last 4 joint vectors, newest first.

    vel = (q0-q1)/dt, acc = (q0-2q1+q2)/dt^2, jerk = (q0-3q1+3q2-q3)/dt^3;
    exact for polynomial joint trajectories up to the matching order.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    q0, q1, q2, q3 = (np.asarray(q, dtype=float) for q in q_window)
    # nested first differences keep constant/linear windows exactly stationary
    d1a, d1b, d1c = q0 - q1, q1 - q2, q2 - q3
    d2a, d2b = d1a - d1b, d1b - d1c
    vel = d1a / dt
    acc = d2a / (dt * dt)
    jerk = (d2a - d2b) / (dt * dt * dt)
    return vel, acc, jerk


class MetricsRecorder:
    """Accumulates per-tick frames; owned by the runner, single writer."""

    def __init__(self, arm_ids, dt: float):
        self.arm_ids = tuple(arm_ids)
        self.dt = float(dt)
        self._history = {a: [] for a in self.arm_ids}
        self.frames = []

    def add(self, t: float, solutions: dict, manipulability: dict) -> MetricsFrame:
        arms = []
        for arm_id in self.arm_ids:
            sol = solutions[arm_id]
            hist = self._history[arm_id]
            hist.append(np.asarray(sol.q, dtype=float))
            if len(hist) > 4:
                hist.pop(0)
            if len(hist) == 4:
                vel, acc, jerk = finite_diff_derivatives(hist[::-1], self.dt)
            else:
                n = hist[0].shape[0]
                vel = np.zeros(n)
                acc = np.zeros(n)
                jerk = np.zeros(n)
            arms.append(
                ArmFrame(
                    arm_id=arm_id,
                    position_error=float(sol.position_error),
                    manipulability=float(manipulability[arm_id]),
                    joint_velocity=vel,
                    velocity=float(np.linalg.norm(vel)),
                    acceleration=float(np.linalg.norm(acc)),
                    jerk=float(np.linalg.norm(jerk)),
                )
            )
        frame = MetricsFrame(t=t, arms=tuple(arms))
        self.frames.append(frame)
        return frame


def summarize(frames) -> dict:
    """Pooled mean/population-std per metric across all arms and ticks.

    Units: position error in mm, jerk in 1e-3 rad/s^3, the rest SI.
    """
    frames = list(frames)
    if not frames:
        raise ValueError("summarize needs at least one frame")
    pools = {name: [] for name in METRIC_NAMES}
    for fr in frames:
        for arm in fr.arms:
            pools["pos_err_mm"].append(arm.position_error * 1e3)
            pools["vel"].append(arm.velocity)
            pools["acc"].append(arm.acceleration)
            pools["jerk_millis"].append(arm.jerk * 1e3)
            pools["manip"].append(arm.manipulability)
    out = {}
    for name, vals in pools.items():
        a = np.asarray(vals)
        out[name] = MetricStats(mean=float(a.mean()), std=float(a.std()))
    return out


def format_float(v: float) -> str:
    """Deterministic shortest round-trip float formatting for CSV/wire output."""
    return repr(float(v))


def frames_to_csv(frames) -> str:
    lines = [CSV_HEADER]
    for fr in frames:
        for arm in fr.arms:
            lines.append(
                ",".join(
                    [
                        format_float(fr.t),
                        arm.arm_id,
                        format_float(arm.position_error),
                        format_float(arm.manipulability),
                        format_float(arm.velocity),
                        format_float(arm.acceleration),
                        format_float(arm.jerk),
                    ]
                )
            )
    return "\n".join(lines) + "\n"
