"""Deterministic payload-pose sources: circle, square, and recorded playback.

Recordings are line-delimited JSON (`.traj`): one record per line,
``{"t": seconds, "p": [x, y, z], "q": [w, x, y, z]}``.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .poses import Pose, quat_slerp


class RecordingFormatError(ValueError):
    """Raised for malformed .traj documents."""


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    payload_pose: Pose


@dataclass(frozen=True)
class CircleParams:
    radius: float = 0.2
    height: float = 0.5
    angular_speed: float = 0.5
    approach_speed: float = 0.1
    center: tuple = (0.0, 0.0)

    @property
    def approach_time(self) -> float:
        return self.radius / self.approach_speed

    @property
    def period(self) -> float:
        """Duration of one full circle (phase 2 only)."""
        return 2.0 * math.pi / self.angular_speed


@dataclass(frozen=True)
class SquareParams:
    side: float = 0.4
    height: float = 0.5
    speed: float = 0.1
    center: tuple = (0.0, 0.0)

    @property
    def period(self) -> float:
        return 4.0 * self.side / self.speed


def circle_sample(params: CircleParams, t: float) -> Pose:
    """Approach +x by one radius, then circle the start point at constant height."""
    if t < 0:
        raise ValueError("t must be >= 0")
    cx, cy = params.center
    if t <= params.approach_time:
        x = cx + params.approach_speed * t
        y = cy
    else:
        a = params.angular_speed * (t - params.approach_time)
        x = cx + params.radius * math.cos(a)
        y = cy + params.radius * math.sin(a)
    return Pose(position=np.array([x, y, params.height]))


def square_sample(params: SquareParams, t: float) -> Pose:
    """Axis-aligned horizontal square centered on the start point, constant speed.

    Starts at the (-side/2, -side/2) corner; position is continuous, velocity
    jumps at the corners by construction.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    s = params.side
    u = (params.speed * t) % (4.0 * s) if s > 0 else 0.0
    cx, cy = params.center
    half = 0.5 * s
    if u < s:
        x, y = -half + u, -half
    elif u < 2 * s:
        x, y = half, -half + (u - s)
    elif u < 3 * s:
        x, y = half - (u - 2 * s), half
    else:
        x, y = -half, half - (u - 3 * s)
    return Pose(position=np.array([cx + x, cy + y, params.height]))


@dataclass(frozen=True)
class Recording:
    samples: tuple
    source: str = "file"

    def __post_init__(self):
        if len(self.samples) < 2:
            raise RecordingFormatError("recording needs at least 2 samples")
        ts = [s.t for s in self.samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise RecordingFormatError("recording timestamps must be strictly increasing")

    @property
    def duration(self) -> float:
        return self.samples[-1].t - self.samples[0].t

    @property
    def t_start(self) -> float:
        return self.samples[0].t

    def sample_at(self, t: float) -> Pose:
        """Linear position / slerp orientation interpolation; clamped at the ends.

        Exactly reproduces a stored sample when queried at its timestamp, so a
        replay at the recorded tick times is bit-identical to the live inputs.
        """
        samples = self.samples
        if t <= samples[0].t:
            return samples[0].payload_pose
        if t >= samples[-1].t:
            return samples[-1].payload_pose
        ts = [s.t for s in samples]
        i = bisect_right(ts, t) - 1
        if ts[i] == t:
            return samples[i].payload_pose
        a, b = samples[i], samples[i + 1]
        u = (t - a.t) / (b.t - a.t)
        pos = a.payload_pose.position + u * (b.payload_pose.position - a.payload_pose.position)
        quat = quat_slerp(a.payload_pose.quaternion, b.payload_pose.quaternion, u)
        return Pose(position=pos, quaternion=quat)


def _parse_record(line: str, lineno: int) -> TrajectorySample:
    try:
        doc = json.loads(line)
        t = float(doc["t"])
        p = [float(v) for v in doc["p"]]
        q = [float(v) for v in doc["q"]]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise RecordingFormatError(f"bad .traj record on line {lineno}: {exc}") from exc
    if len(p) != 3 or len(q) != 4:
        raise RecordingFormatError(f"bad vector lengths on line {lineno}")
    return TrajectorySample(t=t, payload_pose=Pose(position=np.array(p), quaternion=np.array(q)))


def load_recording(source, tag: str = "file") -> Recording:
    """Parse a .traj document from a path or a string of JSON lines."""
    if isinstance(source, Recording):
        return source
    path = Path(source) if not ("\n" in str(source) or str(source).lstrip().startswith("{")) else None
    text = path.read_text() if path is not None else str(source)
    samples = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        samples.append(_parse_record(line, lineno))
    return Recording(samples=tuple(samples), source=tag)


def save_recording(samples, path) -> None:
    """Write samples as .traj JSON lines (floats via repr: exact round trip)."""
    lines = []
    for s in samples:
        rec = {
            "t": s.t,
            "p": [float(v) for v in s.payload_pose.position],
            "q": [float(v) for v in s.payload_pose.quaternion],
        }
        lines.append(json.dumps(rec))
    Path(path).write_text("\n".join(lines) + "\n")
