#!/usr/bin/env python3
"""Synthesize a teleoperation-style payload recording.

Human-ish input: minimum-jerk translations between random waypoints inside the
formation workspace, with dwell pauses between moves (the pauses are what give
the manipulability optimizer time to adjust). Deterministic for a given seed.
"""

import argparse

import numpy as np

from multiarm.poses import Pose
from multiarm.trajectories import TrajectorySample, save_recording


def min_jerk(u: float) -> float:
    return 10 * u**3 - 15 * u**4 + 6 * u**5


def synthesize(seed: int = 0, duration: float = 30.0, rate: float = 100.0, span: float = 0.10):
    rng = np.random.default_rng(seed)
    center = np.array([0.0, 0.0, 0.5])
    samples = []
    t = 0.0
    pos = center.copy()
    dt = 1.0 / rate
    while t < duration:
        target = center + rng.uniform(-span, span, 3) * np.array([1.0, 1.0, 0.5])
        move_T = rng.uniform(1.5, 3.5)
        dwell_T = rng.uniform(0.8, 2.0)
        start = pos.copy()
        n_move = int(move_T * rate)
        for k in range(n_move):
            u = min_jerk((k + 1) / n_move)
            pos = start + u * (target - start)
            samples.append(TrajectorySample(t=t, payload_pose=Pose(position=pos.copy())))
            t += dt
        for _ in range(int(dwell_T * rate)):
            samples.append(TrajectorySample(t=t, payload_pose=Pose(position=pos.copy())))
            t += dt
    return samples


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_teleop.traj")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--duration", type=float, default=30.0)
    parser.add_argument("--rate", type=float, default=100.0)
    args = parser.parse_args()
    samples = synthesize(args.seed, args.duration, args.rate)
    save_recording(samples, args.out)
    print(f"wrote {args.out}: {len(samples)} samples, {samples[-1].t:.1f} s")


if __name__ == "__main__":
    main()
