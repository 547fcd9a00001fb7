#!/usr/bin/env python3
"""Reproduce the scenario comparison tables: circle, square, and a
teleoperation-style recording, each under scenarios A/B/C, per scene.

Columns: position error [mm], joint velocity [rad/s], acceleration [rad/s^2],
jerk [1e-3 rad/s^3], manipulability index; mean +/- population std pooled over
arms and ticks.
"""

import argparse
import dataclasses
from pathlib import Path

from multiarm.metrics import SummaryTable
from multiarm.runner import ScenarioConfig, run_scenario
from multiarm.scene import build_scene

COLUMNS = ("pos_err_mm", "vel", "acc", "jerk_millis", "manip")
HEAD = ("Pos. [mm]", "Vel. [rad/s]", "Acc. [rad/s2]", "Jerk [1e-3 rad/s3]", "m(q)")


def fmt(stats):
    return f"{stats.mean:.3g} +/- {stats.std:.2g}"


def run_table(scene_name: str, trajectory: str, loops: float, out_dir: str | None):
    scene = build_scene(scene_name)
    table = SummaryTable()
    ticks = None
    for scenario in ("A", "B", "C"):
        config = ScenarioConfig(
            scenario=scenario,
            scene=scene_name,
            trajectory=trajectory,
            loops=loops,
            out_dir=out_dir or "",
        )
        report = run_scenario(config, scene)
        table = table.add_row(f"{scene_name} scenario {scenario}", report.summary)
        ticks = report.tick_count
    label = Path(trajectory).stem if trajectory.endswith(".traj") else trajectory
    print(f"\n=== {scene_name} / {label} ({ticks} ticks per run) ===")
    width = max(len(k) for k in table.rows)
    print(" " * (width + 2) + " | ".join(f"{h:>22}" for h in HEAD))
    for row_label, row in table.rows.items():
        cells = " | ".join(f"{fmt(row[c]):>22}" for c in COLUMNS)
        print(f"{row_label:<{width}}  {cells}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scene", choices=("ur5_triple", "yumi_dual", "both"), default="ur5_triple")
    parser.add_argument("--trajectory", default="all", help="circle | square | teleop | all | <file>.traj")
    parser.add_argument("--loops", type=float, default=3.0)
    parser.add_argument("--out-dir", default=None, help="also write per-run CSV/JSON here")
    parser.add_argument("--teleop-traj", default=None, help="recording for the teleop row (default: synthesized)")
    args = parser.parse_args()

    scenes = ("ur5_triple", "yumi_dual") if args.scene == "both" else (args.scene,)
    if args.trajectory == "all":
        trajectories = ["circle", "square", "teleop"]
    else:
        trajectories = [args.trajectory]

    teleop_path = args.teleop_traj
    if "teleop" in trajectories and teleop_path is None:
        import record_demo_traj
        from multiarm.trajectories import save_recording

        teleop_path = "demo_teleop.traj"
        if not Path(teleop_path).exists():
            save_recording(record_demo_traj.synthesize(seed=0), teleop_path)
            print(f"synthesized {teleop_path}")

    for scene_name in scenes:
        for traj in trajectories:
            run_table(scene_name, teleop_path if traj == "teleop" else traj, args.loops, args.out_dir)


if __name__ == "__main__":
    main()
