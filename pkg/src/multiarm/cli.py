"""Command-line entry points: batch runs, live teleoperation, and the sweep oracle."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

from .runner import ScenarioConfig, run_scenario, sweep_free_axis
from .scene import build_scene


def _load_config(args) -> ScenarioConfig:
    config = ScenarioConfig.from_file(args.config) if args.config else ScenarioConfig()
    overrides = {}
    if getattr(args, "scenario", None):
        overrides["scenario"] = args.scenario
    if getattr(args, "trajectory", None):
        overrides["trajectory"] = args.trajectory
    if getattr(args, "scene", None):
        overrides["scene"] = args.scene
    if getattr(args, "out_dir", None):
        overrides["out_dir"] = args.out_dir
    if getattr(args, "ticks", None):
        overrides["ticks"] = args.ticks
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config


def _serve(config: ScenarioConfig, args, record_path=None) -> int:
    from .teleop import TeleopService

    host = args.live if isinstance(args.live, str) and args.live else "127.0.0.1"
    # live teleoperation runs the full pipeline unless a scenario was requested
    if getattr(args, "scenario", None) is None and not args.config:
        config = dataclasses.replace(config, scenario="C")
    service = TeleopService(
        config=config,
        host=host,
        pose_port=args.pose_port,
        state_port=args.state_port,
        ws_port=args.ws_port,
        static_dir=args.static_dir,
        record_path=record_path,
    )
    service.start()
    print(f"pose (UDP) on {host}:{service.pose_port}, state (TCP) on {host}:{service.state_port}")
    if service.ws_port is not None:
        print(f"gateway on ws://{host}:{service.ws_port}/ws")
    if record_path:
        print(f"recording to {record_path}")
    try:
        if args.duration:
            time.sleep(args.duration)
        else:
            while True:
                time.sleep(1.0)
    except KeyboardInterrupt:
        pass
    finally:
        service.stop()
        if config.out_dir:
            out = Path(config.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / "frames_live.csv").write_text(service.frames_csv())
            print(f"wrote {out / 'frames_live.csv'} ({service.tick_count} ticks)")
    return 0


def cmd_run(args) -> int:
    config = _load_config(args)
    if args.live is not None:
        return _serve(config, args)
    report = run_scenario(config)
    for name, stats in report.summary.items():
        print(f"{config.scenario} {name}: {stats.mean:.6g} +/- {stats.std:.6g}")
    print(
        f"{report.tick_count} ticks, mean {report.mean_tick_ms:.3f} ms/tick "
        f"(nudge {report.mean_nudge_ms:.3f} ms)"
    )
    if report.csv_path:
        print(f"wrote {report.csv_path} and {report.summary_path}")
    return 0


def cmd_record(args) -> int:
    config = _load_config(args)
    config = dataclasses.replace(config, scenario="C")
    return _serve(config, args, record_path=args.out)


def cmd_sweep_oracle(args) -> int:
    config = _load_config(args)
    scene = build_scene(config.scene)
    result = sweep_free_axis(scene, angle_steps=args.angle_steps)
    doc = {
        arm_id: {
            "argmax_angle": entry["argmax_angle"],
            "argmax_manip": entry["argmax_manip"],
            "unique_interior_max": entry["unique_interior_max"],
            "angles": entry["angles"] if args.full else None,
            "manip": entry["manip"] if args.full else None,
        }
        for arm_id, entry in result.items()
    }
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def _add_live_flags(p) -> None:
    p.add_argument("--pose-port", type=int, default=0, help="UDP pose-update port (0 = ephemeral)")
    p.add_argument("--state-port", type=int, default=0, help="TCP state-stream port (0 = ephemeral)")
    p.add_argument("--ws-port", type=int, default=None, help="websocket gateway port (/ws)")
    p.add_argument("--static-dir", default=None, help="serve operator UI assets from this directory")
    p.add_argument("--duration", type=float, default=0.0, help="stop after this many seconds")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="multiarm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario in batch or live mode")
    p_run.add_argument("--config", default=None, help="scenario config file (YAML)")
    p_run.add_argument("--scenario", choices=("A", "B", "C"), default=None)
    p_run.add_argument("--trajectory", default=None, help="circle | square | hold | <file>.traj")
    p_run.add_argument("--scene", default=None, help="scene preset name or file")
    p_run.add_argument("--out-dir", default=None)
    p_run.add_argument("--ticks", type=int, default=None)
    p_run.add_argument("--live", nargs="?", const="127.0.0.1", default=None,
                       help="serve live teleoperation on this bind address")
    _add_live_flags(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_rec = sub.add_parser("record", help="run the live service and capture a .traj recording")
    p_rec.add_argument("--out", required=True, help="output .traj path")
    p_rec.add_argument("--config", default=None)
    p_rec.add_argument("--scene", default=None)
    p_rec.add_argument("--out-dir", default=None)
    p_rec.add_argument("--live", nargs="?", const="127.0.0.1", default="127.0.0.1")
    _add_live_flags(p_rec)
    p_rec.set_defaults(fn=cmd_record)

    p_sweep = sub.add_parser("sweep-oracle", help="emit the brute-force free-axis manipulability landscape")
    p_sweep.add_argument("--angle-steps", type=int, default=2000)
    p_sweep.add_argument("--config", default=None)
    p_sweep.add_argument("--scene", default=None)
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--full", action="store_true", help="include the full angle/manip curves")
    p_sweep.set_defaults(fn=cmd_sweep_oracle)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
