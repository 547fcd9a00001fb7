"""Live teleoperation service.

Channels:
  pose up   - UDP datagrams, latest-wins (a slow client can never stall a tick),
  state down - TCP stream, newline-framed, loss-free for UI rendering,
  /ws        - WebSocket gateway carrying both record streams as text frames
               (and serving the operator UI's static files when configured).

Wire format, both directions: UTF-8 lines, one flat record per line,
``type=<pose|state|notice> field=value ...``; vectors are comma-joined,
floats are repr-formatted (exact round trip).
"""

from __future__ import annotations

import re
import socket
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from queue import Empty, Full, Queue

import numpy as np

from .metrics import format_float, frames_to_csv
from .poses import Pose
from .runner import RunnerState, ScenarioConfig, step
from .scene import Scene, build_scene
from .trajectories import TrajectorySample, save_recording

_TOKEN_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")


class MessageFormatError(ValueError):
    """Raised for malformed wire records."""


@dataclass(frozen=True)
class PoseUpdateMessage:
    session_id: str
    seq: int
    t_client: float
    p: tuple
    q: tuple
    grab: bool

    def __post_init__(self):
        if not _TOKEN_RE.match(self.session_id):
            raise MessageFormatError(f"bad session_id token: {self.session_id!r}")
        if len(self.p) != 3 or len(self.q) != 4:
            raise MessageFormatError("pose message needs p[3] and q[4]")


@dataclass(frozen=True)
class ArmState:
    arm_id: str
    joints: tuple
    manipulability: float
    position_error: float


@dataclass(frozen=True)
class StateMessage:
    t_server: float
    payload_pose: Pose
    arms: tuple

    def __post_init__(self):
        if len(self.arms) < 1:
            raise ValueError("state message needs at least one arm")


def _fmt_vec(values) -> str:
    return ",".join(format_float(v) for v in values)


def _parse_vec(text: str, n: int, what: str):
    parts = text.split(",")
    if len(parts) != n:
        raise MessageFormatError(f"{what} needs {n} components, got {len(parts)}")
    try:
        return tuple(float(v) for v in parts)
    except ValueError as exc:
        raise MessageFormatError(f"bad {what}: {exc}") from exc


def _fields(line: str) -> dict:
    out = {}
    for tok in line.split():
        if "=" not in tok:
            raise MessageFormatError(f"bad token {tok!r}")
        k, v = tok.split("=", 1)
        if k in out:
            raise MessageFormatError(f"duplicate field {k!r}")
        out[k] = v
    return out


def encode_pose_message(msg: PoseUpdateMessage) -> str:
    return (
        f"type=pose session_id={msg.session_id} seq={msg.seq} "
        f"t_client={format_float(msg.t_client)} p={_fmt_vec(msg.p)} q={_fmt_vec(msg.q)} "
        f"grab={1 if msg.grab else 0}"
    )


def ingest_pose_message(data) -> PoseUpdateMessage:
    """Parse and validate one pose record (bytes or str); renormalizes the quaternion."""
    line = data.decode("utf-8", errors="strict") if isinstance(data, (bytes, bytearray)) else str(data)
    f = _fields(line.strip())
    if f.get("type") != "pose":
        raise MessageFormatError(f"expected type=pose, got {f.get('type')!r}")
    try:
        q = np.asarray(_parse_vec(f["q"], 4, "q"))
        norm = float(np.linalg.norm(q))
        if norm < 1e-6:
            raise MessageFormatError("quaternion norm too small")
        return PoseUpdateMessage(
            session_id=f["session_id"],
            seq=int(f["seq"]),
            t_client=float(f["t_client"]),
            p=_parse_vec(f["p"], 3, "p"),
            q=tuple(q / norm),
            grab=f["grab"] not in ("0", "false", "False"),
        )
    except KeyError as exc:
        raise MessageFormatError(f"missing field {exc}") from exc
    except ValueError as exc:
        raise MessageFormatError(str(exc)) from exc


def encode_state_message(msg: StateMessage) -> str:
    parts = [
        "type=state",
        f"t_server={format_float(msg.t_server)}",
        f"payload_p={_fmt_vec(msg.payload_pose.position)}",
        f"payload_q={_fmt_vec(msg.payload_pose.quaternion)}",
        f"arms={len(msg.arms)}",
    ]
    for i, arm in enumerate(msg.arms):
        parts.append(f"id{i}={arm.arm_id}")
        parts.append(f"q{i}={_fmt_vec(arm.joints)}")
        parts.append(f"m{i}={format_float(arm.manipulability)}")
        parts.append(f"err{i}={format_float(arm.position_error)}")
    return " ".join(parts)


def parse_state_message(data) -> StateMessage:
    line = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else str(data)
    f = _fields(line.strip())
    if f.get("type") != "state":
        raise MessageFormatError(f"expected type=state, got {f.get('type')!r}")
    try:
        n = int(f["arms"])
        arms = []
        for i in range(n):
            joints = tuple(float(v) for v in f[f"q{i}"].split(","))
            arms.append(
                ArmState(
                    arm_id=f[f"id{i}"],
                    joints=joints,
                    manipulability=float(f[f"m{i}"]),
                    position_error=float(f[f"err{i}"]),
                )
            )
        return StateMessage(
            t_server=float(f["t_server"]),
            payload_pose=Pose(
                position=np.asarray(_parse_vec(f["payload_p"], 3, "payload_p")),
                quaternion=np.asarray(_parse_vec(f["payload_q"], 4, "payload_q")),
            ),
            arms=tuple(arms),
        )
    except KeyError as exc:
        raise MessageFormatError(f"missing field {exc}") from exc
    except ValueError as exc:
        raise MessageFormatError(str(exc)) from exc


BUSY_NOTICE = "type=notice status=busy"


def _pose_doc(pose: Pose) -> dict:
    return {
        "position": [float(v) for v in pose.position],
        "quaternion": [float(v) for v in pose.quaternion],
    }


class _Broadcast:
    """Fan-out of state lines to bounded per-subscriber queues, oldest dropped."""

    def __init__(self, maxsize: int = 64):
        self._subs = []
        self._lock = threading.Lock()
        self._maxsize = maxsize

    def subscribe(self) -> Queue:
        q = Queue(maxsize=self._maxsize)
        with self._lock:
            self._subs.append(q)
        return q

    def unsubscribe(self, q: Queue) -> None:
        with self._lock:
            if q in self._subs:
                self._subs.remove(q)

    def publish(self, line: str) -> None:
        with self._lock:
            subs = list(self._subs)
        for q in subs:
            try:
                q.put_nowait(line)
            except Full:
                try:
                    q.get_nowait()
                except Empty:
                    pass
                try:
                    q.put_nowait(line)
                except Full:
                    pass


class TeleopService:
    """Scenario-C tick loop fed by a latest-value pose mailbox.

    Roles: a UDP receiver and the /ws gateway write the mailbox, the tick
    loop is the only consumer and owns all solver state, publishers drain
    bounded queues. No lock is ever held across a solve.
    """

    def __init__(
        self,
        config: ScenarioConfig,
        scene: Scene = None,
        host: str = "127.0.0.1",
        pose_port: int = 0,
        state_port: int = 0,
        ws_port: int = None,
        static_dir: str = None,
        record_path: str = None,
        realtime: bool = True,
        max_ticks: int = 0,
    ):
        self.config = config
        self.scene = scene if scene is not None else build_scene(config.scene)
        self.host = host
        self._req_ports = (pose_port, state_port, ws_port)
        self.static_dir = static_dir
        self.record_path = record_path
        self.realtime = realtime
        self.max_ticks = max_ticks
        self.pose_port = None
        self.state_port = None
        self.ws_port = None
        self._mailbox = None  # latest accepted PoseUpdateMessage
        self._mailbox_lock = threading.Lock()
        self._owner_session = None
        self._last_seq = {}
        self.dropped_messages = 0
        self._stop = threading.Event()
        self._threads = []
        self._broadcast = _Broadcast()
        self._ws_server = None
        self.state = None
        self.recording = []
        self.tick_count = 0

    # -- message path ------------------------------------------------------

    def submit_pose(self, data, reply=None) -> bool:
        """Validate one pose record and store it in the mailbox. Returns acceptance."""
        try:
            msg = ingest_pose_message(data)
        except MessageFormatError:
            self.dropped_messages += 1
            return False
        with self._mailbox_lock:
            if self._owner_session is None:
                self._owner_session = msg.session_id
            if msg.session_id != self._owner_session:
                self.dropped_messages += 1
                if reply is not None:
                    reply(BUSY_NOTICE)
                return False
            last = self._last_seq.get(msg.session_id)
            if last is not None and msg.seq <= last:
                self.dropped_messages += 1
                return False
            self._last_seq[msg.session_id] = msg.seq
            self._mailbox = msg
        return True

    # -- lifecycle ----------------------------------------------------------

    def start(self) -> None:
        pose_port, state_port, ws_port = self._req_ports
        self._udp_sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._udp_sock.bind((self.host, pose_port))
        self._udp_sock.settimeout(0.1)
        self.pose_port = self._udp_sock.getsockname()[1]
        self._tcp_sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._tcp_sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._tcp_sock.bind((self.host, state_port))
        self._tcp_sock.listen(8)
        self._tcp_sock.settimeout(0.1)
        self.state_port = self._tcp_sock.getsockname()[1]
        self.state = RunnerState(self.scene, self.config)
        for fn in (self._udp_loop, self._accept_loop, self._tick_loop):
            t = threading.Thread(target=fn, daemon=True)
            t.start()
            self._threads.append(t)
        if ws_port is not None:
            self._start_gateway(ws_port)

    def stop(self) -> None:
        self._stop.set()
        if self._ws_server is not None:
            self._ws_server.shutdown()
        for t in self._threads:
            t.join(timeout=5.0)
        self._udp_sock.close()
        self._tcp_sock.close()
        if self.record_path and self.recording:
            save_recording(self.recording, self.record_path)

    def frames_csv(self) -> str:
        return frames_to_csv(self.state.recorder.frames)

    # -- threads -------------------------------------------------------------

    def _udp_loop(self) -> None:
        while not self._stop.is_set():
            try:
                data, addr = self._udp_sock.recvfrom(65536)
            except socket.timeout:
                continue
            except OSError:
                break
            self.submit_pose(data, reply=lambda line: self._udp_sock.sendto(line.encode(), addr))

    def _accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                conn, _ = self._tcp_sock.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            t = threading.Thread(target=self._client_loop, args=(conn,), daemon=True)
            t.start()

    def _client_loop(self, conn) -> None:
        q = self._broadcast.subscribe()
        try:
            while not self._stop.is_set():
                try:
                    line = q.get(timeout=0.1)
                except Empty:
                    continue
                conn.sendall((line + "\n").encode())
        except OSError:
            pass
        finally:
            self._broadcast.unsubscribe(q)
            conn.close()

    def _tick_loop(self) -> None:
        dt = 1.0 / self.config.tick_rate
        current_pose = self.scene.payload_start
        warmed = False
        next_deadline = time.monotonic()
        while not self._stop.is_set():
            if self.max_ticks and self.tick_count >= self.max_ticks:
                break
            with self._mailbox_lock:
                msg = self._mailbox
            if msg is not None and msg.grab:
                current_pose = Pose(position=np.asarray(msg.p), quaternion=np.asarray(msg.q))
            if not warmed:
                self.state.warm_up(current_pose)
                warmed = True
            t_tick = self.tick_count / self.config.tick_rate
            self.recording.append(TrajectorySample(t=t_tick, payload_pose=current_pose))
            result = step(self.state, current_pose)
            arms = tuple(
                ArmState(
                    arm_id=arm.arm_id,
                    joints=tuple(float(v) for v in result.solutions[arm.arm_id].q),
                    manipulability=result.frame.arms[i].manipulability,
                    position_error=result.frame.arms[i].position_error,
                )
                for i, arm in enumerate(self.scene.arms)
            )
            state_msg = StateMessage(t_server=t_tick, payload_pose=current_pose, arms=arms)
            self._broadcast.publish(encode_state_message(state_msg))
            self.tick_count += 1
            if self.realtime:
                next_deadline += dt
                delay = next_deadline - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
                else:
                    next_deadline = time.monotonic()

    # -- websocket gateway -----------------------------------------------------

    def _start_gateway(self, ws_port: int) -> None:
        from websockets.sync.server import serve

        def handler(conn):
            if conn.request.path.split("?")[0] != "/ws":
                return
            q = self._broadcast.subscribe()
            sender_stop = threading.Event()

            def sender():
                while not sender_stop.is_set() and not self._stop.is_set():
                    try:
                        line = q.get(timeout=0.1)
                    except Empty:
                        continue
                    try:
                        conn.send(line)
                    except Exception:
                        break

            t = threading.Thread(target=sender, daemon=True)
            t.start()
            try:
                for message in conn:
                    if isinstance(message, bytes):
                        message = message.decode("utf-8", errors="replace")
                    self.submit_pose(message, reply=conn.send)
            except Exception:
                pass
            finally:
                sender_stop.set()
                self._broadcast.unsubscribe(q)

        def process_request(conn, request):
            path = request.path.split("?")[0]
            if path == "/ws":
                return None  # continue with the websocket handshake
            if path == "/scene.json":
                return self._serve_scene_json(conn)
            return self._serve_static(conn, path)

        self._ws_server = serve(
            handler, self.host, ws_port, process_request=process_request
        )
        self.ws_port = self._ws_server.socket.getsockname()[1]
        t = threading.Thread(target=self._ws_server.serve_forever, daemon=True)
        t.start()
        self._threads.append(t)

    def scene_document(self) -> dict:
        """Geometry the operator UI needs to render arms from joint values."""
        arms = []
        for arm in self.scene.arms:
            chain = arm.chain
            arms.append(
                {
                    "arm_id": arm.arm_id,
                    "base_pose": _pose_doc(chain.base_pose),
                    "joints": [
                        {
                            "offset_position": [float(v) for v in j.parent_offset.position],
                            "offset_quaternion": [float(v) for v in j.parent_offset.quaternion],
                            "axis": [float(v) for v in j.axis],
                        }
                        for j in chain.joints
                    ],
                    "tool_offset": _pose_doc(chain.tool_offset),
                }
            )
        handles = {
            h.arm_id: _pose_doc(h.local_pose) for h in self.scene.payload.handles
        }
        return {
            "scene": self.scene.name,
            "payload_radius": self.scene.payload.radius,
            "payload_start": _pose_doc(self.scene.payload_start),
            "arms": arms,
            "handles": handles,
        }

    def _serve_scene_json(self, conn):
        import json

        from websockets.http11 import Headers, Response

        body = json.dumps(self.scene_document()).encode()
        headers = Headers()
        headers["Content-Type"] = "application/json"
        headers["Content-Length"] = str(len(body))
        return Response(200, "OK", headers, body)

    def _serve_static(self, conn, path: str):
        from websockets.http11 import Headers, Response

        def response(code, reason, body: bytes, ctype: str = "text/plain"):
            headers = Headers()
            headers["Content-Type"] = ctype
            headers["Content-Length"] = str(len(body))
            return Response(code, reason, headers, body)

        if self.static_dir is None:
            return response(404, "Not Found", b"no static assets configured")
        root = Path(self.static_dir).resolve()
        rel = path.lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if not str(target).startswith(str(root)) or not target.is_file():
            return response(404, "Not Found", b"not found")
        ctypes = {
            ".html": "text/html; charset=utf-8",
            ".js": "text/javascript; charset=utf-8",
            ".css": "text/css; charset=utf-8",
            ".json": "application/json",
            ".map": "application/json",
        }
        return response(200, "OK", target.read_bytes(), ctypes.get(target.suffix, "application/octet-stream"))
