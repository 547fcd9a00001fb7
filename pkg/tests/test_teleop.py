import socket
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiarm.poses import Pose
from multiarm.runner import ScenarioConfig, run_scenario
from multiarm.scene import build_scene
from multiarm.teleop import (
    BUSY_NOTICE,
    ArmState,
    MessageFormatError,
    PoseUpdateMessage,
    StateMessage,
    TeleopService,
    encode_pose_message,
    encode_state_message,
    ingest_pose_message,
    parse_state_message,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
small = st.floats(min_value=-10, max_value=10, allow_nan=False)


def _states_equal(a: StateMessage, b: StateMessage) -> bool:
    if a.t_server != b.t_server or len(a.arms) != len(b.arms):
        return False
    if not np.array_equal(a.payload_pose.position, b.payload_pose.position):
        return False
    if not np.array_equal(a.payload_pose.quaternion, b.payload_pose.quaternion):
        return False
    return all(x == y for x, y in zip(a.arms, b.arms))


def test_pose_message_round_trip():
    msg = PoseUpdateMessage("op-1", 7, 0.125, (0.1, -0.2, 0.3), (1.0, 0.0, 0.0, 0.0), True)
    assert ingest_pose_message(encode_pose_message(msg)) == msg


@given(
    st.integers(min_value=0, max_value=2**31),
    finite,
    st.tuples(small, small, small),
    st.tuples(small, small, small, small).filter(lambda q: np.linalg.norm(q) > 1e-3),
    st.booleans(),
)
@settings(max_examples=80)
def test_pose_message_fuzz_round_trip(seq, t, p, q, grab):
    qn = tuple(np.asarray(q) / np.linalg.norm(q))
    msg = PoseUpdateMessage("fuzz", seq, t, p, qn, grab)
    back = ingest_pose_message(encode_pose_message(msg))
    assert back.seq == msg.seq and back.t_client == msg.t_client
    assert back.p == msg.p
    assert np.allclose(back.q, msg.q, atol=1e-12)
    assert back.grab == msg.grab


def test_non_normalized_quaternion_is_accepted_and_renormalized():
    line = "type=pose session_id=s seq=1 t_client=0.0 p=0,0,0 q=1.1,0,0,0 grab=1"
    msg = ingest_pose_message(line)
    assert abs(np.linalg.norm(msg.q) - 1.0) < 1e-12


@pytest.mark.parametrize(
    "line",
    [
        "type=state t_server=0",
        "type=pose session_id=s seq=x t_client=0 p=0,0,0 q=1,0,0,0 grab=1",
        "type=pose session_id=s seq=1 t_client=0 p=0,0 q=1,0,0,0 grab=1",
        "type=pose session_id=s seq=1 t_client=0 p=0,0,0 q=0,0,0,0 grab=1",
        "type=pose session_id=bad token seq=1 t_client=0 p=0,0,0 q=1,0,0,0 grab=1",
        "garbage",
    ],
)
def test_malformed_pose_messages_raise(line):
    with pytest.raises(MessageFormatError):
        ingest_pose_message(line)


def test_state_message_round_trip():
    msg = StateMessage(
        t_server=0.25,
        payload_pose=Pose(position=[0.1, 0.2, 0.3], quaternion=[1, 0, 0, 0]),
        arms=(
            ArmState("arm0", (0.1, -0.2, 0.3), 0.05, 0.001),
            ArmState("arm1", (1.0, 2.0, 3.0), 0.07, 0.0),
        ),
    )
    assert _states_equal(parse_state_message(encode_state_message(msg)), msg)


@given(
    finite,
    st.tuples(small, small, small),
    st.lists(
        st.tuples(st.lists(small, min_size=2, max_size=7), finite, finite),
        min_size=1,
        max_size=4,
    ),
)
@settings(max_examples=60)
def test_state_message_fuzz_round_trip(t, p, arm_rows):
    arms = tuple(
        ArmState(f"arm{i}", tuple(joints), m, e) for i, (joints, m, e) in enumerate(arm_rows)
    )
    msg = StateMessage(t_server=t, payload_pose=Pose(position=np.asarray(p)), arms=arms)
    assert _states_equal(parse_state_message(encode_state_message(msg)), msg)


def test_zero_arm_state_is_rejected_at_construction():
    with pytest.raises(ValueError):
        StateMessage(t_server=0.0, payload_pose=Pose.identity(), arms=())


@pytest.fixture(scope="module")
def toy_scene():
    return build_scene("toy_single")


def _pose_line(session, seq, p, grab=True, t=0.0):
    return encode_pose_message(PoseUpdateMessage(session, seq, t, tuple(p), (1.0, 0.0, 0.0, 0.0), grab))


def test_submit_pose_ordering_and_sessions(toy_scene):
    svc = TeleopService(ScenarioConfig(scenario="C", scene="toy_single"), scene=toy_scene)
    notices = []
    assert svc.submit_pose(_pose_line("op1", 5, [0, 0, 0.5]))
    assert not svc.submit_pose(_pose_line("op1", 5, [0, 0, 0.6]))  # stale seq dropped
    assert not svc.submit_pose(_pose_line("op1", 4, [0, 0, 0.6]))
    assert svc.submit_pose(_pose_line("op1", 6, [0, 0, 0.6]))  # newer accepted
    assert not svc.submit_pose(_pose_line("op2", 1, [0, 0, 0.7]), reply=notices.append)
    assert notices == [BUSY_NOTICE]  # single-operator rule
    assert svc.dropped_messages == 3
    assert not svc.submit_pose(b"garbage bytes")
    assert svc.dropped_messages == 4


def test_live_service_udp_to_tcp_flow(toy_scene):
    config = ScenarioConfig(scenario="C", scene="toy_single", tick_rate=200.0)
    svc = TeleopService(config, scene=toy_scene)
    svc.start()
    try:
        sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        tcp = socket.create_connection(("127.0.0.1", svc.state_port), timeout=2.0)
        tcp.settimeout(2.0)
        # move the payload with grab=true, then release
        for seq in range(1, 20):
            p = (0.02 * seq / 20, 0.0, 0.5)
            sock.sendto(_pose_line("op1", seq, p).encode(), ("127.0.0.1", svc.pose_port))
            time.sleep(0.005)
        sock.sendto(_pose_line("op1", 99, (0.02, 0.0, 0.5), grab=False).encode(), ("127.0.0.1", svc.pose_port))
        buf = b""
        deadline = time.time() + 3.0
        while buf.count(b"\n") < 10 and time.time() < deadline:
            buf += tcp.recv(65536)
        lines = buf.decode().splitlines()
        assert len(lines) >= 10
        msg = parse_state_message(lines[-1])
        assert [a.arm_id for a in msg.arms] == ["arm0"]
    finally:
        svc.stop()
    # hold-last: after the grab=false message the payload stays where it was
    last_pose = svc.recording[-1].payload_pose
    assert abs(last_pose.position[0] - 0.02) < 1e-2
    assert svc.tick_count > 10


def test_record_replay_parity(tmp_path, toy_scene):
    record = tmp_path / "session.traj"
    config = ScenarioConfig(scenario="C", scene="toy_single", tick_rate=200.0)
    svc = TeleopService(config, scene=toy_scene, record_path=str(record))
    svc.start()
    try:
        sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        for seq in range(1, 40):
            p = (0.03 * np.sin(seq / 8.0), 0.0, 0.5)
            sock.sendto(_pose_line("op1", seq, p).encode(), ("127.0.0.1", svc.pose_port))
            time.sleep(0.004)
    finally:
        svc.stop()
    live_csv = svc.frames_csv()
    assert svc.tick_count >= 10
    replay_config = ScenarioConfig(
        scenario="C",
        scene="toy_single",
        tick_rate=200.0,
        trajectory=str(record),
        ticks=svc.tick_count,
    )
    replay = run_scenario(replay_config, toy_scene)
    assert replay.csv_text == live_csv


def test_ws_gateway_round_trip(tmp_path, toy_scene):
    from websockets.sync.client import connect

    static = tmp_path / "static"
    static.mkdir()
    (static / "index.html").write_text("<html><body>operator ui</body></html>")
    config = ScenarioConfig(scenario="C", scene="toy_single", tick_rate=200.0)
    svc = TeleopService(config, scene=toy_scene, ws_port=0, static_dir=str(static))
    svc.start()
    try:
        with connect(f"ws://127.0.0.1:{svc.ws_port}/ws") as ws:
            ws.send(_pose_line("wsop", 1, (0.01, 0, 0.5)))
            line = ws.recv(timeout=3.0)
            msg = parse_state_message(line)
            assert msg.arms[0].arm_id == "arm0"
        # static assets come from the same port
        import urllib.request

        with urllib.request.urlopen(f"http://127.0.0.1:{svc.ws_port}/") as resp:
            assert b"operator ui" in resp.read()
        with pytest.raises(Exception):
            urllib.request.urlopen(f"http://127.0.0.1:{svc.ws_port}/../etc/passwd")
    finally:
        svc.stop()


def test_no_client_still_ticks(toy_scene):
    config = ScenarioConfig(scenario="C", scene="toy_single", tick_rate=500.0)
    svc = TeleopService(config, scene=toy_scene, max_ticks=25, realtime=False)
    svc.start()
    try:
        deadline = time.time() + 5.0
        while svc.tick_count < 25 and time.time() < deadline:
            time.sleep(0.01)
    finally:
        svc.stop()
    assert svc.tick_count >= 25
    errors = [a.position_error for f in svc.state.recorder.frames for a in f.arms]
    assert max(errors) < 1e-6  # arms hold the start pose
