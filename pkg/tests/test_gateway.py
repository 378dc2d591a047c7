import warnings

import pytest

warnings.filterwarnings("ignore", category=DeprecationWarning)

from starlette.testclient import TestClient  # noqa: E402

from ltlshield.gateway import GatewaySession, create_app, handle_message  # noqa: E402
from ltlshield.sim import delorean_scenario  # noqa: E402


@pytest.fixture()
def client():
    app = create_app(delorean_scenario("safe"), tick_ms=250, seed=3,
                     static_dir=None)
    with TestClient(app) as c:
        yield c


def connect(client):
    ws = client.websocket_connect("/ws")
    sock = ws.__enter__()
    cfg = sock.receive_json()
    assert cfg["type"] == "config"
    state = sock.receive_json()
    assert state["type"] == "state" and state["tick"] == 0
    return ws, sock


def drive(sock, throttle, steps):
    sock.send_json({"type": "throttle", "value": throttle})
    out = []
    for _ in range(steps):
        sock.send_json({"type": "step"})
        out.append(sock.receive_json())
    return out


def test_full_throttle_progression(client):
    ws, sock = connect(client)
    try:
        sock.send_json({"type": "pause"})
        states = drive(sock, 1.0, 40)
        verdicts = [s["verdict"] for s in states]
        ticks = [s["tick"] for s in states]
        assert ticks == list(range(1, 41))  # one state per tick, increasing
        assert verdicts[0] == "ACCEPTED"
        i_fault = verdicts.index("FAULT")
        assert i_fault > 0
        assert verdicts[i_fault + 1] == "RECOVERING"
        i_backup = verdicts.index("BACKUP")
        assert i_backup > i_fault + 1
        assert set(verdicts[i_backup:]) == {"BACKUP"}
        # the car must stop short of the landmark with the mission open
        last = states[-1]
        assert last["x"] < 2.54 and last["v"] == 0.0
        assert last["in_sb"] is True
    finally:
        ws.__exit__(None, None, None)


def test_reset_restores_origin(client):
    ws, sock = connect(client)
    try:
        sock.send_json({"type": "pause"})
        drive(sock, 1.0, 5)
        sock.send_json({"type": "reset"})
        state = sock.receive_json()
        assert state["tick"] == 0
        assert state["x"] == 0.0 and state["v"] == 0.0
        assert state["q"] == "q0"
    finally:
        ws.__exit__(None, None, None)


def test_idle_operator_is_always_accepted(client):
    ws, sock = connect(client)
    try:
        sock.send_json({"type": "pause"})
        states = drive(sock, 0.0, 12)
        assert {s["verdict"] for s in states} == {"ACCEPTED"}
        assert all(s["in_sb"] for s in states)
    finally:
        ws.__exit__(None, None, None)


def test_throttle_scaling_and_clamping(client):
    ws, sock = connect(client)
    try:
        sock.send_json({"type": "pause"})
        states = drive(sock, 7.0, 2)
        events = [e for s in states for e in s["events"]]
        assert any(e["kind"] == "warning" and "clamped" in e["detail"]
                   for e in events)
        # clamped to 1.0 and scaled to the top of the input range; the
        # one-tick buffer delays it to the second step
        assert states[1]["v"] == pytest.approx(states[0]["v"] + 0.25 * 2.0,
                                               abs=0.06)
    finally:
        ws.__exit__(None, None, None)


def test_malformed_messages_keep_connection(client):
    ws, sock = connect(client)
    try:
        sock.send_json({"type": "bogus"})
        err = sock.receive_json()
        assert err["type"] == "error"
        sock.send_json({"type": "throttle"})
        err = sock.receive_json()
        assert err["type"] == "error"
        sock.send_json({"type": "pause"})
        sock.send_json({"type": "step"})
        assert sock.receive_json()["type"] == "state"
    finally:
        ws.__exit__(None, None, None)


def test_state_stream_is_deterministic():
    def run_once():
        app = create_app(delorean_scenario("safe"), tick_ms=250, seed=9,
                         static_dir=None)
        with TestClient(app) as client:
            ws, sock = connect(client)
            try:
                sock.send_json({"type": "pause"})
                return [(s["tick"], s["x"], s["v"], s["q"], s["verdict"])
                        for s in drive(sock, 0.6, 25)]
            finally:
                ws.__exit__(None, None, None)

    assert run_once() == run_once()


def test_reach_tube_is_published(client):
    ws, sock = connect(client)
    try:
        sock.send_json({"type": "pause"})
        states = drive(sock, 0.5, 3)
        assert states[-1]["reach"], "verified tube should be displayed"
        piece = states[-1]["reach"][0]
        assert set(piece) == {"q", "lo", "hi"}
    finally:
        ws.__exit__(None, None, None)


def test_timer_driven_ticks_emit_states():
    app = create_app(delorean_scenario("safe"), tick_ms=20, seed=3,
                     static_dir=None)
    with TestClient(app) as client:
        ws, sock = connect(client)
        try:
            seen = [sock.receive_json() for _ in range(3)]
            assert [s["tick"] for s in seen] == [1, 2, 3]
        finally:
            ws.__exit__(None, None, None)


def test_gateway_requires_two_dimensional_scenario():
    from dataclasses import replace
    from ltlshield.reach import AffineDynamics
    from ltlshield.geometry import Box

    sc = delorean_scenario("safe")
    dyn3 = AffineDynamics(
        a=[[1, 0, 0], [0, 1, 0], [0, 0, 1]], b=[[0], [0], [1]],
        e=[[0], [0], [1]], c=[0, 0, 0], u_box=Box([-1], [1]),
        d_box=Box([0], [0]))
    with pytest.raises(ValueError):
        GatewaySession(replace(sc, dynamics=dyn3), seed=0)


def test_handle_message_pure_paths():
    conn = GatewaySession(delorean_scenario("safe"), seed=0)
    assert handle_message(conn, {"type": "pause"}) == []
    assert conn.running is False
    frames = handle_message(conn, {"type": "step"})
    assert frames[0]["type"] == "state" and frames[0]["tick"] == 1
    assert handle_message(conn, {"type": "resume"}) == []
    assert conn.running is True
    frames = handle_message(conn, {"type": "step"})
    assert frames[0]["type"] == "error"
