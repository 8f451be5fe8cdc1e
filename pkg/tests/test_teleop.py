"""Teleop server tests: run the aiohttp app on a test server inside
asyncio.run (no pytest-asyncio dependency)."""

import asyncio
import json

import pytest
from aiohttp.test_utils import TestClient, TestServer

from amphibori.teleop import make_app, parse_command

SCENARIO = """
robot {
  yaw=15deg
}
world {
  ground flat
}
schedule {
  rotate axis=(0,1,0) strength=10mT freq=4Hz for=1s
}
"""

PUMP_SCENARIO = """
robot {
  plates=dual
  reservoir=500ul
}
world {
  ground flat
}
schedule {
  off for=1s
}
"""


def run_async(coro):
    return asyncio.run(coro)


async def make_client(scenario=SCENARIO, time_scale=8.0):
    app = make_app(scenario, time_scale=time_scale)
    client = TestClient(TestServer(app))
    await client.start_server()
    return client


async def collect_frames(ws, n, timeout=20.0):
    frames = []
    async def inner():
        while len(frames) < n:
            msg = await ws.receive_json()
            if msg.get("type") == "frame":
                frames.append(msg)
    await asyncio.wait_for(inner(), timeout)
    return frames


class TestEndpoints:
    def test_health(self):
        async def body():
            client = await make_client()
            resp = await client.get("/health")
            data = await resp.json()
            await client.close()
            return resp.status, data

        status, data = run_async(body())
        assert status == 200
        assert data["status"] == "running"
        assert data["v"] == 1

    def test_scenario_text_roundtrip(self):
        async def body():
            client = await make_client()
            resp = await client.get("/scenario")
            text = await resp.text()
            await client.close()
            return text

        assert "rotate axis=(0,1,0)" in run_async(body())


class TestSteering:
    def test_rotating_command_rolls_robot(self):
        async def body():
            client = await make_client()
            ws = await client.ws_connect("/ws")
            await ws.send_str(json.dumps({
                "v": 1, "type": "set_rotating", "axis": [0, 1, 0],
                "strength_mt": 10, "freq_hz": 4,
            }))
            frames = await collect_frames(ws, 180)
            await ws.close()
            await client.close()
            return frames

        frames = run_async(body())
        x0 = frames[5]["position"][0]
        x1 = frames[-1]["position"][0]
        assert x1 > x0 + 0.005
        assert any(f["mode"] == "rolling" for f in frames[60:])
        assert frames[-1]["field"]["type"] == "set_rotating"

    def test_latest_wins_for_continuous(self):
        async def body():
            client = await make_client()
            ws = await client.ws_connect("/ws")
            for freq in (4, 9):
                await ws.send_str(json.dumps({
                    "v": 1, "type": "set_rotating", "axis": [0, 1, 0],
                    "strength_mt": 10, "freq_hz": freq,
                }))
            frames = await collect_frames(ws, 10)
            await ws.close()
            await client.close()
            return frames

        frames = run_async(body())
        assert frames[-1]["field"]["freq_hz"] == 9

    def test_pump_increments_dose(self):
        async def body():
            client = await make_client(PUMP_SCENARIO, time_scale=10.0)
            ws = await client.ws_connect("/ws")
            await ws.send_str(json.dumps({
                "v": 1, "type": "pump", "cycles": 2, "strength_mt": 200,
            }))
            async def wait_doses():
                while True:
                    msg = await ws.receive_json()
                    if msg.get("type") == "frame" and msg["dose_delivered"] > 0 and msg["fold_s"] < 0.05:
                        if msg["field"] is not None:
                            return msg
            frame = await asyncio.wait_for(wait_doses(), 90.0)
            await ws.close()
            await client.close()
            return frame

        frame = run_async(body())
        assert frame["dose_delivered"] > 0

    def test_pause_freezes_resume_continues(self):
        async def body():
            client = await make_client()
            ws = await client.ws_connect("/ws")
            await ws.send_str(json.dumps({"v": 1, "type": "pause"}))
            # wait until the pause has visibly taken effect, then sample
            async def until_paused():
                while True:
                    msg = await ws.receive_json()
                    if msg.get("type") == "frame" and msg["paused"]:
                        return
            await asyncio.wait_for(until_paused(), 10.0)
            frames = await collect_frames(ws, 10)
            t_paused = {f["t"] for f in frames}
            await ws.send_str(json.dumps({"v": 1, "type": "resume"}))
            frames2 = await collect_frames(ws, 12)
            await ws.close()
            await client.close()
            return t_paused, [f["t"] for f in frames2]

        t_paused, t_resumed = run_async(body())
        assert len(t_paused) == 1  # no state changes while paused
        assert t_resumed[-1] > t_resumed[0]

    def test_malformed_command_disconnects_only_that_client(self):
        async def body():
            client = await make_client()
            ws_bad = await client.ws_connect("/ws")
            ws_good = await client.ws_connect("/ws")
            await ws_bad.send_str("not json at all")
            # the error frame is interleaved with broadcast frames
            async def until_error():
                while True:
                    msg = await ws_bad.receive_json()
                    if msg.get("type") == "error":
                        return msg
            err = await asyncio.wait_for(until_error(), 10.0)
            async def until_closed():
                while True:
                    m = await ws_bad.receive()
                    if m.type.name in ("CLOSE", "CLOSING", "CLOSED"):
                        return m
            closed = await asyncio.wait_for(until_closed(), 10.0)
            # good client keeps receiving frames
            frames = await collect_frames(ws_good, 5)
            health = await (await client.get("/health")).json()
            await ws_good.close()
            await client.close()
            return err, closed.type.name, len(frames), health

        err, close_type, n_frames, health = run_async(body())
        assert err["type"] == "error"
        assert close_type in ("CLOSE", "CLOSING", "CLOSED")
        assert n_frames == 5
        assert health["status"] == "running"


class TestParseCommand:
    def test_valid_rotating(self):
        cmd = parse_command(json.dumps({
            "v": 1, "type": "set_rotating", "axis": [0, 1, 0],
            "strength_mt": 10, "freq_hz": 4,
        }))
        assert cmd["type"] == "set_rotating"
        assert cmd["strength"] == pytest.approx(0.01)

    @pytest.mark.parametrize("bad", [
        {"type": "set_rotating", "axis": [0, 1, 0], "strength_mt": 10, "freq_hz": 4},  # no v
        {"v": 1, "type": "set_rotating", "axis": [0, 0, 0], "strength_mt": 10, "freq_hz": 4},
        {"v": 1, "type": "set_rotating", "axis": [0, 1, 0], "strength_mt": 999, "freq_hz": 4},
        {"v": 1, "type": "pulse", "dir": [0, 0, 1], "strength_mt": 40, "duration_ms": 5000},
        {"v": 1, "type": "warp"},
    ])
    def test_invalid_commands_rejected(self, bad):
        with pytest.raises(ValueError):
            parse_command(json.dumps(bad))
