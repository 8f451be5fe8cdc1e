"""Teleoperation server: a live simulation loop driven by operator field
commands over a websocket, streaming state frames back.

Endpoints:
    GET /health    loop status JSON
    GET /scenario  the active scenario text
    WS  /ws        full-duplex JSON messages, one per frame/command

All messages carry ``"v": 1``. Client commands: set_rotating, pulse, pump,
field_off, reset, pause, resume. Continuous commands collapse latest-wins;
discrete actions (pulse, pump) queue FIFO. One loop task owns the simulation
state; clients only ever see immutable snapshots.
"""

from __future__ import annotations

import asyncio
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
from aiohttp import WSMsgType, web

from .errors import ScenarioParseError
from .folding import FoldState
from .magnetics import FieldCommand
from .scenario.dsl import parse_scenario
from .scenario.run import build_engine
from .engine.classify import ModeTracker

FRAME_RATE = 60.0
PROTOCOL_VERSION = 1

LOOP_KEY = web.AppKey("loop", object)
CLIENTS_KEY = web.AppKey("clients", set)
TASK_KEY = web.AppKey("loop_task", object)


def _unit(vec, what: str) -> np.ndarray:
    v = np.asarray(vec, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{what} must be a 3-vector")
    n = float(np.linalg.norm(v))
    if n <= 0 or not math.isfinite(n):
        raise ValueError(f"{what} must be non-zero and finite")
    return v / n


def parse_command(raw: str) -> dict:
    """Validate one client message; raises ValueError on protocol violations."""
    msg = json.loads(raw)
    if not isinstance(msg, dict):
        raise ValueError("command must be a JSON object")
    if msg.get("v") != PROTOCOL_VERSION:
        raise ValueError(f"unsupported protocol version {msg.get('v')!r}")
    kind = msg.get("type")
    if kind == "set_rotating":
        axis = _unit(msg.get("axis"), "axis")
        strength = float(msg.get("strength_mt", 0.0))
        freq = float(msg.get("freq_hz", 0.0))
        if not 0 <= strength <= 200:
            raise ValueError("strength_mt out of range [0, 200]")
        if not 0 <= freq <= 100:
            raise ValueError("freq_hz out of range [0, 100]")
        return {"type": kind, "axis": axis, "strength": strength * 1e-3, "freq": freq}
    if kind == "pulse":
        direction = _unit(msg.get("dir"), "dir")
        strength = float(msg.get("strength_mt", 0.0))
        duration = float(msg.get("duration_ms", 30.0)) * 1e-3
        if not 0 < strength <= 200:
            raise ValueError("strength_mt out of range (0, 200]")
        if not 0 < duration <= 1.0:
            raise ValueError("duration_ms out of range (0, 1000]")
        return {"type": kind, "dir": direction, "strength": strength * 1e-3,
                "duration": duration}
    if kind == "pump":
        cycles = int(msg.get("cycles", 1))
        strength = float(msg.get("strength_mt", 200.0))
        if not 1 <= cycles <= 20:
            raise ValueError("cycles out of range [1, 20]")
        return {"type": kind, "cycles": cycles, "strength": strength * 1e-3}
    if kind in ("field_off", "pause", "resume"):
        return {"type": kind}
    if kind == "reset":
        return {"type": kind, "scenario": msg.get("scenario", "")}
    raise ValueError(f"unknown command type {kind!r}")


@dataclass
class TeleopLoop:
    """Owns the engine and its command state; single writer."""

    scenario_text: str
    time_scale: float = 1.0
    paused: bool = False
    continuous: FieldCommand = field(default_factory=FieldCommand.off)
    discrete: list = field(default_factory=list)  # FIFO of pulse/pump actions
    active_echo: dict = field(default_factory=lambda: {"type": "field_off"})
    _pulse_until: float = 0.0
    _pump_state: dict | None = None

    def __post_init__(self):
        self.scenario = parse_scenario(self.scenario_text)
        self.engine = build_engine(self.scenario)
        self.tracker = ModeTracker()
        self.mode = "rest"
        for _ in range(3000):
            self.engine.step(FieldCommand.off(), 0.0)
        self.engine.state.t = 0.0
        self._sample_countdown = 0

    def apply(self, cmd: dict) -> None:
        kind = cmd["type"]
        if kind == "set_rotating":
            self.continuous = FieldCommand.rotating(cmd["axis"], cmd["strength"], cmd["freq"])
            self.active_echo = {"type": kind, "axis": list(map(float, cmd["axis"])),
                                "strength_mt": cmd["strength"] * 1e3, "freq_hz": cmd["freq"]}
        elif kind == "field_off":
            self.continuous = FieldCommand.off()
            self.active_echo = {"type": kind}
        elif kind in ("pulse", "pump"):
            self.discrete.append(cmd)
        elif kind == "pause":
            self.paused = True
        elif kind == "resume":
            self.paused = False
        elif kind == "reset":
            self.engine = build_engine(self.scenario)
            self.tracker = ModeTracker()
            self.mode = "rest"
            self.continuous = FieldCommand.off()
            self.discrete.clear()
            self._pump_state = None
            self._pulse_until = 0.0
            for _ in range(3000):
                self.engine.step(FieldCommand.off(), 0.0)
            self.engine.state.t = 0.0

    def _current_command(self) -> tuple[FieldCommand, float]:
        """Resolve the active field for this tick: pulses and pump cycles
        preempt the continuous steering command."""
        eng = self.engine
        t = eng.state.t
        if self._pump_state is not None:
            ps = self._pump_state
            if ps["phase"] == "fold":
                if eng.state.fold.s >= 0.9 or t > ps["deadline"]:
                    ps["phase"] = "release"
                    ps["deadline"] = t + 5.0
                    return FieldCommand.off(), 0.0
                return ps["cmd"], 0.0
            if eng.state.fold.s <= 0.05 or t > ps["deadline"]:
                ps["cycles"] -= 1
                if ps["cycles"] <= 0:
                    self._pump_state = None
                else:
                    ps["phase"] = "fold"
                    ps["deadline"] = t + 3.0
                    m_net = eng.magnetization_world()
                    direction = m_net / np.linalg.norm(m_net)
                    ps["cmd"] = FieldCommand.pulse(direction, ps["strength"], 1e9)
                return FieldCommand.off(), 0.0
            return FieldCommand.off(), 0.0
        if t < self._pulse_until:
            return self._pulse_cmd, 0.0
        if self.discrete:
            action = self.discrete.pop(0)
            if action["type"] == "pulse":
                self._pulse_cmd = FieldCommand.pulse(action["dir"], action["strength"], 1e9)
                self._pulse_until = t + action["duration"]
                return self._pulse_cmd, 0.0
            m_net = eng.magnetization_world()
            direction = m_net / np.linalg.norm(m_net)
            self._pump_state = {
                "phase": "fold", "cycles": action["cycles"], "strength": action["strength"],
                "deadline": t + 3.0,
                "cmd": FieldCommand.pulse(direction, action["strength"], 1e9),
            }
            return self._pump_state["cmd"], 0.0
        return self.continuous, t

    def advance(self, sim_time: float) -> None:
        """Advance the simulation by sim_time seconds."""
        if self.paused:
            return
        eng = self.engine
        steps = max(1, int(round(sim_time / eng.sim.dt)))
        for _ in range(steps):
            cmd, t_seg = self._current_command()
            eng.step(cmd, t_seg)
            self._sample_countdown -= 1
            if self._sample_countdown <= 0:
                self._sample_countdown = max(1, int(round(1.0 / (eng.sim.sample_rate * eng.sim.dt))))
                st = eng.state
                self.mode = self.tracker.push(st.omega, st.axis_world(), st.contact,
                                              st.submerged_fraction > 0.5)

    def frame(self) -> dict:
        st = self.engine.state
        return {
            "v": PROTOCOL_VERSION,
            "type": "frame",
            "t": round(st.t, 6),
            "position": [float(x) for x in st.position],
            "orientation": [float(q) for q in st.quat],
            "fold_s": st.fold.s,
            "mode": self.mode,
            "dose_delivered": st.fold.dose_delivered,
            "bubble_volume": st.bubble_volume,
            "cargo_attached": bool(st.cargo_attached),
            "paused": self.paused,
            "field": self.active_echo,
        }


async def _run_loop(app: web.Application) -> None:
    loop: TeleopLoop = app[LOOP_KEY]
    interval = 1.0 / FRAME_RATE
    try:
        while True:
            t0 = time.monotonic()
            loop.advance(interval * loop.time_scale)
            frame = json.dumps(loop.frame())
            dead = []
            for ws in app[CLIENTS_KEY]:
                try:
                    await ws.send_str(frame)
                except (ConnectionResetError, RuntimeError):
                    dead.append(ws)
            for ws in dead:
                app[CLIENTS_KEY].discard(ws)
            elapsed = time.monotonic() - t0
            await asyncio.sleep(max(0.0, interval - elapsed))
    except asyncio.CancelledError:
        pass


async def _ws_handler(request: web.Request) -> web.WebSocketResponse:
    ws = web.WebSocketResponse()
    await ws.prepare(request)
    app = request.app
    app[CLIENTS_KEY].add(ws)
    loop: TeleopLoop = app[LOOP_KEY]
    try:
        async for msg in ws:
            if msg.type == WSMsgType.TEXT:
                try:
                    cmd = parse_command(msg.data)
                except (ValueError, json.JSONDecodeError) as exc:
                    await ws.send_str(json.dumps(
                        {"v": PROTOCOL_VERSION, "type": "error", "message": str(exc)}))
                    await ws.close(code=1008, message=b"protocol violation")
                    break
                loop.apply(cmd)
                await ws.send_str(json.dumps(
                    {"v": PROTOCOL_VERSION, "type": "ack", "command": cmd["type"]}))
            elif msg.type == WSMsgType.ERROR:
                break
    finally:
        app[CLIENTS_KEY].discard(ws)
    return ws


async def _health(request: web.Request) -> web.Response:
    loop: TeleopLoop = request.app[LOOP_KEY]
    return web.json_response({
        "v": PROTOCOL_VERSION,
        "status": "paused" if loop.paused else "running",
        "t": loop.engine.state.t,
        "clients": len(request.app[CLIENTS_KEY]),
        "mode": loop.mode,
        "time_scale": loop.time_scale,
    })


async def _scenario_text(request: web.Request) -> web.Response:
    return web.Response(text=request.app[LOOP_KEY].scenario_text, content_type="text/plain")


def make_app(scenario_text: str, time_scale: float = 1.0,
             static_dir: str | None = None) -> web.Application:
    loop = TeleopLoop(scenario_text=scenario_text, time_scale=time_scale)
    app = web.Application()
    app[LOOP_KEY] = loop
    app[CLIENTS_KEY] = set()
    app.router.add_get("/ws", _ws_handler)
    app.router.add_get("/health", _health)
    app.router.add_get("/scenario", _scenario_text)
    if static_dir:
        app.router.add_static("/", static_dir, show_index=True)

    async def start_loop(app_):
        app_[TASK_KEY] = asyncio.create_task(_run_loop(app_))

    async def stop_loop(app_):
        app_[TASK_KEY].cancel()
        await asyncio.gather(app_[TASK_KEY], return_exceptions=True)

    app.on_startup.append(start_loop)
    app.on_cleanup.append(stop_loop)
    return app


def serve(scenario_text: str, host: str = "127.0.0.1", port: int = 8355,
          time_scale: float = 1.0, static_dir: str | None = None) -> None:
    """Blocking entry point used by the CLI."""
    app = make_app(scenario_text, time_scale=time_scale, static_dir=static_dir)
    print(f"teleop server on http://{host}:{port}  (ws: /ws, health: /health)")
    web.run_app(app, host=host, port=port, print=None)
