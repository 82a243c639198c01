"""Live steerable sessions over a websocket, one per connection.

The server owns all physics.  A client says hello, picks one of the four
visual-feedback modes, and from then on receives exactly one ``state``
frame per tick (30 Hz, two physics steps each) whose payload is filtered
to the chosen mode: every particle position in ``full`` mode, hull
vertices in ``hull``, the mean alone in ``mean``, mean plus covariance in
``meanvar``.  Nothing else about the swarm ever crosses the wire, so the
feedback condition of a trial is enforced here rather than trusted to
the client.

Client inputs are a shared global force; a frame received during one
tick applies from the next.  Completion, timeout, restart, disconnect,
and malformed traffic all end with a persisted trial record, so every
session accounts for some outcome.
"""
from __future__ import annotations

import asyncio
import itertools
import json
import time
import uuid
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .control import ControlInput
from .records import TrialRecord, config_digest, save_record, state_digest
from .scenarios import Scenario, default_spawn_region
from .stats import summarize
from .world import spawn, step

MODES = ("full", "hull", "mean", "meanvar")
TICK_HZ = 30.0
STEPS_PER_TICK = 2  # physics at 60 Hz, frames at 30

# planner-order compass directions for keyed input
_DX = (1, 1, 0, -1, -1, -1, 0, 1)
_DY = (0, 1, 1, 1, 0, -1, -1, -1)


class ProtocolError(Exception):
    pass


@dataclass
class Session:
    """One human trial: seeded world, input log, outcome."""

    scenario: Scenario
    seed: int
    participant: str
    mode: str
    max_time: float
    state: object = None
    rng: object = None
    pending: ControlInput = field(default_factory=lambda: ControlInput(0, 0))
    log: list = field(default_factory=list)
    tick: int = 0
    t_start: float = field(default_factory=time.perf_counter)

    def __post_init__(self):
        self.rng = np.random.default_rng(self.seed)
        self.state = spawn(self.scenario.config,
                           region=default_spawn_region(self.scenario.config),
                           rng=self.rng)

    def apply_input(self, msg: dict) -> None:
        world = self.scenario.config
        if "direction" in msg:
            d = msg["direction"]
            if not isinstance(d, int) or not 0 <= d <= 7:
                raise ProtocolError("direction must be an integer 0..7")
            n = float(np.hypot(_DX[d], _DY[d]))
            self.pending = ControlInput(world.max_force * _DX[d] / n,
                                        world.max_force * _DY[d] / n)
        elif "force" in msg:
            f = msg["force"]
            if (not isinstance(f, (list, tuple)) or len(f) != 2
                    or not all(isinstance(v, (int, float)) for v in f)):
                raise ProtocolError("force must be [fx, fy]")
            self.pending = ControlInput(float(f[0]),
                                        float(f[1])).clamped(world.max_force)
        else:
            raise ProtocolError("input needs a direction or a force")

    def advance(self) -> bool:
        """Two physics steps under the pending input; True when at goal."""
        world = self.scenario.config
        for _ in range(STEPS_PER_TICK):
            if self._at_goal():
                return True
            self.log.append([self.pending.fx, self.pending.fy])
            self.state = step(world, self.state, self.pending, self.rng)
        self.tick += 1
        return self._at_goal()

    def _at_goal(self) -> bool:
        obj = self.scenario.config.object
        com = self.state.object_pose[:2]
        return float(np.hypot(com[0] - obj.goal[0],
                              com[1] - obj.goal[1])) < obj.goal_radius

    def timed_out(self) -> bool:
        return self.state.time >= self.max_time - 1e-9

    def state_frame(self) -> dict:
        summary = summarize(self.state.positions, self.state.velocities)
        frame = {
            "type": "state",
            "tick": self.tick,
            "elapsed_s": round(float(self.state.time), 4),
            "object": [round(float(v), 4) for v in self.state.object_pose],
        }
        if self.mode == "full":
            frame["particles"] = np.round(
                self.state.positions, 4).tolist()
        elif self.mode == "hull":
            frame["hull"] = np.round(np.asarray(summary.hull), 4).tolist()
        elif self.mode == "mean":
            frame["mean"] = np.round(np.asarray(summary.mean), 4).tolist()
        else:  # meanvar
            frame["mean"] = np.round(np.asarray(summary.mean), 4).tolist()
            frame["covariance"] = np.round(
                np.asarray(summary.covariance), 6).tolist()
        return frame

    def record(self, success: bool) -> TrialRecord:
        world = self.scenario.config
        summary = summarize(self.state.positions, self.state.velocities)
        region = default_spawn_region(world)
        return TrialRecord(
            scenario_digest=config_digest(world),
            config=world.to_dict(),
            method=f"human/{self.mode}",
            seed=self.seed,
            success=success,
            completion_time_s=float(self.state.time) if success
            else float(self.max_time),
            wall_time_s=time.perf_counter() - self.t_start,
            steps=len(self.log),
            final_summary={
                "mean": [float(summary.mean[0]), float(summary.mean[1])],
                "variance": [float(summary.variance[0]),
                             float(summary.variance[1])],
                "count_used": int(summary.count_used),
            },
            final_digest=state_digest(self.state),
            input_log=self.log,
            spawn_region=[region.xmin, region.ymin,
                          region.xmax, region.ymax],
            participant=self.participant,
        )


class RecordStore:
    """Append-only store of session records with serialized writes."""

    def __init__(self, directory: Optional[str]):
        self.directory = directory
        self.lock = asyncio.Lock()
        self.history: list = []  # completion times of successful trials
        self.saved: list = []

    async def persist(self, rec: TrialRecord) -> None:
        async with self.lock:
            if rec.success:
                self.history.append(rec.completion_time_s)
            self.saved.append(rec)
            if self.directory is not None:
                name = f"{rec.participant}-{len(self.saved):04d}.json"
                path = f"{self.directory}/{name}"
                save_record(rec, path)

    def percentile(self, completion_time_s: float) -> float:
        """Share of past successful trials this time beats or ties."""
        if not self.history:
            return 100.0
        beaten = sum(1 for t in self.history if t >= completion_time_s)
        return round(100.0 * beaten / len(self.history), 1)


def _welcome(scenario: Scenario, participant: str, max_time: float) -> dict:
    world = scenario.config
    obj = world.object
    shape = world.shape()
    return {
        "type": "welcome",
        "participant": participant,
        "scenario": scenario.maze_id,
        "tick_hz": TICK_HZ,
        "max_time_s": max_time,
        "world": {
            "width": world.width,
            "height": world.height,
            "particle_radius": world.particle_radius,
            "obstacles": [[o.xmin, o.ymin, o.xmax, o.ymax]
                          for o in world.obstacles],
            "goal": list(obj.goal),
            "goal_radius": obj.goal_radius,
            "object_hull": np.round(np.asarray(shape.hull), 4).tolist(),
        },
    }


async def _parse(raw) -> dict:
    try:
        msg = json.loads(raw)
    except (TypeError, ValueError):
        raise ProtocolError("frames must be JSON text")
    if not isinstance(msg, dict) or "type" not in msg:
        raise ProtocolError("frames must be objects with a type")
    return msg


async def handle_connection(ws, scenario: Scenario, store: RecordStore,
                            max_time: float, tick_hz: float,
                            seed_counter) -> None:
    participant = uuid.uuid4().hex[:8]
    session: Optional[Session] = None
    try:
        raw = await ws.recv()
        hello = await _parse(raw)
        if hello.get("type") != "hello":
            raise ProtocolError("first frame must be hello")
        mode = hello.get("mode")
        if mode not in MODES:
            raise ProtocolError(f"mode must be one of {', '.join(MODES)}")
        want = hello.get("scenario")
        if want is not None and want != scenario.maze_id:
            raise ProtocolError(f"server is running {scenario.maze_id}")

        session = Session(scenario, next(seed_counter), participant,
                          mode, max_time)
        await ws.send(json.dumps(_welcome(scenario, participant, max_time)))

        inbox: asyncio.Queue = asyncio.Queue()

        async def reader():
            # sentinels let the tick loop see closes and bad frames
            # without ever blocking on a dead socket
            try:
                async for raw in ws:
                    try:
                        await inbox.put(await _parse(raw))
                    except ProtocolError as exc:
                        await inbox.put({"type": "_bad",
                                         "error": str(exc)})
                        return
            except Exception:
                pass
            finally:
                await inbox.put({"type": "_closed"})

        reader_task = asyncio.create_task(reader())
        period = 1.0 / tick_hz
        next_due = time.perf_counter()
        try:
            while True:
                # everything that arrived during the last tick applies now
                restart = False
                closed = False
                while not inbox.empty():
                    msg = inbox.get_nowait()
                    if msg["type"] == "input":
                        session.apply_input(msg)
                    elif msg["type"] == "restart":
                        restart = True
                    elif msg["type"] == "_closed":
                        closed = True
                    elif msg["type"] == "_bad":
                        raise ProtocolError(msg["error"])
                    else:
                        raise ProtocolError(
                            f"unexpected frame type {msg['type']!r}")
                if closed:
                    await store.persist(session.record(success=False))
                    session = None
                    return
                if restart:
                    await store.persist(session.record(success=False))
                    session = Session(scenario, next(seed_counter),
                                      participant, mode, max_time)
                    continue

                await ws.send(json.dumps(session.state_frame()))
                done = session.advance()
                if done or session.timed_out():
                    rec = session.record(success=done)
                    await store.persist(rec)
                    await ws.send(json.dumps({
                        "type": "result",
                        "success": done,
                        "completion_time_s":
                            round(rec.completion_time_s, 4),
                        "percentile_vs_history":
                            store.percentile(rec.completion_time_s)
                            if done else 0.0,
                    }))
                    session = None
                    # hold the line open for a restart frame
                    while True:
                        msg = await inbox.get()
                        if msg["type"] == "_closed":
                            return
                        if msg["type"] == "_bad":
                            raise ProtocolError(msg["error"])
                        if msg["type"] == "restart":
                            break
                        if msg["type"] != "input":  # stale inputs are fine
                            raise ProtocolError(
                                "expected restart after result")
                    session = Session(scenario, next(seed_counter),
                                      participant, mode, max_time)
                    continue

                next_due += period
                delay = next_due - time.perf_counter()
                if delay > 0:
                    await asyncio.sleep(delay)
                else:
                    next_due = time.perf_counter()
        finally:
            reader_task.cancel()
    except ProtocolError as exc:
        if session is not None:
            await store.persist(session.record(success=False))
            session = None
        try:
            await ws.send(json.dumps({"type": "error", "error": str(exc)}))
        except Exception:
            pass
        await ws.close()
    except Exception:
        # covers disconnects mid-trial: the walk-away case still leaves
        # an abandonment record behind
        if session is not None:
            await store.persist(session.record(success=False))
            session = None


async def start_server(scenario: Scenario, *, host: str = "127.0.0.1",
                       port: int = 0, records_dir: Optional[str] = None,
                       max_time: float = 600.0, tick_hz: float = TICK_HZ,
                       seed_start: int = 0):
    """Bound server plus its record store (port 0 picks a free port)."""
    import websockets.asyncio.server as wss

    store = RecordStore(records_dir)
    if records_dir is not None:
        import os
        os.makedirs(records_dir, exist_ok=True)
    seeds = itertools.count(seed_start)

    async def _handler(ws):
        await handle_connection(ws, scenario, store, max_time,
                                tick_hz, seeds)

    server = await wss.serve(_handler, host, port)
    return server, store


def serve_forever(scenario: Scenario, *, host: str = "127.0.0.1",
                  port: int = 8765, records_dir: Optional[str] = "records",
                  max_time: float = 600.0, tick_hz: float = TICK_HZ,
                  ready=None) -> None:
    async def _main():
        server, _ = await start_server(scenario, host=host, port=port,
                                       records_dir=records_dir,
                                       max_time=max_time, tick_hz=tick_hz)
        if ready is not None:
            ready(server.sockets[0].getsockname()[1])
        await server.serve_forever()

    asyncio.run(_main())
