#!/usr/bin/env python3
"""Drive a trial through the websocket protocol with a scripted player.

Boots the steering server on a free port, connects as a 'hull' mode
client, and plays the crudest possible strategy: every tick, press the
compass key pointing from the object to the goal.  The object's pose is
in every state frame regardless of mode; what the client knows about the
swarm itself (here: just its convex hull) is decided server-side.
"""
import asyncio
import json

import websockets.asyncio.client as wsc

from swarmpush.scenarios import make_scenario
from swarmpush.server import start_server


async def main():
    scenario = make_scenario("open-box")
    goal = scenario.config.object.goal
    server, store = await start_server(scenario, port=0,
                                       max_time=90.0, tick_hz=240.0)
    port = server.sockets[0].getsockname()[1]

    async with wsc.connect(f"ws://127.0.0.1:{port}") as ws:
        await ws.send(json.dumps({"type": "hello", "mode": "hull",
                                  "scenario": "open-box"}))
        welcome = json.loads(await ws.recv())
        print("welcome:", welcome["scenario"], "goal at", welcome["world"]["goal"])

        import math
        while True:
            frame = json.loads(await ws.recv())
            if frame["type"] == "result":
                print("result: success=%s  time=%.1f s  beats %.0f%% of history"
                      % (frame["success"], frame["completion_time_s"],
                         frame["percentile_vs_history"]))
                break
            ox, oy = frame["object"][:2]
            bearing = math.atan2(goal[1] - oy, goal[0] - ox)
            key = round(bearing / (math.pi / 4)) % 8
            await ws.send(json.dumps({"type": "input",
                                      "tick": frame["tick"],
                                      "direction": int(key)}))
            if frame["tick"] % 30 == 0:
                print("  t=%5.1f s  object (%.2f, %.2f)  hull pts %d"
                      % (frame["elapsed_s"], ox, oy, len(frame["hull"])))

    server.close()
    await server.wait_closed()
    rec = store.saved[-1]
    print("server recorded: method=%s success=%s steps=%d"
          % (rec.method, rec.success, rec.steps))


asyncio.run(main())
