#!/usr/bin/env python3
"""Command the swarm mean one metre to the right and watch it settle.

A hundred particles share a single global force, so the only thing a PD
law can regulate is the crowd's mean.  With kp=4, kd=1 and the engine's
linear drag the closed loop is underdamped at about zeta = 0.75: a couple
of percent of overshoot and a rise time just over a second.
"""
import numpy as np

import swarmpush as sp
from swarmpush.control import Gains, mean_pd
from swarmpush.stats import summarize

cfg = sp.WorldConfig(width=2.4, height=1.8, particle_count=100,
                     noise_magnitude=0.3)
rng = np.random.default_rng(0)
state = sp.spawn(cfg, sp.Rect(0.25, 0.55, 0.75, 1.25), rng=rng)
start = summarize(state.positions).mean.copy()
goal = (start[0] + 1.2, start[1])
gains = Gains(kp=4.0, kd=1.0)

times, xs = [], []
for _ in range(8 * 60):
    summary = summarize(state.positions, state.velocities)
    u = mean_pd(summary, goal, gains, cfg.max_force)
    state = sp.step(cfg, state, u, rng)
    times.append(state.time)
    xs.append(summarize(state.positions).mean[0])

resp = (np.array(xs) - start[0]) / (goal[0] - start[0])
i10 = int(np.argmax(resp >= 0.1))
i90 = int(np.argmax(resp >= 0.9))

print("step of %.2f m along x, kp=%.0f kd=%.0f" % (goal[0] - start[0],
                                                   gains.kp, gains.kd))
print("overshoot  %5.2f %%" % (100.0 * (resp.max() - 1.0)))
print("rise 10-90 %5.2f s" % (times[i90] - times[i10]))
print("final err  %6.4f m" % abs(xs[-1] - goal[0]))

# coarse trace, one row per fifth of a second
print("\n   t(s)  response")
for k in range(0, len(resp), 12):
    bar = "#" * int(round(40 * max(resp[k], 0.0)))
    print("  %5.2f  |%-44s| %.3f" % (times[k], bar, resp[k]))
