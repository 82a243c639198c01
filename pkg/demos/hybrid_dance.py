#!/usr/bin/env python3
"""Hold three waypoints under heavy noise with the mean/variance switcher.

The mean is easy to steer; the variance only ever grows in open space.  So
the hybrid controller tracks a target until the spread tops its threshold,
then retargets the offending axis to the nearest wall, squeezes the crowd
flat, and goes back to tracking.  The printout shows every mode switch.
"""
import numpy as np

import swarmpush as sp
from swarmpush.control import (Gains, HybridState, MEAN_CONTROL, hybrid_step)
from swarmpush.stats import summarize

cfg = sp.WorldConfig(width=2.4, height=1.8, particle_count=100,
                     noise_magnitude=0.6)
rng = np.random.default_rng(1)
state = sp.spawn(cfg, sp.Rect(0.9, 0.6, 1.5, 1.2), rng=rng)
gains = Gains(4.0, 1.0)
thresholds = (0.021, 0.060)
targets = [(0.6, 0.5), (1.8, 1.3), (1.2, 0.9)]

hs = HybridState(goal=targets[0])
label = lambda h: (("x" if h.mode_x != MEAN_CONTROL else "-")
                   + ("y" if h.mode_y != MEAN_CONTROL else "-"))
prev = label(hs)
print("t(s)   event                          mean           max var")
for ti, target in enumerate(targets):
    print("%6.1f target %d -> (%.1f, %.1f)" % (state.time, ti, *target))
    t_end = state.time + 40.0
    reached = None
    while state.time < t_end:
        summary = summarize(state.positions, state.velocities)
        hs, u = hybrid_step(hs, summary, target, thresholds, cfg, gains)
        now = label(hs)
        if now != prev:
            what = "squeeze " + now if now != "--" else "track again"
            print("%6.1f   %-28s (%.2f, %.2f)  %.4f"
                  % (state.time, what, summary.mean[0], summary.mean[1],
                     max(summary.variance)))
            prev = now
        err = np.hypot(summary.mean[0] - target[0],
                       summary.mean[1] - target[1])
        if reached is None and now == "--" and err < 0.05:
            reached = state.time
            print("%6.1f   on target (err %.3f m)" % (state.time, err))
        state = sp.step(cfg, state, u, rng)
    if reached is None:
        print("        never settled on this target")
print("%6.1f done" % state.time)
