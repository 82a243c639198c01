#!/usr/bin/env python3
"""Leave the swarm alone and watch its spread hit the uniform ceiling.

With zero input the disturbance performs a random walk on every particle,
so the position variance grows linearly -- until the walls stop it.  The
stationary distribution is uniform across the box, whose per-axis variance
is (l - 2r)^2 / 12.  Both axes of a rectangular box find their own ceiling.
"""
import numpy as np

import swarmpush as sp

cfg = sp.WorldConfig(width=1.0, height=0.8, particle_count=100,
                     noise_magnitude=0.6)
rng = np.random.default_rng(0)
state = sp.spawn(cfg, sp.Rect(0.3, 0.2, 0.7, 0.6), rng=rng)

tx = (cfg.width - 2 * cfg.particle_radius) ** 2 / 12
ty = (cfg.height - 2 * cfg.particle_radius) ** 2 / 12
print("uniform-box targets: var_x %.4f   var_y %.4f" % (tx, ty))
print("\n   t(s)    var_x             var_y")

hold = sp.ControlInput(0.0, 0.0)
for k in range(240 * 60):
    state = sp.step(cfg, state, hold, rng)
    if k % 720 == 0:
        vx, vy = state.positions.var(axis=0)
        bx = "=" * min(18, int(round(16 * vx / tx)))
        by = "=" * min(18, int(round(16 * vy / ty)))
        print("  %5.0f   %.4f %-19s %.4f %s"
              % (state.time, vx, "|" + bx, vy, "|" + by))

vx, vy = state.positions.var(axis=0)
print("\nfinal: var_x %.4f (%.0f%% of target)   var_y %.4f (%.0f%%)"
      % (vx, 100 * vx / tx, vy, 100 * vy / ty))
