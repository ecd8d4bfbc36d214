"""
Trapezium pairs and the channel between them
============================================

Trapezia with slant sides at angle alpha keep turning a particle by
2*alpha per bounce until it is almost horizontal, send it through a
vertical channel, then straighten it out on the way down.  The channel
width r(alpha) is chosen so the unfolded path just touches the outer walls.
"""

import math

import numpy as np

from zerodrag.billiard import trace_particle, velocity_angles
from zerodrag.bodies import (inner_ratio, profile_to_walls, tangency_distance,
                             trapezoid_pair_profile)
from zerodrag.metrics import shape_metrics

for n in (6, 8, 10, 14):
    a = math.pi / n
    print(f"alpha=pi/{n:<2d} r={inner_ratio(a):.6f} "
          f"tangency={tangency_distance(trapezoid_pair_profile(a, 1)):.12f}")

alpha, k = math.pi / 10, 3
body = trapezoid_pair_profile(alpha, k)
t = trace_particle(profile_to_walls(body), -0.97)
steps = np.round(velocity_angles(t) / (2 * alpha)).astype(int)
print(f"x0=-0.97 bounces={t.m}, angle in units of 2 alpha:", steps.tolist())

# the hull ratio grows towards 1 when k follows floor(1/alpha)
for a in (0.3, 0.2, 0.1, 0.05):
    k = math.floor(1 / a)
    print(f"alpha={a:.2f} k={k:2d} kappa={shape_metrics(trapezoid_pair_profile(a, k)).kappa:.4f}")
