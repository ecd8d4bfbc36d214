"""
Volumes, hull ratios and the single-impact functional
=====================================================
"""

import math

from zerodrag.bodies import triangle_pair_profile
from zerodrag.metrics import NewtonProfile, newton_functional, shape_metrics

m = shape_metrics(triangle_pair_profile(math.pi / 6))
print(f"volume={m.volume:.12f} (10 pi/9 = {10 * math.pi / 9:.12f})")
print(f"kappa={m.kappa:.12f} h={m.h:.12f}")

for a in (0.01, 0.3, 0.6, 0.75):
    print(f"alpha={a:.2f} kappa={shape_metrics(triangle_pair_profile(a)).kappa:.4f}")

# if every particle reflects once, resistance depends only on the slope
print("flat disk", newton_functional(NewtonProfile(lambda r: 0 * r)), "vs", math.pi)
print("unit cone", newton_functional(NewtonProfile(lambda r: 1 - r)), "vs", math.pi / 2)
