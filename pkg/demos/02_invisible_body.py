"""
Doubling a body to make it invisible
====================================

The triangle pair moves each particle sideways.  Stacking a mirrored copy
underneath moves it back, so every particle leaves on the line it came in
on.  An observer looking along the flow sees nothing.
"""

import math

from zerodrag.billiard import SimConfig
from zerodrag.bodies import double_profile, trapezoid_pair_profile, triangle_pair_profile
from zerodrag.verify import SamplingPlan, check_invisible, max_reflections

plan = SamplingPlan(10_000)
single = triangle_pair_profile(math.pi / 6)
print("single pair invisible?", check_invisible(single, plan).passed)

for body in (double_profile(single), double_profile(trapezoid_pair_profile(math.pi / 10, 2))):
    down = check_invisible(body, plan)
    up = check_invisible(body, plan, SimConfig().reversed())
    stats = max_reflections(body, plan)
    print(f"{body.params.inner.family:15s} down={down.passed} up={up.passed} "
          f"position error={down.max_position_deviation:.1e} "
          f"m_max={stats.m_max} all counts even={stats.parity_ok}")
