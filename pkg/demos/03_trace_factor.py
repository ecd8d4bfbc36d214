"""
Flat bodies are trackless, round ones are not
=============================================

In the plane the triangle pair only translates the reflected flow, so the
density behind the body is unchanged.  Rotated about the axis, the same
translation carries a thin outer ring onto a thick inner one and the density
doubles near the axis.
"""

import math

from zerodrag.bodies import triangle_pair_profile, triangle_radii
from zerodrag.verify import SamplingPlan, check_trackless

body = triangle_pair_profile(math.pi / 6)
flat = body.with_symmetry("translational", 1.0)

rep = check_trackless(flat, SamplingPlan(200_000, "uniform", seed=0))
print(f"translational: trackless={rep.passed} density ratio in "
      f"[{rep.density_ratio_range[0]:.3f}, {rep.density_ratio_range[1]:.3f}]")

# restrict the flow to the ring that actually hits the walls
L, c = triangle_radii(math.pi / 6)
rep = check_trackless(body, SamplingPlan(100_000, domain=((-L, -c), (c, L))))
print(f"rotational: trackless={rep.passed} innermost ratio "
      f"{rep.details['innermost_ratio']:.3f}, outermost {rep.details['outermost_ratio']:.3f}")
