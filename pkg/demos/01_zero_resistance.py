"""
A body that feels no push from a falling flow
=============================================

Two triangles placed back to back turn every particle that hits them by an
angle and then straighten it out again.  Nothing changes direction on the
way out, so the momentum handed to the body adds up to zero.
"""

import math

from zerodrag.billiard import trace_particle
from zerodrag.bodies import cylinder_profile, profile_to_walls, triangle_pair_profile
from zerodrag.io import render_svg
from zerodrag.verify import SamplingPlan, check_zero_resistance, resistance

alpha = math.pi / 6
body = triangle_pair_profile(alpha)
walls = profile_to_walls(body)

# a particle near the axis slips between the triangles, one near the rim
# bounces twice and leaves shifted sideways by tan(2 alpha)
for x0 in (0.3, -0.9):
    t = trace_particle(walls, x0)
    print(f"x0={x0:+.2f}  reflections={t.m}  exit offset={t.outcome.x_tilde:+.6f}")

# integrate over the whole cross-section of the flow
plan = SamplingPlan(10_000)
r = resistance(body, plan)
print(f"axial resistance {r.R_axial:.2e} (hull cross-section {r.normalization:.3f})")
print("zero resistance:", check_zero_resistance(body, plan).passed)

# compare with a cylinder of the same radius, which bounces everything back
print(f"cylinder resistance {resistance(cylinder_profile(), plan).R_axial:.6f}")

with open("triangle_pair.svg", "w") as fh:
    fh.write(render_svg(body, [trace_particle(walls, x) for x in (-1.0, -0.8, 0.3, 0.95)]))
