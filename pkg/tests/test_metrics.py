import math

import numpy as np
import pytest

from zerodrag.bodies import (cone_profile, cylinder_profile, double_profile,
                             trapezoid_pair_profile, triangle_pair_profile)
from zerodrag.metrics import (NewtonProfile, hull_volume, newton_functional, shape_metrics,
                              sweep, triangle_pair_volume_formula, volume_of_solid)


def test_cylinder_and_cone_volumes():
    assert volume_of_solid(cylinder_profile(1, 2)) == pytest.approx(2 * math.pi, abs=1e-14)
    assert volume_of_solid(cone_profile()) == pytest.approx(math.pi / 3, abs=1e-14)
    m = shape_metrics(cone_profile())
    assert m.kappa == pytest.approx(1.0) and m.h == 1.0


def test_triangle_pair_closed_forms():
    m = shape_metrics(triangle_pair_profile(math.pi / 6))
    assert m.volume == pytest.approx(10 * math.pi / 9, abs=1e-12)
    assert m.kappa == pytest.approx(5 / 12, abs=1e-12)
    assert m.h == pytest.approx(math.sqrt(3), abs=1e-12)
    for a in np.linspace(0.01, 0.75, 30):
        assert volume_of_solid(triangle_pair_profile(a)) == pytest.approx(
            triangle_pair_volume_formula(a), rel=1e-12)


def test_kappa_limits():
    assert shape_metrics(triangle_pair_profile(0.01)).kappa == pytest.approx(14 / 27, abs=0.01)
    with pytest.warns(Warning):
        k = shape_metrics(triangle_pair_profile(math.pi / 4 - 1e-3)).kappa
    assert k < 0.01


@pytest.mark.filterwarnings("ignore")
def test_near_quarter_pi_asymptotics():
    # alpha = (pi - e)/4: kappa ~ e and h ~ 2e
    for e in (1e-3, 1e-4):
        m = shape_metrics(triangle_pair_profile((math.pi - e) / 4))
        assert m.kappa / e == pytest.approx(1.0, abs=2 * e)
        assert m.h / (2 * e) == pytest.approx(1.0, abs=e)
    small = shape_metrics(triangle_pair_profile(1e-4))
    assert small.h * 3e-4 / 4 == pytest.approx(1.0, abs=1e-3)


def test_doubled_body_has_twice_the_volume():
    p = trapezoid_pair_profile(math.pi / 10, 2)
    assert volume_of_solid(double_profile(p)) == pytest.approx(2 * volume_of_solid(p))
    assert volume_of_solid(double_profile(p, 0.3)) == pytest.approx(2 * volume_of_solid(p))
    assert hull_volume(double_profile(p)) > hull_volume(p)


def test_translational_volume():
    p = triangle_pair_profile(math.pi / 6).with_symmetry("translational", 2.0)
    assert volume_of_solid(p) == pytest.approx(4 * math.tan(math.pi / 6))


def test_trapezoid_kappa_grows_along_k_floor_path():
    ks = [shape_metrics(trapezoid_pair_profile(a, math.floor(1 / a))).kappa
          for a in (0.3, 0.2, 0.1, 0.05, 0.02)]
    assert all(b > a for a, b in zip(ks, ks[1:]))


def test_newton_functional_exact_cases():
    assert newton_functional(NewtonProfile(lambda r: 0 * r)) == pytest.approx(math.pi, abs=1e-6)
    assert newton_functional(NewtonProfile(lambda r: 1 - r)) == pytest.approx(math.pi / 2,
                                                                             abs=1e-6)
    sampled = NewtonProfile(np.linspace(1, 0, 11))
    assert newton_functional(sampled) == pytest.approx(math.pi / 2, abs=1e-6)


def test_newton_functional_second_order():
    exact = math.pi * math.log(5) / 4
    p = NewtonProfile(lambda r: 1 - r * r)
    errs = [abs(newton_functional(p, n) - exact) for n in (256, 512, 1024)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 1.9


def test_newton_functional_rejects_bad_input():
    with pytest.raises(ValueError):
        newton_functional(NewtonProfile(lambda r: 2 + 0 * r))
    with pytest.raises(ValueError):
        newton_functional(NewtonProfile(lambda r: 0 * r), quad_n=8)
    with pytest.raises(ValueError):
        newton_functional(NewtonProfile(lambda r: np.nan + r))


def test_sweep_rows():
    rows = sweep("triangle-pair", 0.1, 0.7, 4, n=500)
    assert [r["m_max"] for r in rows] == [2, 2, 2, 2]
    assert all(a["kappa"] > b["kappa"] for a, b in zip(rows, rows[1:]))
    trap = sweep("trapezoid-pair", 0.3, 0.3, 1, n=500)
    assert trap[0]["k"] == 3.0 and trap[0]["max_vel_dev"] < 1e-9
    with pytest.raises(ValueError):
        sweep("cone", 0.1, 0.2, 2)
