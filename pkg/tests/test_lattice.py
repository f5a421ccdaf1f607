import json
import math

import numpy as np
import pytest

from fraclob.lattice import (DomainError, LatticeSpec, TimeGrid, build_time_grid, derive_dt,
                             derive_dx, sampling_ratios)


def test_derive_dx_examples():
    assert derive_dx(0.125, 0.5, 1.0, 0.5) == pytest.approx(0.5, rel=1e-15)
    assert derive_dx(1.0, 0.5, 1.0, 1.0) == 1.0
    assert derive_dx(0.125, 0.5, 0.8, 0.5) == pytest.approx(math.sqrt(2.0) * 0.125 ** 0.4, rel=1e-15)


def test_derive_dt_examples():
    assert derive_dt(0.5, 0.5, 1.0, 0.5) == pytest.approx(0.125, rel=1e-15)
    assert derive_dt(1.0, 0.5, 1.0, 1.0) == 1.0
    dt = derive_dt(0.2, 0.5, 0.6, 0.5)
    assert derive_dx(dt, 0.5, 0.6, 0.5) == pytest.approx(0.2, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.6, 0.8, 1.0])
@pytest.mark.parametrize("v", [0.01, 0.2, 0.5, 3.0])
def test_round_trips(alpha, v):
    assert derive_dx(derive_dt(v, 0.5, alpha, 0.5), 0.5, alpha, 0.5) == pytest.approx(v, rel=1e-12)
    assert derive_dt(derive_dx(v, 0.5, alpha, 0.5), 0.5, alpha, 0.5) == pytest.approx(v, rel=1e-12)


@pytest.mark.parametrize("args", [(0.0, 0.5, 1.0, 0.5), (-1, 0.5, 1.0, 0.5), (0.1, 0.0, 1.0, 0.5),
                                  (0.1, 0.5, 0.0, 0.5), (0.1, 0.5, 1.2, 0.5), (0.1, 0.5, 1.0, 0.0),
                                  (0.1, 0.5, 1.0, 1.5)])
def test_domain_errors(args):
    with pytest.raises(DomainError):
        derive_dx(*args)
    with pytest.raises(DomainError):
        derive_dt(*args)


def test_table1_lattice():
    lat = LatticeSpec()
    assert lat.dx == 0.5
    assert lat.dt == pytest.approx(0.125)
    assert lat.intensity == pytest.approx(8.0)
    assert lat.n_points == 401
    # the initial mid sits halfway between two nodes
    u = (lat.initial_mid - lat.x_min) / lat.dx
    assert u - math.floor(u) == pytest.approx(0.5)
    assert lat.x[-1] == pytest.approx(lat.x_max)
    assert derive_dx(lat.with_alpha(0.8).dt, 0.5, 0.8, 0.5) == pytest.approx(0.5, rel=1e-12)


def test_lattice_rejects_small_grid():
    with pytest.raises(DomainError):
        LatticeSpec(grid_count=3)


def test_uniform_grid():
    g = build_time_grid("uniform", 8.0, 3, 1)
    assert list(g.steps) == [0.125, 0.125, 0.125]
    assert g.times[0] == 0.0
    assert np.all(np.diff(g.times) > 0)
    g = build_time_grid("uniform", 7.3, 1000)
    assert np.all(g.steps == g.steps[0])


def test_empty_grid_rejected():
    with pytest.raises(DomainError):
        build_time_grid("exponential", 8.0, 0, 1)
    with pytest.raises(DomainError):
        build_time_grid("exponential", 8.0, 10)  # no seed
    with pytest.raises(DomainError):
        build_time_grid("uniform", -1.0, 10)
    with pytest.raises(DomainError):
        build_time_grid("poisson", 8.0, 10, 1)


def test_exponential_mean():
    n = 100_000
    g = build_time_grid("exponential", 8.0, n, 42)
    se = 0.125 / math.sqrt(n)
    assert abs(g.steps.mean() - 0.125) < 3 * se
    assert abs(g.steps.mean() * 8.0 - 1) <= 3 / math.sqrt(n)
    assert np.all(g.steps > 0)


def test_exponential_reproducible():
    a = build_time_grid("exponential", 8.0, 500, 7)
    b = build_time_grid("exponential", 8.0, 500, 7)
    c = build_time_grid("exponential", 8.0, 500, 8)
    assert np.array_equal(a.steps, b.steps)
    assert not np.array_equal(a.steps, c.steps)


def test_grid_json_round_trip():
    spec = LatticeSpec(alpha=0.8)
    g = build_time_grid("exponential", spec.intensity, 300, 11)
    doc = json.loads(g.to_json(spec))
    assert set(doc) == {"mode", "lambda", "seed", "n_steps", "dx", "alpha", "D_alpha", "r"}
    back = TimeGrid.from_json(g.to_json(spec))
    assert np.array_equal(back.steps, g.steps)


def test_grid_immutable():
    g = build_time_grid("uniform", 8.0, 3)
    with pytest.raises(ValueError):
        g.steps[0] = 1.0


def test_sampling_ratios():
    dt = 0.125
    s = sampling_ratios(8 * dt, 8 * dt, dt)
    assert (s.gamma1, s.gamma2, s.gamma21) == (8, 8, 1)
    s = sampling_ratios(dt, dt, dt)
    assert (s.gamma1, s.gamma2, s.gamma21) == (1, 1, 1)
    s = sampling_ratios(4 * dt, 2 * dt, dt)
    assert (s.gamma1, s.gamma2, s.gamma21) == (4, 2, 0.5)
    assert s.gamma21 == pytest.approx(s.gamma2 / s.gamma1)
    with pytest.raises(DomainError):
        sampling_ratios(0, 1, 1)
