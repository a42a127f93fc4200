import math

import numpy as np
import pytest

from flightfall.errors import DomainError
from flightfall.flight import FlightParams, VonMises
from flightfall.lifetime import Exponential
from flightfall.mc_oracle import (
    BATCH_SIZE,
    HISTOGRAM_COLUMNS,
    LandingSample,
    compare_to_analytic,
    mean_displacement,
    mirror_z,
    planar_density_grid,
    radial_histogram,
    simulate_landings,
)
from flightfall.stationary import StationaryModel

EDGES = np.round(np.arange(0, 41) * 0.1, 10)
N = 10**6


@pytest.fixture(scope="module")
def heavy_model():
    return StationaryModel.heavy(1.0, 2.0, 3.0)


@pytest.fixture(scope="module")
def light_model():
    return StationaryModel.light(1.0, 2.0, 2.0, 5.0)


@pytest.fixture(scope="module")
def heavy_samples(heavy_model):
    return simulate_landings(heavy_model.flight, heavy_model.lifetime, N, seed=42)


@pytest.fixture(scope="module")
def light_samples(light_model):
    return simulate_landings(light_model.flight, light_model.lifetime, N, seed=43)


def test_zero_switch_fraction_heavy(heavy_samples):
    p, se = heavy_samples.zero_switch_fraction()
    assert abs(p - 2 / 3) <= 4 * se


def test_zero_switch_fraction_light(light_samples):
    p, se = light_samples.zero_switch_fraction()
    assert abs(p - (2 / 3) ** 5) <= 4 * se
    assert (2 / 3) ** 5 == pytest.approx(0.131687, abs=1e-6)


def test_heavy_histogram_matches(heavy_samples, heavy_model):
    hist = radial_histogram(heavy_samples, EDGES, "switched_only")
    report = compare_to_analytic(hist, heavy_model, heavy_samples)
    assert report.passed, report.max_z
    assert report.compared.sum() >= 30


def test_light_histogram_matches(light_samples, light_model):
    hist = radial_histogram(light_samples, EDGES, "switched_only")
    report = compare_to_analytic(hist, light_model, light_samples)
    assert report.passed, report.max_z


def test_histogram_masses(heavy_samples):
    everything = radial_histogram(heavy_samples, [0.0, np.inf], "all")
    assert everything.masses[0] == 1.0
    switched = radial_histogram(heavy_samples, [0.0, np.inf], "switched_only")
    p0, se = heavy_samples.zero_switch_fraction()
    assert switched.masses[0] == pytest.approx(1 - p0, abs=1e-12)
    assert abs(switched.masses[0] - 1 / 3) <= 4 * se
    assert switched.counts[0] == N - round(p0 * N)


def test_single_bin_comparison(heavy_samples, heavy_model):
    report = compare_to_analytic(radial_histogram(heavy_samples, [0.0, 1.0], "switched_only"), heavy_model)
    assert report.passed
    assert report.compared.all()


def test_wrong_model_fails(heavy_samples):
    # landings from mu = 2 against the mu = 4 density must be rejected
    wrong = StationaryModel.heavy(1.0, 4.0, 3.0)
    report = compare_to_analytic(radial_histogram(heavy_samples, EDGES, "switched_only"), wrong)
    assert report.status == "fail"
    assert report.max_z > 20


def test_comparison_errors(heavy_samples, heavy_model, light_model):
    hist = radial_histogram(heavy_samples, EDGES, "switched_only")
    with pytest.raises(DomainError):
        compare_to_analytic(hist, light_model, heavy_samples)
    with pytest.raises(DomainError):
        compare_to_analytic(radial_histogram(heavy_samples, EDGES, "all"), heavy_model)
    with pytest.raises(DomainError):
        radial_histogram(heavy_samples, [0.5, 1.0])
    with pytest.raises(DomainError):
        simulate_landings(heavy_model.flight, heavy_model.lifetime, 0, seed=1)


def test_small_sample_is_inconclusive(heavy_model):
    s = simulate_landings(heavy_model.flight, heavy_model.lifetime, 10, seed=5)
    report = compare_to_analytic(radial_histogram(s, EDGES, "switched_only"), heavy_model, s)
    assert report.inconclusive and not report.passed
    assert report.status == "inconclusive"


def test_workers_do_not_change_samples(heavy_model):
    n = 3 * BATCH_SIZE + 17
    a = simulate_landings(heavy_model.flight, heavy_model.lifetime, n, seed=9, workers=1)
    b = simulate_landings(heavy_model.flight, heavy_model.lifetime, n, seed=9, workers=4)
    assert len(a) == n
    for col in ("x1", "x2", "lifetimes", "switches"):
        np.testing.assert_array_equal(getattr(a, col), getattr(b, col))
    c = simulate_landings(heavy_model.flight, heavy_model.lifetime, n, seed=10, workers=4)
    assert not np.array_equal(a.x1, c.x1)


def test_thread_env_cap(heavy_model, monkeypatch):
    monkeypatch.setenv("FLIGHTFALL_THREADS", "1")
    a = simulate_landings(heavy_model.flight, heavy_model.lifetime, BATCH_SIZE + 1, seed=3)
    monkeypatch.setenv("FLIGHTFALL_THREADS", "8")
    b = simulate_landings(heavy_model.flight, heavy_model.lifetime, BATCH_SIZE + 1, seed=3)
    np.testing.assert_array_equal(a.x1, b.x1)


def test_single_path(light_model):
    s = simulate_landings(light_model.flight, light_model.lifetime, 1, seed=0)
    (rec,) = list(s)
    assert isinstance(rec, LandingSample)
    assert rec.lifetime > 0 and rec.switches >= 0


def test_landing_invariants(light_samples, light_model):
    c = light_model.flight.c
    r = light_samples.radii
    t = light_samples.lifetimes
    assert np.all(r <= c * t * (1 + 1e-12))
    zero = light_samples.switches == 0
    np.testing.assert_allclose(r[zero], c * t[zero], rtol=1e-12)
    for rec in list(light_samples)[:200]:
        assert math.hypot(*rec.landing) <= c * rec.lifetime * (1 + 1e-12)


# --- anisotropic directions ---------------------------------------------------


def vm_samples(k, n=N, seed=77):
    return simulate_landings(FlightParams(3.0, 1.0, VonMises(k)), Exponential(2.0), n, seed=seed)


def test_vonmises_zero_matches_isotropic(heavy_model):
    grid = planar_density_grid(vm_samples(0.0), EDGES, 36)
    report = compare_to_analytic(grid.radialize(), heavy_model)
    assert report.passed, report.max_z


def test_vonmises_drift():
    s = vm_samples(2.0)
    mean, se = mean_displacement(s)
    assert mean[0] >= 4 * se[0]
    assert abs(mean[1]) <= 4 * se[1]


def test_vonmises_mirror_symmetry():
    grid_p = planar_density_grid(vm_samples(2.0, seed=1), EDGES, 36)
    grid_m = planar_density_grid(vm_samples(-2.0, seed=2), EDGES, 36)
    z = mirror_z(grid_p, grid_m)
    big = (grid_p.masses * N >= 100) & (grid_m.mirrored().masses * N >= 100)
    assert big.sum() > 200
    assert z[big].max() <= 4.0
    # the grids themselves differ: a positive k pushes mass towards +x1
    assert grid_p.masses[:, 18:].sum() > grid_m.masses[:, 18:].sum()


def test_mirror_is_x1_reflection():
    grid = planar_density_grid(vm_samples(0.5, n=1000, seed=3), EDGES, 8)
    m = grid.mirrored().masses
    # sector [0, pi/4) maps to (3 pi/4, pi]
    np.testing.assert_array_equal(m[:, 7], grid.masses[:, 4])
    np.testing.assert_array_equal(grid.mirrored().mirrored().masses, grid.masses)


def test_planar_grid_csv_and_validation():
    grid = planar_density_grid(vm_samples(1.0, n=5000, seed=4), [0.0, 1.0, 2.0], 4)
    lines = grid.to_csv().splitlines()
    assert lines[0] == "r_lo,r_hi,theta_lo,theta_hi,x1_center,x2_center,mass,density"
    assert len(lines) == 1 + 2 * 4
    with pytest.raises(DomainError):
        planar_density_grid(vm_samples(1.0, n=10), [0.0, 1.0], 5)


def test_report_csv(heavy_samples, heavy_model):
    report = compare_to_analytic(radial_histogram(heavy_samples, EDGES[:5], "switched_only"), heavy_model)
    lines = report.to_csv().splitlines()
    assert tuple(lines[0].split(",")) == HISTOGRAM_COLUMNS
    assert len(lines) == 5
