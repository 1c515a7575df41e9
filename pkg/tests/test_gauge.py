import numpy as np
import pytest

from conftest import conformal_metric, random_band_limited_h
from torusflow import gauge
from torusflow import geometry as geo
from torusflow.errors import JacobianDegenerate
from torusflow.flow import FlowConfig, mol_evolve
from torusflow.grid import MetricField, TensorField, TorusGrid, flat_metric
from torusflow.roughdata import RoughSpec, hoelder_metric


@pytest.fixture(scope="module")
def smooth_gauge():
    grid = TorusGrid(2, 64)
    h = random_band_limited_h(grid, 0.01, 2, seed=41)
    g0 = MetricField(grid, np.eye(2) + h)
    traj = mol_evolve(g0, FlowConfig(final_time=0.1, n_times=32, substeps=4))
    gt = gauge.integrate_diffeo(traj, traj.times[0])
    return traj, gt


# ---------------------------------------------------------------------------
# DeTurck vector
# ---------------------------------------------------------------------------


def test_deturck_vanishes_on_background(grid64):
    g, _ = conformal_metric(grid64, 0.05)
    x = gauge.deturck_vector(g, g)
    assert np.max(np.abs(x.components)) <= 1e-13


def test_deturck_conformal_2d_zero(grid64):
    g, _ = conformal_metric(grid64, 0.1)
    x = gauge.deturck_vector(g, flat_metric(grid64))
    assert np.max(np.abs(x.components)) <= 1e-12


def test_deturck_conformal_3d_closed_form():
    grid = TorusGrid(3, 16)
    coords = grid.coordinates()
    phi = 0.05 * np.sin(coords[0]) * np.sin(coords[1]) * np.cos(coords[2])
    comp = np.zeros(grid.shape + (3, 3))
    for a in range(3):
        comp[..., a, a] = np.exp(2 * phi)
    g = MetricField(grid, comp)
    x = gauge.deturck_vector(g, flat_metric(grid)).components
    oracle = np.exp(-2 * phi)[..., None] * geo.gradient_array(grid, phi)
    assert np.max(np.abs(x - oracle)) <= 1e-8


# ---------------------------------------------------------------------------
# displacement fields and pullback
# ---------------------------------------------------------------------------


def test_identity_pullback(grid64):
    g, _ = conformal_metric(grid64, 0.08)
    out = gauge.pullback_metric(g, gauge.identity_diffeo(grid64, 0.0))
    assert np.max(np.abs(out.components - g.components)) <= 1e-12


def test_translation_pullback_is_shift(grid64):
    g, _ = conformal_metric(grid64, 0.08)
    u = np.zeros(grid64.shape + (2,))
    u[..., 0] = grid64.spacings[0]
    out = gauge.pullback_metric(g, gauge.DiffeoField(grid64, u, 0.0))
    assert np.max(np.abs(out.components - np.roll(g.components, -1, axis=0))) <= 1e-10
    # scalar curvature commutes with the translation
    r_out = geo.scalar_curvature(out).components
    r_in = geo.scalar_curvature(g).components
    assert np.max(np.abs(r_out - np.roll(r_in, -1, axis=0))) <= 1e-10


def test_pullback_curvature_transform(grid64):
    # R(chi^* g)(p) = R(g)(chi(p)) for a random small diffeomorphism
    g, _ = conformal_metric(grid64, 0.08)
    rng = np.random.default_rng(5)
    coords = grid64.coordinates()
    u = np.zeros(grid64.shape + (2,))
    for a in range(2):
        for _ in range(4):
            k = rng.integers(-3, 4, size=2)
            u[..., a] += 0.02 * rng.normal() * np.cos(
                k[0] * coords[0] + k[1] * coords[1] + rng.uniform(0, 2 * np.pi))
    chi = gauge.DiffeoField(grid64, u, 0.0)
    pulled = gauge.pullback_metric(g, chi)
    r_pulled = geo.scalar_curvature(pulled).components
    r_at_chi = gauge.trig_interpolate(
        grid64, geo.scalar_curvature(g).components, chi.mapped_points()).reshape(grid64.shape)
    assert np.max(np.abs(r_pulled - r_at_chi)) <= 1e-6


def test_degenerate_jacobian_raises(grid32):
    coords = grid32.coordinates()
    u = np.zeros(grid32.shape + (2,))
    u[..., 0] = 1.2 * np.sin(coords[0])   # d_x chi^x = 1 + 1.2 cos x < 0 somewhere
    with pytest.raises(JacobianDegenerate):
        gauge.DiffeoField(grid32, u, 0.0)


def test_trig_interpolation_exact_on_grid(grid32):
    rng = np.random.default_rng(7)
    f = geo.dealias_array(grid32, rng.normal(size=grid32.shape))
    pts = np.stack([grid32.coordinates()[a].ravel() for a in range(2)], axis=-1)
    vals = gauge.trig_interpolate(grid32, f, pts).reshape(grid32.shape)
    assert np.max(np.abs(vals - f)) <= 1e-12


# ---------------------------------------------------------------------------
# gauge ODE
# ---------------------------------------------------------------------------


def test_flat_flow_keeps_identity(grid32):
    traj = mol_evolve(flat_metric(grid32), FlowConfig(final_time=0.1, n_times=16, substeps=2))
    gt = gauge.integrate_diffeo(traj, traj.times[0])
    worst = max(chi.max_displacement() for chi in gt.diffeos)
    assert worst <= 1e-14


def test_rk4_step_against_finer_reference(smooth_gauge):
    traj, _ = smooth_gauge
    sampler = gauge._VelocitySampler(traj)
    grid = traj.grid
    base = np.stack([grid.coordinates()[a].ravel() for a in range(2)], axis=-1)
    t0, t1 = traj.times[5], traj.times[6]
    coarse = gauge._rk4_step(sampler, base.copy(), t0, t1 - t0)
    fine = base.copy()
    for s in range(10):
        a = t0 + (t1 - t0) * s / 10
        fine = gauge._rk4_step(sampler, fine, a, (t1 - t0) / 10)
    assert np.max(np.abs(coarse - fine)) <= 1e-8


def test_group_property(smooth_gauge):
    traj, _ = smooth_gauge
    times = traj.times
    t0, t1, t2 = times[0], times[10], times[20]
    leg_a = gauge.integrate_diffeo(traj, t0, with_pullback=False)
    leg_b = gauge.integrate_diffeo(traj, t1, with_pullback=False)
    direct = leg_a.diffeos[20].displacement
    composed = gauge.compose_displacements(
        traj.grid, leg_a.diffeos[10].displacement, leg_b.diffeos[20].displacement)
    assert np.max(np.abs(direct - composed)) <= 1e-7


def test_anchor_insensitivity_of_drift_exponent():
    grid = TorusGrid(2, 64)
    g0 = hoelder_metric(grid, RoughSpec(amplitude=0.03, alpha=0.1, seed=21))
    traj = mol_evolve(g0, FlowConfig(final_time=0.1, n_times=32, substeps=4))
    fits = []
    for anchor_idx in (0, 8):
        gt = gauge.integrate_diffeo(traj, traj.times[anchor_idx], with_pullback=False)
        fits.append(gauge.drift_fit(gt)["exponent"])
    assert abs(fits[0] - fits[1]) <= 0.1


def test_pushforward_convergence_to_initial_data(smooth_gauge):
    # (chi_t)_* gtilde(t) = g(t) converges uniformly to g0 as t drops
    traj, _ = smooth_gauge
    dist = [float(np.max(np.abs(s.components - traj.initial.components)))
            for s in traj.states]
    assert dist[0] <= dist[-1]
    assert dist[0] <= 1e-3


def test_chi_zero_extrapolation_has_error_bar(smooth_gauge):
    _, gt = smooth_gauge
    assert gt.chi_zero_displacement is not None
    assert gt.chi_zero_error >= 0.0


# ---------------------------------------------------------------------------
# Ricci flow residual
# ---------------------------------------------------------------------------


def test_flat_residual_zero(grid32):
    traj = mol_evolve(flat_metric(grid32), FlowConfig(final_time=0.1, n_times=16, substeps=2))
    gt = gauge.integrate_diffeo(traj, traj.times[0])
    res = gauge.ricci_flow_residual(gt)
    assert res["max_residual"] <= 1e-12


def test_smooth_residual_and_refinement_order(smooth_gauge):
    _, gt = smooth_gauge
    res = gauge.ricci_flow_residual(gt)
    assert res["max_residual"] <= 1e-3
    assert res["refinement_order"] == pytest.approx(2.0, abs=0.4)


def test_residual_decreases_with_stencil_order(smooth_gauge):
    _, gt = smooth_gauge
    res2 = gauge.ricci_flow_residual(gt, stencil_width=1)
    res4 = gauge.ricci_flow_residual(gt, stencil_width=2)
    assert res4["max_residual"] <= res2["max_residual"]
