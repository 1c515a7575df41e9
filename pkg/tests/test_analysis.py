import numpy as np
import pytest

from conftest import conformal_metric, random_band_limited_h
from torusflow import analysis as ana
from torusflow import gauge
from torusflow import geometry as geo
from torusflow.flow import FlowConfig, mol_evolve
from torusflow.grid import MetricField, TorusGrid, constant_metric, flat_metric


@pytest.fixture(scope="module")
def flat_traj():
    grid = TorusGrid(2, 32)
    return mol_evolve(flat_metric(grid), FlowConfig(final_time=0.1, n_times=16, substeps=2))


@pytest.fixture(scope="module")
def smooth_traj():
    grid = TorusGrid(2, 64)
    g0, _ = conformal_metric(grid, 0.01)
    return g0, mol_evolve(g0, FlowConfig(final_time=0.1, n_times=32, substeps=4))


def test_beta_weak_query_validation():
    with pytest.raises(ValueError):
        ana.BetaWeakQuery(point=(0, 0), beta=0.6, c_values=(1.0,))
    with pytest.raises(ValueError):
        ana.BetaWeakQuery(point=(0, 0), beta=0.4, c_values=())
    with pytest.raises(ValueError):
        ana.BetaWeakQuery(point=(0, 0), beta=0.4, c_values=(2.0, 1.0))


def test_beta_weak_flat_is_zero(flat_traj):
    rep = ana.beta_weak_inf(flat_traj, ana.BetaWeakQuery((0.0, 0.0), 0.4, (1.0, 2.0)))
    assert abs(rep.scalars["diagnostic"]) <= 1e-9


def test_beta_weak_smooth_matches_classical(smooth_traj):
    g0, traj = smooth_traj
    r0 = geo.scalar_curvature(g0).components
    idx = np.unravel_index(int(np.argmin(r0)), r0.shape)
    point = tuple(traj.grid.axis_coordinates(a)[idx[a]] for a in range(2))
    rep = ana.beta_weak_inf(traj, ana.BetaWeakQuery(point, 0.45, (1.0, 2.0, 4.0)))
    assert rep.scalars["diagnostic"] == pytest.approx(float(r0.min()), abs=1e-2)


def test_beta_weak_monotone_in_c(smooth_traj):
    _, traj = smooth_traj
    rep = ana.beta_weak_inf(traj, ana.BetaWeakQuery((0.0, 0.0), 0.4, (1.0, 2.0, 4.0)))
    matrix = rep.matrices["m_C_t"][2]
    for ti in range(matrix.shape[1]):
        col = matrix[:, ti]
        col = col[~np.isnan(col)]
        assert np.all(np.diff(col) <= 1e-12)


def test_beta_weak_diagnostic_below_smallest_ball_min(smooth_traj):
    # inf over supersets: the final diagnostic cannot exceed the min over the
    # smallest resolved ball at the smallest resolution-valid time
    _, traj = smooth_traj
    q = ana.BetaWeakQuery((0.0, 0.0), 0.45, (1.0, 2.0))
    rep = ana.beta_weak_inf(traj, q)
    matrix = rep.matrices["m_C_t"][2]
    smallest = matrix[0][~np.isnan(matrix[0])]
    assert rep.scalars["diagnostic"] <= smallest[0] + 1e-12


def test_max_principle_flat(flat_traj):
    rep = ana.max_principle_check(flat_traj)
    assert rep.flags["unconditional"][0]
    assert rep.scalars["min_R_overall"] == pytest.approx(0.0, abs=1e-12)


def test_max_principle_kappa_smooth(smooth_traj):
    g0, traj = smooth_traj
    kappa = float(geo.scalar_curvature(g0).components.min())
    rep = ana.max_principle_check(traj, kappa=kappa, kappa_mode="smooth")
    assert rep.flags[f"kappa_smooth"][0]


def test_max_principle_default_tolerance_scales_with_kappa(flat_traj):
    rep = ana.max_principle_check(flat_traj, kappa=-3.0, kappa_mode="uniform_limit")
    assert rep.flags["kappa_uniform_limit"][1] == pytest.approx(1e-3 * 4.0)


def test_perturbation_identical_pair_is_zero(smooth_traj):
    _, traj = smooth_traj
    rep = ana.perturbation_stability(traj, traj, (np.pi, np.pi), 0.4, (2.0,))
    matrix = rep.matrices["sup_diff"][2]
    assert np.nanmax(matrix) == 0.0


def test_smoothing_rates_smooth_data_trivial(smooth_traj):
    # smooth data decays without gradient blowup, so the one-sided bound holds
    _, traj = smooth_traj
    rep = ana.smoothing_rates(traj, (1, 2))
    for k in (1, 2):
        ok, _ = rep.flags[f"slope_bound_k={k}"]
        assert ok
    assert rep.flags["uniform_convergence"][0]


def test_rigidity_flat_defect_zero(flat_traj):
    gt = gauge.integrate_diffeo(flat_traj, flat_traj.times[0])
    rep = ana.rigidity_probe(gt)
    assert rep.scalars["defect_final"] == 0.0
    assert rep.flags["defect_decreases"][0]


def test_rigidity_constant_metric_is_fixed_point():
    # any constant metric is flat and stationary: defect stays identically zero
    grid = TorusGrid(2, 32)
    g0 = constant_metric(grid, np.diag([1.2, 0.8]))
    traj = mol_evolve(g0, FlowConfig(final_time=0.1, n_times=16, substeps=2),
                      background=g0)
    gt = gauge.integrate_diffeo(traj, traj.times[0])
    rep = ana.rigidity_probe(gt)
    defects = rep.matrices["flat_defect"][2].ravel()
    assert np.max(defects) <= 1e-12


def test_report_passed_aggregates_flags():
    rep = ana.AnalysisReport(name="demo")
    rep.flags["a"] = (True, 0.1)
    assert rep.passed()
    rep.flags["b"] = (False, 0.1)
    assert not rep.passed()
