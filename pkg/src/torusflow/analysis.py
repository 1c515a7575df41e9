"""Headline diagnostics over flow trajectories.

Every analysis consumes trajectories read-only and returns an AnalysisReport:
named scalars, fitted exponents with their residuals, matrices, and pass/fail
flags that always carry the tolerance they used. Fits never extrapolate
beyond stored data; curvature infima over shrinking balls are reported as raw
(C, t) matrices with sub-resolution cells masked, and the liminf surrogate is
the minimum over the three smallest resolution-valid times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import flat_ball_mask, gradient_array, scalar_curvature
from .grid import MetricField

MIN_BALL_SPACINGS = 2.0    # balls under this many grid spacings are unresolved
DEFAULT_FIT_RESIDUAL = 0.2


@dataclass(frozen=True)
class BetaWeakQuery:
    point: tuple
    beta: float
    c_values: tuple
    n_liminf_times: int = 3

    def __post_init__(self):
        if not 0 < self.beta < 0.5:
            raise ValueError("beta must lie in (0, 1/2)")
        if len(self.c_values) == 0:
            raise ValueError("c_values must be nonempty")
        if any(c <= 0 for c in self.c_values):
            raise ValueError("c_values must be positive")
        if list(self.c_values) != sorted(self.c_values):
            raise ValueError("c_values must be increasing")


@dataclass
class AnalysisReport:
    name: str
    scalars: dict = field(default_factory=dict)
    exponents: dict = field(default_factory=dict)   # name -> (value, fit_residual)
    matrices: dict = field(default_factory=dict)    # name -> (row_labels, col_labels, array)
    flags: dict = field(default_factory=dict)       # name -> (bool, tolerance)
    notes: list = field(default_factory=list)

    def passed(self):
        return all(ok for ok, _ in self.flags.values())


def _log_fit(ts, vals):
    """Least-squares slope of log(vals) vs log(ts) and the RMS log residual."""
    lt = np.log(ts)
    lv = np.log(vals)
    slope, intercept = np.polyfit(lt, lv, 1)
    resid = float(np.sqrt(np.mean((lv - (slope * lt + intercept)) ** 2)))
    return float(slope), resid


def scalar_curvature_series(traj):
    return [scalar_curvature(s).components for s in traj.states]


def beta_weak_inf(traj, query):
    """Curvature infima over shrinking balls B(x, C t^beta) as t drops.

    Returns the m(C, t) matrix (masked cells are NaN), the per-C liminf
    surrogate, and the final diagnostic inf over the C list.
    """
    times = traj.times
    if times[-1] / times[0] < 100.0:
        raise ValueError("trajectory must span at least two decades of time")
    grid = traj.grid
    spacing = max(grid.spacings)
    r_floor = MIN_BALL_SPACINGS * spacing
    rs = scalar_curvature_series(traj)
    matrix = np.full((len(query.c_values), len(times)), np.nan)
    for ci, c in enumerate(query.c_values):
        for ti, t in enumerate(times):
            radius = c * t ** query.beta
            if radius < r_floor:
                continue
            mask = flat_ball_mask(grid, query.point, radius)
            matrix[ci, ti] = float(rs[ti][mask].min())
    per_c = {}
    for ci, c in enumerate(query.c_values):
        valid = np.where(~np.isnan(matrix[ci]))[0]
        if valid.size == 0:
            per_c[c] = math.nan
            continue
        per_c[c] = float(np.nanmin(matrix[ci, valid[:query.n_liminf_times]]))
    finite = [v for v in per_c.values() if not math.isnan(v)]
    diagnostic = min(finite) if finite else math.nan
    n_masked = int(np.isnan(matrix).sum())
    report = AnalysisReport(name="beta_weak_inf")
    report.scalars["diagnostic"] = diagnostic
    report.scalars["masked_cells"] = n_masked
    for c, v in per_c.items():
        report.scalars[f"liminf_C={c:g}"] = v
    report.matrices["m_C_t"] = (list(query.c_values), [float(t) for t in times], matrix)
    report.notes.append(
        f"balls under {MIN_BALL_SPACINGS:g} grid spacings masked ({n_masked} cells)")
    return report


def max_principle_check(traj, kappa=None, kappa_mode="smooth", tol=None):
    """Lower scalar-curvature bounds along the flow.

    Checks min R(t) >= -n/(2t) always; with kappa given, additionally
      kappa_mode "smooth":        min R(t) >= kappa / (1 - (2 kappa / n) t)
      kappa_mode "uniform_limit": min R(t) >= kappa
    The default tolerance is 1e-3 (1 + |kappa|).
    """
    if tol is None:
        tol = 1e-3 * (1.0 + abs(kappa or 0.0))
    n = traj.grid.dim
    times = traj.times
    mins = np.array([float(r.min()) for r in scalar_curvature_series(traj)])
    unconditional = mins + n / (2.0 * times) + tol
    report = AnalysisReport(name="max_principle")
    report.scalars["min_R_final"] = float(mins[-1])
    report.scalars["min_R_overall"] = float(mins.min())
    report.matrices["min_R"] = (["min_R"], [float(t) for t in times], mins[None, :])
    report.flags["unconditional"] = (bool(np.all(unconditional >= 0.0)), tol)
    report.scalars["unconditional_margin"] = float(unconditional.min())
    if kappa is not None:
        if kappa_mode == "smooth":
            bound = kappa / (1.0 - (2.0 * kappa / n) * times)
        elif kappa_mode == "uniform_limit":
            bound = np.full_like(times, kappa)
        else:
            raise ValueError(f"unknown kappa_mode {kappa_mode!r}")
        margin = mins - bound + tol
        report.flags[f"kappa_{kappa_mode}"] = (bool(np.all(margin >= 0.0)), tol)
        report.scalars["kappa_margin"] = float(margin.min() - tol)
        report.matrices["kappa_bound"] = (["bound"], [float(t) for t in times], bound[None, :])
    return report


def perturbation_stability(traj_a, traj_b, point, beta, c_values,
                           fixed_radius=None, t_fit_max=None,
                           fit_residual_tol=DEFAULT_FIT_RESIDUAL):
    """Decay of sup |R' - R''| over shrinking balls for a metric pair flow.

    Fits s(t) = sup over B(point, C t^beta) of |R'(t) - R''(t)| against
    t^omega per C; passes when the fitted omega is positive with RMS log
    residual below tolerance. The fit is confined to t <= t_fit_max, by
    default 0.4 (fixed_radius / 2 pi)^2: past that, heat decay of the
    perturbation's own cutoff-scale modes dominates and the shrinking-ball
    asymptotics are no longer visible. A fixed-radius contrast column shows
    that the difference need not vanish at fixed scale.
    """
    if not np.array_equal(traj_a.times, traj_b.times):
        raise ValueError("paired trajectories must share their time lattice")
    grid = traj_a.grid
    times = traj_a.times
    spacing = max(grid.spacings)
    r_floor = MIN_BALL_SPACINGS * spacing
    if fixed_radius is None:
        fixed_radius = 0.25 * min(grid.side_lengths)
    if t_fit_max is None:
        t_fit_max = 0.4 * (fixed_radius / (2.0 * math.pi)) ** 2
    ra = scalar_curvature_series(traj_a)
    rb = scalar_curvature_series(traj_b)
    diff = [np.abs(a - b) for a, b in zip(ra, rb)]
    report = AnalysisReport(name="perturbation_stability")
    report.scalars["t_fit_max"] = float(t_fit_max)
    matrix = np.full((len(c_values) + 1, len(times)), np.nan)
    fixed_mask = flat_ball_mask(grid, point, fixed_radius)
    for ti in range(len(times)):
        matrix[-1, ti] = float(diff[ti][fixed_mask].max())
    for ci, c in enumerate(c_values):
        svals = np.full(len(times), np.nan)
        for ti, t in enumerate(times):
            radius = c * t ** beta
            if radius < r_floor:
                continue
            mask = flat_ball_mask(grid, point, radius)
            svals[ti] = float(diff[ti][mask].max())
        matrix[ci] = svals
        valid = ~np.isnan(svals) & (svals > 0) & (times <= t_fit_max)
        if valid.sum() >= 4:
            omega, resid = _log_fit(times[valid], svals[valid])
            report.exponents[f"omega_C={c:g}"] = (omega, resid)
            report.flags[f"omega_positive_C={c:g}"] = (
                omega > 0 and resid < fit_residual_tol, fit_residual_tol)
    rows = [f"C={c:g}" for c in c_values] + [f"fixed_r={fixed_radius:g}"]
    report.matrices["sup_diff"] = (rows, [float(t) for t in times], matrix)
    contrast = matrix[-1]
    report.scalars["contrast_final"] = float(contrast[-1])
    report.scalars["contrast_at_t_min"] = float(contrast[0])
    # at fixed scale the difference must not die out toward t = 0
    nonvanishing = contrast[0] >= 0.1 * float(np.nanmax(contrast)) > 0.0
    report.flags["contrast_nonvanishing"] = (bool(nonvanishing), 0.1)
    return report


def smoothing_rates(traj, k_list=(1, 2), floor_factor=6.0, fit_residual_tol=DEFAULT_FIT_RESIDUAL):
    """Fitted decay exponents of sup |grad^k h(t)| against t.

    The fit window starts at floor_factor / k_nyquist^2, below which the grid
    cannot represent the continuum spectrum of rough data, and the pass bound
    is one-sided: slope >= -k/2 - 0.1.
    """
    grid = traj.grid
    times = traj.times
    h_traj = traj.h_fields()
    k_ny = math.pi / max(grid.spacings)
    t_floor = floor_factor / k_ny ** 2
    report = AnalysisReport(name="smoothing_rates")
    sup_table = {}
    for k in k_list:
        sups = []
        for f in h_traj.fields:
            arr = f.components
            for _ in range(k):
                arr = gradient_array(grid, arr)
            sups.append(float(np.max(np.sqrt(np.sum(arr * arr, axis=tuple(range(grid.dim, arr.ndim)))))))
        sups = np.array(sups)
        sup_table[k] = sups
        window = times >= t_floor
        if window.sum() >= 4:
            slope, resid = _log_fit(times[window], sups[window])
            report.exponents[f"slope_k={k}"] = (slope, resid)
            report.flags[f"slope_bound_k={k}"] = (slope >= -k / 2.0 - 0.1, 0.1)
        report.matrices[f"sup_grad{k}"] = (
            [f"sup_grad{k}"], [float(t) for t in times], sups[None, :])
    if traj.initial is not None:
        dist = np.array([float(np.max(np.abs(s.components - traj.initial.components)))
                         for s in traj.states])
        report.matrices["dist_to_initial"] = (
            ["sup_dist"], [float(t) for t in times], dist[None, :])
        # decreasing toward t = 0 means nondecreasing along the stored order
        drops = np.diff(dist)
        slack = 1e-3 * max(dist.max(), 1e-300)
        report.flags["uniform_convergence"] = (bool(np.all(drops >= -slack)), 1e-3)
        report.scalars["dist_initial_first"] = float(dist[0])
        report.scalars["dist_initial_last"] = float(dist[-1])
    report.scalars["fit_floor_time"] = t_floor
    return report


def rigidity_probe(gauge_traj):
    """Sup-distance of the pulled-back flow to its best constant metric.

    The best-fit constant metric minimizes the entrywise sup deviation, so it
    is the per-component midrange; the defect is half the largest range. The
    probe reports the defect series and whether it decreases by the final
    time; it is an experiment, not a proof of flatness.
    """
    times = gauge_traj.times
    defects = []
    for m in gauge_traj.pulled_back:
        comps = m.components
        axes = tuple(range(comps.ndim - 2))
        top = comps.max(axis=axes)
        bottom = comps.min(axis=axes)
        defects.append(float(0.5 * np.max(top - bottom)))
    defects = np.array(defects)
    report = AnalysisReport(name="rigidity_probe")
    report.matrices["flat_defect"] = (["defect"], [float(t) for t in times], defects[None, :])
    report.scalars["defect_initial"] = float(defects[0])
    report.scalars["defect_final"] = float(defects[-1])
    tenth = times[-1] / 10.0
    idx = int(np.argmin(np.abs(times - tenth)))
    report.scalars["defect_at_tenth"] = float(defects[idx])
    report.flags["defect_decreases"] = (bool(defects[-1] <= defects[idx] + 1e-12), 0.0)
    report.notes.append("experiment only: decay of the defect is measured, not proven")
    return report
