"""Scenario configs, built-in experiments, and the pipeline runner.

A scenario is a flat key-value config (see SCHEMA) naming initial data, a
solver setup, optional gauge integration, and a list of analyses with their
gates. The runner executes generators -> solver -> gauge -> analyses per
resolution, persists trajectory snapshots, CSV matrices and key-value
summaries, and reports pass/fail through the process exit code:

    0  all gated checks pass      2  a gate failed
    3  configuration error        4  numerical abort (no contraction / unstable step)

Reruns with the same config and seed write bit-identical CSVs; nothing
time- or host-dependent is ever emitted.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis as ana
from . import gauge as gauge_mod
from . import storage
from .errors import (ConfigInvalid, NoContraction, StepUnstable, TorusflowError)
from .flow import FlowConfig, mol_evolve, picard_solve
from .geometry import scalar_curvature
from .grid import MetricField, TensorField, TorusGrid, flat_metric
from .norms import x_norm
from .roughdata import (RoughSpec, hoelder_metric, homogeneous_germ,
                        rough_isometric_pullback, second_order_pair,
                        tangential_profile)

SCHEMA_VERSION = 1

EXIT_PASS = 0
EXIT_GATE_FAILURE = 2
EXIT_CONFIG_ERROR = 3
EXIT_NUMERICAL_ABORT = 4

DATA_KINDS = ("flat", "hoelder_fourier", "conformal", "conformal_kappa",
              "kappa_rough", "second_order_pair", "rough_flat_pullback", "germ")
ANALYSES = ("max_principle", "beta_weak", "smoothing", "perturbation",
            "gauge_drift", "rf_residual", "rigidity", "picard_mol", "norms")

# field -> (parser, required, default); dotted names mirror the config text
SCHEMA = {
    "schema_version": (int, True, None),
    "name": (str, True, None),
    "dim": (int, False, 2),
    "resolutions": ("int_list", True, None),
    "seed": (int, False, 0),
    "side_length": (float, False, 2.0 * math.pi),
    "data.kind": (str, True, None),
    "data.amplitude": (float, False, 0.03),
    "data.alpha": (float, False, 0.3),
    "data.eta": (float, False, 1.0),
    "data.kappa": (float, False, -1.0),
    "data.base_amplitude": (float, False, 0.02),
    "data.marked_point": ("float_list", False, None),
    "flow.solver": (str, False, "mol"),
    "flow.final_time": (float, False, 0.1),
    "flow.n_times": (int, False, 32),
    "flow.substeps": (int, False, 4),
    "flow.tol": (float, False, 1e-9),
    "flow.epsilon_guard": (float, False, 0.05),
    "gauge.enabled": ("bool", False, False),
    "gauge.anchor": (str, False, "min"),
    "gauge.substeps": (int, False, 1),
    "analyses": ("str_list", True, None),
    "analysis.max_principle.kappa": (float, False, None),
    "analysis.max_principle.kappa_mode": (str, False, "smooth"),
    "analysis.max_principle.tol": (float, False, None),
    "analysis.beta_weak.beta": (float, False, None),
    "analysis.beta_weak.c_values": ("float_list", False, [1.0, 2.0, 4.0]),
    "analysis.beta_weak.expect": (str, False, "none"),  # none | flat | min_R
    "analysis.beta_weak.tol": (float, False, 1e-2),
    "analysis.smoothing.k_list": ("int_list", False, [1, 2]),
    "analysis.perturbation.beta": (float, False, None),
    "analysis.perturbation.c_values": ("float_list", False, [2.0, 3.0]),
    "analysis.gauge_drift.band": ("float_list", False, [0.4, 0.6]),
    "analysis.rf_residual.max": (float, False, 1e-3),
    "analysis.rf_residual.order_band": ("float_list", False, [1.6, 2.4]),
    "analysis.picard_mol.tol": (float, False, 1e-4),
}


def _parse_value(kind, raw, fieldname):
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is str:
            return str(raw)
        if kind == "bool":
            if str(raw).lower() in ("true", "1", "yes"):
                return True
            if str(raw).lower() in ("false", "0", "no"):
                return False
            raise ValueError(f"{raw!r} is not a boolean")
        if kind == "int_list":
            return [int(v) for v in str(raw).split(",") if v.strip()]
        if kind == "float_list":
            return [float(v) for v in str(raw).split(",") if v.strip()]
        if kind == "str_list":
            return [v.strip() for v in str(raw).split(",") if v.strip()]
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(fieldname, str(exc)) from exc
    raise ConfigInvalid(fieldname, f"unknown schema kind {kind!r}")


def validate_config(raw):
    """Parse and validate a raw key-value dict against the schema."""
    config = {}
    for key in raw:
        if key not in SCHEMA:
            raise ConfigInvalid(key, "unknown field")
    for key, (kind, required, default) in SCHEMA.items():
        if key in raw:
            config[key] = _parse_value(kind, raw[key], key)
        elif required:
            raise ConfigInvalid(key, "required field is missing")
        else:
            config[key] = default
    if config["schema_version"] != SCHEMA_VERSION:
        raise ConfigInvalid("schema_version",
                            f"expected {SCHEMA_VERSION}, got {config['schema_version']}")
    if config["dim"] not in (2, 3):
        raise ConfigInvalid("dim", "must be 2 or 3")
    if config["data.kind"] not in DATA_KINDS:
        raise ConfigInvalid("data.kind", f"must be one of {DATA_KINDS}")
    for name in config["analyses"]:
        if name not in ANALYSES:
            raise ConfigInvalid("analyses", f"unknown analysis {name!r}")
    if not config["resolutions"]:
        raise ConfigInvalid("resolutions", "need at least one resolution")
    gated_fits = {"smoothing", "perturbation"} & set(config["analyses"])
    if gated_fits and len(config["resolutions"]) < 2:
        raise ConfigInvalid("resolutions",
                            f"analyses {sorted(gated_fits)} gate on fitted exponents "
                            "and need at least two resolutions")
    if "beta_weak" in config["analyses"] and config["analysis.beta_weak.beta"] is None:
        raise ConfigInvalid("analysis.beta_weak.beta", "required field is missing")
    if "perturbation" in config["analyses"]:
        if config["analysis.perturbation.beta"] is None:
            raise ConfigInvalid("analysis.perturbation.beta", "required field is missing")
        if config["data.kind"] != "second_order_pair":
            raise ConfigInvalid("data.kind",
                                "perturbation analysis needs data.kind = second_order_pair")
    return config


def load_config(path):
    return validate_config(storage.read_keyvalues(path))


# ---------------------------------------------------------------------------
# initial data builders
# ---------------------------------------------------------------------------


def _conformal_components(grid, amplitude):
    coords = grid.coordinates()
    phase = np.ones(grid.shape)
    for a in range(grid.dim):
        phase = phase * np.sin(2.0 * math.pi * coords[a] / grid.side_lengths[a])
    phi = amplitude * phase
    comp = np.zeros(grid.shape + (grid.dim, grid.dim))
    for a in range(grid.dim):
        comp[..., a, a] = np.exp(2.0 * phi)
    return comp


def _build_conformal_kappa(n, config):
    """Conformal metric rescaled (through the torus size) to min R = kappa."""
    kappa = config["data.kappa"]
    if kappa >= 0:
        raise ConfigInvalid("data.kappa", "conformal_kappa needs kappa < 0")
    dim = config["dim"]
    base_grid = TorusGrid(dim, n, config["side_length"])
    comp = _conformal_components(base_grid, config["data.base_amplitude"])
    m0 = float(scalar_curvature(MetricField(base_grid, comp)).components.min())
    lam = m0 / kappa
    side = config["side_length"] * math.sqrt(lam)
    grid = TorusGrid(dim, n, side)
    return grid, MetricField(grid, comp)


def build_initial_data(n, config):
    """Returns (grid, primary metric, optional pair metric, info dict)."""
    dim = config["dim"]
    kind = config["data.kind"]
    seed = config["seed"]
    info = {}
    if kind == "conformal_kappa" or kind == "kappa_rough":
        grid, g0 = _build_conformal_kappa(n, config)
        info["kappa"] = config["data.kappa"]
        if kind == "kappa_rough":
            amp = config["data.amplitude"] * grid.side_lengths[0] / (2.0 * math.pi)
            g0, _ = rough_isometric_pullback(g0, seed=seed, amplitude=amp)
            info["roughened"] = True
        return grid, g0, None, info
    grid = TorusGrid(dim, n, config["side_length"])
    if kind == "flat":
        return grid, flat_metric(grid), None, info
    if kind == "conformal":
        return grid, MetricField(grid, _conformal_components(grid, config["data.amplitude"])), None, info
    if kind == "hoelder_fourier":
        spec = RoughSpec(kind="hoelder_fourier", amplitude=config["data.amplitude"],
                         alpha=config["data.alpha"], seed=seed)
        return grid, hoelder_metric(grid, spec), None, info
    if kind == "rough_flat_pullback":
        g0, _ = rough_isometric_pullback(flat_metric(grid), seed=seed,
                                         amplitude=config["data.amplitude"])
        return grid, g0, None, info
    if kind == "second_order_pair":
        marked = config["data.marked_point"] or [L / 2.0 for L in grid.side_lengths]
        base = MetricField(grid, _conformal_components(grid, config["data.base_amplitude"]))
        spec = RoughSpec(amplitude=config["data.amplitude"], eta=config["data.eta"],
                         seed=seed, marked_point=tuple(marked))
        ga, gb, pair_info = second_order_pair(base, spec)
        info.update(pair_info)
        info["marked_point"] = tuple(marked)
        return grid, ga, gb, info
    if kind == "germ":
        marked = config["data.marked_point"] or [L / 2.0 for L in grid.side_lengths]
        amp = config["data.amplitude"]
        profile = tangential_profile(lambda u: amp * (u[..., 0] ** 2 - u[..., 1] ** 2))
        g0 = homogeneous_germ(grid, profile, marked_point=tuple(marked))
        info["marked_point"] = tuple(marked)
        return grid, g0, None, info
    raise ConfigInvalid("data.kind", f"unhandled kind {kind!r}")


def _flow_config(config):
    return FlowConfig(final_time=config["flow.final_time"],
                      solver=config["flow.solver"],
                      n_times=config["flow.n_times"],
                      substeps=config["flow.substeps"],
                      tol=config["flow.tol"],
                      epsilon_guard=config["flow.epsilon_guard"])


def _solve(g0, grid, config):
    fc = _flow_config(config)
    background = flat_metric(grid)
    if fc.solver == "picard":
        h0 = TensorField(grid, g0.components - background.components, (0, 2))
        return picard_solve(h0, fc, background)
    return mol_evolve(g0, fc, background)


# ---------------------------------------------------------------------------
# the runner
# ---------------------------------------------------------------------------


@dataclass
class ResolutionResult:
    resolution: int
    flags: dict = field(default_factory=dict)
    scalars: dict = field(default_factory=dict)


def _min_r_point(g):
    r = scalar_curvature(g).components
    idx = np.unravel_index(int(np.argmin(r)), r.shape)
    grid = g.grid
    return tuple(grid.axis_coordinates(a)[idx[a]] for a in range(grid.dim)), float(r.min())


def _run_resolution(config, n, out_dir, emit_plots):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid, g0, g_pair, info = build_initial_data(n, config)
    result = ResolutionResult(resolution=n)
    result.scalars.update({k: v for k, v in info.items() if np.isscalar(v)})

    traj = _solve(g0, grid, config)
    storage.save_trajectory(out_dir / "trajectory", traj)
    traj_pair = None
    if g_pair is not None:
        traj_pair = _solve(g_pair, grid, config)
        storage.save_trajectory(out_dir / "trajectory_pair", traj_pair)

    gauge_traj = None
    if config["gauge.enabled"]:
        anchor = traj.times[0] if config["gauge.anchor"] == "min" else float(config["gauge.anchor"])
        gauge_traj = gauge_mod.integrate_diffeo(traj, anchor,
                                                substeps=config["gauge.substeps"])

    reports = []
    for name in config["analyses"]:
        rep = _run_analysis(name, config, traj, traj_pair, gauge_traj, g0, info, grid)
        if rep is None:
            continue
        storage.report_to_files(out_dir, rep)
        reports.append(rep)
        for key, (ok, tol) in rep.flags.items():
            result.flags[f"{rep.name}.{key}"] = bool(ok)
        for key, val in rep.scalars.items():
            if np.isscalar(val):
                result.scalars[f"{rep.name}.{key}"] = val
        for key, (val, resid) in rep.exponents.items():
            result.scalars[f"{rep.name}.{key}"] = val
            result.scalars[f"{rep.name}.{key}.residual"] = resid

    if emit_plots:
        from . import plots
        plots.render_resolution_dir(out_dir)
    return result


def _run_analysis(name, config, traj, traj_pair, gauge_traj, g0, info, grid):
    if name == "max_principle":
        kappa = config["analysis.max_principle.kappa"]
        if kappa is None and "kappa" in info:
            kappa = info["kappa"]
        return ana.max_principle_check(traj, kappa=kappa,
                                       kappa_mode=config["analysis.max_principle.kappa_mode"],
                                       tol=config["analysis.max_principle.tol"])
    if name == "beta_weak":
        expect = config["analysis.beta_weak.expect"]
        point = info.get("marked_point")
        expected = None
        if expect == "flat":
            point = point or (0.0,) * grid.dim
            expected = 0.0
        elif expect == "min_R":
            point, expected = _min_r_point(g0)
        elif point is None:
            point = (0.0,) * grid.dim
        query = ana.BetaWeakQuery(point=tuple(point),
                                  beta=config["analysis.beta_weak.beta"],
                                  c_values=tuple(config["analysis.beta_weak.c_values"]))
        rep = ana.beta_weak_inf(traj, query)
        matrix = rep.matrices["m_C_t"][2]
        cols_sorted = True
        for ti in range(matrix.shape[1]):
            col = matrix[:, ti]
            col = col[~np.isnan(col)]
            if col.size > 1 and np.any(np.diff(col) > 1e-12):
                cols_sorted = False
        rep.flags["monotone_in_C"] = (cols_sorted, 1e-12)
        if expected is not None:
            tol = config["analysis.beta_weak.tol"]
            err = abs(rep.scalars["diagnostic"] - expected)
            rep.scalars["expected"] = expected
            rep.scalars["diagnostic_error"] = err
            rep.flags["matches_expected"] = (err <= tol, tol)
        return rep
    if name == "smoothing":
        rep = ana.smoothing_rates(traj, tuple(config["analysis.smoothing.k_list"]))
        for k in config["analysis.smoothing.k_list"]:
            key = f"slope_k={k}"
            if key in rep.exponents:
                slope, _ = rep.exponents[key]
                rep.flags[f"slope_band_k={k}"] = (-k / 2.0 - 0.1 <= slope <= 0.0, 0.1)
        return rep
    if name == "perturbation":
        if traj_pair is None:
            raise ConfigInvalid("analyses", "perturbation needs second_order_pair data")
        return ana.perturbation_stability(
            traj, traj_pair, info["marked_point"],
            beta=config["analysis.perturbation.beta"],
            c_values=tuple(config["analysis.perturbation.c_values"]))
    if name == "gauge_drift":
        if gauge_traj is None:
            raise ConfigInvalid("gauge.enabled", "gauge_drift needs gauge.enabled = true")
        fit = gauge_mod.drift_fit(gauge_traj)
        rep = ana.AnalysisReport(name="gauge_drift")
        rep.exponents["drift"] = (fit["exponent"], fit["fit_residual"])
        rep.scalars["constant"] = fit["constant"]
        rep.scalars["t_floor"] = fit["t_floor"]
        lo, hi = config["analysis.gauge_drift.band"]
        rep.flags["exponent_band"] = (lo <= fit["exponent"] <= hi, hi - lo)
        rep.matrices["drift"] = (["distance"], [float(t) for t in fit["times"]],
                                 fit["distances"][None, :])
        return rep
    if name == "rf_residual":
        if gauge_traj is None:
            raise ConfigInvalid("gauge.enabled", "rf_residual needs gauge.enabled = true")
        res = gauge_mod.ricci_flow_residual(gauge_traj)
        rep = ana.AnalysisReport(name="rf_residual")
        rep.scalars["max_residual"] = res["max_residual"]
        rep.scalars["refinement_order"] = res["refinement_order"]
        cap = config["analysis.rf_residual.max"]
        lo, hi = config["analysis.rf_residual.order_band"]
        rep.flags["residual_max"] = (res["max_residual"] <= cap, cap)
        if not (math.isnan(lo) or math.isnan(hi)):
            rep.flags["order_band"] = (lo <= res["refinement_order"] <= hi, hi - lo)
        ts = sorted(res["per_time"])
        rep.matrices["residual"] = (["residual"], [float(t) for t in ts],
                                    np.array([[res["per_time"][t] for t in ts]]))
        return rep
    if name == "rigidity":
        if gauge_traj is None:
            raise ConfigInvalid("gauge.enabled", "rigidity needs gauge.enabled = true")
        return ana.rigidity_probe(gauge_traj)
    if name == "picard_mol":
        fc = _flow_config(config)
        background = flat_metric(grid)
        mol_traj = traj if fc.solver == "mol" else _solve(g0, grid, {**config, "flow.solver": "mol"})
        h0 = TensorField(grid, g0.components - background.components, (0, 2))
        pic_traj = traj if fc.solver == "picard" else picard_solve(h0, fc, background)
        sup = max(float(np.max(np.abs(a.components - b.components)))
                  for a, b in zip(mol_traj.states, pic_traj.states))
        diffs = pic_traj.provenance.get("diffs", [])
        ratios = pic_traj.provenance.get("ratios", [])
        rep = ana.AnalysisReport(name="picard_mol")
        rep.scalars["sup_difference"] = sup
        rep.scalars["iterations"] = len(diffs)
        tol = config["analysis.picard_mol.tol"]
        rep.flags["cross_validation"] = (sup <= tol, tol)
        rep.flags["contraction"] = (
            all(r < 1.0 for r in ratios) and all(b < a for a, b in zip(diffs, diffs[1:])), 1.0)
        rep.matrices["picard_diffs"] = (["x_norm_diff"], list(range(len(diffs))),
                                        np.array([diffs]))
        return rep
    if name == "norms":
        rep_norm = x_norm(traj.h_fields())
        rep = ana.AnalysisReport(name="norms")
        rep.scalars["x_norm"] = rep_norm.aggregate
        rep.scalars["sup_term"] = rep_norm.sup_term
        rep.scalars["census_size"] = rep_norm.census_size
        return rep
    raise ConfigInvalid("analyses", f"unknown analysis {name!r}")


def run_scenario(config, out_root, emit_plots=False, workers=None):
    """Execute a validated config; returns (exit_code, output_path)."""
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)
    if workers is None:
        workers = int(os.environ.get("TORUSFLOW_WORKERS", "1"))
    results = []
    try:
        if workers > 1 and len(config["resolutions"]) > 1:
            import concurrent.futures as cf
            with cf.ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_run_resolution, config, n,
                                       out_root / f"res{n}", emit_plots)
                           for n in config["resolutions"]]
                results = [f.result() for f in futures]
        else:
            for n in config["resolutions"]:
                results.append(_run_resolution(config, n, out_root / f"res{n}", emit_plots))
    except (NoContraction, StepUnstable) as exc:
        storage.write_keyvalues(out_root / "manifest.txt",
                                {"name": config["name"], "status": "numerical_abort",
                                 "error": str(exc)})
        return EXIT_NUMERICAL_ABORT, out_root

    entries = {"name": config["name"], "schema_version": SCHEMA_VERSION,
               "seed": config["seed"],
               "resolutions": config["resolutions"]}
    for key in sorted(SCHEMA):
        if config.get(key) is not None:
            entries[f"config.{key}"] = config[key]
    all_ok = True
    for res in results:
        for key, ok in sorted(res.flags.items()):
            entries[f"gate.res{res.resolution}.{key}"] = bool(ok)
            all_ok = all_ok and ok
        for key, val in sorted(res.scalars.items()):
            entries[f"scalar.res{res.resolution}.{key}"] = val
    entries["status"] = "pass" if all_ok else "gate_failure"
    storage.write_keyvalues(out_root / "manifest.txt", entries, header="scenario run")
    return (EXIT_PASS if all_ok else EXIT_GATE_FAILURE), out_root


# ---------------------------------------------------------------------------
# built-in scenarios
# ---------------------------------------------------------------------------


def built_in_scenarios():
    two_pi = repr(2.0 * math.pi)
    mid = repr(math.pi) + "," + repr(math.pi)
    base = {"schema_version": "1", "dim": "2", "side_length": two_pi}
    defs = {
        "flat-smoke": {
            **base,
            "name": "flat-smoke",
            "resolutions": "32",
            "seed": "0",
            "data.kind": "flat",
            "flow.final_time": "0.1",
            "gauge.enabled": "true",
            "analyses": "max_principle,beta_weak,rf_residual,rigidity",
            "analysis.beta_weak.beta": "0.4",
            "analysis.beta_weak.c_values": "1,2",
            "analysis.beta_weak.expect": "flat",
            "analysis.beta_weak.tol": "1e-9",
            "analysis.rf_residual.max": "1e-12",
            "analysis.rf_residual.order_band": "nan,nan",
        },
        "max-principle-kappa": {
            **base,
            "name": "max-principle-kappa",
            "resolutions": "64",
            "seed": "0",
            "data.kind": "conformal_kappa",
            "data.kappa": "-1.0",
            "data.base_amplitude": "0.02",
            "analyses": "max_principle",
            "analysis.max_principle.kappa_mode": "smooth",
        },
        "kappa-rough": {
            **base,
            "name": "kappa-rough",
            "resolutions": "64",
            "seed": "11",
            "data.kind": "kappa_rough",
            "data.kappa": "-1.0",
            "data.base_amplitude": "0.015",
            "data.amplitude": "0.008",
            "analyses": "max_principle",
            "analysis.max_principle.kappa_mode": "uniform_limit",
            "analysis.max_principle.tol": "5e-3",
        },
        "smoothing-rates": {
            **base,
            "name": "smoothing-rates",
            "resolutions": "64,128",
            "seed": "7",
            "data.kind": "hoelder_fourier",
            "data.amplitude": "0.03",
            "data.alpha": "0.3",
            "analyses": "smoothing,max_principle",
        },
        "perturbation-stability": {
            **base,
            "name": "perturbation-stability",
            "resolutions": "64,128",
            "seed": "3",
            "data.kind": "second_order_pair",
            "data.amplitude": "0.02",
            "data.eta": "1.0",
            "data.base_amplitude": "0.02",
            "data.marked_point": mid,
            "analyses": "perturbation",
            "analysis.perturbation.beta": "0.4",
            "analysis.perturbation.c_values": "2,3",
        },
        "gauge-drift": {
            **base,
            "name": "gauge-drift",
            "resolutions": "64",
            "seed": "21",
            "data.kind": "hoelder_fourier",
            "data.amplitude": "0.03",
            "data.alpha": "0.1",
            "gauge.enabled": "true",
            "analyses": "gauge_drift,max_principle",
        },
        "gauge-residual": {
            **base,
            "name": "gauge-residual",
            "resolutions": "64",
            "seed": "0",
            "data.kind": "conformal",
            "data.amplitude": "0.005",
            "gauge.enabled": "true",
            "analyses": "rf_residual,max_principle",
        },
        "picard-vs-mol": {
            **base,
            "name": "picard-vs-mol",
            "resolutions": "64",
            "seed": "0",
            "data.kind": "conformal",
            "data.amplitude": "0.005",
            "analyses": "picard_mol,max_principle",
        },
        "beta-weak-sanity": {
            **base,
            "name": "beta-weak-sanity",
            "resolutions": "64",
            "seed": "0",
            "data.kind": "conformal",
            "data.amplitude": "0.01",
            "analyses": "beta_weak,max_principle",
            "analysis.beta_weak.beta": "0.45",
            "analysis.beta_weak.c_values": "1,2,4",
            "analysis.beta_weak.expect": "min_R",
            "analysis.beta_weak.tol": "1e-2",
        },
        "rigidity-probe": {
            **base,
            "name": "rigidity-probe",
            "resolutions": "64",
            "seed": "13",
            "data.kind": "rough_flat_pullback",
            "data.amplitude": "0.01",
            "gauge.enabled": "true",
            "analyses": "rigidity,beta_weak,max_principle",
            "analysis.beta_weak.beta": "0.4",
            "analysis.beta_weak.c_values": "1,2",
        },
        "germ-probe": {
            **base,
            "name": "germ-probe",
            "resolutions": "64",
            "seed": "0",
            "data.kind": "germ",
            "data.amplitude": "0.05",
            "data.marked_point": mid,
            "analyses": "beta_weak,max_principle",
            "analysis.beta_weak.beta": "0.4",
            "analysis.beta_weak.c_values": "1,2,4",
        },
    }
    return defs
