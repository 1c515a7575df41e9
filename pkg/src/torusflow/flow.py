"""The flow engine: quadratic terms, Picard iteration, and method of lines.

Writing the evolving metric as g(t) = gbar + h(t) with a stationary flat
background gbar, the gauge-fixed evolution of h splits as

    d/dt h = Lap_gbar h + 2 Rm_gbar(h) + Q0[h] + div Q1[h],

where, with G = (gbar + h)^{-1} and all derivatives flat,

    Qgrad_ij = 1/2 G^{pq} G^{ml} ( d_i h_pm d_j h_ql + 2 d_m h_ip d_q h_jl
               - 2 d_m h_ip d_l h_jq - 2 d_p h_il d_j h_qm - 2 d_i h_pm d_q h_jl )
    Q0_ij = Qgrad_ij - (d_p G^{pq}) d_q h_ij  [+ curvature-background couplings]
    Q1^p_ij = (G^{pq} - gbar^{pq}) d_q h_ij.

This split form agrees with the strong form -2 Ric(g) - L_{X(g)} g to
truncation error; `mol_rhs` exposes the strong form so the two evaluation
routes can be checked against each other.

Two solvers produce trajectories on the sqrt(t)-graded lattice
t_j = T (j/N)^2:

  * `picard_solve` iterates the Duhamel map
        F[h, h0](t) = heat(h0, t) + int_0^t heat(Q0_s + div Q1_s, t - s) ds
    from the zero tensor, and records the geometric decay of successive
    iterate differences in the X-norm.
  * `mol_evolve` uses exponential time differencing (ETD-RK2, Cox & Matthews
    2002): the heat part is applied exactly per substep, the nonlinearity
    explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GammaExceeded, NoContraction, StepUnstable
from .gauge import deturck_vector
from .geometry import (curvature, dealias_array, derivative_array, gradient_array,
                       inverse_metric_array, lie_derivative)
from .grid import MetricField, TensorField
from .heatkernel import k_squared_form
from .norms import x_norm
from .trajectory import FlowTrajectory, TensorTrajectory, sqrt_graded_times


@dataclass
class FlowConfig:
    final_time: float = 0.1
    solver: str = "mol"
    n_times: int = 32            # output lattice size; t_min = T / n_times^2
    substeps: int = 4            # ETD substeps per output interval
    tol: float = 1e-9            # Picard stopping tolerance in the X-norm
    epsilon_guard: float = 0.05  # largest allowed sup |h0|
    max_iterations: int = 50
    norm_levels: int = 4         # dyadic levels for the solver's stopping norm

    def __post_init__(self):
        if not 0 < self.final_time <= 1.0:
            raise ValueError("final_time must lie in (0, 1]")
        if self.solver not in ("picard", "mol"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")

    def output_times(self):
        return sqrt_graded_times(self.final_time, self.n_times)


def _operator_sup(grid, h_comps, bar_inv_sqrt):
    rel = np.einsum('...ia,...ab,...bj->...ij', bar_inv_sqrt, h_comps, bar_inv_sqrt)
    return float(np.max(np.abs(np.linalg.eigvalsh(rel))))


def _bar_inv_sqrt(gbar_matrix):
    eigs, vecs = np.linalg.eigh(gbar_matrix)
    return (vecs * (1.0 / np.sqrt(eigs))) @ vecs.T


def _constant_matrix(gbar):
    comps = gbar.components
    flat = comps.reshape(-1, gbar.grid.dim, gbar.grid.dim)
    if not np.all(flat == flat[0]):
        return None
    return flat[0].copy()


def q_terms(h, gbar, riemann=None):
    """Quadratic source terms (Q0, Q1) of the perturbation equation.

    h is measured against gbar; |h|_gbar must stay below 1 for the inverse
    expansion to converge. With a synthetic `riemann` input (stored as
    Rm[..., m, p, i, j] = R^m_{pij}) the curvature couplings
        (G - gbar^{-1})^{pq} (R^m_{pij} h_{mq} + R^m_{pji} h_{mq})
      + (gbar^{-1} - G)^{pq} (R^m_{ipq} h_{mj} + R^m_{jpq} h_{im})
    are included; they vanish on the flat backgrounds this package evolves.
    """
    grid = h.grid
    hbar = h.components
    bar_matrix = _constant_matrix(gbar)
    if bar_matrix is not None:
        _check_gamma(grid, hbar, bar_matrix)
        dh = gradient_array(grid, hbar)
        bar_inv = np.linalg.inv(bar_matrix)
    else:
        from .trajectory import relative_sup_distance
        gamma = relative_sup_distance(MetricField(grid, gbar.components + hbar), gbar)
        if gamma >= 1.0:
            raise GammaExceeded(f"|h|_gbar reaches {gamma:.3f} >= 1")
        from .geometry import covariant_derivative
        dh = covariant_derivative(h, gbar, 1).components
        bar_inv = inverse_metric_array(gbar)

    G = np.linalg.inv(gbar.components + hbar)
    E = G - bar_inv

    # factored contraction of the five gradient terms; the d_p h_il d_j h_qm
    # term is the transpose of the d_i h_pm d_q h_jl one
    u = np.einsum('...iqm,...ml->...iql', np.einsum('...ipm,...pq->...iqm', dh, G), G)
    w = np.einsum('...miq,...ml->...iql', np.einsum('...mip,...pq->...miq', dh, G), G)
    term_a = np.einsum('...iql,...jql->...ij', u, dh)
    term_e = np.einsum('...iql,...qjl->...ij', u, dh)
    term_b = np.einsum('...iql,...qjl->...ij', w, dh)
    term_c = np.einsum('...iql,...ljq->...ij', w, dh)
    q_grad = 0.5 * (term_a + 2.0 * term_b - 2.0 * term_c
                    - 2.0 * np.swapaxes(term_e, -1, -2) - 2.0 * term_e)
    # d_p G^{pq} = -(G dh G)^{..q}, contracted on the derivative slot
    div_g = -np.einsum('...pa,...pab,...bq->...q', G, dh, G, optimize=True)
    q0 = q_grad - np.einsum('...q,...qij->...ij', div_g, dh)

    if riemann is not None:
        rm = riemann.components
        q0 = q0 + (np.einsum('...pq,...mpij,...mq->...ij', E, rm, hbar, optimize=True)
                   + np.einsum('...pq,...mpji,...mq->...ij', E, rm, hbar, optimize=True)
                   - np.einsum('...pq,...mipq,...mj->...ij', E, rm, hbar, optimize=True)
                   - np.einsum('...pq,...mjpq,...im->...ij', E, rm, hbar, optimize=True))

    q0 = dealias_array(grid, q0)
    q0 = 0.5 * (q0 + np.swapaxes(q0, -1, -2))
    q1 = dealias_array(grid, np.einsum('...pq,...qij->...pij', E, dh))
    return TensorField(grid, q0, (0, 2)), TensorField(grid, q1, (1, 2))


def _check_gamma(grid, h_comps, bar_matrix):
    """Guard |h|_gbar < 1; cheap frobenius bound first, exact eigencheck after."""
    if np.array_equal(bar_matrix, np.eye(grid.dim)):
        frob = math.sqrt(float(np.max(np.sum(h_comps * h_comps, axis=(-2, -1)))))
        if frob < 1.0:
            return
        gamma = float(np.max(np.abs(np.linalg.eigvalsh(h_comps))))
    else:
        gamma = _operator_sup(grid, h_comps, _bar_inv_sqrt(bar_matrix))
    if gamma >= 1.0:
        raise GammaExceeded(f"|h|_gbar reaches {gamma:.3f} >= 1")


def divergence_first_slot(f):
    """Spectral divergence on the leading (contravariant) slot of a field."""
    grid = f.grid
    comps = f.components
    out = np.zeros(grid.shape + comps.shape[grid.dim + 1:])
    for p in range(grid.dim):
        sl = (slice(None),) * grid.dim + (p,)
        out = out + derivative_array(grid, comps[sl], axis=p, order=1)
    return TensorField(grid, out, (0, f.rank[1]))


def split_rhs(h, gbar):
    """Lap h + Q0 + div Q1 on a flat background (the stepping form)."""
    from .geometry import laplacian_array
    grid = h.grid
    bar_matrix = _constant_matrix(gbar)
    q0, q1 = q_terms(h, gbar)
    lap = laplacian_array(grid, h.components, bar_matrix)
    rhs = lap + q0.components + divergence_first_slot(q1).components
    return TensorField(grid, rhs, (0, 2))


def mol_rhs(g, gbar):
    """Strong-form right side -2 Ric(g) - L_X g with X the DeTurck vector.

    Agrees with `split_rhs` applied to h = g - gbar up to spectral truncation;
    that agreement is the engine's central self-check.
    """
    x = deturck_vector(g, gbar)
    ric = curvature(g)[1]
    rhs = -2.0 * ric.components - lie_derivative(x, g).components
    return TensorField(g.grid, rhs, (0, 2))


def _nonlinear_rhs_fft(grid, h_comps, gbar):
    """FFT of Q0 + div Q1 for the exponential integrator."""
    q0, q1 = q_terms(TensorField(grid, h_comps, (0, 2)), gbar)
    n = q0.components + divergence_first_slot(q1).components
    return np.fft.fftn(n, axes=tuple(range(grid.dim)))


def _phi1(z):
    out = np.ones_like(z)
    small = np.abs(z) < 1e-8
    zs = np.where(small, 1.0, z)
    out = np.expm1(zs) / zs
    return np.where(small, 1.0 + z / 2.0, out)


def _phi2(z):
    small = np.abs(z) < 1e-6
    zs = np.where(small, 1.0, z)
    out = (np.expm1(zs) - zs) / (zs * zs)
    return np.where(small, 0.5 + z / 6.0, out)


def mol_evolve(g0, config, background=None):
    """Exponential-integrator evolution of a metric toward its background.

    Stores states on the sqrt(t)-graded lattice down to T / n_times^2. Raises
    StepUnstable if a state leaves the unit bilipschitz neighborhood.
    """
    grid = g0.grid
    gbar = background
    if gbar is None:
        from .grid import flat_metric
        gbar = flat_metric(grid)
    bar_matrix = _constant_matrix(gbar)
    if bar_matrix is None:
        raise ValueError("mol_evolve needs a constant flat background")
    bar_inv_sqrt = _bar_inv_sqrt(bar_matrix)
    h = g0.components - gbar.components
    sup0 = _operator_sup(grid, h, bar_inv_sqrt)
    if sup0 >= config.epsilon_guard:
        raise ValueError(
            f"initial sup |h|_gbar = {sup0:.4f} exceeds epsilon_guard {config.epsilon_guard}")

    lam = -k_squared_form(grid, bar_matrix)
    lam_c = lam[(...,) + (None,) * 2]

    out_times = config.output_times()
    grid_axes = tuple(range(grid.dim))
    H = np.fft.fftn(h, axes=grid_axes)
    states = []
    t = 0.0
    roots = np.concatenate([[0.0], np.sqrt(out_times)])
    for j in range(len(out_times)):
        sub = np.linspace(roots[j], roots[j + 1], config.substeps + 1) ** 2
        for s in range(config.substeps):
            dt = sub[s + 1] - sub[s]
            if dt <= 0:
                continue
            z = lam_c * dt
            e_full = np.exp(z)
            p1 = _phi1(z) * dt
            p2 = _phi2(z) * dt
            h_phys = np.real(np.fft.ifftn(H, axes=grid_axes))
            n0 = _nonlinear_rhs_fft(grid, h_phys, gbar)
            a = e_full * H + p1 * n0
            a_phys = np.real(np.fft.ifftn(a, axes=grid_axes))
            n1 = _nonlinear_rhs_fft(grid, a_phys, gbar)
            H = a + p2 * (n1 - n0)
        t = out_times[j]
        h_phys = np.real(np.fft.ifftn(H, axes=grid_axes))
        h_phys = 0.5 * (h_phys + np.swapaxes(h_phys, -1, -2))
        if _operator_sup(grid, h_phys, bar_inv_sqrt) >= 1.0:
            raise StepUnstable(f"bilipschitz guard violated at t = {t:.3e}")
        states.append(MetricField(grid, gbar.components + h_phys))
        H = np.fft.fftn(h_phys, axes=grid_axes)

    return FlowTrajectory(out_times, states, gbar, config, initial=g0,
                          provenance={"solver": "mol", "substeps": config.substeps})


def _trapezoid_weights(nodes):
    w = np.zeros(len(nodes))
    if len(nodes) == 1:
        return w
    d = np.diff(nodes)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def picard_map(h_traj, h0, config, background):
    """One application of the Duhamel fixed-point map on the closed lattice.

    h_traj holds the current iterate at times {0} + output lattice; the
    result is F[h, h0] on the same lattice, with the time integral taken by
    trapezoid on the sqrt(t)-graded nodes and the divergence moved onto Q1
    spectrally before convolution.
    """
    grid = h0.grid
    bar_matrix = _constant_matrix(background)
    grid_axes = tuple(range(grid.dim))
    times = h_traj.times
    q_specs = []
    for f in h_traj.fields:
        q0, q1 = q_terms(f, background)
        n = q0.components + divergence_first_slot(q1).components
        q_specs.append(np.fft.fftn(n, axes=grid_axes))
    h0_spec = np.fft.fftn(h0.components, axes=grid_axes)
    lam = -k_squared_form(grid, bar_matrix)[(...,) + (None,) * 2]

    out_fields = []
    for j, t in enumerate(times):
        acc = np.exp(lam * t) * h0_spec
        if j > 0:
            w = _trapezoid_weights(times[:j + 1])
            for i in range(j + 1):
                if w[i] == 0.0:
                    continue
                acc = acc + w[i] * np.exp(lam * (t - times[i])) * q_specs[i]
        phys = np.real(np.fft.ifftn(acc, axes=grid_axes))
        phys = 0.5 * (phys + np.swapaxes(phys, -1, -2))
        out_fields.append(TensorField(grid, phys, (0, 2)))
    return TensorTrajectory(times, out_fields)


def picard_solve(h0, config, background=None):
    """Fixed-point iteration of the Duhamel map from the zero tensor.

    Stops when the X-norm of successive differences drops below tol; raises
    NoContraction after three consecutive non-decreasing differences.
    """
    grid = h0.grid
    gbar = background
    if gbar is None:
        from .grid import flat_metric
        gbar = flat_metric(grid)
    bar_matrix = _constant_matrix(gbar)
    if bar_matrix is None:
        raise ValueError("picard_solve needs a constant flat background")
    sup0 = _operator_sup(grid, h0.components, _bar_inv_sqrt(bar_matrix))
    if sup0 >= config.epsilon_guard:
        raise ValueError(
            f"initial sup |h0|_gbar = {sup0:.4f} exceeds epsilon_guard {config.epsilon_guard}")

    times = np.concatenate([[0.0], config.output_times()])
    zero = TensorField(grid, np.zeros(grid.shape + (grid.dim, grid.dim)), (0, 2))
    current = TensorTrajectory(times, [zero] * len(times))
    diffs = []
    ratios = []
    bad_streak = 0
    for it in range(config.max_iterations):
        nxt = picard_map(current, h0, config, gbar)
        diff_fields = [TensorField(grid, a.components - b.components, (0, 2))
                       for a, b in zip(nxt.fields, current.fields)]
        diff_traj = TensorTrajectory(times, diff_fields)
        d = x_norm(diff_traj, levels=config.norm_levels).aggregate
        diffs.append(d)
        current = nxt
        if len(diffs) >= 2 and diffs[-2] > 0:
            ratios.append(diffs[-1] / diffs[-2])
            if diffs[-1] >= diffs[-2]:
                bad_streak += 1
                if bad_streak >= 3:
                    raise NoContraction(
                        f"X-norm differences not decreasing for 3 iterations: {diffs[-4:]}")
            else:
                bad_streak = 0
        if d < config.tol:
            break
    else:
        if diffs[-1] >= config.tol:
            raise NoContraction(
                f"no convergence in {config.max_iterations} iterations; last diff {diffs[-1]:.3e}")

    states = []
    for f in current.fields[1:]:
        comps = gbar.components + f.components
        states.append(MetricField(grid, 0.5 * (comps + np.swapaxes(comps, -1, -2))))
    provenance = {"solver": "picard", "iterations": len(diffs),
                  "diffs": diffs, "ratios": ratios}
    return FlowTrajectory(times[1:], states, gbar, config, initial=None,
                          provenance=provenance)
