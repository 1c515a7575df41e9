"""DeTurck vector field, the diffeomorphism ODE, and gauge pullback.

The gauge maps chi_t solve

    d/dt chi_t(p) = X_t(chi_t(p)),     chi_{t0} = id,

where X is the DeTurck vector of the evolving metric against the flat
background. Pulling the flow back by chi_t removes the gauge term, so
gtilde(t) = chi_t^* g(t) should satisfy d/dt gtilde = -2 Ric(gtilde); the
residual of that equation is this module's main diagnostic.

Off-grid values are obtained by trigonometric interpolation (exact evaluation
of the truncated Fourier series), so the spatial accuracy of the integrator
matches the spectral accuracy of the fields. Nyquist rows are dropped during
interpolation; fields produced by this package are 2/3-band-limited anyway.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import JacobianDegenerate
from .geometry import curvature, christoffel, gradient_array, inverse_metric_array
from .grid import MetricField, TensorField
from .trajectory import TensorTrajectory

# ---------------------------------------------------------------------------
# DeTurck vector
# ---------------------------------------------------------------------------


def deturck_vector(g, gbar):
    """X^k = g^{ij} (GammaBar^k_{ij} - Gamma^k_{ij})."""
    ginv = inverse_metric_array(g)
    gam = christoffel(g).components
    gam_bar = christoffel(gbar).components
    x = np.einsum('...ij,...kij->...k', ginv, gam_bar - gam)
    return TensorField(g.grid, x, (1, 0))


# ---------------------------------------------------------------------------
# trigonometric interpolation
# ---------------------------------------------------------------------------


def _interp_spectrum(grid, arr):
    """Normalized FFT with Nyquist rows zeroed, ready for point evaluation."""
    spec = np.fft.fftn(arr, axes=tuple(range(grid.dim))) / grid.n_points
    n = grid.points_per_axis
    if n % 2 == 0:
        for a in range(grid.dim):
            sl = [slice(None)] * spec.ndim
            sl[a] = n // 2
            spec[tuple(sl)] = 0.0
    return spec


def trig_interpolate(grid, arr, points, spectrum=None):
    """Evaluate a grid array at arbitrary points, shape (P, dim) -> (P, comps)."""
    if spectrum is None:
        spectrum = _interp_spectrum(grid, arr)
    pts = np.asarray(points, dtype=float)
    comp_shape = spectrum.shape[grid.dim:]
    work = spectrum.reshape(spectrum.shape[:grid.dim] + (-1,))
    ks = grid.wavenumbers()
    # fold grid axes one at a time: after axis a, leading axis is the point index
    cur = work
    for a in range(grid.dim):
        phase = np.exp(1j * np.outer(pts[:, a], ks[a]))  # (P, N)
        if a == 0:
            flat = cur.reshape(cur.shape[0], -1)          # (N, rest)
            cur = phase @ flat                            # (P, rest)
            cur = cur.reshape((pts.shape[0],) + work.shape[1:])
        else:
            # cur: (P, N_a, trailing...); contract the current leading mode axis
            cur = np.einsum('pk,pk...->p...', phase, cur)
    out = np.real(cur)
    return out.reshape((pts.shape[0],) + comp_shape)


# ---------------------------------------------------------------------------
# displacement fields
# ---------------------------------------------------------------------------


class DiffeoField:
    """chi(p) = p + u(p) mod torus, as a periodic displacement field u."""

    def __init__(self, grid, displacement, time):
        displacement = np.asarray(displacement, dtype=float)
        if displacement.shape != grid.shape + (grid.dim,):
            raise ValueError("displacement has wrong shape")
        self.grid = grid
        self.displacement = displacement
        self.time = float(time)
        jac = self.jacobian()
        det = np.linalg.det(jac)
        if float(det.min()) <= 0.0:
            raise JacobianDegenerate(
                f"det(I + Du) reaches {float(det.min()):.3e} <= 0 at t={time}")

    def jacobian(self):
        """J[..., i, a] = d_i chi^a = delta_ia + d_i u^a."""
        du = gradient_array(self.grid, self.displacement)
        return np.eye(self.grid.dim) + du

    def mapped_points(self):
        """chi applied to every grid point, flattened to (P, dim)."""
        coords = self.grid.coordinates()
        pts = np.stack([coords[a].ravel() for a in range(self.grid.dim)], axis=-1)
        return pts + self.displacement.reshape(-1, self.grid.dim)

    def max_displacement(self):
        return float(np.max(np.sqrt(np.sum(self.displacement ** 2, axis=-1))))


def identity_diffeo(grid, time):
    return DiffeoField(grid, np.zeros(grid.shape + (grid.dim,)), time)


def compose_displacements(grid, first, second):
    """Displacement of chi_second after chi_first: u(p) = u1(p) + u2(chi1(p))."""
    pts = (np.stack([grid.coordinates()[a].ravel() for a in range(grid.dim)], axis=-1)
           + first.reshape(-1, grid.dim))
    u2_at = trig_interpolate(grid, second, pts)
    return first + u2_at.reshape(first.shape)


# ---------------------------------------------------------------------------
# the gauge ODE
# ---------------------------------------------------------------------------


class _VelocitySampler:
    """X(x, t) with spectra cached per stored time.

    Between stored slices the spectra are interpolated by a cubic fit through
    the four nearest nodes (Lagrange on nonuniform spacing), falling back to
    the local linear chord at the boundary intervals.
    """

    def __init__(self, traj):
        self.grid = traj.grid
        self.times = traj.times
        self.spectra = []
        for state in traj.states:
            x = deturck_vector(state, traj.background)
            self.spectra.append(_interp_spectrum(self.grid, x.components))

    def _spectrum_at(self, t):
        times = self.times
        if t <= times[0]:
            return self.spectra[0]
        if t >= times[-1]:
            return self.spectra[-1]
        i = int(np.searchsorted(times, t)) - 1
        i = min(max(i, 0), len(times) - 2)
        lo = max(0, i - 1)
        hi = min(len(times), i + 3)
        nodes = times[lo:hi]
        out = 0.0
        for a in range(len(nodes)):
            w = 1.0
            for b in range(len(nodes)):
                if a != b:
                    w *= (t - nodes[b]) / (nodes[a] - nodes[b])
            out = out + w * self.spectra[lo + a]
        return out

    def __call__(self, points, t):
        return trig_interpolate(self.grid, None, points, spectrum=self._spectrum_at(t))


def _rk4_step(sampler, pts, t, dt):
    k1 = sampler(pts, t)
    k2 = sampler(pts + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = sampler(pts + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = sampler(pts + dt * k3, t + dt)
    return pts + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class GaugeTrajectory:
    """Gauge maps and pulled-back metrics over the stored flow times."""

    def __init__(self, times, diffeos, pulled_back, anchor_time, source,
                 chi_zero_displacement=None, chi_zero_error=None):
        self.times = np.asarray(times, dtype=float)
        self.diffeos = list(diffeos)
        self.pulled_back = list(pulled_back)
        self.anchor_time = float(anchor_time)
        self.source = source
        self.chi_zero_displacement = chi_zero_displacement
        self.chi_zero_error = chi_zero_error

    @property
    def grid(self):
        return self.diffeos[0].grid


def integrate_diffeo(traj, t0, substeps=1, with_pullback=True):
    """Integrate the gauge ODE across the stored times, anchored at chi_{t0} = id.

    Backward integration stops at the smallest stored time; the t -> 0 limit
    map is reported as a sqrt(t)-extrapolation with an error bar from the
    drift constant, never as an exact limit.
    """
    times = traj.times
    matches = np.where(np.abs(times - t0) <= 1e-12 * max(1.0, t0))[0]
    if matches.size == 0:
        raise ValueError(f"anchor time {t0} is not a stored time")
    i0 = int(matches[0])
    grid = traj.grid
    sampler = _VelocitySampler(traj)
    base = np.stack([grid.coordinates()[a].ravel() for a in range(grid.dim)], axis=-1)

    disp = {i0: np.zeros_like(base)}
    pts = base.copy()
    for i in range(i0, len(times) - 1):
        t, tn = times[i], times[i + 1]
        for s in range(substeps):
            a = t + (tn - t) * s / substeps
            b = t + (tn - t) * (s + 1) / substeps
            pts = _rk4_step(sampler, pts, a, b - a)
        disp[i + 1] = pts - base
    pts = base.copy()
    for i in range(i0, 0, -1):
        t, tn = times[i], times[i - 1]
        for s in range(substeps):
            a = t + (tn - t) * s / substeps
            b = t + (tn - t) * (s + 1) / substeps
            pts = _rk4_step(sampler, pts, a, b - a)
        disp[i - 1] = pts - base

    diffeos = []
    pulled = []
    for i, t in enumerate(times):
        u = disp[i].reshape(grid.shape + (grid.dim,))
        chi = DiffeoField(grid, u, t)
        diffeos.append(chi)
        if with_pullback:
            pulled.append(pullback_metric(traj.states[i], chi))

    chi0, chi0_err = _extrapolate_to_zero(times, diffeos)
    return GaugeTrajectory(times, diffeos, pulled, t0, traj,
                           chi_zero_displacement=chi0, chi_zero_error=chi0_err)


def _extrapolate_to_zero(times, diffeos, n_fit=3):
    """Linear-in-sqrt(t) extrapolation of the displacement to t = 0."""
    n_fit = min(n_fit, len(times))
    roots = np.sqrt(times[:n_fit])
    stack = np.stack([d.displacement for d in diffeos[:n_fit]], axis=0)
    A = np.stack([np.ones_like(roots), roots], axis=-1)
    coef, *_ = np.linalg.lstsq(A, stack.reshape(n_fit, -1), rcond=None)
    u0 = coef[0].reshape(stack.shape[1:])
    slope = np.abs(coef[1]).max() if len(coef) > 1 else 0.0
    err = float(slope * math.sqrt(times[0]))
    return u0, err


def pullback_metric(g, chi):
    """(chi^* g)_{ij}(p) = d_i chi^a d_j chi^b g_{ab}(chi(p))."""
    grid = g.grid
    jac = chi.jacobian()
    det = np.linalg.det(jac)
    if float(det.min()) <= 0.0:
        raise JacobianDegenerate("pullback through a non-invertible map")
    gvals = trig_interpolate(grid, g.components, chi.mapped_points())
    gvals = gvals.reshape(grid.shape + (grid.dim, grid.dim))
    out = np.einsum('...ia,...jb,...ab->...ij', jac, jac, gvals)
    out = 0.5 * (out + np.swapaxes(out, -1, -2))
    return MetricField(grid, out)


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


def _nonuniform_derivative(times, stack, k, width=1):
    """Time derivative at node k from a 2*width+1 stencil (exact for deg 2*width)."""
    lo = max(0, k - width)
    hi = min(len(times), k + width + 1)
    ts = times[lo:hi] - times[k]
    order = len(ts)
    van = np.vander(ts, order, increasing=True).T   # van[m, node] = ts^m
    rhs = np.zeros(order)
    rhs[1] = 1.0
    w = np.linalg.solve(van, rhs)
    return np.einsum('t,t...->...', w, stack[lo:hi])


def ricci_flow_residual(gtraj, stencil_width=1):
    """Max deviation of the pulled-back trajectory from d/dt g = -2 Ric(g).

    Reports per-time residuals, the overall max, and the same quantities on
    the half-thinned lattice together with the observed refinement order.
    """
    times = gtraj.times
    if len(times) < 3:
        raise ValueError("need at least 3 stored times")
    stack = np.stack([m.components for m in gtraj.pulled_back], axis=0)
    ric = [curvature(m)[1].components for m in gtraj.pulled_back]

    def residuals(idx_set):
        sub_t = times[idx_set]
        sub_stack = stack[idx_set]
        out = {}
        for local_k in range(1, len(idx_set) - 1):
            dgdt = _nonuniform_derivative(sub_t, sub_stack, local_k, stencil_width)
            k_global = idx_set[local_k]
            res = dgdt + 2.0 * ric[k_global]
            out[float(sub_t[local_k])] = float(np.max(np.abs(res)))
        return out

    full_idx = np.arange(len(times))
    coarse_idx = full_idx[::2]
    full = residuals(full_idx)
    coarse = residuals(coarse_idx)
    shared = sorted(set(full) & set(coarse))
    orders = [math.log2(coarse[t] / full[t]) for t in shared if full[t] > 0 and coarse[t] > 0]
    return {
        "max_residual": max(full.values()),
        "per_time": full,
        "coarse_per_time": coarse,
        "refinement_order": float(np.median(orders)) if orders else float("nan"),
        "stencil_width": stencil_width,
    }


def drift_fit(gtraj, t_floor=None):
    """Fit of the gauge drift against the sqrt-time law.

    D(t) = max_p dist(chi_{t_min}(p), chi_t(p)) is fitted two ways:
      exponent  : slope of log D vs log t over resolved times t >= t_floor
      constant  : max of D / (sqrt(t) - sqrt(t_min))
    The default floor is 6 / k_nyquist^2, below which rough data is not
    resolved and the drift speed saturates at the grid cutoff.
    """
    grid = gtraj.grid
    times = gtraj.times
    t1 = times[0]
    if t_floor is None:
        k_ny = math.pi / max(grid.spacings)
        t_floor = 6.0 / k_ny ** 2
    base = gtraj.diffeos[0].displacement
    dvals = []
    for chi in gtraj.diffeos:
        delta = chi.displacement - base
        for a in range(grid.dim):
            L = grid.side_lengths[a]
            delta[..., a] = (delta[..., a] + 0.5 * L) % L - 0.5 * L
        dvals.append(float(np.max(np.sqrt(np.sum(delta ** 2, axis=-1)))))
    dvals = np.array(dvals)
    denom = np.sqrt(times) - math.sqrt(t1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(denom > 0, dvals / denom, 0.0)
    constant = float(np.max(ratio))
    mask = (times >= t_floor) & (dvals > 0)
    if mask.sum() >= 3:
        slope, intercept = np.polyfit(np.log(times[mask]), np.log(dvals[mask]), 1)
        fit = np.polyval([slope, intercept], np.log(times[mask]))
        residual = float(np.sqrt(np.mean((np.log(dvals[mask]) - fit) ** 2)))
    else:
        slope, residual = float("nan"), float("nan")
    return {
        "exponent": float(slope),
        "fit_residual": residual,
        "constant": constant,
        "t_floor": float(t_floor),
        "distances": dvals,
        "times": times,
    }
