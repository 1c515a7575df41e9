"""Generators of rough initial metrics and controlled metric pairs.

A grid cannot hold data that is merely continuous; "rough" here means a
random field whose Fourier amplitudes decay like |k|^(-n/2 - alpha), cut at
the grid Nyquist frequency. In the continuum limit such Weierstrass-type
fields are C^alpha and nowhere C^1; on a fixed grid they are band-limited
trigonometric polynomials, so every experiment downstream must be run at two
or more resolutions and accept only resolution-stable fits.

All generators are deterministic functions of (spec, seed): bit-identical
output for identical inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RadialTangencyViolated, ResolutionTooCoarse
from .grid import MetricField, TorusGrid


@dataclass(frozen=True)
class RoughSpec:
    kind: str = "hoelder_fourier"       # hoelder_fourier | conformal_bump | homogeneous_germ
    amplitude: float = 0.03             # sup operator norm of g - delta
    alpha: float = 0.3                  # Hoelder exponent, in (0, 1)
    seed: int = 0
    marked_point: tuple = (0.0, 0.0)
    eta: float = 1.0                    # agreement exponent of metric pairs

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.amplitude < 0:
            raise ValueError("amplitude must be nonnegative")
        if self.eta <= 0:
            raise ValueError("eta must be positive")


def _mode_numbers(n):
    return np.fft.fftfreq(n, d=1.0 / n)


def _random_real_field(grid, rng, alpha):
    """Real field with spectrum ~ |k|^(-dim/2 - alpha) and random phases."""
    n = grid.points_per_axis
    dim = grid.dim
    modes = [_mode_numbers(n)] * dim
    mesh = np.meshgrid(*modes, indexing="ij")
    ksq = sum(m ** 2 for m in mesh)
    kmag = np.sqrt(ksq)
    decay = np.zeros(grid.shape)
    nonzero = kmag > 0
    decay[nonzero] = kmag[nonzero] ** (-dim / 2.0 - alpha)
    coef = (rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)) * decay
    # real field: hermitian-symmetrize, kill the mean and the Nyquist ring
    spec = np.zeros(grid.shape, dtype=complex)
    spec += coef
    rev = tuple(slice(None, None, -1) for _ in range(dim))
    spec = 0.5 * (spec + np.conj(np.roll(spec[rev], 1, axis=tuple(range(dim)))))
    spec[(0,) * dim] = 0.0
    for a in range(dim):
        sl = [slice(None)] * dim
        sl[a] = n // 2
        spec[tuple(sl)] = 0.0
    out = np.real(np.fft.ifftn(spec))
    return out


def _normalize_operator_sup(h, target):
    sup = float(np.max(np.abs(np.linalg.eigvalsh(h))))
    if sup == 0.0:
        return h
    return h * (target / sup)


def hoelder_metric(grid, spec):
    """g = delta + h with h a random Hoelder-type symmetric perturbation.

    The perturbation is normalized so its largest pointwise operator norm is
    exactly spec.amplitude, which keeps every eigenvalue of g at least
    1 - amplitude.
    """
    if grid.points_per_axis < 16:
        raise ResolutionTooCoarse("need at least 3 octaves of spectrum (N >= 16)")
    if spec.amplitude == 0.0:
        eye = np.broadcast_to(np.eye(grid.dim), grid.shape + (grid.dim, grid.dim)).copy()
        return MetricField(grid, eye)
    rng = np.random.default_rng(spec.seed)
    dim = grid.dim
    h = np.zeros(grid.shape + (dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            f = _random_real_field(grid, rng, spec.alpha)
            h[..., i, j] = f
            h[..., j, i] = f
    h = _normalize_operator_sup(h, spec.amplitude)
    return MetricField(grid, np.eye(dim) + h)


def dyadic_oscillation_fit(field, grid, levels=5):
    """Fitted Hoelder exponent from sup |f(x + l e_a) - f(x)| over dyadic lags."""
    n = grid.points_per_axis
    lags = []
    oscs = []
    for j in range(1, levels + 1):
        shift = max(1, n >> (j + 1))
        osc = 0.0
        for a in range(grid.dim):
            osc = max(osc, float(np.max(np.abs(np.roll(field, shift, axis=a) - field))))
        lags.append(shift * grid.spacings[0])
        oscs.append(osc)
    slope, _ = np.polyfit(np.log(lags), np.log(oscs), 1)
    return float(slope)


def smootherstep(x):
    """C^4 unit step: 0 below 0, 1 above 1, degree-9 polynomial between."""
    x = np.clip(x, 0.0, 1.0)
    return x ** 5 * (126.0 - 420.0 * x + 540.0 * x ** 2 - 315.0 * x ** 3 + 70.0 * x ** 4)


def _radial_cutoff(dist, r_cut):
    """1 inside r_cut/2, 0 outside r_cut, smooth in between."""
    return smootherstep((r_cut - dist) / (0.5 * r_cut))


def second_order_pair(g, spec, grid=None, cutoff_radius=None):
    """A pair (g', g'') agreeing to greater than second order at the marked point.

    g'' = g + psi(d) B(x) with psi(d) = d^(2+eta) smoothly cut off at the
    cutoff radius (default a quarter of the torus width) and B a seeded,
    bounded symmetric perturbation scaled so that sup |g' - g''| equals
    spec.amplitude. By construction |g' - g''| <= c d^(2+eta) with
    c = sup |B|; the realized quotient is returned alongside the pair.
    """
    grid = grid or g.grid
    dim = grid.dim
    if cutoff_radius is None:
        cutoff_radius = 0.25 * min(grid.side_lengths)
    dist = grid.flat_distance(spec.marked_point)
    psi = dist ** (2.0 + spec.eta) * _radial_cutoff(dist, cutoff_radius)
    rng = np.random.default_rng(spec.seed + 101)
    coords = grid.coordinates()
    b = np.zeros(grid.shape + (dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            f = np.zeros(grid.shape)
            for _ in range(3):
                k = rng.integers(-2, 3, size=dim)
                phase = rng.uniform(0.0, 2.0 * math.pi)
                f += rng.normal() * np.cos(sum(k[a] * coords[a] for a in range(dim)) + phase)
            b[..., i, j] = f
            b[..., j, i] = f
    pert = psi[..., None, None] * b
    sup = float(np.max(np.abs(np.linalg.eigvalsh(pert))))
    if sup > 0:
        pert *= spec.amplitude / sup
    g_second = MetricField(grid, g.components + pert)
    with np.errstate(divide="ignore", invalid="ignore"):
        quot = np.where(dist > 0,
                        np.max(np.abs(pert), axis=(-2, -1)) / dist ** (2.0 + spec.eta),
                        0.0)
    return g, g_second, {"agreement_constant": float(np.max(quot)),
                         "cutoff_radius": cutoff_radius}


def tangential_profile(scale_fn):
    """Angular profile G(u) = s(u) (I - u u^T); radially tangent by construction."""
    def profile(units):
        s = scale_fn(units)
        eye = np.eye(units.shape[-1])
        outer = units[..., :, None] * units[..., None, :]
        return s[..., None, None] * (eye - outer)
    return profile


def homogeneous_germ(grid, profile, marked_point=None, cutoff_radius=None,
                     tangency_tol=1e-10):
    """g = delta + chi(r) r^2 G(x/r): a degree-2 homogeneous germ at a point.

    `profile` maps unit vectors (shape (..., dim)) to symmetric matrices
    (shape (..., dim, dim)) satisfying u^i u^j G_ij = 0.
    """
    dim = grid.dim
    if marked_point is None:
        marked_point = (0.0,) * dim
    if cutoff_radius is None:
        cutoff_radius = 0.25 * min(grid.side_lengths)
    delta = grid.min_image_delta(grid.coordinates(), marked_point)
    delta = np.moveaxis(delta, 0, -1)                      # (..., dim)
    r = np.sqrt(np.sum(delta ** 2, axis=-1))
    safe_r = np.where(r > 0, r, 1.0)
    units = delta / safe_r[..., None]
    gvals = profile(units)
    sym_err = np.max(np.abs(gvals - np.swapaxes(gvals, -1, -2)))
    if sym_err > tangency_tol:
        raise ValueError("profile must return symmetric matrices")
    radial = np.einsum('...i,...ij,...j->...', units, gvals, units)
    worst = float(np.max(np.abs(radial[r > 0])))
    if worst > tangency_tol:
        raise RadialTangencyViolated(
            f"u^i u^j G_ij reaches {worst:.3e} > {tangency_tol:.0e}")
    chi = _radial_cutoff(r, cutoff_radius)
    pert = (chi * r ** 2)[..., None, None] * gvals
    pert[r == 0] = 0.0
    return MetricField(grid, np.eye(dim) + pert)


def rough_isometric_pullback(g, seed, amplitude, alpha=1.2, grid=None):
    """Pullback of a smooth metric by a rough-ish displacement map.

    Pullback leaves the pointwise range of the scalar curvature invariant
    (values are moved, not changed), so a metric with min R = kappa keeps it
    under this roughening; the result is a C^0-style perturbation of g. The
    displacement spectrum decays like |k|^(-n/2 - 1 - alpha), keeping the
    pulled-back metric resolved enough that its discrete curvature range
    stays faithful; genuinely slow spectra belong to hoelder_metric, not here.
    """
    from .gauge import DiffeoField, pullback_metric
    grid = grid or g.grid
    rng = np.random.default_rng(seed)
    u = np.zeros(grid.shape + (grid.dim,))
    for a in range(grid.dim):
        u[..., a] = _random_real_field(grid, rng, 1.0 + alpha)
    sup = float(np.max(np.abs(u)))
    if sup > 0:
        u *= amplitude / sup
    chi = DiffeoField(grid, u, 0.0)
    return pullback_metric(g, chi), chi
