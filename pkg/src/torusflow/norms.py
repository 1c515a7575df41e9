"""Parabolic function-space norms on ball censuses, after Koch & Lamm.

The continuum norms take suprema over all centers and radii; here the census
is every grid point crossed with dyadic radii r_j = 2^-j sqrt(T). Per ball,

  X  : sup_t sup_B |h|  +  r^{-n/2} ||grad h||_{L^2(B x (0, r^2))}
                        +  r^{2/(n+4)} ||grad h||_{L^{n+4}(B x (r^2/2, r^2))}
  Y0 : r^{-n} ||f||_{L^1(B x (0, r^2))} + r^{4/(n+4)} ||f||_{L^{(n+4)/2}(B x (r^2/2, r^2))}
  Y1 : r^{-n/2} ||f||_{L^2(B x (0, r^2))} + r^{2/(n+4)} ||f||_{L^{n+4}(B x (r^2/2, r^2))}

The weighted variants multiply the sup integrand pointwise by
w_a(x, t) = max{(d(x0, x) + sqrt(t) + a)^(-2-eta), 1} and the gradient (or f)
terms by w_a(center, r^2).

Space-time integrals use the stored time lattice with trapezoid weights plus
rectangle end corrections (no sub-lattice interpolation); pointwise tensor
magnitudes are Euclidean (frobenius over all slots). The reported aggregate is
the global sup term plus the census maximum of the remaining terms, which is
also the census maximum of the per-ball value column.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientLattice, UndefinedAtCenter
from .geometry import _covariant_once, christoffel, flat_ball_mask, gradient_array
from .grid import TensorField
from .trajectory import TensorTrajectory

DEFAULT_DYADIC_LEVELS = 6


@dataclass(frozen=True)
class WeightSpec:
    """Parameters of the greater-than-second-order weight w_a."""
    center: tuple
    eta: float
    offset: float = 0.0
    reference_time: float | None = None

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.offset < 0:
            raise ValueError("offset a must be nonnegative")


def weight_w(x, t, spec, side_lengths=None):
    """w_a(x, t) = max{(d(x0, x) + sqrt(t) + a)^(-2-eta), 1} (flat distance)."""
    x = tuple(float(v) for v in x)
    if side_lengths is None:
        side_lengths = (2.0 * math.pi,) * len(x)
    d = 0.0
    for xa, ca, L in zip(x, spec.center, side_lengths):
        delta = (xa - ca + 0.5 * L) % L - 0.5 * L
        d += delta * delta
    d = math.sqrt(d)
    base = d + math.sqrt(t) + spec.offset
    if base == 0.0:
        raise UndefinedAtCenter("w_0 is undefined at (x0, 0)")
    return max(base ** (-2.0 - spec.eta), 1.0)


def _weight_field(grid, t, spec):
    base = grid.flat_distance(spec.center) + math.sqrt(t) + spec.offset
    if np.any(base == 0.0):
        raise UndefinedAtCenter("w_0 is undefined at (x0, 0)")
    return np.maximum(base ** (-2.0 - spec.eta), 1.0)


@dataclass
class NormReport:
    kind: str
    aggregate: float
    sup_term: float
    radii: tuple
    census_size: int
    per_ball: dict            # radius -> dict of center-indexed arrays
    extras: dict

    def rows(self):
        """Flat (header, rows) view, one row per ball, for CSV emission."""
        header = ["radius", "center_flat_index", "sup_local", "term_a", "term_b", "value"]
        out = []
        for r in self.radii:
            d = self.per_ball[r]
            sup_local = d["sup_local"].ravel()
            ta = d["term_a"].ravel()
            tb = d["term_b"].ravel()
            val = d["value"].ravel()
            for idx in range(val.size):
                out.append([r, idx, sup_local[idx], ta[idx], tb[idx], val[idx]])
        return header, out


def _positive_time_view(traj):
    keep = traj.times > 0
    times = traj.times[keep]
    fields = [f for f, k in zip(traj.fields, keep) if k]
    return times, fields


def _window_weights(times, lo, hi):
    """Quadrature weights over stored times in (lo, hi].

    Trapezoid among the nodes inside the window, plus rectangle corrections
    from lo up to the first node and from the last node up to hi. A single
    node gets the full window length.
    """
    inside = np.where((times > lo + 1e-15) & (times <= hi + 1e-15))[0]
    if inside.size == 0:
        return inside, np.zeros(0)
    ts = times[inside]
    w = np.zeros(ts.size)
    if ts.size == 1:
        w[0] = hi - lo
        return inside, w
    dt = np.diff(ts)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    w[0] += ts[0] - lo
    w[-1] += hi - ts[-1]
    return inside, w


def _ball_offsets(grid, radius):
    """Integer index offsets whose minimal-image displacement is < radius."""
    reach = [int(math.floor(radius / s)) for s in grid.spacings]
    axes = [np.arange(-m, m + 1) for m in reach]
    mesh = np.meshgrid(*axes, indexing="ij")
    offs = np.stack([m.ravel() for m in mesh], axis=-1)
    d2 = np.zeros(len(offs))
    for a in range(grid.dim):
        d2 += (offs[:, a] * grid.spacings[a]) ** 2
    return offs[d2 < radius * radius]


def _ball_kernel_spectrum(grid, radius):
    mask = flat_ball_mask(grid, (0.0,) * grid.dim, radius).astype(float)
    return np.fft.fftn(mask)


def _ball_sums(grid, field, kernel_spec):
    """Sum of `field` over the ball around every grid point (circular conv)."""
    spec = np.fft.fftn(field)
    out = np.real(np.fft.ifftn(spec * np.conj(kernel_spec)))
    return np.maximum(out, 0.0)


def _ball_max(grid, field, radius):
    offs = _ball_offsets(grid, radius)
    out = np.full(grid.shape, -np.inf)
    for off in offs:
        out = np.maximum(out, np.roll(field, shift=tuple(-off), axis=range(grid.dim)))
    return out


def _frobenius(arr, grid_dim):
    comp_axes = tuple(range(grid_dim, arr.ndim))
    return np.sqrt(np.sum(arr * arr, axis=comp_axes)) if comp_axes else np.abs(arr)


def dyadic_radii(final_time, levels=DEFAULT_DYADIC_LEVELS):
    root = math.sqrt(final_time)
    return tuple(root * 2.0 ** (-j) for j in range(levels))


def x_norm(traj, weighted=None, levels=DEFAULT_DYADIC_LEVELS):
    """Ball-census evaluation of the parabolic X-norm of a field trajectory."""
    times, fields = _positive_time_view(traj)
    if times.size < 4:
        raise InsufficientLattice(f"need >= 4 stored positive times, got {times.size}")
    grid = fields[0].grid
    n = grid.dim
    T = float(times[-1])
    radii = dyadic_radii(T, levels)
    p_hi = n + 4

    mag = np.stack([_frobenius(f.components, n) for f in fields], axis=0)
    grads = np.stack([_frobenius(gradient_array(grid, f.components), n) for f in fields], axis=0)

    if weighted is None:
        sup_field = mag.max(axis=0)
    else:
        wts = np.stack([_weight_field(grid, t, weighted) for t in times], axis=0)
        sup_field = (wts * mag).max(axis=0)
    sup_term = float(sup_field.max())

    g2 = grads ** 2
    gp = grads ** p_hi
    cell = grid.cell_volume
    per_ball = {}
    agg_grad = 0.0
    for r in radii:
        kspec = _ball_kernel_spectrum(grid, r)
        idx2, w2 = _window_weights(times, 0.0, r * r)
        idxp, wp = _window_weights(times, r * r / 2.0, r * r)
        t2 = np.einsum('t,t...->...', w2, g2[idx2]) if idx2.size else np.zeros(grid.shape)
        tp = np.einsum('t,t...->...', wp, gp[idxp]) if idxp.size else np.zeros(grid.shape)
        l2 = np.sqrt(_ball_sums(grid, t2, kspec) * cell)
        lp = (_ball_sums(grid, tp, kspec) * cell) ** (1.0 / p_hi)
        term_a = r ** (-n / 2.0) * l2
        term_b = r ** (2.0 / p_hi) * lp
        if weighted is not None:
            wc = _weight_field(grid, r * r, weighted)
            term_a = wc * term_a
            term_b = wc * term_b
        sup_local = _ball_max(grid, sup_field, r)
        value = sup_term + term_a + term_b
        per_ball[r] = {"sup_local": sup_local, "term_a": term_a,
                       "term_b": term_b, "value": value}
        agg_grad = max(agg_grad, float((term_a + term_b).max()))

    return NormReport(
        kind="X" if weighted is None else "X_weighted",
        aggregate=sup_term + agg_grad,
        sup_term=sup_term,
        radii=radii,
        census_size=len(radii) * grid.n_points,
        per_ball=per_ball,
        extras={"final_time": T, "levels": levels},
    )


def y_norms(q0_traj, q1_traj, weighted=None, h_traj=None, levels=DEFAULT_DYADIC_LEVELS):
    """Ball-census Y0/Y1 norms of a source split f = f0 + div f1.

    Returns a dict with the two NormReports, their sum, and, when the
    generating field trajectory is supplied, the fitted constant in
    ||Q||_Y <= c ||h||_X ||h||_{X weighted or X}.
    """
    rep0 = _y_single(q0_traj, which=0, weighted=weighted, levels=levels)
    rep1 = _y_single(q1_traj, which=1, weighted=weighted, levels=levels)
    out = {"Y0": rep0, "Y1": rep1, "total": rep0.aggregate + rep1.aggregate}
    if h_traj is not None:
        x_plain = x_norm(h_traj, weighted=None, levels=levels).aggregate
        x_other = x_norm(h_traj, weighted=weighted, levels=levels).aggregate
        denom = x_plain * x_other
        out["fitted_c"] = out["total"] / denom if denom > 0 else math.inf
    return out


def _y_single(traj, which, weighted, levels):
    times, fields = _positive_time_view(traj)
    if times.size < 4:
        raise InsufficientLattice(f"need >= 4 stored positive times, got {times.size}")
    grid = fields[0].grid
    n = grid.dim
    T = float(times[-1])
    radii = dyadic_radii(T, levels)
    if which == 0:
        p_lo, p_hi = 1.0, (n + 4) / 2.0
        pref_lo = lambda r: r ** (-float(n))
        pref_hi = lambda r: r ** (4.0 / (n + 4))
    else:
        p_lo, p_hi = 2.0, float(n + 4)
        pref_lo = lambda r: r ** (-n / 2.0)
        pref_hi = lambda r: r ** (2.0 / (n + 4))

    mag = np.stack([_frobenius(f.components, n) for f in fields], axis=0)
    lo_pow = mag ** p_lo
    hi_pow = mag ** p_hi
    cell = grid.cell_volume
    per_ball = {}
    agg = 0.0
    for r in radii:
        kspec = _ball_kernel_spectrum(grid, r)
        idx_lo, w_lo = _window_weights(times, 0.0, r * r)
        idx_hi, w_hi = _window_weights(times, r * r / 2.0, r * r)
        t_lo = np.einsum('t,t...->...', w_lo, lo_pow[idx_lo]) if idx_lo.size else np.zeros(grid.shape)
        t_hi = np.einsum('t,t...->...', w_hi, hi_pow[idx_hi]) if idx_hi.size else np.zeros(grid.shape)
        term_a = pref_lo(r) * (_ball_sums(grid, t_lo, kspec) * cell) ** (1.0 / p_lo)
        term_b = pref_hi(r) * (_ball_sums(grid, t_hi, kspec) * cell) ** (1.0 / p_hi)
        if weighted is not None:
            wc = _weight_field(grid, r * r, weighted)
            term_a = wc * term_a
            term_b = wc * term_b
        value = term_a + term_b
        per_ball[r] = {"sup_local": np.zeros(grid.shape), "term_a": term_a,
                       "term_b": term_b, "value": value}
        agg = max(agg, float(value.max()))
    return NormReport(
        kind=f"Y{which}" + ("_weighted" if weighted is not None else ""),
        aggregate=agg,
        sup_term=0.0,
        radii=radii,
        census_size=len(radii) * grid.n_points,
        per_ball=per_ball,
        extras={"final_time": T, "levels": levels},
    )


def iterated_covariant(t, g, order):
    gam = christoffel(g).components
    out = t
    for _ in range(order):
        out = _covariant_once(out, gam)
    return out


def interpolation_diagnostic(f, g, ell, radii, n_centers=8, a_fractions=(1.0, 0.5, 0.25)):
    """Empirical constants for the ball interpolation inequality.

    For each 1 <= k < ell, samples centers x, radii r and increments a <= r,
    and reports the largest observed ratio
        ||grad^k f||_{L_inf(B(x, r))}
        / (a^{-k} ||f||_{L_inf(B(x, r + a))} + a^{ell-k} ||grad^ell f||_{L_inf(B(x, r + a))}).
    """
    if not 2 <= ell <= 4:
        raise ValueError("ell must be between 2 and 4")
    grid = f.grid
    derivs = {0: f}
    for k in range(1, ell + 1):
        derivs[k] = iterated_covariant(derivs[k - 1], g, 1)
    mags = {k: _frobenius(derivs[k].components, grid.dim) for k in range(ell + 1)}
    per_axis = max(1, int(round(n_centers ** (1.0 / grid.dim))))
    stride = max(1, grid.points_per_axis // per_axis)
    centers = []
    ranges = [range(0, grid.points_per_axis, stride)] * grid.dim
    for idx in itertools.product(*ranges):
        centers.append(tuple(grid.axis_coordinates(a)[i] for a, i in enumerate(idx)))
    out = {}
    for k in range(1, ell):
        worst = 0.0
        for x in centers:
            dist = grid.flat_distance(x)
            for r in radii:
                inner = dist < r
                if not inner.any():
                    continue
                num = float(mags[k][inner].max())
                for frac in a_fractions:
                    a = frac * r
                    outer = dist < r + a
                    f_sup = float(mags[0][outer].max())
                    l_sup = float(mags[ell][outer].max())
                    denom = a ** (-float(k)) * f_sup + a ** float(ell - k) * l_sup
                    if denom > 0:
                        worst = max(worst, num / denom)
        out[k] = worst
    return {"constants": out, "ell": ell, "radii": tuple(radii),
            "n_centers": len(centers), "a_fractions": tuple(a_fractions)}
