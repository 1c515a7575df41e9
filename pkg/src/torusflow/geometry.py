"""Discrete tensor calculus on periodic grids.

Derivatives are Fourier multipliers (exact for band-limited fields); products
are formed pointwise in physical space and truncated by the 2/3 rule so that
products of rough spectra do not alias back into the retained band.

Index conventions
-----------------
Derivative slots are prepended: gradient(T)[..., a, <slots>] = d_a T[<slots>].
Christoffel symbols are stored as Gamma[..., k, i, j] = Gamma^k_{ij}.
The Riemann tensor is stored as Rm[..., a, b, c, d] = R^a_{bcd} with
    R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
                + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb},
Ric_{bd} = R^a_{bad}, and R = g^{bd} Ric_{bd}.
"""

from __future__ import annotations

import numpy as np

from .errors import NonPositiveDefinite
from .grid import TensorField, pointwise_eigenvalues

# ---------------------------------------------------------------------------
# spectral primitives (arrays in, arrays out; component axes trail grid axes)
# ---------------------------------------------------------------------------


def _grid_axes(grid):
    return tuple(range(grid.dim))


def _fft(grid, arr):
    return np.fft.fftn(arr, axes=_grid_axes(grid))


def _ifft(grid, spec):
    return np.real(np.fft.ifftn(spec, axes=_grid_axes(grid)))


def _axis_multiplier(grid, axis, order):
    k = grid.wavenumbers()[axis]
    mult = (1j * k) ** order
    if order % 2 == 1 and grid.points_per_axis % 2 == 0:
        # the Nyquist mode has no well-defined odd derivative on an even grid
        mult = mult.copy()
        mult[grid.points_per_axis // 2] = 0.0
    shape = [1] * grid.dim
    shape[axis] = grid.points_per_axis
    return mult.reshape(shape)


def _pad_component_axes(mult, arr_ndim, grid_dim):
    return mult.reshape(mult.shape + (1,) * (arr_ndim - grid_dim))


def derivative_array(grid, arr, axis, order=1):
    spec = _fft(grid, arr)
    mult = _pad_component_axes(_axis_multiplier(grid, axis, order), arr.ndim, grid.dim)
    return _ifft(grid, spec * mult)


def gradient_array(grid, arr):
    """d_a applied componentwise; new axis of length dim right after grid axes."""
    spec = _fft(grid, arr)
    outs = []
    for a in range(grid.dim):
        mult = _pad_component_axes(_axis_multiplier(grid, a, 1), arr.ndim, grid.dim)
        outs.append(_ifft(grid, spec * mult))
    return np.stack(outs, axis=grid.dim)


def laplacian_array(grid, arr, metric_matrix=None):
    """Componentwise Laplacian; gbar^{pq} d_p d_q when a constant gbar is given."""
    spec = _fft(grid, arr)
    if metric_matrix is None:
        ksq = grid.k_squared()
    else:
        ginv = np.linalg.inv(np.asarray(metric_matrix, dtype=float))
        ks = grid.wavenumbers()
        ksq = np.zeros(grid.shape)
        for p in range(grid.dim):
            sp = [1] * grid.dim
            sp[p] = grid.points_per_axis
            for q in range(grid.dim):
                sq = [1] * grid.dim
                sq[q] = grid.points_per_axis
                ksq = ksq + ginv[p, q] * ks[p].reshape(sp) * ks[q].reshape(sq)
    mult = _pad_component_axes(-ksq, arr.ndim, grid.dim)
    return _ifft(grid, spec * mult)


def dealias_array(grid, arr):
    """2/3-rule truncation: zero all modes above N/3 on any axis."""
    spec = _fft(grid, arr)
    keep = _pad_component_axes(grid.dealias_keep_mask().astype(float), arr.ndim, grid.dim)
    return _ifft(grid, spec * keep)


# ---------------------------------------------------------------------------
# field-level operations
# ---------------------------------------------------------------------------


def spectral_derivative(f, axis, order=1):
    """Componentwise partial derivative via the Fourier multiplier (ik)^order.

    Exact for band-limited fields. Content above the Nyquist frequency of the
    grid is aliased at construction time and therefore differentiated as its
    aliased image; callers control accuracy through resolution.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    comps = derivative_array(f.grid, f.components, axis, order)
    return TensorField(f.grid, comps, f.rank)


def gradient(f):
    """All first partials; the derivative index becomes the first lower slot."""
    comps = gradient_array(f.grid, f.components)
    return TensorField(f.grid, comps, (f.rank[0], f.rank[1] + 1))


def dealias(f):
    return TensorField(f.grid, dealias_array(f.grid, f.components), f.rank)


def inverse_metric_array(g):
    """Pointwise inverse of a symmetric matrix field, with a PD check."""
    comps = np.asarray(g.components)
    eigs = pointwise_eigenvalues(comps)
    if float(np.min(eigs)) <= 0.0:
        raise NonPositiveDefinite(
            f"matrix field has eigenvalue {float(np.min(eigs)):.3e} <= 0")
    return np.linalg.inv(comps)


def christoffel(g):
    """Christoffel symbols Gamma^k_{ij} of a metric, symmetric in (i, j) exactly.

    Gamma^k_{ij} = 1/2 g^{kl} (d_i g_{jl} + d_j g_{il} - d_l g_{ij})
    """
    grid = g.grid
    d = grid.dim
    ginv = inverse_metric_array(g)
    dg = gradient_array(grid, g.components)           # dg[a, i, j] = d_a g_{ij}
    t_i = dg                                          # [i, j, l] = d_i g_{jl}
    t_j = np.swapaxes(dg, d, d + 1)                   # [i, j, l] = d_j g_{il}
    t_l = np.moveaxis(dg, d, d + 2)                   # [i, j, l] = d_l g_{ij}
    s = t_i + t_j - t_l
    gam = 0.5 * np.einsum('...kl,...ijl->...kij', ginv, s)
    gam = dealias_array(grid, gam)
    gam = 0.5 * (gam + np.swapaxes(gam, -1, -2))
    return TensorField(grid, gam, (1, 2))


def curvature(g):
    """Riemann, Ricci and scalar curvature of a metric.

    Returns (riemann (1,3), ricci (0,2), scalar (0,0)) fields, computed from
    the coordinate formulas in the module docstring.
    """
    grid = g.grid
    gam = christoffel(g).components                   # [k, i, j]
    dgam = gradient_array(grid, gam)                  # [c, k, i, j] = d_c Gamma^k_{ij}
    t1 = np.einsum('...cadb->...abcd', dgam)
    t2 = np.einsum('...dacb->...abcd', dgam)
    gg1 = np.einsum('...ace,...edb->...abcd', gam, gam)
    gg2 = np.einsum('...ade,...ecb->...abcd', gam, gam)
    riem = t1 - t2 + dealias_array(grid, gg1 - gg2)
    ric = np.einsum('...abad->...bd', riem)
    ric = 0.5 * (ric + np.swapaxes(ric, -1, -2))
    ginv = inverse_metric_array(g)
    scal = dealias_array(grid, np.einsum('...bd,...bd->...', ginv, ric))
    return (TensorField(grid, riem, (1, 3)),
            TensorField(grid, ric, (0, 2)),
            TensorField(grid, scal, (0, 0)))


def scalar_curvature(g):
    return curvature(g)[2]


def total_scalar_curvature(g):
    """Integral of R over the torus against the volume form of g."""
    scal = scalar_curvature(g).components
    return float(np.sum(scal * g.volume_element()) * g.grid.cell_volume)


def lie_derivative(x, g):
    """Lie derivative of a (0,2)-tensor along a vector field.

    (L_X g)_{ij} = X^k d_k g_{ij} + g_{kj} d_i X^k + g_{ik} d_j X^k
    """
    if x.rank != (1, 0):
        raise ValueError("x must be a vector field (rank (1,0))")
    grid = g.grid
    dg = gradient_array(grid, g.components)           # [a, i, j]
    dx = gradient_array(grid, x.components)           # [a, k] = d_a X^k
    out = (np.einsum('...k,...kij->...ij', x.components, dg)
           + np.einsum('...kj,...ik->...ij', g.components, dx)
           + np.einsum('...ik,...jk->...ij', g.components, dx))
    out = dealias_array(grid, out)
    out = 0.5 * (out + np.swapaxes(out, -1, -2))
    return TensorField(grid, out, (0, 2))


_SLOT_LETTERS = 'bcdfghij'


def _covariant_once(t, gam):
    """One covariant derivative given precomputed Christoffel symbols."""
    grid = t.grid
    d = grid.dim
    comps = gradient_array(grid, t.components)        # axes (grid, a, slots...)
    nup, ndown = t.rank
    nslots = nup + ndown
    if nslots == 0:
        return TensorField(grid, comps, (0, 1))
    npts = grid.n_points
    flat_t = t.components.reshape((npts,) + t.components.shape[d:])
    flat_gam = gam.reshape((npts, d, d, d))
    slot_sub = list(_SLOT_LETTERS[:nslots])
    correction = np.zeros((npts, d) + t.components.shape[d:])
    for s in range(nslots):
        in_t = ['P'] + slot_sub.copy()
        out_sub = ['P', 'a'] + slot_sub.copy()
        in_t[1 + s] = 'e'
        out_sub[2 + s] = 'k'
        if s < nup:
            # + Gamma^k_{ae} T[..e..] on an upper slot
            expr = f"Pkae,{''.join(in_t)}->{''.join(out_sub)}"
            correction += np.einsum(expr, flat_gam, flat_t)
        else:
            # - Gamma^e_{ak} T[..e..] on a lower slot
            expr = f"Peak,{''.join(in_t)}->{''.join(out_sub)}"
            correction -= np.einsum(expr, flat_gam, flat_t)
    correction = correction.reshape(comps.shape)
    comps = comps + dealias_array(grid, correction)
    return TensorField(grid, comps, (nup, ndown + 1))


def covariant_derivative(t, g, order=1):
    """Covariant derivative against the metric g; the new slot comes first.

    On a flat background the Christoffel corrections vanish and the result
    equals iterated spectral derivatives.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    gam = christoffel(g).components
    out = t
    for _ in range(order):
        out = _covariant_once(out, gam)
    return out


def flat_ball_mask(grid, center, radius):
    """Boolean mask of grid points with flat-torus distance to center < radius."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if radius == 0:
        return np.zeros(grid.shape, dtype=bool)
    return grid.flat_distance(center) < radius
