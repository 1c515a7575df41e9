import numpy as np
import pytest

from torusflow.grid import MetricField, TorusGrid


@pytest.fixture
def grid64():
    return TorusGrid(2, 64)


@pytest.fixture
def grid32():
    return TorusGrid(2, 32)


def conformal_metric(grid, amplitude=0.1):
    """e^{2 phi} delta with phi = amplitude * prod sin(2 pi x_a / L_a)."""
    coords = grid.coordinates()
    phi = np.ones(grid.shape) * amplitude
    for a in range(grid.dim):
        phi = phi * np.sin(2.0 * np.pi * coords[a] / grid.side_lengths[a])
    comp = np.zeros(grid.shape + (grid.dim, grid.dim))
    for a in range(grid.dim):
        comp[..., a, a] = np.exp(2.0 * phi)
    return MetricField(grid, comp), phi


def random_band_limited_h(grid, amplitude, kmax, seed, n_modes=6):
    """Symmetric perturbation from a few low modes, sup operator norm = amplitude."""
    rng = np.random.default_rng(seed)
    coords = grid.coordinates()
    dim = grid.dim
    h = np.zeros(grid.shape + (dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            f = np.zeros(grid.shape)
            for _ in range(n_modes):
                k = rng.integers(-kmax, kmax + 1, size=dim)
                phase = rng.uniform(0, 2 * np.pi)
                f += rng.normal() * np.cos(sum(k[a] * coords[a] for a in range(dim)) + phase)
            h[..., i, j] = f
            h[..., j, i] = f
    sup = np.max(np.abs(np.linalg.eigvalsh(h)))
    if sup > 0:
        h *= amplitude / sup
    return h


def read_bool(value):
    return str(value).lower() == "true"
