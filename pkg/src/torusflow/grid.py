"""Periodic grids and tensor-valued fields on flat tori.

All fields live on a regular N^dim grid over a rectangular torus. Component
axes always follow the grid axes, so an array of shape (N, N, 2, 2) is a
2-tensor field on a 2-torus. Arrays are frozen (read-only) at construction;
every operation returns new fields.
"""

from __future__ import annotations

import numpy as np

from .errors import NonPositiveDefinite

PD_EIGENVALUE_FLOOR = 1e-10


class TorusGrid:
    """Uniform periodic grid on a flat torus [0, L_1) x ... x [0, L_dim).

    Parameters
    ----------
    dim : 2 or 3
    points_per_axis : power of two, >= 8
    side_lengths : per-axis circumferences, default 2*pi each
    """

    def __init__(self, dim, points_per_axis, side_lengths=None):
        if dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {dim}")
        n = int(points_per_axis)
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"points_per_axis must be a power of two >= 8, got {points_per_axis}")
        if side_lengths is None:
            side_lengths = (2.0 * np.pi,) * dim
        elif np.isscalar(side_lengths):
            side_lengths = (float(side_lengths),) * dim
        side_lengths = tuple(float(L) for L in side_lengths)
        if len(side_lengths) != dim or any(L <= 0 for L in side_lengths):
            raise ValueError(f"need {dim} positive side lengths, got {side_lengths}")
        self.dim = dim
        self.points_per_axis = n
        self.side_lengths = side_lengths
        self.spacings = tuple(L / n for L in side_lengths)
        self._wavenumbers = None
        self._k_squared = None
        self._dealias_keep = None

    def __eq__(self, other):
        return (isinstance(other, TorusGrid)
                and self.dim == other.dim
                and self.points_per_axis == other.points_per_axis
                and self.side_lengths == other.side_lengths)

    def __hash__(self):
        return hash((self.dim, self.points_per_axis, self.side_lengths))

    def __repr__(self):
        return (f"TorusGrid(dim={self.dim}, points_per_axis={self.points_per_axis}, "
                f"side_lengths={self.side_lengths})")

    @property
    def shape(self):
        return (self.points_per_axis,) * self.dim

    @property
    def n_points(self):
        return self.points_per_axis ** self.dim

    @property
    def cell_volume(self):
        return float(np.prod(self.spacings))

    @property
    def volume(self):
        return float(np.prod(self.side_lengths))

    def axis_coordinates(self, axis):
        n = self.points_per_axis
        return np.arange(n) * self.spacings[axis]

    def coordinates(self):
        """Meshgrid of coordinates, shape (dim,) + grid shape."""
        axes = [self.axis_coordinates(a) for a in range(self.dim)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=0)

    def wavenumbers(self):
        """Angular wavenumbers per axis, each a 1-D array of length N."""
        if self._wavenumbers is None:
            n = self.points_per_axis
            self._wavenumbers = tuple(
                2.0 * np.pi * np.fft.fftfreq(n, d=self.spacings[a]) for a in range(self.dim))
        return self._wavenumbers

    def k_squared(self):
        """|k|^2 on the full grid shape (Euclidean background)."""
        if self._k_squared is None:
            ks = self.wavenumbers()
            ksq = np.zeros(self.shape)
            for a, k in enumerate(ks):
                shape = [1] * self.dim
                shape[a] = self.points_per_axis
                ksq = ksq + (k ** 2).reshape(shape)
            ksq.flags.writeable = False
            self._k_squared = ksq
        return self._k_squared

    def dealias_keep_mask(self):
        """Boolean mask of Fourier modes kept by the 2/3 rule (per axis)."""
        if self._dealias_keep is None:
            n = self.points_per_axis
            cutoff = n // 3
            idx = np.fft.fftfreq(n, d=1.0 / n)  # integer mode numbers
            keep1d = np.abs(idx) <= cutoff
            mask = np.ones(self.shape, dtype=bool)
            for a in range(self.dim):
                shape = [1] * self.dim
                shape[a] = n
                mask = mask & keep1d.reshape(shape)
            mask.flags.writeable = False
            self._dealias_keep = mask
        return self._dealias_keep

    def min_image_delta(self, coords, center):
        """Signed minimal-image displacement coords - center, per axis."""
        out = []
        for a in range(self.dim):
            L = self.side_lengths[a]
            d = (coords[a] - center[a] + 0.5 * L) % L - 0.5 * L
            out.append(d)
        return np.stack(out, axis=0)

    def flat_distance(self, center):
        """Flat-torus distance from every grid point to `center`."""
        delta = self.min_image_delta(self.coordinates(), center)
        return np.sqrt(np.sum(delta ** 2, axis=0))

    def index_of(self, point, tol=1e-9):
        """Grid index of a point that must lie (mod torus) on the grid."""
        idx = []
        for a in range(self.dim):
            L = self.side_lengths[a]
            frac = (point[a] % L) / self.spacings[a]
            j = int(round(frac)) % self.points_per_axis
            if abs(frac - round(frac)) > tol:
                raise ValueError(f"point {point} is not a grid point on axis {a}")
            idx.append(j)
        return tuple(idx)


def _freeze(arr):
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.flags.writeable = False
    return arr


class TensorField:
    """Grid of tensors with a fixed (contravariant, covariant) rank signature.

    components axes: grid axes first, then one axis of length dim per tensor
    slot (upper slots first, then lower slots). Scalars have no component axes.
    """

    def __init__(self, grid, components, rank=(0, 0)):
        self.grid = grid
        self.rank = (int(rank[0]), int(rank[1]))
        nslots = self.rank[0] + self.rank[1]
        expected = grid.shape + (grid.dim,) * nslots
        components = np.asarray(components, dtype=float)
        if components.shape != expected:
            raise ValueError(f"components shape {components.shape}, expected {expected}")
        self.components = _freeze(components)

    @property
    def n_slots(self):
        return self.rank[0] + self.rank[1]

    def sup_norm(self):
        """Max absolute component value over the grid."""
        return float(np.max(np.abs(self.components))) if self.components.size else 0.0

    def mean(self):
        axes = tuple(range(self.grid.dim))
        return np.mean(self.components, axis=axes)

    def __add__(self, other):
        self._check_compatible(other)
        return TensorField(self.grid, self.components + other.components, self.rank)

    def __sub__(self, other):
        self._check_compatible(other)
        return TensorField(self.grid, self.components - other.components, self.rank)

    def __mul__(self, scalar):
        return TensorField(self.grid, self.components * float(scalar), self.rank)

    __rmul__ = __mul__

    def _check_compatible(self, other):
        if self.grid != other.grid or self.rank != other.rank:
            raise ValueError("fields are on different grids or have different ranks")

    def __repr__(self):
        return f"TensorField(rank={self.rank}, grid={self.grid!r})"


def pointwise_eigenvalues(matrix_components):
    """Eigenvalues of a symmetric matrix field, shape grid + (dim,)."""
    return np.linalg.eigvalsh(matrix_components)


class MetricField(TensorField):
    """Symmetric positive-definite (0,2)-tensor field.

    Symmetry must hold exactly (bitwise); positive-definiteness is enforced
    with eigenvalue floor 1e-10 at construction and never silently repaired.
    """

    def __init__(self, grid, components):
        components = np.asarray(components, dtype=float)
        if components.shape != grid.shape + (grid.dim, grid.dim):
            raise ValueError("metric components have wrong shape")
        swapped = np.swapaxes(components, -1, -2)
        if not np.array_equal(components, swapped):
            raise ValueError("metric components are not exactly symmetric")
        eigs = pointwise_eigenvalues(components)
        emin = float(np.min(eigs))
        if emin <= PD_EIGENVALUE_FLOOR:
            raise NonPositiveDefinite(
                f"smallest metric eigenvalue {emin:.3e} <= {PD_EIGENVALUE_FLOOR:.0e}")
        super().__init__(grid, components, rank=(0, 2))
        self._min_eigenvalue = emin

    @property
    def min_eigenvalue(self):
        return self._min_eigenvalue

    def inverse_components(self):
        """Pointwise inverse metric, shape grid + (dim, dim)."""
        return np.linalg.inv(self.components)

    def volume_element(self):
        """sqrt(det g) on the grid."""
        return np.sqrt(np.linalg.det(self.components))

    def as_tensor(self):
        return TensorField(self.grid, self.components, rank=(0, 2))


def flat_metric(grid, diagonal=None):
    """Constant flat metric; identity by default, or a constant diagonal."""
    if diagonal is None:
        diagonal = np.ones(grid.dim)
    diagonal = np.asarray(diagonal, dtype=float)
    mat = np.diag(diagonal)
    comps = np.broadcast_to(mat, grid.shape + (grid.dim, grid.dim)).copy()
    return MetricField(grid, comps)


def constant_metric(grid, matrix):
    """Constant metric from an SPD matrix."""
    matrix = np.asarray(matrix, dtype=float)
    comps = np.broadcast_to(matrix, grid.shape + (grid.dim, grid.dim)).copy()
    return MetricField(grid, comps)


def zero_tensor(grid, rank):
    nslots = rank[0] + rank[1]
    return TensorField(grid, np.zeros(grid.shape + (grid.dim,) * nslots), rank)
