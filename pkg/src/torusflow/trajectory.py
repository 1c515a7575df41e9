"""Time-indexed field containers produced by the solvers."""

from __future__ import annotations

import numpy as np

from .grid import MetricField, TensorField


def sqrt_graded_times(final_time, n_nodes):
    """The output lattice t_j = T (j/N)^2, j = 1..N (t_min = T / N^2)."""
    j = np.arange(1, n_nodes + 1, dtype=float)
    return final_time * (j / n_nodes) ** 2


class TensorTrajectory:
    """A list of same-shaped tensor fields at increasing times (t >= 0)."""

    def __init__(self, times, fields):
        times = np.asarray(times, dtype=float)
        if len(times) != len(fields):
            raise ValueError("times and fields disagree in length")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if fields:
            grid = fields[0].grid
            rank = fields[0].rank
            for f in fields:
                if f.grid != grid or f.rank != rank:
                    raise ValueError("all fields must share one grid and rank")
        self.times = times
        self.fields = list(fields)

    @property
    def grid(self):
        return self.fields[0].grid

    def __len__(self):
        return len(self.fields)

    def component_stack(self):
        """Array of shape (n_times,) + field shape."""
        return np.stack([f.components for f in self.fields], axis=0)

    def restricted(self, t_max):
        keep = self.times <= t_max + 1e-15
        return TensorTrajectory(self.times[keep], [f for f, k in zip(self.fields, keep) if k])


def bilipschitz_factor(g, gbar):
    """Smallest b with (1/b) gbar <= g <= b gbar, from pointwise eigenvalues."""
    bar_inv_sqrt = _inv_sqrt(gbar.components)
    rel = np.einsum('...ia,...ab,...bj->...ij', bar_inv_sqrt, g.components, bar_inv_sqrt)
    eigs = np.linalg.eigvalsh(rel)
    top = float(np.max(eigs))
    bottom = float(np.min(eigs))
    return max(top, 1.0 / bottom)


def relative_sup_distance(g, gbar):
    """sup over the grid of the gbar-operator norm of g - gbar."""
    bar_inv_sqrt = _inv_sqrt(gbar.components)
    diff = g.components - gbar.components
    rel = np.einsum('...ia,...ab,...bj->...ij', bar_inv_sqrt, diff, bar_inv_sqrt)
    eigs = np.linalg.eigvalsh(rel)
    return float(np.max(np.abs(eigs)))


def _inv_sqrt(comps):
    eigs, vecs = np.linalg.eigh(comps)
    inv_sqrt = np.einsum('...ia,...a,...ja->...ij', vecs, 1.0 / np.sqrt(eigs), vecs)
    return inv_sqrt


class FlowTrajectory:
    """States of one flow run on a sqrt(t)-graded output lattice.

    times lie in (0, T]; every state is positive-definite and stays inside
    the unit bilipschitz neighborhood of the background.
    """

    def __init__(self, times, states, background, config, initial=None, provenance=None):
        times = np.asarray(times, dtype=float)
        if np.any(np.diff(times) <= 0) or np.any(times <= 0):
            raise ValueError("times must be strictly increasing and positive")
        if len(times) != len(states):
            raise ValueError("times and states disagree in length")
        for s in states:
            if not isinstance(s, MetricField):
                raise TypeError("states must be MetricFields")
        sup_dist = [relative_sup_distance(s, background) for s in states]
        worst = max(sup_dist) if sup_dist else 0.0
        if worst >= 1.0:
            raise ValueError(f"state leaves the bilipschitz guard: sup distance {worst:.3f}")
        self.times = times
        self.states = list(states)
        self.background = background
        self.config = config
        self.initial = initial
        self.provenance = dict(provenance or {})
        self.sup_distances = sup_dist

    @property
    def grid(self):
        return self.background.grid

    @property
    def final_state(self):
        return self.states[-1]

    def bilipschitz(self):
        return max(bilipschitz_factor(s, self.background) for s in self.states)

    def h_fields(self):
        """Perturbation trajectory h(t) = g(t) - gbar as plain tensor fields."""
        bg = self.background.components
        fields = [TensorField(s.grid, s.components - bg, (0, 2)) for s in self.states]
        return TensorTrajectory(self.times, fields)

    def state_at(self, t):
        idx = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[idx] - t) > 1e-12 * max(1.0, t):
            raise KeyError(f"time {t} not stored")
        return self.states[idx]
