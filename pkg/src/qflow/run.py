"""Driving the Q-flow and keeping snapshots in memory."""

from dataclasses import dataclass, field

import numpy as np

from .fields import QField, comp_sq, integrate
from .solver import _check_finite, advance, check_stability, drift_correct


@dataclass
class Run:
    """Snapshots of one Q-flow trajectory.

    ``dissipation[k]`` is the discrete ``int_0^t int |dQ/dt|^2`` at
    ``times[k]``, accumulated every step from one-sided differences
    ``|Q^{n+1} - Q^n|^2 / dt``.
    """

    grid: object
    params: object
    cfg: object
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    dissipation: list = field(default_factory=list)

    def __len__(self):
        return len(self.times)

    def field(self, k):
        return QField(self.grid, self.snapshots[k], self.times[k])

    @property
    def final(self):
        return self.field(len(self) - 1)

    def nearest(self, t):
        times = np.asarray(self.times)
        k = int(np.argmin(np.abs(times - t)))
        return k, float(times[k])

    @property
    def snapshot_interval(self):
        if len(self) < 2:
            return 0.0
        return float(np.max(np.diff(self.times)))


def simulate(q0, p, cfg, snapshot_every=None, check=True):
    """Integrate from ``q0`` to ``cfg.T`` with ``cfg.n_steps`` uniform steps.

    Snapshots are kept every ``snapshot_every`` steps (default
    ``cfg.snapshot_every``) plus the final state.
    """
    if check:
        check_stability(q0.grid, p, cfg)
    every = cfg.snapshot_every if snapshot_every is None else snapshot_every
    grid = q0.grid
    steps = cfg.n_steps
    dt = cfg.T / steps if steps else cfg.dt
    run = Run(grid, p, cfg)
    comps = q0.data
    t0 = q0.t
    run.times.append(t0)
    run.snapshots.append(comps)
    run.dissipation.append(0.0)
    acc = 0.0
    for n in range(1, steps + 1):
        new = advance(comps, grid, p, dt, cfg.scheme)
        t = t0 + n * dt
        _check_finite(new, t)
        if cfg.drift_correction:
            new = drift_correct(new)
        acc += integrate(comp_sq(new - comps), grid) / dt
        comps = new
        if n % every == 0 or n == steps:
            run.times.append(t)
            run.snapshots.append(comps)
            run.dissipation.append(acc)
    return run
