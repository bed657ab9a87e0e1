"""Epsilon ladders: one run per eps and a table of how the limit is approached."""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import __version__
from ..algebra import to_matrix
from ..diagnostics import director_gap, limit_residual, lift_director
from ..errors import QFlowError
from ..fields import integrate
from ..manifold import dist_to_N, tilde_bulk_energy
from ..run import simulate
from ..solver import solve_harmonic_map
from .runner import fmt, initial_director, initial_field, sha256_text, write_csv

SWEEP_COLUMNS = ("eps", "sup_distN", "int_tilde_fB", "tangent_residual", "director_gap")


class SweepMemberError(QFlowError):
    """A member run failed; ``eps`` identifies it and ``cause`` holds the original error."""

    def __init__(self, eps, cause):
        super().__init__(f"sweep member eps={eps:g} failed: {cause}")
        self.eps = eps
        self.cause = cause


@dataclass(frozen=True)
class SweepRow:
    eps: float
    sup_distN: float
    int_tilde_fB: float
    tangent_residual: float
    director_gap: float

    def as_row(self):
        return [getattr(self, k) for k in SWEEP_COLUMNS]


def member_metrics(cfg, compare_harmonic=True, harmonic_n=None):
    """Run one member and measure it at the final time."""
    p = cfg.params
    run = simulate(initial_field(cfg), p, cfg.solver)
    final = run.final
    mats = final.matrices()
    sup_dist = float(dist_to_N(mats, p).max())
    bulk = integrate(tilde_bulk_energy(mats, p), cfg.grid)
    tang, _ = limit_residual(run.field(len(run) - 2), final, p)
    gap = float("nan")
    if compare_harmonic:
        if harmonic_n is None:
            harmonic_n = harmonic_reference(cfg)
        gap = director_gap(lift_director(final, p), harmonic_n)
    return SweepRow(p.eps, sup_dist, bulk, tang, gap)


def harmonic_reference(cfg):
    """Harmonic map flow from the initial director, on the Q-flow's time scale ``L1/Gamma``."""
    return solve_harmonic_map(initial_director(cfg), cfg.solver.T, diffusivity=cfg.params.diffusivity)


def fitted_slope(eps, values):
    """Least-squares slope of ``log(value)`` against ``log(eps)``; NaN unless all values are positive."""
    v = np.asarray(values, dtype=float)
    if v.size < 2 or not np.all(np.isfinite(v)) or np.any(v <= 0.0):
        return float("nan")
    return float(np.polyfit(np.log(eps), np.log(v), 1)[0])


def run_sweep(spec, threads=1):
    members = [spec.base.with_eps(e) for e in spec.ladder]
    ref = harmonic_reference(members[0]) if spec.compare_harmonic else None

    def one(cfg):
        try:
            return member_metrics(cfg, spec.compare_harmonic, ref)
        except QFlowError as exc:
            raise SweepMemberError(cfg.params.eps, exc) from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, members))
    return [one(cfg) for cfg in members]


def write_sweep(spec, out_dir, threads=1):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = run_sweep(spec, threads)
    eps = [r.eps for r in rows]
    slopes = ["slope"] + [fitted_slope(eps, [getattr(r, k) for r in rows]) for k in SWEEP_COLUMNS[1:]]
    write_csv(out / "sweep_report.csv", SWEEP_COLUMNS, [r.as_row() for r in rows] + [slopes])
    manifest = {
        "library": "qflow",
        "version": __version__,
        "config": spec.base.text,
        "config_sha256": sha256_text(spec.base.text),
        "ladder": [fmt(e) for e in spec.ladder],
        "grid": {"shape": list(spec.base.grid.shape), "lengths": list(spec.base.grid.lengths)},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return rows, out
