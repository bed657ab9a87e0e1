"""Executing a configured run and writing its output directory."""

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .. import __version__
from ..diagnostics import DIAGNOSTIC_COLUMNS, ParabolicPoint, diagnostics_records, phi_ladder, psi_ladder
from ..run import simulate
from ..snapshot import write_snapshot
from ..solver import constant_director, initial_circle_map, initial_from_director, perturb_director

MONOTONICITY_COLUMNS = ("z0_x", "z0_y", "z0_z", "t0", "R", "Phi", "Psi")


def fmt(x):
    """17 significant digits, enough to round-trip a double."""
    return "%.17g" % x


def initial_director(cfg):
    init, grid = cfg.init, cfg.grid
    if init.builder in ("circle_map", "perturbed_circle_map"):
        n = initial_circle_map(grid, init.m, init.axis)
    else:
        n = constant_director(grid)
    if init.builder.startswith("perturbed"):
        n = perturb_director(n, init.amplitude, init.seed)
    return n


def initial_field(cfg):
    return initial_from_director(initial_director(cfg), cfg.params)


def default_ladder(t0, count=6):
    """``count`` radii spread inside ``(0, sqrt(t0) / 2)``."""
    top = 0.5 * math.sqrt(t0)
    return tuple(float(r) for r in np.linspace(0.25, 0.95, count) * top)


def monotonicity_rows(run, t0, radii):
    grid = run.grid
    z0 = ParabolicPoint(grid.center, t0)
    phi = phi_ladder(run, z0, radii)
    psi = psi_ladder(run, z0, radii)
    x = z0.padded()
    return [(x[0], x[1], x[2], t0, R, f, s) for R, f, s in zip(radii, phi, psi)]


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def sha256_text(text):
    return hashlib.sha256(text.encode()).hexdigest()


def execute(cfg, out_dir=None, write_snapshots=True):
    """Simulate ``cfg`` and write snapshots, CSV tables and ``manifest.json``.

    Returns ``(run, out_path)``.
    """
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    q0 = initial_field(cfg)
    run = simulate(q0, cfg.params, cfg.solver)

    snap_names = []
    if write_snapshots:
        snap_dir = out / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        for k in range(len(run)):
            name = f"snap_{k:05d}.qfld"
            write_snapshot(snap_dir / name, run.field(k), cfg.params)
            snap_names.append(f"snapshots/{name}")

    records = diagnostics_records(run)
    write_csv(out / "diagnostics.csv", DIAGNOSTIC_COLUMNS, [r.as_row() for r in records])

    t0 = cfg.t0 if cfg.t0 is not None else 0.8 * cfg.solver.T
    radii = cfg.radii or default_ladder(t0)
    write_csv(out / "monotonicity.csv", MONOTONICITY_COLUMNS, monotonicity_rows(run, t0, radii))

    manifest = {
        "library": "qflow",
        "version": __version__,
        "config": cfg.text,
        "config_sha256": sha256_text(cfg.text),
        "eps": cfg.params.eps,
        "grid": {"shape": list(cfg.grid.shape), "lengths": list(cfg.grid.lengths)},
        "seed": cfg.init.seed,
        "dt": cfg.solver.dt,
        "steps": cfg.solver.n_steps,
        "snapshots": snap_names,
        "files": {
            name: hashlib.sha256((out / name).read_bytes()).hexdigest()
            for name in ("diagnostics.csv", "monotonicity.csv")
        },
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return run, out


def with_seed(text, seed):
    """Config text with ``init.seed`` replaced, so the manifest records the effective seed."""
    if seed is None:
        return text
    lines = [ln for ln in text.splitlines() if not ln.split("#", 1)[0].strip().startswith("init.seed")]
    return "\n".join(lines).rstrip("\n") + f"\ninit.seed = {seed}\n"
