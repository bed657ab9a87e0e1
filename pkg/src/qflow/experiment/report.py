"""Merging the diagnostics of several run directories."""

import csv
import json
from pathlib import Path

from ..errors import ManifestMismatchError
from ..diagnostics import DIAGNOSTIC_COLUMNS


def load_run_dir(path):
    path = Path(path)
    manifest_path = path / "manifest.json"
    if not manifest_path.is_file():
        raise ManifestMismatchError(f"{path}: no manifest.json")
    manifest = json.loads(manifest_path.read_text())
    with open(path / "diagnostics.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != DIAGNOSTIC_COLUMNS:
        raise ManifestMismatchError(f"{path}: unexpected diagnostics columns")
    return manifest, rows[1:]


def _grid_key(manifest):
    g = manifest["grid"]
    return tuple(g["shape"]), tuple(g["lengths"])


def merge(dirs, out_dir):
    """Write ``report.csv`` and one whitespace-separated ``.dat`` file per run.

    Runs are ordered by ``(eps, grid)``; all must share one grid.
    """
    loaded = [(Path(d), *load_run_dir(d)) for d in dirs]
    grids = {_grid_key(m) for _, m, _ in loaded}
    if len(grids) > 1:
        listing = ", ".join(f"{d}: {_grid_key(m)}" for d, m, _ in loaded)
        raise ManifestMismatchError(f"incompatible grids, refusing to merge ({listing})")
    loaded.sort(key=lambda item: (item[1]["eps"], _grid_key(item[1]), str(item[0])))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = ("run_id", "eps", "grid") + DIAGNOSTIC_COLUMNS
    written = []
    with open(out / "report.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for d, m, rows in loaded:
            run_id = d.name or str(d)
            grid = "x".join(str(n) for n in m["grid"]["shape"])
            eps = "%.17g" % m["eps"]
            for row in rows:
                w.writerow([run_id, eps, grid] + row)
            dat = out / f"{run_id}.dat"
            with open(dat, "w") as dh:
                dh.write("# " + " ".join(DIAGNOSTIC_COLUMNS) + f"\n# eps {eps} grid {grid}\n")
                for row in rows:
                    dh.write(" ".join(row) + "\n")
            written.append(dat)
    return out / "report.csv", written
