"""Delimited output, JSON mirrors, run manifests and gnuplot matrices.

Every CSV starts with a '#'-prefixed comment block carrying the manifest
hash so data files are traceable to the exact configuration that produced
them; floats are written with repr so re-runs are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import asdict

import numpy as np

from . import __version__
from .model import SolverOptions
from .sweep import PhasePoint, SweepGrid

EVOLVE_COLUMNS = [
    "t", "re_u", "im_u", "abs_u", "v", "n_plus", "sigma_abs", "nbar",
    "r_plus_abs", "lambda2", "en_plus", "en_total", "en_naive",
]

SWEEP_COLUMNS = [
    "eta", "s", "T", "u_inf_abs", "v_inf", "en_inf", "phase", "converged",
]

FOCK_COLUMNS = ["n", "p"]


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return repr(float(x))


def manifest_hash(manifest: dict) -> str:
    """Stable hash of the reproducibility-relevant part of a manifest."""
    payload = {k: v for k, v in manifest.items() if k != "timestamp"}
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def build_manifest(command: str, params: dict, extra: dict | None = None,
                   timestamp: str | None = None) -> dict:
    manifest = {
        "tool": "entbath",
        "version": __version__,
        "command": command,
        "parameters": params,
    }
    if extra:
        manifest.update(extra)
    manifest["hash"] = manifest_hash(manifest)
    if timestamp is not None:
        manifest["timestamp"] = timestamp
    return manifest


def write_manifest(path, manifest: dict):
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv(path, columns, rows, manifest: dict | None = None):
    """Rows of dicts/tuples -> CSV with a hash-bearing comment header."""
    with open(path, "w", newline="") as fh:
        if manifest is not None:
            fh.write(f"# entbath {__version__} {manifest['command']}\n")
            fh.write(f"# manifest_hash: {manifest['hash']}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            if isinstance(row, dict):
                writer.writerow([_fmt(row[c]) for c in columns])
            else:
                writer.writerow([_fmt(x) for x in row])


def write_json_rows(path, columns, rows, manifest: dict | None = None):
    """JSON mirror of a CSV: list of row objects plus the manifest stub."""
    out_rows = []
    for row in rows:
        if not isinstance(row, dict):
            row = dict(zip(columns, row))
        clean = {}
        for key, value in row.items():
            if isinstance(value, (np.floating, float)):
                clean[key] = float(value)
            elif isinstance(value, (np.integer, int)):
                clean[key] = int(value)
            elif isinstance(value, (np.bool_, bool)):
                clean[key] = bool(value)
            else:
                clean[key] = value
        out_rows.append(clean)
    doc = {"rows": out_rows}
    if manifest is not None:
        doc["manifest_hash"] = manifest["hash"]
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def sweep_rows(points: list[PhasePoint]):
    for p in points:
        yield {
            "eta": p.eta, "s": p.s, "T": p.temperature,
            "u_inf_abs": p.u_inf_abs, "v_inf": p.v_inf, "en_inf": p.en_inf,
            "phase": p.phase, "converged": p.converged,
        }


def write_gnuplot_matrices(out_dir, grid: SweepGrid, points: list[PhasePoint],
                           field: str = "en_inf", prefix: str = "en_matrix"):
    """One gnuplot 'nonuniform matrix' file per temperature slice.

    First row: count and the s values; following rows: eta then the field
    values across s.
    """
    etas = grid.eta.values()
    svals = grid.s.values()
    temps = grid.temperature.values()
    n_s, n_t = len(svals), len(temps)
    paths = []
    for i_t, temp in enumerate(temps):
        path = os.path.join(out_dir, f"{prefix}_T{i_t}.dat")
        with open(path, "w") as fh:
            fh.write(f"# {field} over (eta, s) at T = {_fmt(temp)}\n")
            fh.write(" ".join([str(n_s)] + [_fmt(s) for s in svals]) + "\n")
            for i_e, eta in enumerate(etas):
                vals = []
                for i_s in range(n_s):
                    p = points[(i_e * n_s + i_s) * n_t + i_t]
                    vals.append(getattr(p, field))
                fh.write(" ".join([_fmt(eta)] + [_fmt(v) for v in vals]) + "\n")
        paths.append(path)
    return paths


def grid_to_dict(grid: SweepGrid) -> dict:
    doc = asdict(grid)
    doc["solver"] = {k: v for k, v in asdict(grid.solver).items()}
    return doc


def solver_from_dict(d: dict) -> SolverOptions:
    return SolverOptions(**d)
