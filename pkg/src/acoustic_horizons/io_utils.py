"""Deterministic artifact writers: CSV, JSON, binary snapshots, manifest.

Floats are serialized with ``repr`` (shortest round-trip form), iteration
orders are fixed, and no timestamps are embedded, so re-running an
identical configuration reproduces byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np


def fmt(value) -> str:
    """Shortest round-trip decimal form of a scalar."""
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, (np.integer, int)):
        return str(int(value))
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    def _default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating,)):
            return float(o)
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, (np.bool_,)):
            return bool(o)
        raise TypeError(f"not JSON-serializable: {type(o)}")

    path.write_text(json.dumps(obj, indent=2, sort_keys=True,
                               default=_default) + "\n")
    return path


def write_snapshot(path: Path, field: np.ndarray, grid, t: float) -> list[Path]:
    """Binary field snapshot: little-endian float64, row-major over (r, theta).

    A JSON sidecar records the grid geometry and the snapshot time.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(np.ascontiguousarray(field, dtype="<f8").tobytes())
    sidecar = path.with_suffix(path.suffix + ".json")
    write_json(sidecar, {
        "Nr": grid.nr, "Ntheta": grid.nt,
        "r_min": grid.r_min, "r_max": grid.r_max, "t": t,
        "dtype": "<f8", "layout": "row-major (r, theta)",
    })
    return [path, sidecar]


def write_curve_csv(path: Path, curve: np.ndarray) -> Path:
    return write_csv(path, ["x1", "x2"], np.asarray(curve))


def read_curve_csv(path: Path) -> np.ndarray:
    rows = Path(path).read_text().strip().splitlines()[1:]
    return np.array([[float(a) for a in r.split(",")] for r in rows])


def sha256_of(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir: Path, artifacts: list[Path], status: str = "ok",
                   error: dict | None = None, extra: dict | None = None) -> Path:
    """Manifest listing every produced file with its content hash."""
    out_dir = Path(out_dir)
    entries = []
    for p in sorted(set(Path(a) for a in artifacts)):
        entries.append({
            "path": os.path.relpath(p, out_dir),
            "sha256": sha256_of(p),
            "bytes": p.stat().st_size,
        })
    manifest = {"status": status, "artifacts": entries}
    if error is not None:
        manifest["error"] = error
    if extra:
        manifest.update(extra)
    return write_json(out_dir / "manifest.json", manifest)
