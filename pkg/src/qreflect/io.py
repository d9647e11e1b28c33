"""Snapshot CSV, run manifest, and report writers.

CSV contract (the language boundary consumed by the plotting frontend):
one header line

    # t=<t> <x1_min> <x1_max> <nx1> <x2_min> <x2_max> <nx2>

followed by nx2 comma-separated rows of nx1 PDF values; row index follows
x2, column index follows x1.  All numbers print with %.17g so a parse
round-trips bit-exactly.  Optional gzip compression appends ".gz".
"""

from __future__ import annotations

import gzip as _gzip
import os
from pathlib import Path

import numpy as np

from .core import GridSnapshot

_G = "%.17g"


def output_root(explicit: str | None = None) -> Path:
    """Output directory: explicit value, else $QREFLECT_OUT, else ./out."""
    if explicit:
        return Path(explicit)
    env = os.environ.get("QREFLECT_OUT")
    return Path(env) if env else Path("out")


def snapshot_csv_text(snapshot: GridSnapshot) -> str:
    x1, x2 = snapshot.x1_axis, snapshot.x2_axis
    header = ("# t=" + _G % snapshot.t
              + " " + _G % x1[0] + " " + _G % x1[-1] + f" {x1.size}"
              + " " + _G % x2[0] + " " + _G % x2[-1] + f" {x2.size}")
    rows = "\n".join(",".join(_G % v for v in row) for row in snapshot.pdf)
    return header + "\n" + rows + "\n"


def write_snapshot_csv(snapshot: GridSnapshot, path: str | Path, gzip: bool = False) -> Path:
    path = Path(path)
    text = snapshot_csv_text(snapshot)
    path.parent.mkdir(parents=True, exist_ok=True)
    if gzip:
        path = path.with_suffix(path.suffix + ".gz")
        # fixed mtime so identical runs produce identical bytes
        with _gzip.GzipFile(path, "wb", mtime=0) as fh:
            fh.write(text.encode())
    else:
        path.write_text(text)
    return path


def read_snapshot_csv(path: str | Path) -> GridSnapshot:
    path = Path(path)
    if path.suffix == ".gz":
        text = _gzip.decompress(path.read_bytes()).decode()
    else:
        text = path.read_text()
    lines = text.strip().splitlines()
    head = lines[0]
    if not head.startswith("# t="):
        raise ValueError(f"{path}: malformed snapshot header")
    fields = head[2:].split()
    t = float(fields[0][2:])
    x1_min, x1_max, nx1 = float(fields[1]), float(fields[2]), int(fields[3])
    x2_min, x2_max, nx2 = float(fields[4]), float(fields[5]), int(fields[6])
    pdf = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    if pdf.shape != (nx2, nx1):
        raise ValueError(f"{path}: data shape {pdf.shape} does not match header ({nx2}, {nx1})")
    return GridSnapshot.from_pdf(t=t, x1_axis=np.linspace(x1_min, x1_max, nx1),
                                 x2_axis=np.linspace(x2_min, x2_max, nx2), pdf=pdf)


def write_marginal_csv(coords: np.ndarray, density: np.ndarray, axis: str,
                       t: float, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = f"# t={_G % t} axis={axis} n={coords.size}"
    rows = "\n".join(_G % x + "," + _G % y for x, y in zip(coords, density))
    path.write_text(header + "\n" + rows + "\n")
    return path


def format_manifest(sections: dict[str, dict]) -> str:
    """Deterministic TOML-style manifest text (insertion-ordered sections)."""
    chunks = []
    for name, table in sections.items():
        chunks.append(f"[{name}]")
        for key, value in table.items():
            if isinstance(value, bool):
                rep = "true" if value else "false"
            elif isinstance(value, float):
                rep = _G % value
            elif isinstance(value, int):
                rep = str(value)
            elif isinstance(value, (list, tuple)):
                rep = "[" + ", ".join(
                    (_G % v if isinstance(v, float) else repr(v)) for v in value) + "]"
            else:
                rep = '"' + str(value).replace('"', '\\"') + '"'
            chunks.append(f"{key} = {rep}")
        chunks.append("")
    return "\n".join(chunks)


def write_manifest(sections: dict[str, dict], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_manifest(sections))
    return path
