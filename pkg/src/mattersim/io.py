"""Plain-text artifact formats: CSV curves and 16-bit ASCII PGM images.

Floats are written with 17 significant digits so that every value
round-trips exactly through its decimal representation.
"""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .kdtli import FringeScan, VisibilityCurve
from .material import DetectorImage, DiffractionPattern

PGM_MAXVAL = 65535


def fmt(x) -> str:
    if isinstance(x, (str, np.str_)):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(x) for x in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_orders(path, pattern: DiffractionPattern) -> Path:
    return write_csv(path, ["n", "intensity", "angle_rad"],
                     zip(pattern.n, pattern.intensity, pattern.angle))


def write_visibility_curves(path, curves: Sequence[VisibilityCurve]) -> Path:
    rows = []
    for curve in curves:
        rows.extend((x, v, curve.model) for x, v in zip(curve.x_axis, curve.visibility))
    return write_csv(path, ["l_over_lt", "visibility", "model"], rows)


def write_fringe_scan(path, scan: FringeScan) -> Path:
    return write_csv(path, ["offset_m", "counts"], zip(scan.offsets, scan.counts))


def write_pgm(path, image: DetectorImage) -> Path:
    """Write the detector image as a plain (P2) PGM with maxval 65535.

    The brightest pixel maps to 65535; a comment line records the probability
    carried by one grey level so the image can be converted back.
    """
    grid = np.asarray(image.grid, dtype=float)
    peak = grid.max()
    scale = peak / PGM_MAXVAL if peak > 0 else 1.0
    levels = np.rint(grid / scale).astype(np.int64) if peak > 0 else np.zeros(grid.shape, np.int64)
    ny, nx = grid.shape
    lines = [
        "P2",
        f"# probability_per_level {fmt(scale)} x_pitch_m {fmt(image.x_pitch)} y_pitch_m {fmt(image.y_pitch)}",
        f"{nx} {ny}",
        str(PGM_MAXVAL),
    ]
    lines.extend(" ".join(str(v) for v in row) for row in levels)
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_pgm(path) -> tuple[np.ndarray, int, dict]:
    """Parse a P2 PGM written by :func:`write_pgm`; returns levels, maxval and comment fields."""
    meta = {}
    tokens = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            parts = line[1:].split()
            meta.update({k: float(v) for k, v in zip(parts[::2], parts[1::2])})
            continue
        tokens.extend(line.split())
    if tokens[0] != "P2":
        raise ValueError(f"{path}: not a plain PGM (magic {tokens[0]!r})")
    nx, ny, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    data = np.array([int(t) for t in tokens[4:]], dtype=np.int64).reshape(ny, nx)
    return data, maxval, meta
