"""CSV/JSON interchange and atomic file writes.

Curve CSV format: first row holds the grid points, each subsequent row one
curve; UTF-8 with '.' decimals. Labels CSV: index,label rows with a header.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile

import numpy as np

from .funspace import EigenSystem, FunctionalSample, Grid, make_uniform_grid


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _format_row(row) -> str:
    return ",".join(repr(float(v)) for v in row)


def sample_to_csv(sample: FunctionalSample) -> str:
    lines = [_format_row(sample.grid.points)]
    lines.extend(_format_row(row) for row in sample.values)
    return "\n".join(lines) + "\n"


def write_sample(path: str, sample: FunctionalSample) -> None:
    atomic_write_text(path, sample_to_csv(sample))


def read_sample(path: str) -> FunctionalSample:
    """Load a curve CSV; the grid gets trapezoidal weights."""
    with open(path, encoding="utf-8", newline="") as handle:
        rows = [row for row in csv.reader(handle) if row]
    if len(rows) < 2:
        raise ValueError(f"{path}: need a grid row and at least one curve row")
    points = np.array([float(v) for v in rows[0]])
    values = np.array([[float(v) for v in row] for row in rows[1:]])
    p = points.size
    if p == 2:
        weights = np.array([0.5, 0.5]) * (points[1] - points[0])
    else:
        gaps = np.diff(points)
        weights = np.empty(p)
        weights[0] = gaps[0] / 2
        weights[-1] = gaps[-1] / 2
        weights[1:-1] = (gaps[:-1] + gaps[1:]) / 2
    if np.allclose(points, np.linspace(points[0], points[-1], p)) and np.isclose(
        points[0], 0.0
    ) and np.isclose(points[-1], 1.0):
        grid = make_uniform_grid(p)
    else:
        grid = Grid(points, weights)
    return FunctionalSample(grid, values)


def write_labels(path: str, labels) -> None:
    lines = ["index,label"]
    lines.extend(f"{i},{lab}" for i, lab in enumerate(labels))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_labels(path: str) -> list:
    with open(path, encoding="utf-8", newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0] != ["index", "label"]:
        raise ValueError(f"{path}: expected 'index,label' header")
    labels = [None] * (len(rows) - 1)
    for idx, lab in rows[1:]:
        labels[int(idx)] = lab
    return labels


def eigensystem_to_json(eig: EigenSystem) -> str:
    payload = {
        "grid_points": eig.grid.points.tolist(),
        "mean": eig.mean.tolist(),
        "eigenvalues": eig.eigenvalues.tolist(),
        "eigenfunctions": eig.eigenfunctions.tolist(),
        "scores": eig.scores.tolist(),
        "usable_rank": eig.usable_rank,
    }
    return json.dumps(payload, indent=2)


def write_json(path: str, payload: dict) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")
