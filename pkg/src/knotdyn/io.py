"""Curve and trajectory file formats.

Curve files are JSON objects {"format": "knotcurve/1", "length_normalized":
bool, "points": [[x, y, z], ...]} with coordinates written to 17
significant digits, which round-trips float64 exactly.  Trajectories are
JSON Lines: a header {"format": "knottraj/1", "params": ..., "schedule":
...} followed by one {"step", "energy", "points"} object per frame.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .curves import KnotCurve
from .errors import MalformedFileError

CURVE_FORMAT = "knotcurve/1"
TRAJ_FORMAT = "knottraj/1"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _points_json(points: np.ndarray) -> str:
    rows = ",".join(
        "[" + ",".join(_fmt(c) for c in row) + "]" for row in np.asarray(points)
    )
    return "[" + rows + "]"


def save_curve(curve: KnotCurve, path, length_normalized: bool | None = None) -> None:
    if length_normalized is None:
        length_normalized = abs(curve.total_length() - 1.0) < 1e-9
    body = (
        f'{{"format":"{CURVE_FORMAT}",'
        f'"length_normalized":{"true" if length_normalized else "false"},'
        f'"points":{_points_json(curve.points)}}}'
    )
    Path(path).write_text(body + "\n")


def load_curve(path) -> KnotCurve:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise MalformedFileError(
            f"{path}: invalid JSON at line {err.lineno}, column {err.colno}"
        ) from err
    if not isinstance(data, dict) or "format" not in data:
        raise MalformedFileError(f"{path}: missing 'format' key")
    if data["format"] != CURVE_FORMAT:
        raise MalformedFileError(f"{path}: unsupported format {data['format']!r}")
    if "points" not in data:
        raise MalformedFileError(f"{path}: missing 'points' key")
    pts = np.asarray(data["points"], dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 3:
        raise MalformedFileError(f"{path}: points must be an Nx3 list with N >= 3")
    return KnotCurve(pts, validate=False)


class TrajectoryWriter:
    """Streams frames to a JSON Lines trajectory file."""

    def __init__(self, path, params: dict, schedule: list):
        self._fh = open(path, "w")
        header = {"format": TRAJ_FORMAT, "params": params, "schedule": schedule}
        self._fh.write(json.dumps(header) + "\n")

    def write_frame(self, step: int, energy: float, points: np.ndarray) -> None:
        self._fh.write(
            f'{{"step":{step},"energy":{_fmt(energy)},"points":{_points_json(points)}}}\n'
        )

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_trajectory(path):
    """Returns (header dict, list of frame dicts with ndarray points)."""
    frames = []
    with open(path) as fh:
        first = fh.readline()
        try:
            header = json.loads(first)
        except json.JSONDecodeError as err:
            raise MalformedFileError(f"{path}: bad header: {err}") from err
        if header.get("format") != TRAJ_FORMAT:
            raise MalformedFileError(f"{path}: unsupported trajectory format")
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as err:
                raise MalformedFileError(f"{path}: line {lineno}: {err}") from err
            rec["points"] = np.asarray(rec["points"], dtype=np.float64)
            frames.append(rec)
    return header, frames
