"""CSV input/output for frames, sensorgrams and analysis tables.

All files are plain CSV with one header row.  Files written by this
package carry a single leading comment line

    # wmsense config_sha256=<12 hex> seed=<int>

recording the configuration digest and RNG seed of the run, so outputs
are reproducible byte for byte.  Floats are serialised with ``repr``
(shortest round-trip form); no timestamps or environment details are
ever written.
"""

import csv
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .kinetics import BindingPoint
from .spectral import Sensorgram, SpectrumFrame


class DataError(Exception):
    """A data file is missing, malformed, or inconsistent."""


def _fmt(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    return repr(v)


def write_table(path, header, rows, meta=None):
    """Write a CSV table with the standard provenance comment line.

    ``meta`` maps comment keys to values (e.g. config_sha256, seed);
    pass None to omit the comment line entirely.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        if meta is not None:
            pairs = " ".join(f"{k}={v}" for k, v in meta.items())
            fh.write(f"# wmsense {pairs}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _read_rows(path, expected_columns=None):
    """Header + data rows of a CSV file, skipping '#' comment lines."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if expected_columns is not None:
        missing = [c for c in expected_columns if c not in header]
        if missing:
            raise DataError(
                f"{path}: missing required column(s) {missing}; found {header}"
            )
    return path, header, rows[1:]


def _parse_float(path, row_idx, name, text):
    try:
        return float(text)
    except ValueError:
        raise DataError(
            f"{path}: row {row_idx}: column {name!r} is not a number: {text!r}"
        ) from None


def write_frame(path, frame, grid, meta=None):
    """Write one frame as wavelength_nm,counts rows."""
    rows = zip(grid.wavelengths, frame.counts)
    write_table(path, ["wavelength_nm", "counts"], rows, meta)


def read_frame(path):
    """Read a wavelength_nm,counts file.

    Returns (wavelengths, frame).  The frame is assumed dark-subtracted;
    raw captures should be subtracted before centroid analysis.
    """
    path, header, rows = _read_rows(path, ["wavelength_nm", "counts"])
    iw = header.index("wavelength_nm")
    ic = header.index("counts")
    lam, counts = [], []
    for i, row in enumerate(rows, start=2):
        lam.append(_parse_float(path, i, "wavelength_nm", row[iw]))
        counts.append(_parse_float(path, i, "counts", row[ic]))
    if len(lam) < 2:
        raise DataError(f"{path}: need at least 2 pixels, got {len(lam)}")
    lam = np.asarray(lam)
    if not np.all(np.diff(lam) > 0.0):
        raise DataError(f"{path}: wavelengths must be strictly increasing")
    return lam, SpectrumFrame(counts=np.asarray(counts), dark_subtracted=True)


def write_sensorgram(path, sensorgram, meta=None):
    rows = zip(sensorgram.times, sensorgram.shifts)
    write_table(path, ["time_s", "shift_nm"], rows, meta)


def read_sensorgram(path):
    """Read a time_s,shift_nm series into a Sensorgram."""
    path, header, rows = _read_rows(path, ["time_s", "shift_nm"])
    it = header.index("time_s")
    ish = header.index("shift_nm")
    times, shifts = [], []
    for i, row in enumerate(rows, start=2):
        times.append(_parse_float(path, i, "time_s", row[it]))
        shifts.append(_parse_float(path, i, "shift_nm", row[ish]))
    if len(times) < 1:
        raise DataError(f"{path}: no samples")
    try:
        return Sensorgram(times=np.asarray(times), shifts=np.asarray(shifts))
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def read_frame_stack(path):
    """Read a multi-frame capture: time_s followed by one column per pixel.

    Returns (times, counts_matrix) with counts_matrix of shape
    (n_frames, n_pixels).
    """
    path, header, rows = _read_rows(path, ["time_s"])
    if len(header) < 3:
        raise DataError(f"{path}: need time_s plus at least 2 pixel columns")
    it = header.index("time_s")
    times, frames = [], []
    for i, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise DataError(
                f"{path}: row {i} has {len(row)} fields, header has {len(header)}"
            )
        times.append(_parse_float(path, i, "time_s", row[it]))
        frames.append(
            [
                _parse_float(path, i, header[j], row[j])
                for j in range(len(header))
                if j != it
            ]
        )
    if not times:
        raise DataError(f"{path}: no frames")
    return np.asarray(times), np.asarray(frames)


def read_binding_points(path):
    """Read concentration_g_per_mL,response_nm titration end points."""
    path, header, rows = _read_rows(
        path, ["concentration_g_per_mL", "response_nm"]
    )
    ic = header.index("concentration_g_per_mL")
    ir = header.index("response_nm")
    pts = []
    for i, row in enumerate(rows, start=2):
        conc = _parse_float(path, i, "concentration_g_per_mL", row[ic])
        resp = _parse_float(path, i, "response_nm", row[ir])
        try:
            pts.append(BindingPoint(concentration=conc, response=resp))
        except ValueError as exc:
            raise DataError(f"{path}: row {i}: {exc}") from None
    if not pts:
        raise DataError(f"{path}: no binding points")
    return pts


def read_resolution_points(path):
    """Read N,r_RIU rows (averaging depth, measured resolution)."""
    path, header, rows = _read_rows(path, ["N", "r_RIU"])
    i_n = header.index("N")
    i_r = header.index("r_RIU")
    n_frames, res = [], []
    for i, row in enumerate(rows, start=2):
        n_frames.append(_parse_float(path, i, "N", row[i_n]))
        res.append(_parse_float(path, i, "r_RIU", row[i_r]))
    if len(n_frames) < 2:
        raise DataError(f"{path}: need at least 2 rows, got {len(n_frames)}")
    return np.asarray(n_frames), np.asarray(res)
