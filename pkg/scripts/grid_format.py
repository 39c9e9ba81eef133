# scripts/grid_format.py
"""Reader and writer for .bsg sampled-field files.

Layout: one JSON header line, a newline, then N_r * N_theta * N_z * 3
little-endian float64 values in r-major, then theta, then z order, with the
three components (e_r, e_theta, e_z) innermost.
"""

import json
from pathlib import Path

import numpy as np

from beltrami_scope.errors import GridFormatError
from beltrami_scope.fields import SampledGrid, VectorField
from beltrami_scope.geometry import TubeChart

MAGIC = "BSG1"
FRAME = "orthonormal-cylindrical"
ENCODING = "f64-le"
_REQUIRED = ("magic", "N_r", "N_theta", "N_z", "R", "L", "frame", "encoding")


def _split(blob: bytes, path: Path) -> tuple[dict, bytes]:
    newline = blob.find(b"\n")
    if newline < 0:
        raise GridFormatError(f"{path}: missing header line.")
    try:
        header = json.loads(blob[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise GridFormatError(f"{path}: header is not JSON ({e}).") from e
    if not isinstance(header, dict):
        raise GridFormatError(f"{path}: header must be a JSON object.")
    return header, blob[newline + 1 :]


def _check_header(header: dict, path: Path) -> tuple[int, int, int]:
    missing = [key for key in _REQUIRED if key not in header]
    if missing:
        raise GridFormatError(f"{path}: header is missing {', '.join(missing)}.")
    if header["magic"] != MAGIC:
        raise GridFormatError(f"{path}: bad magic {header['magic']!r}, expected {MAGIC!r}.")
    if header["frame"] != FRAME or header["encoding"] != ENCODING:
        raise GridFormatError(
            f"{path}: unsupported frame/encoding {header['frame']!r}/{header['encoding']!r}."
        )
    shape = tuple(header[key] for key in ("N_r", "N_theta", "N_z"))
    if not all(isinstance(n, int) and n >= 4 for n in shape):
        raise GridFormatError(f"{path}: grid sizes must be integers >= 4, got {shape}.")
    if not all(isinstance(header[k], (int, float)) and header[k] > 0 for k in ("R", "L")):
        raise GridFormatError(f"{path}: R and L must be positive numbers.")
    return shape


def read_header(path: str | Path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise GridFormatError(f"Grid file not found: {path}")
    with path.open("rb") as f:
        header, _ = _split(f.readline(), path)
    _check_header(header, path)
    return header


def read_grid(path: str | Path, method: str = "linear") -> SampledGrid:
    path = Path(path)
    if not path.is_file():
        raise GridFormatError(f"Grid file not found: {path}")
    header, payload = _split(path.read_bytes(), path)
    n_r, n_theta, n_z = _check_header(header, path)
    expected = n_r * n_theta * n_z * 3 * 8
    if len(payload) != expected:
        raise GridFormatError(
            f"{path}: payload has {len(payload)} bytes, header implies {expected}.",
            expected=expected,
            actual=len(payload),
        )
    values = np.frombuffer(payload, dtype="<f8").reshape(n_r, n_theta, n_z, 3)
    if not np.all(np.isfinite(values)):
        raise GridFormatError(f"{path}: payload contains non-finite values.")
    chart = TubeChart(float(header["R"]), float(header["L"]))
    return SampledGrid(values.copy(), chart, header.get("metric", "euclidean"), method)


def write_grid(path: str | Path, grid: SampledGrid) -> Path:
    path = Path(path)
    n_r, n_theta, n_z = grid.shape
    header = {
        "magic": MAGIC,
        "N_r": n_r,
        "N_theta": n_theta,
        "N_z": n_z,
        "R": grid.chart.R,
        "L": grid.chart.L,
        "frame": FRAME,
        "encoding": ENCODING,
        "metric": grid.metric_tag,
    }
    with path.open("wb") as f:
        f.write(json.dumps(header).encode("utf-8") + b"\n")
        f.write(np.ascontiguousarray(grid.values, dtype="<f8").tobytes())
    return path


def export_grid(field: VectorField, chart: TubeChart, shape: tuple[int, int, int], path: str | Path) -> Path:
    return write_grid(path, SampledGrid.from_field(field, chart, shape))
