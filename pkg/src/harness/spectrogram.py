"""
Spectrogram export: 16-bit binary PGM images and axis-labelled CSV grids.

CSV layout: one ``#`` line naming the axes, one header row with the column
axis values, then one data row per row-axis entry.

- Doppler-time map: rows are CPIs, columns are Doppler bins.
- Delay-Doppler frame: rows are delay bins, columns are Doppler bins.

PGM layout: image rows are Doppler bins with the highest frequency on top;
columns are CPIs (maps) or delay bins (frames).
"""
import logging
from pathlib import Path
from typing import Literal, Tuple, Union

import numpy as np

from src.core.exceptions import FormatError
from src.extraction.models import DelayDopplerFrame, DopplerTimeMap

logger = logging.getLogger('harness.spectrogram')

Exportable = Union[DopplerTimeMap, DelayDopplerFrame]
ExportFormat = Literal['pgm', 'csv']

PGM_MAX = 65535


def _doppler_by_columns(target: Exportable) -> np.ndarray:
    """Doppler on axis 0, CPI or delay on axis 1"""
    if isinstance(target, DelayDopplerFrame):
        return target.magnitudes.T
    return target.magnitudes


def _write_pgm(path: Path, target: Exportable) -> None:
    image = _doppler_by_columns(target)[::-1]
    low, high = float(image.min()), float(image.max())
    if high > low:
        scaled = np.round((image - low) / (high - low) * PGM_MAX)
    else:
        scaled = np.zeros_like(image)
    height, width = image.shape
    with open(path, 'wb') as f:
        f.write(f"P5\n{width} {height}\n{PGM_MAX}\n".encode('ascii'))
        f.write(scaled.astype('>u2').tobytes())


def _write_csv(path: Path, target: Exportable) -> None:
    if isinstance(target, DelayDopplerFrame):
        rows = target.magnitudes
        rows_label = "delay_m=" + " ".join(f"{r:.6g}" for r in target.grid.as_range)
    else:
        rows = target.magnitudes.T
        rows_label = f"cpi (stride {target.cpi_stride} symbols)"
    header = (
        f"# rows: {rows_label}; columns: doppler_hz\n"
        + ",".join(f"{f:.9g}" for f in target.doppler_axis)
    )
    np.savetxt(path, rows, fmt='%.9g', delimiter=',', header=header, comments='')


def export_spectrogram(target: Exportable, path: Union[str, Path], fmt: ExportFormat = 'pgm') -> Path:
    path = Path(path)
    if np.any(target.magnitudes < 0):
        raise FormatError("spectrogram magnitudes must be non-negative")
    if fmt == 'pgm':
        _write_pgm(path, target)
    elif fmt == 'csv':
        _write_csv(path, target)
    else:
        raise FormatError(f"unknown spectrogram format '{fmt}'")
    logger.info(f"Exported {type(target).__name__} {target.magnitudes.shape} as {fmt} to {path}")
    return path


def read_spectrogram_csv(path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray]:
    """(values with one row per row-axis entry, column axis)"""
    path = Path(path)
    with open(path, 'r', encoding='utf-8') as f:
        f.readline()
        columns = np.array([float(v) for v in f.readline().strip().split(',')])
    values = np.loadtxt(path, delimiter=',', skiprows=2, ndmin=2)
    return values, columns


def read_pgm(path: Union[str, Path]) -> np.ndarray:
    """16-bit P5 image as a (height, width) integer array"""
    blob = Path(path).read_bytes()
    parts = blob.split(b'\n', 3)
    if len(parts) < 4 or parts[0] != b'P5':
        raise FormatError(f"{path}: not a binary PGM")
    width, height = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype='>u2', count=width * height).reshape(height, width)
