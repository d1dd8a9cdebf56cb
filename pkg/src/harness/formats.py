"""
Binary containers for CSI frames (``WCSI``) and feature tensors (``WDDT``).

Little-endian throughout. CSI samples are stored as interleaved float32
pairs, subcarrier-major; tensor payloads as float32 in (delay, Doppler, CPI)
row-major order; axes and header scalars as float64.
"""
import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

from src.core.exceptions import (
    BadMagicError,
    FormatError,
    TruncatedPayloadError,
    VersionMismatchError,
)
from src.extraction.models import DelayGrid, FeatureTensor
from src.simulation.models import CsiFrame, SubcarrierGrid

logger = logging.getLogger('harness.formats')

CSI_VERSION = 1
# 2 adds the CPI length after the stride
TENSOR_VERSION = 2

CSI_MAGIC = b'WCSI'
# magic, version, N, M, sample rate, carrier
_CSI_HEADER = struct.Struct('<4sHIQdd')

TENSOR_MAGIC = b'WDDT'
# magic, version, L_delay, L_doppler, L_cpi, cpi stride, cpi length (0 = unknown)
_TENSOR_HEADER = struct.Struct('<4sHIIIII')

PathLike = Union[str, Path]


def _check_header(blob: bytes, header: struct.Struct, magic: bytes, version: int, path: Path):
    if len(blob) < header.size:
        raise TruncatedPayloadError(f"{path}: {len(blob)} bytes, header needs {header.size}")
    fields = header.unpack_from(blob, 0)
    if fields[0] != magic:
        raise BadMagicError(f"{path}: magic {fields[0]!r}, expected {magic!r}")
    if fields[1] != version:
        raise VersionMismatchError(f"{path}: version {fields[1]}, expected {version}")
    return fields


def _check_length(blob: bytes, expected: int, path: Path) -> None:
    if len(blob) < expected:
        raise TruncatedPayloadError(f"{path}: {len(blob)} bytes, expected {expected}")
    if len(blob) > expected:
        raise FormatError(f"{path}: {len(blob) - expected} trailing bytes")


def write_csi(path: PathLike, frame: CsiFrame) -> None:
    path = Path(path)
    grid = frame.grid
    header = _CSI_HEADER.pack(
        CSI_MAGIC, CSI_VERSION, grid.num_subcarriers, grid.num_symbols, grid.sample_rate, grid.carrier
    )
    payload = np.ascontiguousarray(frame.samples, dtype='<c8')
    with open(path, 'wb') as f:
        f.write(header)
        f.write(np.asarray(grid.frequencies, dtype='<f8').tobytes())
        f.write(payload.tobytes())
    logger.info(f"Wrote CSI {frame.samples.shape} to {path}")


def read_csi(path: PathLike) -> CsiFrame:
    path = Path(path)
    blob = path.read_bytes()
    _, _, n, m, sample_rate, carrier = _check_header(blob, _CSI_HEADER, CSI_MAGIC, CSI_VERSION, path)
    offset = _CSI_HEADER.size
    _check_length(blob, offset + 8 * n + 8 * n * m, path)

    frequencies = np.frombuffer(blob, dtype='<f8', count=n, offset=offset)
    samples = np.frombuffer(blob, dtype='<c8', count=n * m, offset=offset + 8 * n).reshape(n, m)
    grid = SubcarrierGrid(
        frequencies=frequencies,
        symbol_interval=1.0 / sample_rate,
        num_symbols=int(m),
        carrier=carrier,
    )
    logger.info(f"Read CSI ({n}, {m}) from {path}")
    return CsiFrame(samples=samples, grid=grid)


def write_tensor(path: PathLike, tensor: FeatureTensor) -> None:
    """Delay axis is written in seconds"""
    path = Path(path)
    n_delay, n_doppler, n_cpi = tensor.frames.shape
    header = _TENSOR_HEADER.pack(
        TENSOR_MAGIC, TENSOR_VERSION, n_delay, n_doppler, n_cpi, tensor.cpi_stride, tensor.cpi_length or 0
    )
    with open(path, 'wb') as f:
        f.write(header)
        f.write(np.asarray(tensor.grid.delays, dtype='<f8').tobytes())
        f.write(np.asarray(tensor.doppler_axis, dtype='<f8').tobytes())
        f.write(np.ascontiguousarray(tensor.frames, dtype='<f4').tobytes())
    logger.info(f"Wrote tensor {tensor.frames.shape} to {path}")


def read_tensor(path: PathLike) -> FeatureTensor:
    path = Path(path)
    blob = path.read_bytes()
    _, _, n_delay, n_doppler, n_cpi, stride, cpi_length = _check_header(
        blob, _TENSOR_HEADER, TENSOR_MAGIC, TENSOR_VERSION, path
    )
    offset = _TENSOR_HEADER.size
    _check_length(blob, offset + 8 * (n_delay + n_doppler) + 4 * n_delay * n_doppler * n_cpi, path)

    delays = np.frombuffer(blob, dtype='<f8', count=n_delay, offset=offset)
    offset += 8 * n_delay
    doppler_axis = np.frombuffer(blob, dtype='<f8', count=n_doppler, offset=offset).copy()
    offset += 8 * n_doppler
    frames = np.frombuffer(blob, dtype='<f4', count=n_delay * n_doppler * n_cpi, offset=offset)
    logger.info(f"Read tensor ({n_delay}, {n_doppler}, {n_cpi}) from {path}")
    return FeatureTensor(
        frames=frames.reshape(n_delay, n_doppler, n_cpi).astype(np.float64),
        doppler_axis=doppler_axis,
        grid=DelayGrid(delays=delays),
        cpi_stride=int(stride),
        cpi_length=int(cpi_length) or None,
    )
