"""
Delay-Doppler feature extraction: per-CPI frames, stacked tensors and the
delay-compressed Doppler-time map.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sp_fft

from src.compensation.models import SrccMatrix
from src.compensation.srcc import srcc
from src.core.exceptions import (
    AxisMismatchError,
    CropRangeError,
    DimensionMismatchError,
    EmptyInputError,
    EmptySearchRegionError,
)
from src.extraction.beamforming import (
    beamform,
    build_observation,
    dynamic_component,
    mvdr_weight_matrix,
    smoothed_covariance,
    steering_matrix,
)
from src.extraction.models import (
    DelayDopplerFrame,
    DelayGrid,
    DopplerTimeMap,
    ExtractorConfig,
    FeatureTensor,
)
from src.simulation.models import CsiFrame

logger = logging.getLogger('extraction.extractor')


def split_cpis(frame: CsiFrame, cpi_length: int, stride: int) -> List[CsiFrame]:
    """Overlapping CPIs of ``cpi_length`` symbols, ``stride`` symbols apart"""
    if cpi_length < 2 or stride < 1:
        raise ValueError(f"invalid CPI framing: length={cpi_length}, stride={stride}")
    if frame.num_symbols < cpi_length:
        raise DimensionMismatchError(
            f"frame has {frame.num_symbols} symbols, shorter than one CPI of {cpi_length}"
        )
    grid = frame.grid.with_symbols(cpi_length)
    starts = range(0, frame.num_symbols - cpi_length + 1, stride)
    return [CsiFrame(samples=frame.samples[:, s:s + cpi_length], grid=grid) for s in starts]


def doppler_spectrum(
    x: np.ndarray,
    sample_rate: float,
    crop: Tuple[float, float],
) -> Tuple[np.ndarray, np.ndarray]:
    """Cropped magnitude spectrum along the last axis and its Doppler axis (Hz)

    A sequence exp(-j2π f j Δt) shows up at +f, matching the sign of the
    channel model's Doppler term.
    """
    x = np.asarray(x)
    num = x.shape[-1]
    if num < 2:
        raise DimensionMismatchError(f"Doppler transform needs at least two symbols, got {num}")
    low, high = crop
    nyquist = sample_rate / 2.0
    if low > high or low < -nyquist or high > nyquist:
        raise CropRangeError(f"crop [{low}, {high}] Hz outside ±{nyquist} Hz")

    spectrum = sp_fft.fftshift(np.abs(sp_fft.ifft(x, axis=-1, norm='forward')), axes=-1)
    axis = sp_fft.fftshift(sp_fft.fftfreq(num, d=1.0 / sample_rate))
    keep = (axis >= low) & (axis <= high)
    return spectrum[..., keep], axis[keep]


def extract_frame(matrix: SrccMatrix, grid: DelayGrid, config: ExtractorConfig) -> DelayDopplerFrame:
    """Dynamic separation → augmentation → smoothed covariance → MVDR → Doppler FFT"""
    dynamic = dynamic_component(matrix)
    obs = build_observation(dynamic)
    cov = smoothed_covariance(obs, epsilon_scale=config.epsilon_scale, epsilon_floor=config.epsilon_floor)
    steering = steering_matrix(grid, matrix.grid.frequencies)
    weights = mvdr_weight_matrix(cov, steering, config.max_condition)
    beams = beamform(obs, weights)
    magnitudes, axis = doppler_spectrum(beams, matrix.grid.sample_rate, config.doppler_crop)
    return DelayDopplerFrame(magnitudes=magnitudes, doppler_axis=axis, grid=grid)


def fft2_frame(matrix: SrccMatrix, grid: DelayGrid, config: ExtractorConfig) -> DelayDopplerFrame:
    """Plain delay transform × Doppler FFT of the dynamic component, no smoothing or MVDR"""
    dynamic = dynamic_component(matrix)
    steering = steering_matrix(grid, matrix.grid.frequencies).values
    beams = np.conj(steering).T @ dynamic.values / steering.shape[0]
    magnitudes, axis = doppler_spectrum(beams, matrix.grid.sample_rate, config.doppler_crop)
    return DelayDopplerFrame(magnitudes=magnitudes, doppler_axis=axis, grid=grid)


def doppler_only_frame(matrix: SrccMatrix, config: ExtractorConfig) -> DelayDopplerFrame:
    """Doppler spectrum of the subcarrier-summed, mean-removed CPI, no delay filtering

    The result has a single row at zero relative delay.
    """
    values = matrix.values
    series = (values - values.mean(axis=1, keepdims=True)).sum(axis=0) / values.shape[0]
    magnitudes, axis = doppler_spectrum(series[None, :], matrix.grid.sample_rate, config.doppler_crop)
    return DelayDopplerFrame(magnitudes=magnitudes, doppler_axis=axis, grid=DelayGrid(delays=[0.0]))


def _check_axes(cpis: Sequence[CsiFrame]) -> None:
    first = cpis[0].grid
    for k, cpi in enumerate(cpis[1:], start=1):
        grid = cpi.grid
        if (
            grid.num_symbols != first.num_symbols
            or grid.symbol_interval != first.symbol_interval
            or not np.array_equal(grid.frequencies, first.frequencies)
        ):
            raise AxisMismatchError(f"CPI {k} does not share the axes of CPI 0")


def extract_tensor(
    cpis: Sequence[CsiFrame],
    config: ExtractorConfig,
    max_workers: Optional[int] = None,
) -> FeatureTensor:
    """SRCC and extract_frame for every CPI, stacked in input order"""
    if not cpis:
        raise EmptyInputError("no CPIs to extract")
    _check_axes(cpis)
    grid = config.delay_grid()
    workers = max_workers or config.max_workers

    def one(cpi: CsiFrame) -> DelayDopplerFrame:
        return extract_frame(srcc(cpi, config.window), grid, config)

    if workers > 1 and len(cpis) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            frames = list(pool.map(one, cpis))
    else:
        frames = [one(cpi) for cpi in cpis]

    logger.debug(f"Extracted {len(frames)} CPIs with {workers} workers")
    stacked = np.stack([f.magnitudes for f in frames], axis=-1)
    return FeatureTensor(
        frames=stacked,
        doppler_axis=frames[0].doppler_axis,
        grid=grid,
        cpi_stride=config.cpi_stride,
        cpi_length=cpis[0].num_symbols,
    )


def compress_delay(tensor: FeatureTensor) -> DopplerTimeMap:
    return DopplerTimeMap(
        magnitudes=tensor.frames.sum(axis=0),
        doppler_axis=tensor.doppler_axis,
        cpi_stride=tensor.cpi_stride,
    )


def estimate_peak(frame: DelayDopplerFrame, dc_exclusion_bins: int) -> Tuple[float, float]:
    """(excess range m, Doppler Hz) of the strongest cell outside the DC band

    ``dc_exclusion_bins`` = k drops the 0 Hz bin and k bins on either side;
    0 searches every cell. Ties go to the smaller delay, then the smaller |f|.
    """
    if dc_exclusion_bins < 0:
        raise ValueError(f"DC exclusion must be non-negative, got {dc_exclusion_bins}")
    axis = frame.doppler_axis
    magnitudes = frame.magnitudes
    if dc_exclusion_bins > 0 and axis.size > 1:
        spacing = float(np.min(np.diff(axis)))
        allowed = np.abs(axis) > (dc_exclusion_bins + 0.5) * spacing
    else:
        allowed = np.ones(axis.size, dtype=bool)

    candidates = np.where(allowed[None, :], magnitudes, -np.inf)
    best = np.max(candidates) if candidates.size else -np.inf
    if not np.isfinite(best) or best <= 0:
        raise EmptySearchRegionError("no cell with energy outside the excluded DC band")

    rows, cols = np.nonzero(candidates == best)
    order = np.lexsort((np.abs(axis[cols]), rows))
    row, col = int(rows[order[0]]), int(cols[order[0]])
    return float(frame.grid.as_range[row]), float(axis[col])
