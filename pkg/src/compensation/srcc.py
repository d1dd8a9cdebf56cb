"""
Self-referencing cross-correlation (SRCC).

Each CSI column is taken to the delay domain, a Gaussian window centred on
its strongest tap keeps the dominant path, and the windowed CIR is taken back
to the subcarrier domain as a reference. Multiplying the raw CSI by the
conjugate of that reference cancels the per-symbol TO/CFO/hardware phasor,
which is common to both.

Transforms are unitary over the subcarrier index, zero-padded to
``WindowSpec.ifft_size``; the reference is truncated back to N subcarriers.
"""
import logging
from typing import Optional

import numpy as np
from scipy import fft as sp_fft

from src.compensation.models import CirProfile, SrccMatrix, WindowSpec
from src.core.exceptions import (
    DimensionMismatchError,
    IndexOutOfRangeError,
    ZeroEnergyError,
    ZeroProfileError,
)
from src.simulation.models import CsiFrame

logger = logging.getLogger('compensation.srcc')


def _bin_spacing(frame: CsiFrame, spec: WindowSpec) -> float:
    """Delay (seconds) covered by one IFFT bin"""
    return 1.0 / (spec.ifft_size * frame.grid.spacing)


def _cir_matrix(samples: np.ndarray, ifft_size: int) -> np.ndarray:
    return sp_fft.ifft(samples, n=ifft_size, axis=0, norm='ortho')


def cir_from_symbol(frame: CsiFrame, j: int, spec: WindowSpec) -> CirProfile:
    if not 0 <= j < frame.num_symbols:
        raise IndexOutOfRangeError(f"symbol index {j} outside [0, {frame.num_symbols})")
    spec.check_subcarriers(frame.num_subcarriers)
    taps = _cir_matrix(frame.column(j), spec.ifft_size)
    return CirProfile(taps=taps, bin_spacing=_bin_spacing(frame, spec))


def peak_bin(cir: CirProfile) -> int:
    power = np.abs(cir.taps) ** 2
    if not np.any(power > 0):
        raise ZeroProfileError("CIR has no energy, peak bin undefined")
    # argmax returns the first maximum
    return int(np.argmax(power))


def _circular_distance(center, size: int) -> np.ndarray:
    bins = np.arange(size)
    offset = np.abs(bins[:, None] - np.atleast_1d(center)[None, :])
    return np.minimum(offset, size - offset)


def gaussian_window(center: int, spec: WindowSpec) -> np.ndarray:
    """exp(-(d / 2σ)²) with d the circular distance to ``center``"""
    if not 0 <= center < spec.ifft_size:
        raise IndexOutOfRangeError(f"window centre {center} outside [0, {spec.ifft_size})")
    distance = _circular_distance(center, spec.ifft_size)[:, 0]
    return np.exp(-(distance / (2.0 * spec.sigma)) ** 2)


def windowed_cir(cir: CirProfile, spec: WindowSpec, center: Optional[int] = None) -> CirProfile:
    """Taps multiplied by the window centred on ``center`` (default: the CIR peak)"""
    if cir.size != spec.ifft_size:
        raise DimensionMismatchError(f"CIR has {cir.size} taps, window expects {spec.ifft_size}")
    if center is None:
        center = peak_bin(cir)
    return CirProfile(taps=gaussian_window(center, spec) * cir.taps, bin_spacing=cir.bin_spacing)


def _peak_bins(cir: np.ndarray, spec: WindowSpec) -> np.ndarray:
    power = np.abs(cir) ** 2
    empty = ~np.any(power > 0, axis=0)
    if np.any(empty):
        raise ZeroProfileError(f"{int(empty.sum())} symbols have an all-zero CIR")
    peaks = np.argmax(power, axis=0)
    if spec.peak_mode == 'cpi_median':
        peaks = np.full_like(peaks, int(np.round(np.median(peaks))))
    return peaks


def reconstruct_csi(frame: CsiFrame, spec: WindowSpec) -> CsiFrame:
    """Dominant-path reference CSI, one window per symbol (or one per CPI in cpi_median mode)"""
    spec.check_subcarriers(frame.num_subcarriers)
    cir = _cir_matrix(frame.samples, spec.ifft_size)
    peaks = _peak_bins(cir, spec)
    windows = np.exp(-(_circular_distance(peaks, spec.ifft_size) / (2.0 * spec.sigma)) ** 2)
    reference = sp_fft.fft(windows * cir, axis=0, norm='ortho')[: frame.num_subcarriers]
    logger.debug(
        f"Reconstructed {frame.samples.shape} CSI, sigma={spec.sigma}, "
        f"peak bins {int(peaks.min())}-{int(peaks.max())}"
    )
    return frame.with_samples(reference)


def srcc(frame: CsiFrame, spec: WindowSpec) -> SrccMatrix:
    """ΔCSI = CSI · conj(reconstructed CSI)"""
    reference = reconstruct_csi(frame, spec)
    return SrccMatrix(values=frame.samples * np.conj(reference.samples), grid=frame.grid)


def crlb_phase_bound(cir: CirProfile, window: np.ndarray, noise_power: float) -> float:
    """Lower bound η² / (2‖window · cir‖²) on the reconstructed-CSI phase variance (rad²)"""
    if noise_power <= 0:
        raise ValueError(f"noise power must be positive, got {noise_power}")
    window = np.asarray(window, dtype=float)
    if window.shape != cir.taps.shape:
        raise DimensionMismatchError(f"window length {window.size} does not match {cir.size} taps")
    energy = float(np.sum(np.abs(window * cir.taps) ** 2))
    if energy <= 0:
        raise ZeroEnergyError("windowed CIR has zero energy")
    return noise_power / (2.0 * energy)
