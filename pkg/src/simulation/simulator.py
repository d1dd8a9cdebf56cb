"""
Synthetic bistatic SISO CSI generator.

    CSI[i, j] = exp(-j(2π f_i τ_j^TO + φ_j^CFO)) · exp(-j φ^h) · (H^S[i] + H^X[i, j]) + noise

    H^S[i]    = Σ ρ^S exp(-j 2π f_i τ^S)
    H^X[i, j] = Σ ρ^X exp(-j 2π (f_i τ^X + f^D · j · Δt))

Symbol index j starts at 0.
"""
import logging
from typing import Optional

import numpy as np

from src.augmentation.geometry import BistaticGeometry, doppler_frequency
from src.core.constants import SPEED_OF_LIGHT
from src.simulation.models import (
    ClockImpairment,
    CsiFrame,
    DynamicPath,
    PathScene,
    StaticPath,
    SubcarrierGrid,
)

logger = logging.getLogger('simulation.simulator')


def static_response(scene: PathScene) -> np.ndarray:
    """H^S as an N-vector"""
    freqs = scene.grid.frequencies
    response = np.zeros(freqs.size, dtype=np.complex128)
    for path in scene.static_paths:
        response += path.attenuation * np.exp(-2j * np.pi * freqs * path.delay)
    return response


def dynamic_response(scene: PathScene) -> np.ndarray:
    """H^X as an N×M matrix"""
    grid = scene.grid
    freqs = grid.frequencies[:, None]
    times = np.arange(grid.num_symbols)[None, :] * grid.symbol_interval
    response = np.zeros((grid.num_subcarriers, grid.num_symbols), dtype=np.complex128)
    for path in scene.dynamic_paths:
        response += path.attenuation * np.exp(-2j * np.pi * (freqs * path.delay + path.doppler * times))
    return response


def complex_noise(shape, noise_power: float, rng_seed: int) -> np.ndarray:
    """Circular complex Gaussian samples of variance ``noise_power``"""
    rng = np.random.default_rng(rng_seed)
    scale = np.sqrt(noise_power / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def generate_csi(scene: PathScene, rng_seed: int) -> CsiFrame:
    """Evaluate the channel model for every subcarrier and symbol"""
    grid = scene.grid
    impairment = scene.impairment

    channel = static_response(scene)[:, None] + dynamic_response(scene)
    samples = impairment.phasor(grid.frequencies) * channel

    if impairment.noise_power > 0:
        samples = samples + complex_noise(samples.shape, impairment.noise_power, rng_seed)

    logger.debug(
        f"Generated CSI {samples.shape} with {len(scene.static_paths)} static / "
        f"{len(scene.dynamic_paths)} dynamic paths, noise power {impairment.noise_power:.3e}"
    )
    return CsiFrame(samples=samples, grid=grid)


def random_impairment(
    M: int,
    to_scale: float,
    rng_seed: int,
    to_quantum: Optional[float] = None,
    noise_power: float = 0.0,
) -> ClockImpairment:
    """Independent per-symbol TO ~ U[0, to_scale], CFO ~ U[0, 2π), one hardware phase ~ U[0, 2π)

    ``to_quantum`` rounds timing offsets to whole sampling-clock periods.
    """
    if M < 1:
        raise ValueError(f"need at least one symbol, got {M}")
    if to_scale < 0:
        raise ValueError(f"timing offset scale must be non-negative, got {to_scale}")

    rng = np.random.default_rng(rng_seed)
    timing = rng.uniform(0.0, to_scale, M) if to_scale > 0 else np.zeros(M)
    if to_quantum:
        timing = np.round(timing / to_quantum) * to_quantum
    cfo = rng.uniform(0.0, 2.0 * np.pi, M)
    hardware = float(rng.uniform(0.0, 2.0 * np.pi))

    return ClockImpairment(
        timing_offsets=timing,
        cfo_phases=cfo,
        hardware_phase=hardware,
        noise_power=noise_power,
    )


def noise_power_for_snr(scene: PathScene, snr_db: float) -> float:
    """η² giving ``snr_db`` relative to the mean noiseless channel power"""
    channel = static_response(scene)[:, None] + dynamic_response(scene)
    signal_power = float(np.mean(np.abs(channel) ** 2))
    return signal_power / (10.0 ** (snr_db / 10.0))


def bistatic_excess_range(geometry: BistaticGeometry) -> float:
    """(‖P − P_Tx‖ + ‖P − P_Rx‖) − ‖P_Tx − P_Rx‖ in metres"""
    return geometry.path_length - geometry.baseline


def los_path(geometry: BistaticGeometry, attenuation: complex = 1.0) -> StaticPath:
    """Direct Tx → Rx path"""
    return StaticPath(attenuation=attenuation, delay=geometry.baseline / SPEED_OF_LIGHT)


def dynamic_path_from_geometry(geometry: BistaticGeometry, attenuation: complex) -> DynamicPath:
    """Reflection off the moving target, delay and Doppler consistent with the geometry"""
    return DynamicPath(
        attenuation=attenuation,
        delay=geometry.path_length / SPEED_OF_LIGHT,
        doppler=doppler_frequency(geometry),
    )


def canonical_scene(
    excess_range_m: float = 8.0,
    doppler_hz: float = 40.0,
    snr_db: Optional[float] = 20.0,
    num_symbols: int = 128,
    dynamic_amplitude: float = 0.3,
    to_bins: int = 8,
    ifft_size: int = 128,
    rng_seed: int = 0,
) -> PathScene:
    """LoS path over a 4 m baseline plus one moving reflector, default Wi-Fi grid

    Timing offsets are whole delay bins of an ``ifft_size`` transform, at most
    ``to_bins`` of them.
    """
    grid = SubcarrierGrid.uniform(num_symbols=num_symbols)
    quantum = 1.0 / (ifft_size * grid.spacing)
    los_delay = 4.0 / SPEED_OF_LIGHT
    scene = PathScene(
        grid=grid,
        static_paths=[StaticPath(attenuation=1.0, delay=los_delay)],
        dynamic_paths=[
            DynamicPath(
                attenuation=dynamic_amplitude * np.exp(0.7j),
                delay=los_delay + excess_range_m / SPEED_OF_LIGHT,
                doppler=doppler_hz,
            )
        ],
        impairment=random_impairment(num_symbols, to_bins * quantum, rng_seed, to_quantum=quantum),
    )
    if snr_db is None:
        return scene
    return scene.with_impairment(scene.impairment.with_noise(noise_power_for_snr(scene, snr_db)))
