"""
Two-antenna phase-removal baselines.

CACC multiplies one antenna's CSI by the conjugate of the other's; CASR
divides them. Both cancel the clock phasor shared by antennas on the same
receiver. Their outputs are ``SrccMatrix`` instances so they run through the
same extraction tail as SRCC.
"""
import logging
from dataclasses import dataclass

import numpy as np

from src.compensation.models import SrccMatrix
from src.core.exceptions import DivisorNearZeroError, GridMismatchError
from src.simulation.models import ClockImpairment, CsiFrame, DynamicPath, PathScene, StaticPath
from src.simulation.simulator import generate_csi

logger = logging.getLogger('baselines.dual_antenna')

# |CSI_B| below this fraction of the frame RMS is treated as zero
DIVISOR_FLOOR = 1e-12


@dataclass(frozen=True)
class DualAntennaFrame:
    antenna_a: CsiFrame
    antenna_b: CsiFrame

    def __post_init__(self):
        if not _same_grid(self.antenna_a.grid, self.antenna_b.grid):
            raise GridMismatchError("antenna frames use different subcarrier grids")


def _same_grid(a, b) -> bool:
    return (
        a.num_symbols == b.num_symbols
        and a.symbol_interval == b.symbol_interval
        and np.array_equal(a.frequencies, b.frequencies)
    )


def simulate_dual(
    scene_a: PathScene,
    scene_b: PathScene,
    shared_impairment: ClockImpairment,
    rng_seed: int,
) -> DualAntennaFrame:
    """Both antennas see the same clock impairment; noise uses the same seed"""
    if not _same_grid(scene_a.grid, scene_b.grid):
        raise GridMismatchError("antenna scenes use different subcarrier grids")
    frame_a = generate_csi(scene_a.with_impairment(shared_impairment), rng_seed)
    frame_b = generate_csi(scene_b.with_impairment(shared_impairment), rng_seed)
    return DualAntennaFrame(antenna_a=frame_a, antenna_b=frame_b)


def cacc(frame: DualAntennaFrame) -> SrccMatrix:
    """CSI_A · conj(CSI_B)"""
    values = frame.antenna_a.samples * np.conj(frame.antenna_b.samples)
    return SrccMatrix(values=values, grid=frame.antenna_a.grid)


def casr(frame: DualAntennaFrame) -> SrccMatrix:
    """CSI_A / CSI_B"""
    divisor = frame.antenna_b.samples
    floor = DIVISOR_FLOOR * float(np.sqrt(np.mean(np.abs(divisor) ** 2)))
    small = np.abs(divisor) <= floor
    if np.any(small):
        raise DivisorNearZeroError(int(small.sum()), floor)
    return SrccMatrix(values=frame.antenna_a.samples / divisor, grid=frame.antenna_a.grid)


def ula_pair(scene: PathScene, rng_seed: int, spacing_wavelengths: float = 0.5) -> PathScene:
    """Second-antenna scene of a two-element ULA

    Every path gets a random angle of arrival and the matching phase offset
    2π·d·sin(θ) at the carrier; delays and Doppler are unchanged.
    """
    rng = np.random.default_rng(rng_seed)
    count = len(scene.static_paths) + len(scene.dynamic_paths)
    angles = rng.uniform(-np.pi / 2.0, np.pi / 2.0, count)
    offsets = np.exp(-2j * np.pi * spacing_wavelengths * np.sin(angles))

    n_static = len(scene.static_paths)
    static = [
        StaticPath(attenuation=p.attenuation * offsets[k], delay=p.delay)
        for k, p in enumerate(scene.static_paths)
    ]
    dynamic = [
        DynamicPath(attenuation=p.attenuation * offsets[n_static + k], delay=p.delay, doppler=p.doppler)
        for k, p in enumerate(scene.dynamic_paths)
    ]
    logger.debug(f"ULA pair with AoAs {np.degrees(angles).round(1).tolist()} deg")
    return PathScene(grid=scene.grid, static_paths=static, dynamic_paths=dynamic, impairment=scene.impairment)


def equalize_static(scene_a: PathScene, scene_b: PathScene) -> PathScene:
    """``scene_b`` with every static attenuation rescaled to the magnitude of its counterpart in ``scene_a``"""
    if len(scene_a.static_paths) != len(scene_b.static_paths):
        raise GridMismatchError("scenes have different static path counts")
    static = []
    for pa, pb in zip(scene_a.static_paths, scene_b.static_paths):
        phase = pb.attenuation / abs(pb.attenuation) if abs(pb.attenuation) > 0 else 1.0
        static.append(StaticPath(attenuation=abs(pa.attenuation) * phase, delay=pb.delay))
    return PathScene(
        grid=scene_b.grid,
        static_paths=static,
        dynamic_paths=scene_b.dynamic_paths,
        impairment=scene_b.impairment,
    )
