"""
Moving-target tracks for time-varying bistatic scenes.

A track is a polyline walked at constant speed: closed tracks loop, open
tracks walk back and forth. The reflected path length follows the target
symbol by symbol, so the carrier phase progression carries the Doppler shift
without a separate f^D parameter.
"""
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from src.augmentation.geometry import BistaticGeometry, Point, doppler_frequency
from src.core.constants import SPEED_OF_LIGHT
from src.core.exceptions import NyquistViolationError, SceneValidationError
from src.simulation.models import ClockImpairment, CsiFrame, StaticPath, SubcarrierGrid
from src.simulation.simulator import bistatic_excess_range, complex_noise

logger = logging.getLogger('simulation.trajectory')


@dataclass(frozen=True)
class TargetTrack:
    waypoints: np.ndarray
    speed: float
    closed: bool = False

    def __post_init__(self):
        points = np.asarray(self.waypoints, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] < 2:
            raise SceneValidationError("track needs at least two 2D waypoints")
        if self.speed <= 0:
            raise SceneValidationError(f"track speed must be positive, got {self.speed}")
        if self.closed and not np.allclose(points[0], points[-1]):
            points = np.vstack([points, points[:1]])
        object.__setattr__(self, 'waypoints', points)
        if self.length <= 0:
            raise SceneValidationError("track has zero length")

    @property
    def _arc(self) -> np.ndarray:
        segments = np.linalg.norm(np.diff(self.waypoints, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(segments)])

    @property
    def length(self) -> float:
        return float(self._arc[-1])

    def _arc_position(self, times: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Arc-length coordinate and walking direction (+1/-1) at each time"""
        travelled = self.speed * np.asarray(times, dtype=float)
        total = self.length
        if self.closed:
            return np.mod(travelled, total), np.ones_like(travelled)
        cycle = np.mod(travelled, 2.0 * total)
        forward = cycle <= total
        return np.where(forward, cycle, 2.0 * total - cycle), np.where(forward, 1.0, -1.0)

    def position_at(self, times: np.ndarray) -> np.ndarray:
        s, _ = self._arc_position(times)
        arc = self._arc
        x = np.interp(s, arc, self.waypoints[:, 0])
        y = np.interp(s, arc, self.waypoints[:, 1])
        return np.stack([x, y], axis=-1)

    def velocity_at(self, times: np.ndarray) -> np.ndarray:
        s, direction = self._arc_position(times)
        arc = self._arc
        segment = np.clip(np.searchsorted(arc, s, side='right') - 1, 0, len(arc) - 2)
        delta = np.diff(self.waypoints, axis=0)[segment]
        unit = delta / np.linalg.norm(delta, axis=-1, keepdims=True)
        return unit * (self.speed * direction)[..., None]


def linear_track(start: Point, end: Point, speed: float) -> TargetTrack:
    return TargetTrack(waypoints=np.array([start, end], dtype=float), speed=speed)


def ellipse_track(center: Point, semi_axes: Tuple[float, float], speed: float, num_vertices: int = 64) -> TargetTrack:
    theta = np.linspace(0.0, 2.0 * np.pi, num_vertices, endpoint=False)
    points = np.stack(
        [center[0] + semi_axes[0] * np.cos(theta), center[1] + semi_axes[1] * np.sin(theta)],
        axis=-1,
    )
    return TargetTrack(waypoints=points, speed=speed, closed=True)


def rectangle_track(center: Point, size: Tuple[float, float], speed: float) -> TargetTrack:
    half_w, half_h = size[0] / 2.0, size[1] / 2.0
    cx, cy = center
    points = np.array([
        (cx - half_w, cy - half_h),
        (cx + half_w, cy - half_h),
        (cx + half_w, cy + half_h),
        (cx - half_w, cy + half_h),
    ])
    return TargetTrack(waypoints=points, speed=speed, closed=True)


def generate_track_csi(
    track: TargetTrack,
    geometry: BistaticGeometry,
    grid: SubcarrierGrid,
    static_paths: Sequence[StaticPath],
    attenuation: complex,
    impairment: ClockImpairment,
    rng_seed: int,
) -> CsiFrame:
    """CSI of static paths plus one reflection off a target moving along ``track``

    Only the Tx/Rx positions and carrier of ``geometry`` are used.
    """
    if not static_paths:
        raise SceneValidationError("scene needs at least one static path")
    times = np.arange(grid.num_symbols) * grid.symbol_interval
    positions = track.position_at(times)
    tx = np.asarray(geometry.tx, dtype=float)
    rx = np.asarray(geometry.rx, dtype=float)
    path_length = np.linalg.norm(positions - tx, axis=1) + np.linalg.norm(positions - rx, axis=1)

    # Largest per-symbol phase step must stay below π
    step = np.max(np.abs(np.diff(path_length))) * geometry.carrier / SPEED_OF_LIGHT
    if step >= 0.5:
        raise NyquistViolationError(
            f"track moves {step:.3f} carrier cycles per symbol, Doppler exceeds Nyquist"
        )

    freqs = grid.frequencies[:, None]
    delays = (path_length / SPEED_OF_LIGHT)[None, :]
    channel = attenuation * np.exp(-2j * np.pi * freqs * delays)
    for path in static_paths:
        channel = channel + path.attenuation * np.exp(-2j * np.pi * freqs * path.delay)

    samples = impairment.phasor(grid.frequencies) * channel
    if impairment.noise_power > 0:
        samples = samples + complex_noise(samples.shape, impairment.noise_power, rng_seed)

    logger.debug(
        f"Generated track CSI {samples.shape}, path length {path_length.min():.2f}-{path_length.max():.2f} m"
    )
    return CsiFrame(samples=samples, grid=grid)


def track_truth(
    track: TargetTrack,
    geometry: BistaticGeometry,
    symbol_interval: float,
    cpi_length: int,
    cpi_stride: int,
    num_cpis: int,
) -> List[Tuple[float, float]]:
    """(excess range m, Doppler Hz) at the centre symbol of every CPI"""
    truth = []
    for k in range(num_cpis):
        centre = (k * cpi_stride + (cpi_length - 1) / 2.0) * symbol_interval
        position = track.position_at(np.array([centre]))[0]
        velocity = track.velocity_at(np.array([centre]))[0]
        at = geometry.moved_to(tuple(position), tuple(velocity))
        truth.append((bistatic_excess_range(at), doppler_frequency(at)))
    return truth
