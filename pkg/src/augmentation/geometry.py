"""
Bistatic geometry: path-length excess and the Doppler-velocity projection.

A global frame with the transmitter at the origin is customary but not
required. All positions in metres, velocities in m/s.
"""
import logging
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.constants import SPEED_OF_LIGHT
from src.core.exceptions import CoincidentPointsError, FrequencyOutOfRangeError

logger = logging.getLogger('augmentation.geometry')

Point = Tuple[float, float]

# Distances below this are treated as coincident points
_COINCIDENCE_TOL = 1e-12


class BistaticGeometry(BaseModel):
    model_config = ConfigDict(frozen=True)

    tx: Point
    rx: Point
    target: Point
    velocity: Point = (0.0, 0.0)
    carrier: float = Field(default=5.825e9, gt=0)

    @model_validator(mode='after')
    def _check_points(self) -> "BistaticGeometry":
        coords = np.array([self.tx, self.rx, self.target, self.velocity], dtype=float)
        if not np.all(np.isfinite(coords)):
            raise CoincidentPointsError("geometry coordinates must be finite")
        target = coords[2]
        if np.linalg.norm(target - coords[0]) < _COINCIDENCE_TOL:
            raise CoincidentPointsError(f"target {self.target} coincides with the transmitter")
        if np.linalg.norm(target - coords[1]) < _COINCIDENCE_TOL:
            raise CoincidentPointsError(f"target {self.target} coincides with the receiver")
        return self

    def moved_to(self, target: Point, velocity: Point) -> "BistaticGeometry":
        return BistaticGeometry(tx=self.tx, rx=self.rx, target=target, velocity=velocity, carrier=self.carrier)

    @property
    def baseline(self) -> float:
        return float(np.linalg.norm(np.subtract(self.tx, self.rx)))

    @property
    def path_length(self) -> float:
        """Tx → target → Rx length"""
        p = np.asarray(self.target, dtype=float)
        return float(np.linalg.norm(p - self.tx) + np.linalg.norm(p - self.rx))


def doppler_velocity(geom: BistaticGeometry) -> float:
    """v · (unit(P − P_Tx) + unit(P − P_Rx)), the rate of change of the bistatic path length"""
    p = np.asarray(geom.target, dtype=float)
    to_tx = p - np.asarray(geom.tx, dtype=float)
    to_rx = p - np.asarray(geom.rx, dtype=float)
    bisector = to_tx / np.linalg.norm(to_tx) + to_rx / np.linalg.norm(to_rx)
    return float(np.dot(np.asarray(geom.velocity, dtype=float), bisector))


def doppler_frequency(geom: BistaticGeometry) -> float:
    """f^D = v^D · f_c / c"""
    return doppler_velocity(geom) * geom.carrier / SPEED_OF_LIGHT


def doppler_to_bin(f: float, axis: np.ndarray) -> int:
    """Nearest Doppler bin on an increasing axis; ties go to the lower frequency"""
    axis = np.asarray(axis, dtype=float)
    if axis.size == 0:
        raise FrequencyOutOfRangeError("empty Doppler axis")
    half = 0.5 * (axis[1] - axis[0]) if axis.size > 1 else 0.0
    if f < axis[0] - half or f > axis[-1] + half:
        raise FrequencyOutOfRangeError(
            f"{f:.3f} Hz outside Doppler axis [{axis[0]:.3f}, {axis[-1]:.3f}] Hz"
        )
    distance = np.abs(axis - f)
    # argmin returns the first (lowest-frequency) minimum
    return int(np.argmin(distance))
