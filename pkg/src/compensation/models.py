"""
Types of the SRCC phase-compensation stage.
"""
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from config.settings import settings
from src.core.exceptions import DimensionMismatchError, SceneValidationError
from src.simulation.models import SubcarrierGrid

PeakMode = Literal['per_symbol', 'cpi_median']


class WindowSpec(BaseModel):
    """Gaussian delay window width (in bins) and the zero-padded transform size"""
    model_config = ConfigDict(frozen=True)

    sigma: float = Field(default=64.0, gt=0)
    ifft_size: int = Field(default=128, ge=2)
    peak_mode: PeakMode = 'per_symbol'

    @classmethod
    def from_settings(cls) -> "WindowSpec":
        return cls(sigma=settings.WINDOW_SIGMA, ifft_size=settings.IFFT_SIZE, peak_mode=settings.PEAK_MODE)

    def check_subcarriers(self, num_subcarriers: int) -> None:
        if self.ifft_size < num_subcarriers:
            raise DimensionMismatchError(
                f"IFFT size {self.ifft_size} is smaller than the {num_subcarriers} subcarriers"
            )


@dataclass(frozen=True)
class CirProfile:
    taps: np.ndarray
    bin_spacing: float

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.complex128)
        if taps.ndim != 1 or taps.size == 0:
            raise DimensionMismatchError("CIR taps must be a non-empty vector")
        if not np.all(np.isfinite(taps)):
            raise SceneValidationError("CIR taps must be finite")
        object.__setattr__(self, 'taps', taps)

    @property
    def size(self) -> int:
        return self.taps.size

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.taps) ** 2))


@dataclass(frozen=True)
class SrccMatrix:
    """ΔCSI: raw CSI times the conjugate of its self-reconstructed reference"""
    values: np.ndarray
    grid: SubcarrierGrid

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        expected = (self.grid.num_subcarriers, self.grid.num_symbols)
        if values.shape != expected:
            raise DimensionMismatchError(f"SRCC matrix shape {values.shape} does not match grid {expected}")
        if not np.all(np.isfinite(values)):
            raise SceneValidationError("SRCC matrix entries must be finite")
        object.__setattr__(self, 'values', values)

    @property
    def shape(self):
        return self.values.shape

    @property
    def num_symbols(self) -> int:
        return self.values.shape[1]
