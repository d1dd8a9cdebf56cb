"""
Types of the delay-Doppler extraction stage and its run configuration.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from config.settings import settings
from src.compensation.models import WindowSpec
from src.core.constants import SPEED_OF_LIGHT
from src.core.exceptions import AxisMismatchError, DimensionMismatchError


@dataclass(frozen=True)
class DynamicMatrix:
    """Normalised dynamic component W and the per-subcarrier static mean U"""
    values: np.ndarray
    static_mean: np.ndarray

    def __post_init__(self):
        if self.values.shape[0] != self.static_mean.shape[0]:
            raise DimensionMismatchError(
                f"static mean has {self.static_mean.shape[0]} entries, W has {self.values.shape[0]} rows"
            )


@dataclass(frozen=True)
class ObservationMatrix:
    """Λ = [W | conj(W)], N×2M"""
    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] % 2:
            raise DimensionMismatchError(f"observation matrix needs an even column count, got {self.values.shape}")

    @property
    def num_symbols(self) -> int:
        return self.values.shape[1] // 2

    @property
    def original(self) -> np.ndarray:
        return self.values[:, : self.num_symbols]

    @property
    def conjugate(self) -> np.ndarray:
        return self.values[:, self.num_symbols:]


class DelayGrid(BaseModel):
    """Relative delays Δτ (seconds) searched by the beamformer"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    delays: np.ndarray

    @field_validator('delays', mode='before')
    @classmethod
    def _check_delays(cls, value) -> np.ndarray:
        delays = np.array(value, dtype=np.float64).ravel()
        if delays.size == 0:
            raise ValueError("delay grid is empty")
        if np.any(delays < 0) or np.any(np.diff(delays) <= 0):
            raise ValueError("delays must be non-negative and strictly increasing")
        delays.setflags(write=False)
        return delays

    @classmethod
    def from_range(cls, max_m: float, step_m: float) -> "DelayGrid":
        """[0, max_m) in steps of ``step_m`` metres of excess path length"""
        if step_m <= 0 or max_m <= 0:
            raise ValueError(f"delay range needs positive bounds, got max={max_m} step={step_m}")
        ranges = np.arange(0.0, max_m - 1e-9 * step_m, step_m)
        return cls(delays=ranges / SPEED_OF_LIGHT)

    @property
    def as_range(self) -> np.ndarray:
        """Excess path length in metres"""
        return self.delays * SPEED_OF_LIGHT

    def __len__(self) -> int:
        return int(self.delays.size)


@dataclass(frozen=True)
class SteeringMatrix:
    values: np.ndarray
    grid: DelayGrid


@dataclass(frozen=True)
class SmoothedCovariance:
    values: np.ndarray
    epsilon: float


@dataclass(frozen=True)
class DelayDopplerFrame:
    """Magnitudes over (delay, Doppler) for one CPI"""
    magnitudes: np.ndarray
    doppler_axis: np.ndarray
    grid: DelayGrid

    def __post_init__(self):
        expected = (len(self.grid), self.doppler_axis.size)
        if self.magnitudes.shape != expected:
            raise DimensionMismatchError(f"frame shape {self.magnitudes.shape} does not match axes {expected}")


@dataclass(frozen=True)
class FeatureTensor:
    """Delay × Doppler × CPI magnitudes stacked in arrival order

    ``cpi_length`` is the number of symbols per CPI, None when unknown.
    """
    frames: np.ndarray
    doppler_axis: np.ndarray
    grid: DelayGrid
    cpi_stride: int
    cpi_length: Optional[int] = None

    def __post_init__(self):
        if self.frames.ndim != 3 or self.frames.shape[2] < 1:
            raise DimensionMismatchError(f"feature tensor needs shape (delay, doppler, cpi), got {self.frames.shape}")
        if self.frames.shape[:2] != (len(self.grid), self.doppler_axis.size):
            raise AxisMismatchError(
                f"tensor shape {self.frames.shape[:2]} does not match axes "
                f"({len(self.grid)}, {self.doppler_axis.size})"
            )

    @property
    def num_cpis(self) -> int:
        return self.frames.shape[2]

    def frame(self, k: int) -> DelayDopplerFrame:
        return DelayDopplerFrame(magnitudes=self.frames[:, :, k], doppler_axis=self.doppler_axis, grid=self.grid)


@dataclass(frozen=True)
class DopplerTimeMap:
    """Doppler × CPI magnitudes"""
    magnitudes: np.ndarray
    doppler_axis: np.ndarray
    cpi_stride: int = 1

    def __post_init__(self):
        if self.magnitudes.ndim != 2 or self.magnitudes.shape[0] != self.doppler_axis.size:
            raise DimensionMismatchError(
                f"map shape {self.magnitudes.shape} does not match {self.doppler_axis.size} Doppler bins"
            )

    @property
    def num_cpis(self) -> int:
        return self.magnitudes.shape[1]


class ExtractorConfig(BaseModel):
    """Per-run processing parameters; defaults come from ``config.settings``"""
    model_config = ConfigDict(frozen=True)

    window: WindowSpec = WindowSpec()
    cpi_length: int = Field(default=128, ge=2)
    cpi_stride: int = Field(default=32, ge=1)
    delay_max_m: float = Field(default=32.0, gt=0)
    delay_step_m: float = Field(default=1.0, gt=0)
    doppler_max_hz: float = Field(default=150.0, gt=0)
    dc_exclusion_bins: int = Field(default=2, ge=0)
    epsilon_scale: float = Field(default=1e-3, gt=0)
    epsilon_floor: float = Field(default=1e-12, gt=0)
    max_condition: float = Field(default=1e12, gt=1)
    max_workers: int = Field(default=4, ge=1)

    @classmethod
    def from_settings(cls, **overrides) -> "ExtractorConfig":
        values = dict(
            window=WindowSpec.from_settings(),
            cpi_length=settings.CPI_LENGTH,
            cpi_stride=settings.CPI_STRIDE,
            delay_max_m=settings.DELAY_MAX_M,
            delay_step_m=settings.DELAY_STEP_M,
            doppler_max_hz=settings.DOPPLER_MAX_HZ,
            dc_exclusion_bins=settings.DC_EXCLUSION_BINS,
            epsilon_scale=settings.EPSILON_SCALE,
            epsilon_floor=settings.EPSILON_FLOOR,
            max_condition=settings.MAX_CONDITION,
            max_workers=settings.MAX_WORKERS,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def delay_grid(self) -> DelayGrid:
        return DelayGrid.from_range(self.delay_max_m, self.delay_step_m)

    @property
    def doppler_crop(self) -> Tuple[float, float]:
        return (-self.doppler_max_hz, self.doppler_max_hz)

    def with_window(self, sigma: Optional[float] = None, ifft_size: Optional[int] = None) -> "ExtractorConfig":
        update = {}
        if sigma is not None:
            update['sigma'] = sigma
        if ifft_size is not None:
            update['ifft_size'] = ifft_size
        window = WindowSpec(**{**self.window.model_dump(), **update})
        return self.model_copy(update={'window': window})
