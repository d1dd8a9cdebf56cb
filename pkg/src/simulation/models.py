"""
Domain types of the synthetic CSI simulator.

Frequencies are absolute (carrier plus subcarrier offset) in Hz, times in
seconds, delays in seconds. Input descriptions are validated pydantic models;
the measured ``CsiFrame`` is a plain dataclass around a complex N×M array.
"""
from dataclasses import dataclass
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.exceptions import (
    DimensionMismatchError,
    NyquistViolationError,
    SceneValidationError,
)


class SubcarrierGrid(BaseModel):
    """Subcarrier frequencies, OFDM symbol interval and symbol count"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    frequencies: np.ndarray
    symbol_interval: float = Field(gt=0)
    num_symbols: int = Field(ge=2)
    carrier: float = Field(gt=0)

    @field_validator('frequencies', mode='before')
    @classmethod
    def _check_frequencies(cls, value) -> np.ndarray:
        freqs = np.array(value, dtype=np.float64)
        if freqs.ndim != 1 or freqs.size < 2:
            raise SceneValidationError("subcarrier grid needs at least two frequencies")
        if not np.all(np.isfinite(freqs)) or np.any(np.diff(freqs) <= 0):
            raise SceneValidationError("subcarrier frequencies must be finite and strictly increasing")
        freqs.setflags(write=False)
        return freqs

    @classmethod
    def uniform(
        cls,
        num_subcarriers: int = 30,
        spacing: float = 625e3,
        carrier: float = 5.825e9,
        symbol_interval: float = 1e-3,
        num_symbols: int = 128,
    ) -> "SubcarrierGrid":
        """Wi-Fi-like grid centred on ``carrier`` (30 subcarriers over ~18 MHz by default)"""
        offsets = (np.arange(num_subcarriers) - (num_subcarriers - 1) / 2.0) * spacing
        return cls(
            frequencies=carrier + offsets,
            symbol_interval=symbol_interval,
            num_symbols=num_symbols,
            carrier=carrier,
        )

    @property
    def num_subcarriers(self) -> int:
        return int(self.frequencies.size)

    @property
    def sample_rate(self) -> float:
        return 1.0 / self.symbol_interval

    @property
    def spacing(self) -> float:
        """Mean subcarrier spacing (exact for uniform grids)"""
        return float((self.frequencies[-1] - self.frequencies[0]) / (self.frequencies.size - 1))

    def with_symbols(self, num_symbols: int) -> "SubcarrierGrid":
        return self.model_copy(update={'num_symbols': num_symbols})


class StaticPath(BaseModel):
    model_config = ConfigDict(frozen=True)

    attenuation: complex
    delay: float = Field(ge=0)


class DynamicPath(BaseModel):
    model_config = ConfigDict(frozen=True)

    attenuation: complex
    delay: float = Field(ge=0)
    doppler: float


class ClockImpairment(BaseModel):
    """Per-symbol timing offsets and CFO phases, hardware phase and receiver noise power"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    timing_offsets: np.ndarray
    cfo_phases: np.ndarray
    hardware_phase: float = 0.0
    noise_power: float = Field(default=0.0, ge=0)

    @field_validator('timing_offsets', 'cfo_phases', mode='before')
    @classmethod
    def _as_vector(cls, value) -> np.ndarray:
        arr = np.array(value, dtype=np.float64)
        if arr.ndim != 1 or not np.all(np.isfinite(arr)):
            raise SceneValidationError("impairment vectors must be finite and one-dimensional")
        arr.setflags(write=False)
        return arr

    @model_validator(mode='after')
    def _check_lengths(self) -> "ClockImpairment":
        if self.timing_offsets.size != self.cfo_phases.size:
            raise DimensionMismatchError(
                f"timing offsets ({self.timing_offsets.size}) and CFO phases "
                f"({self.cfo_phases.size}) differ in length"
            )
        return self

    @classmethod
    def none(cls, num_symbols: int, noise_power: float = 0.0) -> "ClockImpairment":
        """Perfectly synchronised clocks"""
        return cls(
            timing_offsets=np.zeros(num_symbols),
            cfo_phases=np.zeros(num_symbols),
            hardware_phase=0.0,
            noise_power=noise_power,
        )

    @property
    def num_symbols(self) -> int:
        return int(self.timing_offsets.size)

    def with_noise(self, noise_power: float) -> "ClockImpairment":
        return self.model_copy(update={'noise_power': float(noise_power)})

    def phasor(self, frequencies: np.ndarray) -> np.ndarray:
        """Unit-magnitude N×M distortion exp(-j(2π f τ_TO + φ_CFO)) exp(-j φ_h)"""
        phase = (
            2.0 * np.pi * frequencies[:, None] * self.timing_offsets[None, :]
            + self.cfo_phases[None, :]
            + self.hardware_phase
        )
        return np.exp(-1j * phase)


class PathScene(BaseModel):
    """Ground truth: static and dynamic paths plus clock impairments"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: SubcarrierGrid
    static_paths: List[StaticPath]
    dynamic_paths: List[DynamicPath] = []
    impairment: ClockImpairment

    @model_validator(mode='after')
    def _check_scene(self) -> "PathScene":
        if not self.static_paths:
            raise SceneValidationError("scene needs at least one static path")
        if self.impairment.num_symbols != self.grid.num_symbols:
            raise DimensionMismatchError(
                f"impairment covers {self.impairment.num_symbols} symbols, grid has {self.grid.num_symbols}"
            )
        nyquist = 0.5 / self.grid.symbol_interval
        for path in self.dynamic_paths:
            if abs(path.doppler) >= nyquist:
                raise NyquistViolationError(
                    f"Doppler {path.doppler:.2f} Hz is not below Nyquist {nyquist:.2f} Hz"
                )
        return self

    def with_impairment(self, impairment: ClockImpairment) -> "PathScene":
        return PathScene(
            grid=self.grid,
            static_paths=self.static_paths,
            dynamic_paths=self.dynamic_paths,
            impairment=impairment,
        )

    def dominant_static(self) -> StaticPath:
        return max(self.static_paths, key=lambda p: abs(p.attenuation))


@dataclass(frozen=True)
class CsiFrame:
    """N×M complex CSI measurement on a subcarrier grid"""
    samples: np.ndarray
    grid: SubcarrierGrid

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        expected = (self.grid.num_subcarriers, self.grid.num_symbols)
        if samples.shape != expected:
            raise DimensionMismatchError(f"CSI shape {samples.shape} does not match grid {expected}")
        if not np.all(np.isfinite(samples)):
            raise SceneValidationError("CSI samples must be finite")
        object.__setattr__(self, 'samples', samples)

    @property
    def num_subcarriers(self) -> int:
        return self.samples.shape[0]

    @property
    def num_symbols(self) -> int:
        return self.samples.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.samples[:, j]

    def with_samples(self, samples: np.ndarray) -> "CsiFrame":
        return CsiFrame(samples=samples, grid=self.grid)
