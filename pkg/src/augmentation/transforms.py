"""
Physically motivated augmentations of Doppler-time maps and feature tensors.

Tensors get the same transform on every delay bin. Shifts zero-fill and never
wrap.
"""
import logging
from typing import Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from src.core.exceptions import AxisMismatchError, EmptyAugmentationError
from src.extraction.models import DopplerTimeMap, FeatureTensor

logger = logging.getLogger('augmentation.transforms')

AugmentKind = Literal['translate', 'affine_scale', 'mirror', 'time_shift', 'noise']
Augmentable = Union[DopplerTimeMap, FeatureTensor]


class AugmentationSpec(BaseModel):
    """``magnitude``: Doppler bins (translate), factor (affine_scale), CPIs (time_shift), power (noise)"""
    model_config = ConfigDict(frozen=True)

    kind: AugmentKind
    magnitude: float = 0.0
    seed: int = 0

    @model_validator(mode='after')
    def _check_magnitude(self) -> "AugmentationSpec":
        if self.kind == 'affine_scale' and self.magnitude <= 0:
            raise ValueError(f"scale factor must be positive, got {self.magnitude}")
        if self.kind == 'noise' and self.magnitude < 0:
            raise ValueError(f"noise power must be non-negative, got {self.magnitude}")
        if self.kind in ('translate', 'time_shift') and self.magnitude != int(self.magnitude):
            raise ValueError(f"{self.kind} needs a whole number of bins, got {self.magnitude}")
        return self


def _shift(values: np.ndarray, shift: int, axis: int) -> np.ndarray:
    length = values.shape[axis]
    if abs(shift) >= length:
        raise EmptyAugmentationError(f"shift of {shift} empties an axis of length {length}")
    out = np.zeros_like(values)
    src = [slice(None)] * values.ndim
    dst = [slice(None)] * values.ndim
    if shift >= 0:
        src[axis], dst[axis] = slice(0, length - shift), slice(shift, length)
    else:
        src[axis], dst[axis] = slice(-shift, length), slice(0, length + shift)
    out[tuple(dst)] = values[tuple(src)]
    return out


def _scale(values: np.ndarray, axis_hz: np.ndarray, factor: float, axis: int) -> np.ndarray:
    """out(f) = in(f / factor), linear interpolation, zero outside the input axis"""
    moved = np.moveaxis(values, axis, -1)
    query = axis_hz / factor
    flat = moved.reshape(-1, moved.shape[-1])
    resampled = np.stack([np.interp(query, axis_hz, row, left=0.0, right=0.0) for row in flat])
    if np.any(flat) and not np.any(resampled):
        raise EmptyAugmentationError(f"scale factor {factor} moves every Doppler bin off the axis")
    return np.moveaxis(resampled.reshape(moved.shape), -1, axis)


def augment(target: Augmentable, spec: AugmentationSpec) -> Augmentable:
    if isinstance(target, FeatureTensor):
        values, doppler_axis, cpi_axis = target.frames, 1, 2
    else:
        values, doppler_axis, cpi_axis = target.magnitudes, 0, 1
    axis_hz = target.doppler_axis

    if spec.kind == 'translate':
        out = _shift(values, int(spec.magnitude), doppler_axis)
    elif spec.kind == 'affine_scale':
        out = _scale(values, axis_hz, spec.magnitude, doppler_axis)
    elif spec.kind == 'mirror':
        if not np.allclose(axis_hz, -axis_hz[::-1]):
            raise AxisMismatchError("mirroring needs a Doppler axis symmetric about 0 Hz")
        out = np.flip(values, axis=doppler_axis).copy()
    elif spec.kind == 'time_shift':
        out = _shift(values, int(spec.magnitude), cpi_axis)
    else:
        rng = np.random.default_rng(spec.seed)
        noise = rng.normal(0.0, np.sqrt(spec.magnitude), size=values.shape) if spec.magnitude > 0 else 0.0
        out = np.clip(values + noise, 0.0, None)

    logger.debug(f"Applied {spec.kind} ({spec.magnitude}) to {type(target).__name__} {values.shape}")
    if isinstance(target, FeatureTensor):
        return FeatureTensor(
            frames=out,
            doppler_axis=axis_hz,
            grid=target.grid,
            cpi_stride=target.cpi_stride,
            cpi_length=target.cpi_length,
        )
    return DopplerTimeMap(magnitudes=out, doppler_axis=axis_hz, cpi_stride=target.cpi_stride)
