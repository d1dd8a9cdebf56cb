"""
Delay-domain MVDR beamforming on the conjugate-augmented dynamic component.

The covariance is forward-backward smoothed and diagonally loaded. Weights
come from a Cholesky solve per steering vector (all delays in one call);
the explicit inverse is never formed.
"""
import logging
from typing import Optional, Union

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from src.compensation.models import SrccMatrix
from src.core.exceptions import (
    DimensionMismatchError,
    IllConditionedCovarianceError,
    NearZeroStaticMeanError,
)
from src.extraction.models import (
    DelayGrid,
    DynamicMatrix,
    ObservationMatrix,
    SmoothedCovariance,
    SteeringMatrix,
)

logger = logging.getLogger('extraction.beamforming')

# |U_i| below this fraction of the frame RMS means no static reference
STATIC_MEAN_FLOOR = 1e-12


def static_mean(matrix: SrccMatrix) -> np.ndarray:
    """U_i: per-subcarrier mean over the symbols of the CPI"""
    return matrix.values.mean(axis=1)


def dynamic_component(matrix: SrccMatrix) -> DynamicMatrix:
    """W = (ΔCSI − U) / U"""
    values = matrix.values
    mean = static_mean(matrix)
    floor = STATIC_MEAN_FLOOR * float(np.sqrt(np.mean(np.abs(values) ** 2)))
    magnitude = np.abs(mean)
    weak = np.flatnonzero(magnitude <= floor)
    if weak.size:
        i = int(weak[0])
        raise NearZeroStaticMeanError(i, float(magnitude[i]), floor)
    return DynamicMatrix(values=(values - mean[:, None]) / mean[:, None], static_mean=mean)


def build_observation(dynamic: DynamicMatrix) -> ObservationMatrix:
    return ObservationMatrix(values=np.hstack([dynamic.values, np.conj(dynamic.values)]))


def steering_vectors(frequencies: np.ndarray, delays: np.ndarray) -> np.ndarray:
    """N×L matrix exp(-j2π f_n Δτ_l); delays may be negative here"""
    frequencies = np.asarray(frequencies, dtype=float)
    delays = np.asarray(delays, dtype=float)
    return np.exp(-2j * np.pi * frequencies[:, None] * delays[None, :])


def steering_matrix(grid: DelayGrid, frequencies: np.ndarray) -> SteeringMatrix:
    return SteeringMatrix(values=steering_vectors(frequencies, grid.delays), grid=grid)


def smoothed_covariance(
    obs: ObservationMatrix,
    epsilon: Optional[float] = None,
    epsilon_scale: float = 1e-3,
    epsilon_floor: float = 1e-12,
) -> SmoothedCovariance:
    """R̃ = ΛΛ^H + J(ΛΛ^H)J + εI

    Without an explicit ``epsilon`` the loading is ``epsilon_scale`` times the
    mean diagonal of ΛΛ^H, or ``epsilon_floor`` when Λ is zero.
    """
    lam = obs.values
    base = lam @ lam.conj().T
    if epsilon is None:
        epsilon = epsilon_scale * float(np.real(np.trace(base))) / base.shape[0]
        if epsilon <= 0:
            epsilon = epsilon_floor
    elif epsilon <= 0:
        raise ValueError(f"regularisation must be positive, got {epsilon}")

    smoothed = base + base[::-1, ::-1] + epsilon * np.eye(base.shape[0])
    # Hermitian to the last bit
    smoothed = 0.5 * (smoothed + smoothed.conj().T)
    return SmoothedCovariance(values=smoothed, epsilon=float(epsilon))


def _factor(cov: SmoothedCovariance, max_condition: float):
    eigenvalues = np.linalg.eigvalsh(cov.values)
    condition = float(eigenvalues[-1] / eigenvalues[0]) if eigenvalues[0] > 0 else float('inf')
    if condition > max_condition:
        raise IllConditionedCovarianceError(condition, max_condition)
    try:
        return cho_factor(cov.values, lower=True)
    except LinAlgError as e:
        raise IllConditionedCovarianceError(condition, max_condition) from e


def mvdr_weights(cov: SmoothedCovariance, steering: np.ndarray, max_condition: float = 1e12) -> np.ndarray:
    """w = R̃⁻¹a / (a^H R̃⁻¹ a)"""
    a = np.asarray(steering, dtype=np.complex128)
    if a.shape != (cov.values.shape[0],):
        raise DimensionMismatchError(f"steering vector {a.shape} does not match covariance {cov.values.shape}")
    return mvdr_weight_matrix(cov, a[:, None], max_condition)[:, 0]


def mvdr_weight_matrix(
    cov: SmoothedCovariance,
    steering: Union[SteeringMatrix, np.ndarray],
    max_condition: float = 1e12,
) -> np.ndarray:
    """Weights for every steering column at once, N×L"""
    a = steering.values if isinstance(steering, SteeringMatrix) else np.asarray(steering)
    factor = _factor(cov, max_condition)
    solved = cho_solve(factor, a)
    gain = np.sum(np.conj(a) * solved, axis=0)
    return solved / gain[None, :]


def beamform(obs: ObservationMatrix, weights: np.ndarray) -> np.ndarray:
    """X = w^H Λ_orig + w^H Λ_conj; a weight matrix gives one row per delay"""
    weights = np.asarray(weights)
    if weights.shape[0] != obs.values.shape[0]:
        raise DimensionMismatchError(
            f"weights have {weights.shape[0]} taps, observation has {obs.values.shape[0]} subcarriers"
        )
    w_h = np.conj(weights).T
    return w_h @ obs.original + w_h @ obs.conjugate


def delay_response(obs: ObservationMatrix, frequencies: np.ndarray, delays: np.ndarray) -> np.ndarray:
    """Unweighted (Bartlett) power Σ_cols |a(Δτ)^H λ|² over arbitrary signed delays"""
    a = steering_vectors(frequencies, delays)
    projected = np.conj(a).T @ obs.values
    return np.sum(np.abs(projected) ** 2, axis=1)
