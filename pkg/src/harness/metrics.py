"""
Evaluation metrics: range-error percentiles, Doppler mirror ratio and the
plain-text evaluation report.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config.settings import settings
from src.augmentation.geometry import doppler_to_bin
from src.core.exceptions import EmptyInputError, FrequencyOutOfRangeError
from src.extraction.extractor import estimate_peak
from src.extraction.models import FeatureTensor

logger = logging.getLogger('harness.metrics')


@dataclass
class RangeErrorCdf:
    errors: np.ndarray
    probabilities: np.ndarray
    p50: float
    p70: float

    def percentile(self, q: float) -> float:
        return float(np.percentile(self.errors, q))


@dataclass
class LatencyStats:
    samples_ms: List[float]
    mean_ms: float
    std_ms: float
    delay_bins: int
    parallel_throughput: Optional[float] = None  # CPIs per second

    def to_lines(self) -> List[str]:
        lines = [
            f"latency_mean_ms={self.mean_ms:.4f}",
            f"latency_std_ms={self.std_ms:.4f}",
            f"latency_samples={len(self.samples_ms)}",
            f"delay_bins={self.delay_bins}",
        ]
        if self.parallel_throughput is not None:
            lines.append(f"parallel_cpis_per_s={self.parallel_throughput:.2f}")
        return lines


@dataclass
class EvalReport:
    pairs: List[Tuple[float, float]]
    cdf: Optional[RangeErrorCdf] = None
    mirror_ratios_db: List[float] = field(default_factory=list)
    doppler_pairs: List[Tuple[float, float]] = field(default_factory=list)
    latency: Optional[LatencyStats] = None

    def to_text(self) -> str:
        """One key=value per line"""
        lines = [f"cpis={len(self.pairs)}"]
        if self.cdf is not None:
            lines += [f"range_error_p50_m={self.cdf.p50:.4f}", f"range_error_p70_m={self.cdf.p70:.4f}"]
        if self.mirror_ratios_db:
            lines.append(f"mirror_ratio_median_db={float(np.median(self.mirror_ratios_db)):.2f}")
        for k, (estimate, truth) in enumerate(self.pairs):
            line = f"cpi_{k}=range_est:{estimate:.3f},range_true:{truth:.3f}"
            if k < len(self.doppler_pairs):
                est_f, true_f = self.doppler_pairs[k]
                line += f",doppler_est:{est_f:.3f},doppler_true:{true_f:.3f}"
            lines.append(line)
        if self.latency is not None:
            lines += self.latency.to_lines()
        return "\n".join(lines) + "\n"


def range_error_cdf(estimates: Sequence[Tuple[float, float]]) -> RangeErrorCdf:
    """Absolute range errors, their empirical CDF and the 50th / 70th percentiles"""
    if len(estimates) == 0:
        raise EmptyInputError("no (estimate, truth) pairs")
    pairs = np.asarray(estimates, dtype=float).reshape(-1, 2)
    errors = np.sort(np.abs(pairs[:, 0] - pairs[:, 1]))
    probabilities = np.arange(1, errors.size + 1) / errors.size
    return RangeErrorCdf(
        errors=errors,
        probabilities=probabilities,
        p50=float(np.percentile(errors, 50)),
        p70=float(np.percentile(errors, 70)),
    )


def mirror_ratio(spectrum: np.ndarray, axis: np.ndarray, f_true: float, cap_db: Optional[float] = None) -> float:
    """10·log10(P(+f) / P(−f)) in dB, positive when the true side dominates"""
    cap = settings.MIRROR_RATIO_CAP_DB if cap_db is None else cap_db
    spectrum = np.asarray(spectrum, dtype=float)
    true_power = spectrum[doppler_to_bin(f_true, axis)] ** 2
    mirror_power = spectrum[doppler_to_bin(-f_true, axis)] ** 2
    if true_power == 0 and mirror_power == 0:
        return 0.0
    if mirror_power == 0:
        return cap
    if true_power == 0:
        return -cap
    return float(np.clip(10.0 * np.log10(true_power / mirror_power), -cap, cap))


def evaluate_tensor(
    tensor: FeatureTensor,
    truth: Sequence[Tuple[float, float]],
    dc_exclusion_bins: int,
) -> EvalReport:
    """Per-CPI peak estimates against (range m, Doppler Hz) truth"""
    if tensor.num_cpis == 0 or len(truth) == 0:
        raise EmptyInputError("nothing to evaluate")
    count = min(tensor.num_cpis, len(truth))
    if count < tensor.num_cpis:
        logger.warning(f"Truth covers {count} of {tensor.num_cpis} CPIs")

    pairs, doppler_pairs, ratios = [], [], []
    for k in range(count):
        frame = tensor.frame(k)
        est_range, est_doppler = estimate_peak(frame, dc_exclusion_bins)
        true_range, true_doppler = truth[k]
        pairs.append((est_range, true_range))
        doppler_pairs.append((est_doppler, true_doppler))
        row = int(np.argmin(np.abs(frame.grid.as_range - est_range)))
        try:
            ratios.append(mirror_ratio(frame.magnitudes[row], frame.doppler_axis, true_doppler))
        except FrequencyOutOfRangeError:
            logger.debug(f"CPI {k}: true Doppler {true_doppler:.1f} Hz outside the axis")

    return EvalReport(pairs=pairs, cdf=range_error_cdf(pairs), mirror_ratios_db=ratios, doppler_pairs=doppler_pairs)
