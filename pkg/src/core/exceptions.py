"""
Exception hierarchy shared by every sisosense component.
"""


class SensingError(Exception):
    """Base exception for all sensing pipeline errors"""
    pass


# Simulation
class SceneValidationError(SensingError):
    """Scene, grid or impairment violates its invariants"""
    pass


class DimensionMismatchError(SensingError):
    """Array dimensions disagree with the declared grid"""
    pass


class NyquistViolationError(SensingError):
    """Doppler shift at or beyond half the symbol rate"""
    pass


class CoincidentPointsError(SensingError):
    """Target position coincides with the transmitter or receiver"""
    pass


# Compensation
class IndexOutOfRangeError(SensingError):
    """Symbol or bin index outside the valid range"""
    pass


class ZeroProfileError(SensingError):
    """Delay profile carries no energy"""
    pass


class ZeroEnergyError(SensingError):
    """Windowed CIR carries no energy, bound undefined"""
    pass


# Extraction
class NearZeroStaticMeanError(SensingError):
    """No usable static reference on a subcarrier"""

    def __init__(self, subcarrier: int, magnitude: float, floor: float):
        self.subcarrier = subcarrier
        self.magnitude = magnitude
        self.floor = floor
        super().__init__(
            f"static mean on subcarrier {subcarrier} is {magnitude:.3e}, below floor {floor:.3e}"
        )


class IllConditionedCovarianceError(SensingError):
    """Smoothed covariance too ill-conditioned for a reliable solve"""

    def __init__(self, condition: float, limit: float):
        self.condition = condition
        self.limit = limit
        super().__init__(f"covariance condition number {condition:.3e} exceeds {limit:.3e}")


class CropRangeError(SensingError):
    """Doppler crop reaches beyond the Nyquist band"""
    pass


class AxisMismatchError(SensingError):
    """Frames or CPIs do not share axes"""
    pass


class EmptySearchRegionError(SensingError):
    """No admissible cell left to search for a peak"""
    pass


# Baselines
class DivisorNearZeroError(SensingError):
    """CSI ratio denominator too small"""

    def __init__(self, count: int, floor: float):
        self.count = count
        self.floor = floor
        super().__init__(f"{count} divisor entries below floor {floor:.3e}")


class GridMismatchError(SensingError):
    """Two scenes or frames use different subcarrier grids"""
    pass


# Geometry / augmentation
class FrequencyOutOfRangeError(SensingError):
    """Frequency outside the Doppler axis"""
    pass


class EmptyAugmentationError(SensingError):
    """Augmentation would leave no content in the output"""
    pass


# Harness
class EmptyInputError(SensingError):
    """Metric called without data"""
    pass


class FormatError(SensingError):
    """Malformed binary file"""
    pass


class BadMagicError(FormatError):
    pass


class TruncatedPayloadError(FormatError):
    pass


class VersionMismatchError(FormatError):
    pass


class ConfigError(SensingError):
    """Invalid configuration file or override"""
    pass


class UsageError(SensingError):
    """Invalid command line"""
    pass
