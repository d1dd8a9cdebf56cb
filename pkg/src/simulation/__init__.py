from .models import ClockImpairment, CsiFrame, DynamicPath, PathScene, StaticPath, SubcarrierGrid
from .simulator import generate_csi, random_impairment

__all__ = [
    'ClockImpairment',
    'CsiFrame',
    'DynamicPath',
    'PathScene',
    'StaticPath',
    'SubcarrierGrid',
    'generate_csi',
    'random_impairment',
]
