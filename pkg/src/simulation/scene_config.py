"""
Plain-text scene descriptions (``KEY=VALUE`` per line, ``#`` comments).

Parsed with python-dotenv and validated into ``SceneConfig``. See
``config/README.md`` for the schema.
"""
import cmath
import logging
import re
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.augmentation.geometry import BistaticGeometry
from src.core.constants import SPEED_OF_LIGHT
from src.core.exceptions import ConfigError
from src.simulation.models import CsiFrame, DynamicPath, PathScene, StaticPath, SubcarrierGrid
from src.simulation.simulator import generate_csi, noise_power_for_snr, random_impairment
from src.simulation.trajectory import (
    TargetTrack,
    ellipse_track,
    generate_track_csi,
    linear_track,
    rectangle_track,
    track_truth,
)

logger = logging.getLogger('simulation.scene_config')

_STATIC_KEY = re.compile(r'^STATIC_PATH_(\d+)$')
_DYNAMIC_KEY = re.compile(r'^DYNAMIC_PATH_(\d+)$')


class PathSpec(BaseModel):
    """One path as written in a scene file; delay given as path length in metres"""
    model_config = ConfigDict(frozen=True)

    amplitude: float = Field(ge=0)
    phase: float = 0.0
    path_length: float = Field(ge=0)
    doppler: float = 0.0

    @property
    def attenuation(self) -> complex:
        return complex(self.amplitude * cmath.exp(1j * self.phase))

    @property
    def delay(self) -> float:
        return self.path_length / SPEED_OF_LIGHT


class TrackSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal['linear', 'ellipse', 'rectangle']
    tx: Tuple[float, float]
    rx: Tuple[float, float]
    speed: float = Field(gt=0)
    attenuation: float = Field(gt=0)
    start: Optional[Tuple[float, float]] = None
    end: Optional[Tuple[float, float]] = None
    center: Optional[Tuple[float, float]] = None
    size: Optional[Tuple[float, float]] = None

    @model_validator(mode='after')
    def _check_shape(self) -> "TrackSpec":
        if self.kind == 'linear' and (self.start is None or self.end is None):
            raise ValueError("linear track needs TRACK_START and TRACK_END")
        if self.kind != 'linear' and (self.center is None or self.size is None):
            raise ValueError(f"{self.kind} track needs TRACK_CENTER and TRACK_SIZE")
        return self

    def build(self) -> TargetTrack:
        if self.kind == 'linear':
            return linear_track(self.start, self.end, self.speed)
        if self.kind == 'ellipse':
            return ellipse_track(self.center, self.size, self.speed)
        return rectangle_track(self.center, self.size, self.speed)


class SceneConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    num_subcarriers: int = Field(default=30, ge=2)
    subcarrier_spacing: float = Field(default=625e3, gt=0)
    carrier: float = Field(default=5.825e9, gt=0)
    sample_rate: float = Field(default=1000.0, gt=0)
    num_symbols: int = Field(default=512, ge=2)
    static_paths: List[PathSpec] = Field(min_length=1)
    dynamic_paths: List[PathSpec] = []
    to_scale: float = Field(default=0.0, ge=0)
    to_quantum: Optional[float] = Field(default=None, gt=0)
    snr_db: Optional[float] = None
    seed: int = 0
    track: Optional[TrackSpec] = None

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "SceneConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"scene file not found: {path}")
        values = {k: v for k, v in dotenv_values(path).items() if v is not None and v != ''}
        logger.debug(f"Read {len(values)} keys from {path}")
        return cls.from_mapping(values)

    @classmethod
    def from_mapping(cls, values: Dict[str, str]) -> "SceneConfig":
        try:
            return cls(**_fields_from_mapping(values))
        except ValidationError as e:
            raise ConfigError(f"invalid scene: {e.errors()[0]['loc']} {e.errors()[0]['msg']}") from e
        except ValueError as e:
            raise ConfigError(f"invalid scene: {e}") from e

    def grid(self) -> SubcarrierGrid:
        return SubcarrierGrid.uniform(
            num_subcarriers=self.num_subcarriers,
            spacing=self.subcarrier_spacing,
            carrier=self.carrier,
            symbol_interval=1.0 / self.sample_rate,
            num_symbols=self.num_symbols,
        )

    def geometry(self) -> Optional[BistaticGeometry]:
        if self.track is None:
            return None
        start = self.track.build().position_at([0.0])[0]
        return BistaticGeometry(
            tx=self.track.tx, rx=self.track.rx, target=tuple(start), carrier=self.carrier
        )

    def scene(self) -> PathScene:
        """Path scene with impairments; noise power set from ``snr_db``"""
        grid = self.grid()
        impairment = random_impairment(
            grid.num_symbols, self.to_scale, self.seed, to_quantum=self.to_quantum
        )
        scene = PathScene(
            grid=grid,
            static_paths=[StaticPath(attenuation=p.attenuation, delay=p.delay) for p in self.static_paths],
            dynamic_paths=[
                DynamicPath(attenuation=p.attenuation, delay=p.delay, doppler=p.doppler)
                for p in self.dynamic_paths
            ],
            impairment=impairment,
        )
        if self.snr_db is not None:
            scene = scene.with_impairment(impairment.with_noise(noise_power_for_snr(scene, self.snr_db)))
        return scene

    def simulate(self) -> CsiFrame:
        scene = self.scene()
        if self.track is None:
            return generate_csi(scene, self.seed + 1)
        return generate_track_csi(
            self.track.build(),
            self.geometry(),
            scene.grid,
            scene.static_paths,
            self.track.attenuation,
            scene.impairment,
            self.seed + 1,
        )

    def truth(self, cpi_length: int, cpi_stride: int, num_cpis: int) -> List[Tuple[float, float]]:
        """Per-CPI (excess range m, Doppler Hz) of the strongest moving reflector"""
        if self.track is not None:
            return track_truth(
                self.track.build(), self.geometry(), 1.0 / self.sample_rate,
                cpi_length, cpi_stride, num_cpis,
            )
        if not self.dynamic_paths:
            raise ConfigError("scene has no dynamic path to evaluate against")
        reference = max(self.static_paths, key=lambda p: p.amplitude)
        target = max(self.dynamic_paths, key=lambda p: p.amplitude)
        return [(target.path_length - reference.path_length, target.doppler)] * num_cpis


def _floats(raw: str, count: int, key: str) -> List[float]:
    parts = [p.strip() for p in raw.split(',')]
    if len(parts) != count:
        raise ValueError(f"{key} expects {count} comma-separated numbers, got '{raw}'")
    return [float(p) for p in parts]


def _fields_from_mapping(values: Dict[str, str]) -> Dict[str, object]:
    scalar_keys = {
        'NUM_SUBCARRIERS': ('num_subcarriers', int),
        'SUBCARRIER_SPACING_HZ': ('subcarrier_spacing', float),
        'CARRIER_HZ': ('carrier', float),
        'SAMPLE_RATE_HZ': ('sample_rate', float),
        'NUM_SYMBOLS': ('num_symbols', int),
        'TO_SCALE_S': ('to_scale', float),
        'TO_QUANTUM_S': ('to_quantum', float),
        'SNR_DB': ('snr_db', float),
        'SEED': ('seed', int),
    }
    track_keys = {'TRACK', 'TX_POS', 'RX_POS', 'TRACK_SPEED', 'TRACK_ATTENUATION',
                  'TRACK_START', 'TRACK_END', 'TRACK_CENTER', 'TRACK_SIZE'}

    fields: Dict[str, object] = {}
    static: Dict[int, PathSpec] = {}
    dynamic: Dict[int, PathSpec] = {}

    for key, raw in values.items():
        key = key.strip().upper()
        if key in scalar_keys:
            name, kind = scalar_keys[key]
            fields[name] = kind(float(raw)) if kind is int else kind(raw)
        elif match := _STATIC_KEY.match(key):
            amplitude, phase, length = _floats(raw, 3, key)
            static[int(match.group(1))] = PathSpec(amplitude=amplitude, phase=phase, path_length=length)
        elif match := _DYNAMIC_KEY.match(key):
            amplitude, phase, length, doppler = _floats(raw, 4, key)
            dynamic[int(match.group(1))] = PathSpec(
                amplitude=amplitude, phase=phase, path_length=length, doppler=doppler
            )
        elif key not in track_keys:
            raise ValueError(f"unknown scene key '{key}'")

    fields['static_paths'] = [static[k] for k in sorted(static)]
    fields['dynamic_paths'] = [dynamic[k] for k in sorted(dynamic)]

    upper = {k.strip().upper(): v for k, v in values.items()}
    if 'TRACK' in upper:
        track = {
            'kind': upper['TRACK'].strip().lower(),
            'tx': tuple(_floats(upper.get('TX_POS', '0,0'), 2, 'TX_POS')),
            'rx': tuple(_floats(upper.get('RX_POS', '4,0'), 2, 'RX_POS')),
            'speed': float(upper.get('TRACK_SPEED', '1.0')),
            'attenuation': float(upper.get('TRACK_ATTENUATION', '0.3')),
        }
        for key, name in (('TRACK_START', 'start'), ('TRACK_END', 'end'),
                          ('TRACK_CENTER', 'center'), ('TRACK_SIZE', 'size')):
            if key in upper:
                track[name] = tuple(_floats(upper[key], 2, key))
        fields['track'] = TrackSpec(**track)
    return fields
