import logging
from typing import List, Literal, Optional, Tuple

import numpy as np

from src.baselines.dual_antenna import cacc, casr, equalize_static, simulate_dual, ula_pair
from src.compensation.models import SrccMatrix
from src.compensation.srcc import srcc
from src.extraction.extractor import (
    compress_delay,
    doppler_only_frame,
    extract_frame,
    extract_tensor,
    fft2_frame,
    split_cpis,
)
from src.extraction.models import DopplerTimeMap, ExtractorConfig, FeatureTensor
from src.harness.metrics import EvalReport, evaluate_tensor
from src.simulation.models import CsiFrame
from src.simulation.scene_config import SceneConfig
from src.utils.track_function import track_function

logger = logging.getLogger('core.pipeline')

BaselineMethod = Literal['cacc', 'casr']


class SensingPipeline:
    """simulate → SRCC → delay-Doppler extraction → compression / evaluation"""

    def __init__(self, config: Optional[ExtractorConfig] = None):
        self.config = config or ExtractorConfig.from_settings()
        logger.info(
            f"Pipeline ready: CPI {self.config.cpi_length}/{self.config.cpi_stride}, "
            f"sigma={self.config.window.sigma}, {len(self.config.delay_grid())} delay bins"
        )

    @track_function
    def simulate(self, scene: SceneConfig) -> CsiFrame:
        return scene.simulate()

    @track_function
    def compensate(self, frame: CsiFrame) -> SrccMatrix:
        return srcc(frame, self.config.window)

    @track_function
    def extract(self, frame: CsiFrame) -> FeatureTensor:
        cpis = split_cpis(frame, self.config.cpi_length, self.config.cpi_stride)
        logger.info(f"Extracting {len(cpis)} CPIs from {frame.num_symbols} symbols")
        return extract_tensor(cpis, self.config)

    @track_function
    def compress(self, tensor: FeatureTensor) -> DopplerTimeMap:
        return compress_delay(tensor)

    @track_function
    def evaluate(self, tensor: FeatureTensor, scene: SceneConfig) -> EvalReport:
        cpi_length = tensor.cpi_length or self.config.cpi_length
        if tensor.cpi_length and tensor.cpi_length != self.config.cpi_length:
            logger.info(f"Using the tensor's CPI length {tensor.cpi_length} for ground truth")
        truth = scene.truth(cpi_length, tensor.cpi_stride, tensor.num_cpis)
        return evaluate_tensor(tensor, truth, self.config.dc_exclusion_bins)

    @track_function
    def baseline(
        self,
        scene: SceneConfig,
        method: BaselineMethod,
        use_mvdr: bool = False,
        equal_static: bool = True,
        delay_filter: bool = True,
    ) -> FeatureTensor:
        """Two-antenna baseline on the scene

        Plain 2D FFT by default, the MVDR tail with ``use_mvdr``, or a
        Doppler-only spectrum of the subcarrier sum without ``delay_filter``.
        """
        if use_mvdr and not delay_filter:
            raise ValueError("the MVDR tail always filters in delay")
        scene_a = scene.scene()
        scene_b = ula_pair(scene_a, scene.seed + 2)
        if equal_static:
            scene_b = equalize_static(scene_a, scene_b)
        dual = simulate_dual(scene_a, scene_b, scene_a.impairment, scene.seed + 1)
        matrix = cacc(dual) if method == 'cacc' else casr(dual)

        grid = self.config.delay_grid()
        if not delay_filter:
            to_frame = lambda cpi: doppler_only_frame(cpi, self.config)
        elif use_mvdr:
            to_frame = lambda cpi: extract_frame(cpi, grid, self.config)
        else:
            to_frame = lambda cpi: fft2_frame(cpi, grid, self.config)

        frames = []
        for start in self._cpi_starts(matrix.num_symbols):
            window = matrix.values[:, start:start + self.config.cpi_length]
            cpi = SrccMatrix(values=window, grid=matrix.grid.with_symbols(self.config.cpi_length))
            frames.append(to_frame(cpi))
        logger.info(f"{method} baseline over {len(frames)} CPIs, delay filter {'on' if delay_filter else 'off'}")
        return FeatureTensor(
            frames=np.stack([f.magnitudes for f in frames], axis=-1),
            doppler_axis=frames[0].doppler_axis,
            grid=frames[0].grid,
            cpi_stride=self.config.cpi_stride,
            cpi_length=self.config.cpi_length,
        )

    def _cpi_starts(self, num_symbols: int) -> List[int]:
        starts = list(range(0, num_symbols - self.config.cpi_length + 1, self.config.cpi_stride))
        if not starts:
            raise ValueError(f"{num_symbols} symbols do not fill one CPI of {self.config.cpi_length}")
        return starts

    def run(self, scene: SceneConfig) -> Tuple[FeatureTensor, EvalReport]:
        tensor = self.extract(self.simulate(scene))
        return tensor, self.evaluate(tensor, scene)
