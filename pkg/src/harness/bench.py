"""
Per-CPI latency of ``extract_frame``.

Protocol: one canonical SRCC matrix (N=30, M=128) is built once; after
``BENCH_WARMUP`` untimed calls, each repetition times one ``extract_frame``
call with ``time.perf_counter`` in the calling thread. SRCC itself is not
timed. The optional parallel mode runs the same number of calls on a thread
pool and reports throughput separately.
"""
import logging
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from config.settings import settings
from src.compensation.srcc import srcc
from src.extraction.extractor import extract_frame
from src.extraction.models import ExtractorConfig
from src.harness.metrics import LatencyStats
from src.simulation.simulator import canonical_scene, generate_csi

logger = logging.getLogger('harness.bench')


def bench_pipeline(
    config: ExtractorConfig,
    repetitions: int,
    delay_bins: Optional[int] = None,
    parallel: bool = False,
    warmup: Optional[int] = None,
) -> LatencyStats:
    if repetitions < 10:
        raise ValueError(f"need at least 10 repetitions, got {repetitions}")
    if delay_bins is not None:
        config = config.model_copy(update={'delay_max_m': delay_bins * config.delay_step_m})
    warmup = settings.BENCH_WARMUP if warmup is None else warmup

    scene = canonical_scene(num_symbols=config.cpi_length, ifft_size=config.window.ifft_size)
    matrix = srcc(generate_csi(scene, 1), config.window)
    grid = config.delay_grid()

    for _ in range(warmup):
        extract_frame(matrix, grid, config)

    samples = []
    for _ in range(repetitions):
        start = time.perf_counter()
        extract_frame(matrix, grid, config)
        samples.append((time.perf_counter() - start) * 1e3)

    throughput = None
    if parallel:
        start = time.perf_counter()
        with ThreadPoolExecutor(max_workers=config.max_workers) as pool:
            list(pool.map(lambda _: extract_frame(matrix, grid, config), range(repetitions)))
        throughput = repetitions / (time.perf_counter() - start)

    stats = LatencyStats(
        samples_ms=samples,
        mean_ms=statistics.mean(samples),
        std_ms=statistics.stdev(samples),
        delay_bins=len(grid),
        parallel_throughput=throughput,
    )
    logger.info(f"extract_frame over {len(grid)} delay bins: {stats.mean_ms:.3f} ± {stats.std_ms:.3f} ms")
    return stats
