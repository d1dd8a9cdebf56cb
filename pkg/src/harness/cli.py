"""
Command line entry point.

    sisosense simulate --config scene.cfg --out a.wcsi
    sisosense extract  --in a.wcsi --out a.wddt [--spectrogram map.pgm --format pgm]
    sisosense baseline --config scene.cfg --method cacc --out b.wddt
    sisosense augment  --in a.wddt --out c.wddt --kind mirror
    sisosense evaluate --in a.wddt --truth scene.cfg
    sisosense bench    --reps 100

Failures print one ``error=<Class> message="..."`` line on stderr; usage and
configuration errors exit with 2, everything else with 1.
"""
import argparse
import logging
import sys
from typing import Callable, Dict, List, NoReturn, Optional

from pydantic import ValidationError
from sqlalchemy.exc import SQLAlchemyError

from config.settings import settings
from src.augmentation.transforms import AugmentationSpec, augment
from src.core.exceptions import ConfigError, SensingError, UsageError
from src.core.pipeline import SensingPipeline
from src.extraction.models import ExtractorConfig
from src.harness.bench import bench_pipeline
from src.harness.formats import read_csi, read_tensor, write_csi, write_tensor
from src.harness.spectrogram import export_spectrogram
from src.simulation.scene_config import SceneConfig
from src.storage.database import RunRecorder
from src.utils.logging_config import setup_logging
from src.utils.track_function import track_function

logger = logging.getLogger('harness.cli')

EXIT_RUNTIME = 1
EXIT_USAGE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(message)


def _add_extractor_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group('extraction')
    group.add_argument('--sigma', type=float, help='Gaussian window width in delay bins')
    group.add_argument('--ifft-size', type=int)
    group.add_argument('--cpi-length', type=int)
    group.add_argument('--cpi-stride', type=int)
    group.add_argument('--delay-max', type=float, dest='delay_max_m', help='metres')
    group.add_argument('--delay-step', type=float, dest='delay_step_m', help='metres')
    group.add_argument('--doppler-max', type=float, dest='doppler_max_hz', help='Hz')
    group.add_argument('--dc-exclusion', type=int, dest='dc_exclusion_bins')
    group.add_argument('--workers', type=int, dest='max_workers')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='sisosense', description='Bistatic SISO CSI sensing toolkit')
    parser.add_argument('--log-dir', default=None, help='log directory (default: settings.LOG_DIR)')
    parser.add_argument('--record', metavar='URL', default=None, help='SQLAlchemy URL of the run log')
    parser.add_argument('-v', '--verbose', action='store_true')
    sub = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)

    p = sub.add_parser('simulate', help='synthesise CSI from a scene file')
    p.add_argument('--config', required=True)
    p.add_argument('--out', required=True)
    p.add_argument('--seed', type=int)

    p = sub.add_parser('extract', help='SRCC + delay-Doppler tensor from a CSI file')
    p.add_argument('--in', dest='input', required=True)
    p.add_argument('--out', required=True)
    p.add_argument('--spectrogram', help='also export the delay-compressed Doppler-time map')
    p.add_argument('--format', choices=['pgm', 'csv'], default='pgm')
    _add_extractor_options(p)

    p = sub.add_parser('baseline', help='two-antenna CACC / CASR tensor for a scene file')
    p.add_argument('--config', required=True)
    p.add_argument('--method', choices=['cacc', 'casr'], required=True)
    p.add_argument('--out', required=True)
    tail = p.add_mutually_exclusive_group()
    tail.add_argument('--mvdr', action='store_true', help='MVDR tail instead of the plain 2D FFT')
    tail.add_argument('--no-delay-filter', action='store_true',
                      help='Doppler spectrum of the subcarrier sum, no delay axis')
    p.add_argument('--keep-static', action='store_true', help='do not equalise static magnitudes')
    _add_extractor_options(p)

    p = sub.add_parser('augment', help='augment a tensor file')
    p.add_argument('--in', dest='input', required=True)
    p.add_argument('--out', required=True)
    p.add_argument('--kind', choices=['translate', 'affine_scale', 'mirror', 'time_shift', 'noise'], required=True)
    p.add_argument('--magnitude', type=float, default=0.0)
    p.add_argument('--seed', type=int, default=0)

    p = sub.add_parser('evaluate', help='compare a tensor against scene ground truth')
    p.add_argument('--in', dest='input', required=True)
    p.add_argument('--truth', required=True)
    _add_extractor_options(p)

    p = sub.add_parser('bench', help='per-CPI extraction latency')
    p.add_argument('--reps', type=int, default=100)
    p.add_argument('--delay-bins', type=int)
    p.add_argument('--parallel', action='store_true')
    _add_extractor_options(p)
    return parser


def _extractor_config(args: argparse.Namespace) -> ExtractorConfig:
    overrides = {
        name: getattr(args, name, None)
        for name in ('cpi_length', 'cpi_stride', 'delay_max_m', 'delay_step_m',
                     'doppler_max_hz', 'dc_exclusion_bins', 'max_workers')
    }
    try:
        config = ExtractorConfig.from_settings(**overrides)
        return config.with_window(sigma=getattr(args, 'sigma', None), ifft_size=getattr(args, 'ifft_size', None))
    except ValidationError as e:
        raise ConfigError(f"invalid extraction parameters: {e.errors()[0]['msg']}") from e


def _load_scene(path: str, seed: Optional[int] = None) -> SceneConfig:
    scene = SceneConfig.from_file(path)
    return scene.model_copy(update={'seed': seed}) if seed is not None else scene


@track_function
def cmd_simulate(args: argparse.Namespace, result: Dict) -> None:
    scene = _load_scene(args.config, args.seed)
    frame = SensingPipeline(ExtractorConfig.from_settings()).simulate(scene)
    write_csi(args.out, frame)
    result.update(shape=list(frame.samples.shape), out=args.out)


@track_function
def cmd_extract(args: argparse.Namespace, result: Dict) -> None:
    pipeline = SensingPipeline(_extractor_config(args))
    tensor = pipeline.extract(read_csi(args.input))
    write_tensor(args.out, tensor)
    if args.spectrogram:
        export_spectrogram(pipeline.compress(tensor), args.spectrogram, args.format)
    result.update(shape=list(tensor.frames.shape), out=args.out)


@track_function
def cmd_baseline(args: argparse.Namespace, result: Dict) -> None:
    pipeline = SensingPipeline(_extractor_config(args))
    tensor = pipeline.baseline(
        _load_scene(args.config),
        args.method,
        use_mvdr=args.mvdr,
        equal_static=not args.keep_static,
        delay_filter=not args.no_delay_filter,
    )
    write_tensor(args.out, tensor)
    result.update(method=args.method, shape=list(tensor.frames.shape), out=args.out)


@track_function
def cmd_augment(args: argparse.Namespace, result: Dict) -> None:
    try:
        spec = AugmentationSpec(kind=args.kind, magnitude=args.magnitude, seed=args.seed)
    except ValidationError as e:
        raise ConfigError(f"invalid augmentation: {e.errors()[0]['msg']}") from e
    tensor = augment(read_tensor(args.input), spec)
    write_tensor(args.out, tensor)
    result.update(kind=args.kind, out=args.out)


@track_function
def cmd_evaluate(args: argparse.Namespace, result: Dict) -> None:
    pipeline = SensingPipeline(_extractor_config(args))
    report = pipeline.evaluate(read_tensor(args.input), _load_scene(args.truth))
    sys.stdout.write(report.to_text())
    result.update(p50=report.cdf.p50, p70=report.cdf.p70)


@track_function
def cmd_bench(args: argparse.Namespace, result: Dict) -> None:
    if args.reps < 10:
        raise UsageError(f"--reps must be at least 10, got {args.reps}")
    stats = bench_pipeline(_extractor_config(args), args.reps, args.delay_bins, parallel=args.parallel)
    sys.stdout.write("\n".join(stats.to_lines()) + "\n")
    result.update(mean_ms=stats.mean_ms, std_ms=stats.std_ms)


COMMANDS: Dict[str, Callable[[argparse.Namespace, Dict], None]] = {
    'simulate': cmd_simulate,
    'extract': cmd_extract,
    'baseline': cmd_baseline,
    'augment': cmd_augment,
    'evaluate': cmd_evaluate,
    'bench': cmd_bench,
}


def _report_error(error: BaseException) -> None:
    message = str(error).replace('"', "'").replace('\n', ' ')
    sys.stderr.write(f'error={type(error).__name__} message="{message}"\n')


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        _report_error(e)
        return EXIT_USAGE

    setup_logging(args.log_dir or str(settings.LOG_DIR), logging.DEBUG if args.verbose else logging.CRITICAL)
    config_data = {k: v for k, v in vars(args).items() if isinstance(v, (str, int, float, bool, type(None)))}

    try:
        recorder = RunRecorder.from_url(args.record or settings.RUN_DATABASE_URL)
        with recorder.record(args.command, config_data) as result:
            COMMANDS[args.command](args, result)
        return 0
    except (UsageError, ConfigError) as e:
        _report_error(e)
        return EXIT_USAGE
    except (SensingError, OSError, ValueError, SQLAlchemyError) as e:
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        _report_error(e)
        return EXIT_RUNTIME
