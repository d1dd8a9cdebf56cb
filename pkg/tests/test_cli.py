import re

import numpy as np
import pytest
from sqlalchemy import create_engine, select
from sqlalchemy.orm import Session

from src.harness.cli import main
from src.harness.formats import read_csi, read_tensor
from src.storage.models import PipelineRun


@pytest.fixture
def run(tmp_path):
    """main() with logs kept under tmp_path"""
    def _run(*argv):
        return main(['--log-dir', str(tmp_path / 'logs'), *argv])
    return _run


def report_values(text):
    return dict(re.findall(r'^(\w+)=(\S+)$', text, flags=re.MULTILINE))


def test_simulate_extract_evaluate(run, scene_file, tmp_path, capsys):
    csi_path = tmp_path / 'a.wcsi'
    tensor_path = tmp_path / 'a.wddt'
    map_path = tmp_path / 'map.pgm'

    assert run('simulate', '--config', str(scene_file), '--out', str(csi_path)) == 0
    assert read_csi(csi_path).samples.shape == (30, 256)

    assert run('extract', '--in', str(csi_path), '--out', str(tensor_path), '--spectrogram', str(map_path)) == 0
    tensor = read_tensor(tensor_path)
    assert tensor.frames.shape == (32, 39, 5)
    assert map_path.read_bytes().startswith(b'P5\n5 39\n')

    capsys.readouterr()
    assert run('evaluate', '--in', str(tensor_path), '--truth', str(scene_file)) == 0
    values = report_values(capsys.readouterr().out)
    assert values['cpis'] == '5'
    assert float(values['range_error_p50_m']) <= 1.0
    assert float(values['mirror_ratio_median_db']) >= 10.0


def test_seed_override_changes_capture(run, scene_file, tmp_path):
    first, second = tmp_path / 'a.wcsi', tmp_path / 'b.wcsi'
    assert run('simulate', '--config', str(scene_file), '--out', str(first), '--seed', '1') == 0
    assert run('simulate', '--config', str(scene_file), '--out', str(second), '--seed', '2') == 0
    assert not np.array_equal(read_csi(first).samples, read_csi(second).samples)


def test_extract_options(run, scene_file, tmp_path):
    csi_path = tmp_path / 'a.wcsi'
    run('simulate', '--config', str(scene_file), '--out', str(csi_path))
    out = tmp_path / 'b.wddt'
    assert run('extract', '--in', str(csi_path), '--out', str(out), '--cpi-stride', '64',
               '--delay-max', '16', '--doppler-max', '100') == 0
    tensor = read_tensor(out)
    assert tensor.frames.shape == (16, 25, 3)
    assert tensor.cpi_stride == 64


def test_baseline(run, scene_file, tmp_path):
    out = tmp_path / 'cacc.wddt'
    assert run('baseline', '--config', str(scene_file), '--method', 'cacc', '--out', str(out)) == 0
    assert read_tensor(out).frames.shape == (32, 39, 5)
    assert run('baseline', '--config', str(scene_file), '--method', 'casr', '--mvdr',
               '--out', str(tmp_path / 'casr.wddt')) == 0


def test_baseline_without_delay_filter(run, scene_file, tmp_path, capsys):
    out = tmp_path / 'cacc.wddt'
    assert run('baseline', '--config', str(scene_file), '--method', 'cacc', '--no-delay-filter',
               '--out', str(out)) == 0
    assert read_tensor(out).frames.shape == (1, 39, 5)

    capsys.readouterr()
    assert run('evaluate', '--in', str(out), '--truth', str(scene_file)) == 0
    values = report_values(capsys.readouterr().out)
    assert abs(float(values['mirror_ratio_median_db'])) <= 3.0


def test_extract_records_cpi_length(run, scene_file, tmp_path):
    csi_path, out = tmp_path / 'a.wcsi', tmp_path / 'a.wddt'
    run('simulate', '--config', str(scene_file), '--out', str(csi_path))
    assert run('extract', '--in', str(csi_path), '--out', str(out), '--cpi-length', '64') == 0
    tensor = read_tensor(out)
    assert tensor.cpi_length == 64
    assert tensor.num_cpis == 7


def test_augment_mirror(run, scene_file, tmp_path):
    csi_path, tensor_path, mirrored = tmp_path / 'a.wcsi', tmp_path / 'a.wddt', tmp_path / 'm.wddt'
    run('simulate', '--config', str(scene_file), '--out', str(csi_path))
    run('extract', '--in', str(csi_path), '--out', str(tensor_path))
    assert run('augment', '--in', str(tensor_path), '--out', str(mirrored), '--kind', 'mirror') == 0
    np.testing.assert_array_equal(read_tensor(mirrored).frames, read_tensor(tensor_path).frames[:, ::-1, :])


def test_bench(run, capsys):
    assert run('bench', '--reps', '10', '--delay-bins', '8') == 0
    values = report_values(capsys.readouterr().out)
    assert values['latency_samples'] == '10'
    assert values['delay_bins'] == '8'
    assert float(values['latency_mean_ms']) > 0


@pytest.mark.parametrize("argv", [
    [],
    ['extract'],
    ['simulate', '--config', 'x.cfg'],
    ['augment', '--in', 'a', '--out', 'b', '--kind', 'rotate'],
    ['bench', '--reps', '5'],
    ['baseline', '--config', 'x.cfg', '--method', 'cacc', '--out', 'b', '--mvdr', '--no-delay-filter'],
])
def test_usage_errors(run, argv, capsys):
    assert run(*argv) == 2
    assert capsys.readouterr().err.startswith('error=UsageError message="')


def test_config_errors(run, scene_file, tmp_path, capsys):
    assert run('simulate', '--config', str(tmp_path / 'missing.cfg'), '--out', str(tmp_path / 'a.wcsi')) == 2
    assert 'error=ConfigError' in capsys.readouterr().err

    csi_path = tmp_path / 'a.wcsi'
    run('simulate', '--config', str(scene_file), '--out', str(csi_path))
    assert run('extract', '--in', str(csi_path), '--out', str(tmp_path / 'b.wddt'), '--sigma', '-1') == 2
    assert 'error=ConfigError' in capsys.readouterr().err

    assert run('augment', '--in', 'a', '--out', 'b', '--kind', 'affine_scale', '--magnitude', '0') == 2


def test_runtime_errors(run, tmp_path, capsys):
    bogus = tmp_path / 'bogus.wcsi'
    bogus.write_bytes(b'NOPE' + bytes(64))
    assert run('extract', '--in', str(bogus), '--out', str(tmp_path / 'b.wddt')) == 1
    assert capsys.readouterr().err.startswith('error=BadMagicError')

    assert run('extract', '--in', str(tmp_path / 'absent.wcsi'), '--out', str(tmp_path / 'b.wddt')) == 1
    assert 'error=FileNotFoundError' in capsys.readouterr().err


def test_runs_are_recorded(run, scene_file, tmp_path):
    url = f"sqlite:///{tmp_path / 'runs.db'}"
    assert run('--record', url, 'simulate', '--config', str(scene_file), '--out', str(tmp_path / 'a.wcsi')) == 0
    assert run('--record', url, 'extract', '--in', str(tmp_path / 'absent.wcsi'), '--out', 'x') == 1

    engine = create_engine(url)
    with Session(engine) as session:
        runs = session.scalars(select(PipelineRun).order_by(PipelineRun.id)).all()
    engine.dispose()

    assert [r.command for r in runs] == ['simulate', 'extract']
    assert [r.status for r in runs] == ['success', 'failure']
    assert runs[0].result_data['shape'] == [30, 256]
    assert runs[0].config_data['config'] == str(scene_file)
    assert runs[0].execution_time >= 0
    assert 'absent.wcsi' in runs[1].error_message
