import asyncio
import logging
from logging.handlers import RotatingFileHandler

import numpy as np
import pytest

from src.storage.database import RunRecorder, session_scope
from src.storage.models import PipelineRun
from src.utils.logging_config import reset_handlers, setup_logging
from src.utils.track_function import _to_serializable, track_function


class TestPipelineRun:
    def test_defaults(self, db_session):
        run = PipelineRun(command='simulate', config_data={'seed': 3})
        db_session.add(run)
        db_session.commit()

        stored = db_session.get(PipelineRun, run.id)
        assert stored.status == 'in_progress'
        assert stored.config_data == {'seed': 3}
        assert stored.created_at is not None
        assert repr(stored) == "<PipelineRun(command='simulate', status='in_progress')>"


class TestRunRecorder:
    def test_success(self, db_engine):
        recorder = RunRecorder(db_engine)
        with recorder.record('extract', {'input': 'a.wcsi'}) as result:
            result['shape'] = [32, 39, 5]

        with session_scope(db_engine) as session:
            run = session.query(PipelineRun).one()
            assert run.status == 'success'
            assert run.result_data == {'shape': [32, 39, 5]}
            assert run.error_message is None
            assert run.execution_time >= 0

    def test_failure_is_recorded_and_raised(self, db_engine):
        recorder = RunRecorder(db_engine)
        with pytest.raises(RuntimeError):
            with recorder.record('bench', {}):
                raise RuntimeError("covariance exploded")

        with session_scope(db_engine) as session:
            run = session.query(PipelineRun).one()
            assert run.status == 'failure'
            assert run.error_message == "covariance exploded"

    def test_without_engine(self):
        recorder = RunRecorder.from_url(None)
        with recorder.record('simulate', {}) as result:
            result['ok'] = True
        assert recorder.engine is None

    def test_from_url_creates_tables(self, tmp_path):
        recorder = RunRecorder.from_url(f"sqlite:///{tmp_path / 'fresh.db'}")
        with recorder.record('augment', {}):
            pass
        with session_scope(recorder.engine) as session:
            assert session.query(PipelineRun).count() == 1
        recorder.engine.dispose()


class TestTracking:
    def test_sync(self, caplog):
        @track_function
        def double(x):
            return 2 * x

        with caplog.at_level(logging.DEBUG, logger='core.tracking'):
            assert double(np.ones(3)).sum() == 6.0
        messages = [r.getMessage() for r in caplog.records]
        assert any('[FUNCTION_START]' in m for m in messages)
        assert any('"array": [3]' in m for m in messages)

    def test_async(self, caplog):
        @track_function
        async def halve(x):
            return x / 2

        with caplog.at_level(logging.INFO, logger='core.tracking'):
            assert asyncio.run(halve(3.0)) == 1.5
        assert any('[FUNCTION_END]' in r.getMessage() for r in caplog.records)

    def test_errors_propagate(self, caplog):
        @track_function
        def broken():
            raise ValueError("no CPI")

        with pytest.raises(ValueError):
            broken()
        assert any('[FUNCTION_ERROR]' in r.getMessage() for r in caplog.records)

    def test_serializable_summary(self):
        assert _to_serializable(np.zeros((2, 3))) == {"array": [2, 3], "dtype": "float64"}
        assert _to_serializable(1 + 2j) == [1.0, 2.0]
        assert _to_serializable(np.float32(0.5)) == 0.5
        assert _to_serializable(list(range(20))) == {"sequence": 20}
        assert _to_serializable({'a': (1, 2)}) == {'a': [1, 2]}


class TestLoggingSetup:
    def test_repeated_setup_closes_old_files(self, tmp_path):
        root = setup_logging(str(tmp_path), logging.CRITICAL)
        first = [h for h in root.handlers if isinstance(h, RotatingFileHandler)]
        setup_logging(str(tmp_path), logging.CRITICAL)
        second = [h for h in root.handlers if isinstance(h, RotatingFileHandler)]

        assert len(first) == len(second) == 2
        assert all(h.stream is None for h in first)
        assert all(h not in root.handlers for h in first)
        assert sorted(p.name.startswith('sisosense_') for p in tmp_path.iterdir()) == [True, True]
        reset_handlers(root)
