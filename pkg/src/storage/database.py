import logging
import time
from contextlib import contextmanager
from typing import Any, Dict, Iterator, Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import sessionmaker

from src.storage.models import Base, PipelineRun

logger = logging.getLogger('storage.database')


def init_db(database_url: str) -> Engine:
    """Initialize the database and create all tables"""
    engine = create_engine(database_url)
    Base.metadata.create_all(engine)
    logger.debug(f"Run database ready at {database_url}")
    return engine


def get_session(engine: Engine):
    """Create a new database session"""
    Session = sessionmaker(bind=engine, expire_on_commit=False)
    return Session()


@contextmanager
def session_scope(engine: Engine):
    """Provide a transactional scope around a series of operations."""
    session = get_session(engine)
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()


class RunRecorder:
    """Writes one PipelineRun row per command; a no-op without an engine"""

    def __init__(self, engine: Optional[Engine]):
        self.engine = engine

    @classmethod
    def from_url(cls, database_url: Optional[str]) -> "RunRecorder":
        return cls(init_db(database_url) if database_url else None)

    @contextmanager
    def record(self, command: str, config_data: Dict[str, Any]) -> Iterator[Dict[str, Any]]:
        """Yields a dict the caller fills with results; status and timing are set on exit"""
        result: Dict[str, Any] = {}
        if self.engine is None:
            yield result
            return

        with session_scope(self.engine) as session:
            run = PipelineRun(command=command, status='in_progress', config_data=config_data)
            session.add(run)
            session.flush()
            run_id = run.id

        start = time.perf_counter()
        try:
            yield result
        except Exception as e:
            self._finish(run_id, 'failure', result, time.perf_counter() - start, str(e))
            raise
        self._finish(run_id, 'success', result, time.perf_counter() - start, None)

    def _finish(self, run_id: int, status: str, result: Dict[str, Any], elapsed: float, error: Optional[str]):
        with session_scope(self.engine) as session:
            run = session.get(PipelineRun, run_id)
            run.status = status
            run.result_data = result
            run.execution_time = elapsed
            run.error_message = error
        logger.info(f"Run {run_id} ({status}) recorded in {elapsed:.3f}s")
