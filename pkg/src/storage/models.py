from sqlalchemy import JSON, Column, Float, Integer, String, Text

from src.storage.base import Base, TimestampMixin


class PipelineRun(Base, TimestampMixin):
    """One CLI command or pipeline invocation"""
    __tablename__ = 'pipeline_runs'

    id = Column(Integer, primary_key=True)
    command = Column(String(50), nullable=False)
    status = Column(String(20), nullable=False, default='in_progress')  # 'in_progress', 'success', 'failure'
    config_data = Column(JSON)
    result_data = Column(JSON)
    error_message = Column(Text)
    execution_time = Column(Float)  # seconds

    def __repr__(self):
        return f"<PipelineRun(command='{self.command}', status='{self.status}')>"
