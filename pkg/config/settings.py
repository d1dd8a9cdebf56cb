from pathlib import Path
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="SISOSENSE_",
        extra="ignore",
    )

    # Base paths
    BASE_DIR: Path = Path(__file__).parent.parent
    DATA_DIR: Path = BASE_DIR / "data"
    LOG_DIR: Path = BASE_DIR / "logs"

    # Run log (disabled when unset)
    RUN_DATABASE_URL: Optional[str] = None

    # CPI framing
    CPI_LENGTH: int = 128
    CPI_STRIDE: int = 32

    # CSI reconstruction
    IFFT_SIZE: int = 128
    WINDOW_SIGMA: float = 64.0
    PEAK_MODE: str = "per_symbol"

    # Delay grid (bistatic excess range, metres)
    DELAY_MAX_M: float = 32.0
    DELAY_STEP_M: float = 1.0

    # Doppler processing
    DOPPLER_MAX_HZ: float = 150.0
    DC_EXCLUSION_BINS: int = 2

    # MVDR
    EPSILON_SCALE: float = 1e-3
    EPSILON_FLOOR: float = 1e-12
    MAX_CONDITION: float = 1e12

    # Metrics
    MIRROR_RATIO_CAP_DB: float = 120.0

    # Concurrency
    MAX_WORKERS: int = 4

    # Benchmark
    BENCH_WARMUP: int = 3

    def ensure_dirs(self) -> None:
        """Create the data and log directories."""
        self.DATA_DIR.mkdir(parents=True, exist_ok=True)
        self.LOG_DIR.mkdir(parents=True, exist_ok=True)


settings = Settings()
