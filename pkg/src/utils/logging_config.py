import logging
import logging.handlers
import os
from datetime import datetime
from typing import Tuple

LOG_PREFIX = "sisosense"
MAX_LOG_BYTES = 10 * 1024 * 1024
LOG_BACKUPS = 5

DETAILED_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
ERROR_FORMAT = DETAILED_FORMAT + '\nException:\n%(exc_info)s'

# Handlers live on the root logger; these only set their level
COMPONENT_LOGGERS: Tuple[str, ...] = (
    'simulation',
    'compensation',
    'extraction',
    'baselines',
    'augmentation',
    'harness',
    'storage',
    'core.pipeline',
    'core.tracking',
)


def _rotating_handler(path: str, level: int, formatter: logging.Formatter) -> logging.Handler:
    handler = logging.handlers.RotatingFileHandler(
        path,
        maxBytes=MAX_LOG_BYTES,
        backupCount=LOG_BACKUPS,
        encoding='utf-8',
    )
    handler.setLevel(level)
    handler.setFormatter(formatter)
    return handler


def reset_handlers(logger: logging.Logger) -> None:
    """Detach and close every handler of ``logger``"""
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()


def setup_logging(log_dir: str = "logs", console_level: int = logging.INFO) -> logging.Logger:
    """Console on stderr plus daily rotating general and error logs under ``log_dir``.

    Safe to call repeatedly; the previous handlers are closed first.
    """
    os.makedirs(log_dir, exist_ok=True)

    stamp = datetime.now().strftime("%Y%m%d")
    detailed = logging.Formatter(DETAILED_FORMAT)

    # stderr only, stdout carries the reports
    console = logging.StreamHandler()
    console.setLevel(console_level)
    console.setFormatter(detailed)

    root = logging.getLogger()
    root.setLevel(logging.DEBUG)
    reset_handlers(root)
    root.addHandler(console)
    root.addHandler(_rotating_handler(os.path.join(log_dir, f"{LOG_PREFIX}_{stamp}.log"), logging.DEBUG, detailed))
    root.addHandler(_rotating_handler(
        os.path.join(log_dir, f"{LOG_PREFIX}_error_{stamp}.log"),
        logging.ERROR,
        logging.Formatter(ERROR_FORMAT),
    ))

    for name in COMPONENT_LOGGERS:
        component = logging.getLogger(name)
        component.setLevel(logging.DEBUG)
        component.propagate = True

    root.info(f"Logging to {log_dir}")
    return root
