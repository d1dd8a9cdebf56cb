import asyncio
import functools
import json
import logging
import time
from dataclasses import fields, is_dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np
from pydantic import BaseModel

logger = logging.getLogger('core.tracking')


def _to_serializable(obj: Any) -> Any:
    """Compact JSON-friendly summary; arrays are described, never dumped"""
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    if isinstance(obj, np.ndarray):
        return {"array": list(obj.shape), "dtype": str(obj.dtype)}
    if isinstance(obj, (np.integer, np.floating)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, BaseModel):
        return {"model": type(obj).__name__}
    if is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _to_serializable(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _to_serializable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        if len(obj) > 8:
            return {"sequence": len(obj)}
        return [_to_serializable(v) for v in obj]
    return type(obj).__name__


def track_function(func: Callable) -> Callable:
    """Decorator to track function inputs and outputs"""
    @functools.wraps(func)
    async def async_wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        function_name = func.__qualname__

        input_data = {
            "args": [_to_serializable(arg) for arg in args],
            "kwargs": {k: _to_serializable(v) for k, v in kwargs.items()},
        }
        logger.info(f"[FUNCTION_START] {function_name}")
        logger.debug(f"[FUNCTION_INPUT] {function_name}: {json.dumps(input_data)}")

        try:
            result = await func(*args, **kwargs)
            execution_time = time.perf_counter() - start_time
            logger.debug(f"[FUNCTION_OUTPUT] {function_name}: {json.dumps(_to_serializable(result))}")
            logger.info(f"[FUNCTION_END] {function_name} - Execution time: {execution_time:.3f}s")
            return result

        except Exception as e:
            logger.error(f"[FUNCTION_ERROR] {function_name}: {str(e)}", exc_info=True)
            raise

    @functools.wraps(func)
    def sync_wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        function_name = func.__qualname__

        input_data = {
            "args": [_to_serializable(arg) for arg in args],
            "kwargs": {k: _to_serializable(v) for k, v in kwargs.items()},
        }
        logger.info(f"[FUNCTION_START] {function_name}")
        logger.debug(f"[FUNCTION_INPUT] {function_name}: {json.dumps(input_data)}")

        try:
            result = func(*args, **kwargs)
            execution_time = time.perf_counter() - start_time
            logger.debug(f"[FUNCTION_OUTPUT] {function_name}: {json.dumps(_to_serializable(result))}")
            logger.info(f"[FUNCTION_END] {function_name} - Execution time: {execution_time:.3f}s")
            return result

        except Exception as e:
            logger.error(f"[FUNCTION_ERROR] {function_name}: {str(e)}", exc_info=True)
            raise

    return async_wrapper if asyncio.iscoroutinefunction(func) else sync_wrapper
