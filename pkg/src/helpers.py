import os
from typing import Union

import numpy as np
from dotenv import load_dotenv

ArrayLike = Union[float, complex, np.ndarray]


def print_h_bar():
    print("--------------------------------------------------------------------")


def as_output(value: np.ndarray, *inputs) -> ArrayLike:
    """Return a Python scalar when every input was a scalar, the array otherwise"""
    if all(np.ndim(item) == 0 for item in inputs):
        return value.item() if isinstance(value, np.ndarray) else value
    return value


def thread_count() -> int:
    """Worker cap for grid sweeps, read from BOOSTDIFF_THREADS (a .env file is honoured)"""
    load_dotenv()
    raw = os.getenv("BOOSTDIFF_THREADS", "")
    try:
        requested = int(raw)
    except ValueError:
        requested = os.cpu_count() or 1
    return max(1, requested)
