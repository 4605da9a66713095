"""Small input-validation helpers shared across the package."""

from __future__ import annotations

import os
from typing import Iterable

import numpy as np


def check_positive(name: str, value) -> None:
    if not value > 0:
        raise ValueError(f"{name} must be > 0, got {value!r}")


def check_at_least(name: str, value, minimum) -> None:
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value!r}")


def check_fraction(name: str, value, *, inclusive_upper: bool = True) -> None:
    upper_ok = value <= 1 if inclusive_upper else value < 1
    if not (0 <= value and upper_ok):
        bound = "[0, 1]" if inclusive_upper else "[0, 1)"
        raise ValueError(f"{name} must lie in {bound}, got {value!r}")


def check_one_of(name: str, value, options: Iterable) -> None:
    opts = tuple(options)
    if value not in opts:
        raise ValueError(f"{name} must be one of {opts}, got {value!r}")


def check_readable_file(path) -> None:
    if not os.path.isfile(path):
        raise FileNotFoundError(f"not a readable file: {path}")


def check_finite(name: str, array: np.ndarray) -> None:
    if not np.all(np.isfinite(array)):
        bad = int(np.count_nonzero(~np.isfinite(array)))
        raise ValueError(f"{name} contains {bad} non-finite entries")
