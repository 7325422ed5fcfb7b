"""Versioned line-oriented text format for instances.

    expert-advice-instance v1
    T N K
    <loss row of round 1: K decimals>
    <advice row of expert 0: K decimals>
    ...
    <advice row of expert N-1>
    <loss row of round 2>
    ...

Every value is written as fixed-point with 12 fractional digits. Advice rows
are renormalised once on read, so loading the same file always yields the same
in-memory instance.
"""

import logging
import time
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .environments import Instance
from .exceptions import InputError

logger = logging.getLogger(__name__)

FORMAT_MAGIC = "expert-advice-instance"
FORMAT_VERSION = 1
_FRACTION_DIGITS = 12


def _format_row(values) -> str:
    return " ".join(f"{value:.{_FRACTION_DIGITS}f}" for value in values)


def write_instance(instance: Instance, path: Union[str, Path]) -> Path:
    """Serialise *instance* to *path* and return the path."""
    start = time.time()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        handle.write(f"{FORMAT_MAGIC} v{FORMAT_VERSION}\n")
        handle.write(f"{instance.horizon} {instance.n_experts} {instance.n_actions}\n")
        for advice, loss in zip(instance.advice, instance.losses):
            handle.write(_format_row(loss) + "\n")
            for row in advice:
                handle.write(_format_row(row) + "\n")
    logger.info(
        f"Instance written to {path} (T={instance.horizon}, N={instance.n_experts}, "
        f"K={instance.n_actions}) in {time.time() - start:.3f}s"
    )
    return path


def read_header(path: Union[str, Path]) -> Tuple[int, int, int]:
    """(T, N, K) from the first two lines of an instance file."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Instance file not found: {path}")
    with path.open("r", encoding="utf-8") as handle:
        magic = handle.readline().split()
        dims = handle.readline().split()
    if len(magic) != 2 or magic[0] != FORMAT_MAGIC:
        raise InputError(f"{path} is not an instance file")
    if magic[1] != f"v{FORMAT_VERSION}":
        raise InputError(f"unsupported instance format version {magic[1]!r}")
    if len(dims) != 3:
        raise InputError(f"{path}: malformed header {dims!r}")
    horizon, n_experts, n_actions = (int(value) for value in dims)
    return horizon, n_experts, n_actions


def read_instance(path: Union[str, Path]) -> Instance:
    """Load an instance written by :func:`write_instance`."""
    start = time.time()
    horizon, n_experts, n_actions = read_header(path)
    rows = np.loadtxt(path, skiprows=2, ndmin=2, dtype=np.float64)
    expected = (horizon * (n_experts + 1), n_actions)
    if rows.shape != expected:
        raise InputError(f"{path}: expected {expected[0]} rows of {n_actions} values, found shape {rows.shape}")
    blocks = rows.reshape(horizon, n_experts + 1, n_actions)
    losses = blocks[:, 0, :].copy()
    advice = blocks[:, 1:, :].copy()
    sums = advice.sum(axis=2, keepdims=True)
    if np.any(sums <= 0.0):
        raise InputError(f"{path}: an advice row has no mass")
    instance = Instance(advice=advice / sums, losses=losses)
    logger.info(f"Instance read from {path} in {time.time() - start:.3f}s")
    return instance
