"""Deterministic, splittable uniform random streams.

Streams are backed by the Philox-4x64-10 counter-based generator (Salmon et
al., SC 2011) as shipped in numpy, keyed *directly* by the 128-bit pair
``(master_seed, stream_id)`` with no seed hashing in between.  The generator
is fully specified by its key and counter, so a given pair reproduces the
same sequence on every platform and numpy release.

Each uniform variate consumes exactly one 64-bit output word ``w`` and is
mapped into the open interval (0, 1) as::

    u = ((w >> 11) + 0.5) * 2**-53

which keeps 53 bits of precision and can never produce 0.0 or 1.0.  Distinct
``stream_id`` values under one ``master_seed`` are independent Philox keys;
parallel workloads derive one stream per work item and never share a stream
between concurrent tasks.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidParameterError

_U64_MAX = 2**64
_WORD_SHIFT = np.uint64(11)
_TO_OPEN_UNIT = 2.0**-53


def _check_u64(name: str, value: int) -> int:
    if not isinstance(value, (int, np.integer)):
        raise InvalidParameterError(f"{name} must be an integer, got {type(value).__name__}")
    value = int(value)
    if not 0 <= value < _U64_MAX:
        raise InvalidParameterError(f"{name} must be an unsigned 64-bit integer, got {value}")
    return value


class RandomStream:
    """Single-owner stream of uniforms in (0, 1), addressed by (master_seed, stream_id).

    A stream is stateful and must not be shared between concurrent tasks;
    derive one per work item instead.
    """

    def __init__(self, master_seed: int, stream_id: int = 0):
        self._master_seed = _check_u64("master_seed", master_seed)
        self._stream_id = _check_u64("stream_id", stream_id)
        key = np.array([self._master_seed, self._stream_id], dtype=np.uint64)
        self._bitgen = np.random.Philox(key=key)
        self._position = 0

    @property
    def master_seed(self) -> int:
        return self._master_seed

    @property
    def stream_id(self) -> int:
        return self._stream_id

    @property
    def position(self) -> int:
        """Number of uniforms drawn so far (one 64-bit word each)."""
        return self._position

    def uniforms(self, n: int) -> np.ndarray:
        """Draw ``n`` uniforms from the open interval (0, 1), advancing by ``n``."""
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise InvalidParameterError(f"draw count must be a non-negative integer, got {n!r}")
        if n == 0:
            return np.empty(0, dtype=np.float64)
        words = np.atleast_1d(self._bitgen.random_raw(int(n)))
        self._position += int(n)
        return ((words >> _WORD_SHIFT).astype(np.float64) + 0.5) * _TO_OPEN_UNIT

    def next_uniform(self) -> float:
        """Draw a single uniform in (0, 1), advancing the stream by one."""
        return float(self.uniforms(1)[0])

    def __repr__(self) -> str:
        return (
            f"RandomStream(master_seed={self._master_seed}, "
            f"stream_id={self._stream_id}, position={self._position})"
        )
