"""Driver tags, schedule parameters and the RFOX harmonic envelopes."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import InvalidParameterError


class Driver(str, Enum):
    RFOX = "RFOX"
    X = "X"
    XX = "XX"
    XPLUS_SXX = "XplusSXX"

    @classmethod
    def parse(cls, value) -> "Driver":
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            names = ", ".join(d.value for d in cls)
            raise InvalidParameterError(f"unknown driver {value!r}; choose from {names}") from None


BASELINES = (Driver.X, Driver.XX, Driver.XPLUS_SXX)


@dataclass(frozen=True)
class ScheduleParams:
    """Slice count ``p``, kick amplitude ``delta`` and oscillation count.

    ``cycles`` is the number ``N`` of envelope periods over the ``p`` slices
    (phase ``2*pi*N*k/p``).  ``None`` means "use the instance's qubit
    count", the default convention (drive frequency grows with system size).
    """

    delta: float = 1e-3
    p: int = 100
    cycles: int | None = None

    def __post_init__(self):
        if not (self.delta >= 0 and math.isfinite(self.delta)):
            raise InvalidParameterError(f"delta must be finite and >= 0, got {self.delta}")
        if int(self.p) != self.p or self.p < 1:
            raise InvalidParameterError(f"p must be a positive integer, got {self.p}")
        if self.cycles is not None and self.cycles < 0:
            raise InvalidParameterError(f"cycles must be >= 0, got {self.cycles}")

    def n_cycles(self, n_qubits: int) -> int:
        return n_qubits if self.cycles is None else self.cycles


def check_slice(k: int, p: int) -> None:
    if not 0 <= k < p:
        raise InvalidParameterError(f"slice index k={k} outside [0, {p})")


def interpolation(k: int, p: int) -> float:
    """Annealing parameter ``s_k = k / p``."""
    check_slice(k, p)
    return k / p


def rfox_angles(k: int, p: int, n_cycles: int, delta: float) -> tuple[float, float]:
    """Envelope values ``(1 - delta cos(2 pi N k/p), delta sin(2 pi N k/p))``.

    The first value weights the XX exchange and is the RXX angle; the second
    weights the ZX kick and is the RZX angle.
    """
    check_slice(k, p)
    if delta < 0:
        raise InvalidParameterError(f"delta must be >= 0, got {delta}")
    phase = 2.0 * math.pi * n_cycles * k / p
    return 1.0 - delta * math.cos(phase), delta * math.sin(phase)
