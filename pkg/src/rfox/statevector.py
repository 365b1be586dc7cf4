"""Dense statevector engine for the small gate set the RFOX circuits need.

Amplitudes live in a flat complex array of length ``2**n`` with qubit 0 as the
least-significant index bit.  Gates act in place through reshaped strided
views, costing O(2**n) each; every ``apply_*`` function returns the state it
was given so calls can be chained.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, ResourceLimitError
from .instances import bitstring_from_index, make_rng

MAX_QUBITS = 16
DEFAULT_SHOTS = 4096
EXACT = math.inf  # shots sentinel for exact-probability distributions


@dataclass
class Statevector:
    n: int
    amplitudes: np.ndarray

    def copy(self) -> "Statevector":
        return Statevector(self.n, self.amplitudes.copy())

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def dump(self, tol: float = 1e-12) -> str:
        """Readable ``bitstring amplitude`` lines for non-negligible amplitudes."""
        return "".join(
            f"{bitstring_from_index(i, self.n)} {a.real:+.12f}{a.imag:+.12f}j\n"
            for i, a in enumerate(self.amplitudes) if abs(a) > tol)


@dataclass(frozen=True)
class ShotDistribution:
    """Measurement outcomes keyed by bitstring.

    ``counts`` holds integer counts for sampled runs.  With ``shots ==
    EXACT`` it holds the exact outcome probabilities instead.
    """

    counts: dict[str, float]
    shots: float

    @property
    def exact(self) -> bool:
        return self.shots == EXACT

    @property
    def n(self) -> int:
        return len(next(iter(self.counts)))

    def probabilities(self) -> dict[str, float]:
        total = float(sum(self.counts.values()))
        return {x: c / total for x, c in self.counts.items()}


def init_zero(n: int, max_qubits: int = MAX_QUBITS) -> Statevector:
    if n < 1:
        raise InvalidParameterError(f"need at least one qubit, got {n}")
    if n > max_qubits:
        raise ResourceLimitError(f"{n} qubits exceeds statevector limit {max_qubits}")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(n, amps)


def _check_qubit(state: Statevector, *qubits: int) -> None:
    for q in qubits:
        if not 0 <= q < state.n:
            raise InvalidParameterError(f"qubit {q} out of range for n={state.n}")
    if len(set(qubits)) != len(qubits):
        raise InvalidParameterError(f"qubits must be distinct, got {qubits}")


def _view1(state: Statevector, q: int) -> np.ndarray:
    # axis 1 is qubit q
    return state.amplitudes.reshape(-1, 2, 1 << q)


def _view2(state: Statevector, a: int, b: int) -> tuple[np.ndarray, int, int]:
    """5-d view ``(hi, bit_hi, mid, bit_lo, lo)``; returns the axes of ``a`` and ``b``."""
    lo, hi = min(a, b), max(a, b)
    view = state.amplitudes.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)
    return view, (1 if a == hi else 3), (1 if b == hi else 3)


def _index(axis_a: int, bit_a: int, axis_b: int, bit_b: int):
    idx = [slice(None)] * 5
    idx[axis_a] = bit_a
    idx[axis_b] = bit_b
    return tuple(idx)


def apply_hadamard(state: Statevector, q: int) -> Statevector:
    _check_qubit(state, q)
    v = _view1(state, q)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] += a1
    v[:, 1, :] = a0 - a1
    v *= 1 / math.sqrt(2)
    return state


def apply_hadamard_all(state: Statevector) -> Statevector:
    for q in range(state.n):
        apply_hadamard(state, q)
    return state


def apply_phase(state: Statevector, q: int, phi: float) -> Statevector:
    """``P(phi) = diag(1, e^{i phi})`` on qubit ``q``."""
    _check_qubit(state, q)
    _view1(state, q)[:, 1, :] *= np.exp(1j * phi)
    return state


def apply_rx(state: Statevector, q: int, theta: float) -> Statevector:
    """``exp(-i theta X / 2)``."""
    _check_qubit(state, q)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    v = _view1(state, q)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :].copy()
    v[:, 0, :] = c * a0 - 1j * s * a1
    v[:, 1, :] = c * a1 - 1j * s * a0
    return state


def apply_rz(state: Statevector, q: int, theta: float) -> Statevector:
    """``exp(-i theta Z / 2)``."""
    _check_qubit(state, q)
    v = _view1(state, q)
    v[:, 0, :] *= np.exp(-0.5j * theta)
    v[:, 1, :] *= np.exp(0.5j * theta)
    return state


def apply_rzz(state: Statevector, u: int, v: int, theta: float) -> Statevector:
    """``exp(-i theta Z_u Z_v / 2)``."""
    _check_qubit(state, u, v)
    view, au, av = _view2(state, u, v)
    same, diff = np.exp(-0.5j * theta), np.exp(0.5j * theta)
    for bu in (0, 1):
        for bv in (0, 1):
            view[_index(au, bu, av, bv)] *= same if bu == bv else diff
    return state


def apply_rxx(state: Statevector, u: int, v: int, theta: float) -> Statevector:
    """``exp(-i theta X_u X_v / 2)``: mixes each amplitude with its both-flipped partner."""
    _check_qubit(state, u, v)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    view, au, av = _view2(state, u, v)
    for bu, bv in ((0, 0), (0, 1)):
        i, j = _index(au, bu, av, bv), _index(au, 1 - bu, av, 1 - bv)
        a, b = view[i].copy(), view[j].copy()
        view[i] = c * a - 1j * s * b
        view[j] = c * b - 1j * s * a
    return state


def apply_rzx(state: Statevector, u: int, v: int, phi: float) -> Statevector:
    """``exp(-i phi Z_u X_v / 2)``: Z acts on ``u``, X on ``v``.

    Within the ``u = 0`` sector qubit ``v`` is rotated with mixing ``-i sin``,
    within ``u = 1`` with ``+i sin``.
    """
    _check_qubit(state, u, v)
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    view, au, av = _view2(state, u, v)
    for bu, mix in ((0, -1j * s), (1, 1j * s)):
        i, j = _index(au, bu, av, 0), _index(au, bu, av, 1)
        a, b = view[i].copy(), view[j].copy()
        view[i] = c * a + mix * b
        view[j] = c * b + mix * a
    return state


def probabilities(state: Statevector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def exact_distribution(state: Statevector) -> ShotDistribution:
    """All outcome probabilities as a distribution with the ``EXACT`` shot sentinel."""
    probs = probabilities(state)
    counts = {bitstring_from_index(i, state.n): float(p) for i, p in enumerate(probs) if p > 0}
    return ShotDistribution(counts, EXACT)


def sample(state: Statevector, shots=DEFAULT_SHOTS, seed: int = 0) -> ShotDistribution:
    """Multinomial measurement record; ``shots=EXACT`` returns probabilities."""
    if shots == EXACT:
        return exact_distribution(state)
    if int(shots) != shots or shots < 1:
        raise InvalidParameterError(f"shots must be a positive integer, got {shots}")
    probs = probabilities(state)
    probs = probs / probs.sum()
    drawn = make_rng(seed).multinomial(int(shots), probs)
    counts = {bitstring_from_index(int(i), state.n): int(drawn[i]) for i in np.flatnonzero(drawn)}
    return ShotDistribution(counts, int(shots))
