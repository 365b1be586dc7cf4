"""Gate-level plans for the RFOX protocol and the Trotterized annealing baselines."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from .errors import InvalidParameterError
from .instances import RfimInstance
from .pauli import field_phases
from .schedule import BASELINES, Driver, ScheduleParams, interpolation, rfox_angles
from . import statevector as sv

__all__ = [
    "GateOp", "CircuitPlan", "rfox_angles", "build_rfox_circuit",
    "build_baseline_circuit", "build_circuit", "run",
]

_ARITY = {"HadamardAll": 0, "Phase": 1, "RX": 1, "RZ": 1, "RXX": 2, "RZX": 2, "RZZ": 2}
TWO_QUBIT = frozenset({"RXX", "RZX", "RZZ"})


@dataclass(frozen=True)
class GateOp:
    kind: str
    qubits: tuple[int, ...] = ()
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in _ARITY:
            raise InvalidParameterError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != _ARITY[self.kind]:
            raise InvalidParameterError(
                f"{self.kind} takes {_ARITY[self.kind]} qubits, got {self.qubits}")
        if not math.isfinite(self.angle):
            raise InvalidParameterError(f"non-finite angle in {self.kind}")

    def dumps(self) -> str:
        qs = ",".join(map(str, self.qubits)) or "-"
        return f"{self.kind} {qs} {self.angle!r}"


@dataclass(frozen=True)
class CircuitPlan:
    n: int
    gates: tuple[GateOp, ...]
    driver: Driver | None = None
    params: ScheduleParams | None = None
    provenance: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for g in self.gates:
            if any(not 0 <= q < self.n for q in g.qubits):
                raise InvalidParameterError(f"gate {g.dumps()} addresses a qubit >= {self.n}")

    def two_qubit_count(self) -> int:
        return sum(g.kind in TWO_QUBIT for g in self.gates)

    def dumps(self) -> str:
        """One ``kind qubits angle`` line per gate."""
        return "".join(g.dumps() + "\n" for g in self.gates)


def _encoding(instance: RfimInstance) -> list[GateOp]:
    # H P(phi_j) H on every qubit, i.e. exp(-i phi_j X_j / 2) up to global phase
    phases = field_phases(instance)
    return ([GateOp("HadamardAll")]
            + [GateOp("Phase", (j,), phi) for j, phi in enumerate(phases)]
            + [GateOp("HadamardAll")])


def build_rfox_circuit(instance: RfimInstance, params: ScheduleParams = ScheduleParams(),
                       encode_per_slice: bool = False) -> CircuitPlan:
    """Field encoding followed by ``p`` slices of per-edge ``RXX`` then ``RZX``.

    With ``encode_per_slice`` the single-qubit encoding block is repeated at
    the start of every slice instead of only once at the head.
    """
    encoding = _encoding(instance)
    n_cycles = params.n_cycles(instance.n)
    gates: list[GateOp] = [] if encode_per_slice else list(encoding)
    for k in range(params.p):
        if encode_per_slice:
            gates += encoding
        theta_xx, theta_zx = rfox_angles(k, params.p, n_cycles, params.delta)
        for u, v in instance.edges:
            gates.append(GateOp("RXX", (u, v), theta_xx))
            gates.append(GateOp("RZX", (u, v), theta_zx))
    prov = {"instance": instance.content_hash(), "encode_per_slice": encode_per_slice}
    return CircuitPlan(instance.n, tuple(gates), Driver.RFOX, params, prov)


def _baseline_slice(driver: Driver, instance: RfimInstance, s: float, dt: float) -> list[GateOp]:
    """First-order Trotter step: term ``c P`` becomes ``R_P(2 c dt)``; zero terms are skipped."""
    n, edges = instance.n, instance.edges
    x_coeff = {Driver.X: 1 - s, Driver.XX: 0.0, Driver.XPLUS_SXX: -(1 - s)}[driver]
    xx_coeff = {Driver.X: 0.0, Driver.XX: 1 - s, Driver.XPLUS_SXX: s * (1 - s)}[driver]
    # sign of the spin sum (sum J s s + sum h s) in the slice Hamiltonian;
    # spin s_j = -Z_j, so field terms become -h Z
    ising_sign = 1.0 if driver is Driver.X else -1.0
    out: list[GateOp] = []
    if x_coeff != 0:
        out += [GateOp("RX", (j,), 2 * x_coeff * dt) for j in range(n)]
    if xx_coeff != 0:
        out += [GateOp("RXX", e, 2 * xx_coeff * dt) for e in edges]
    for e, coupling in zip(edges, instance.couplings):
        c = ising_sign * s * coupling
        if c != 0:
            out.append(GateOp("RZZ", e, 2 * c * dt))
    for j, h in enumerate(instance.fields):
        c = -ising_sign * s * h
        if c != 0:
            out.append(GateOp("RZ", (j,), 2 * c * dt))
    return out


def build_baseline_circuit(driver, instance: RfimInstance, p: int = 100,
                           dt: float = 1.0) -> CircuitPlan:
    """Trotterized annealing circuit for the X, XX or X+sXX driver.

    Starts from ``|+...+>`` and appends one Trotter slice per ``s_k = k/p``,
    ``k = 0..p-1``: driver terms first, then ZZ terms in edge order, then Z
    terms by node.
    """
    driver = Driver.parse(driver)
    if driver not in BASELINES:
        raise InvalidParameterError(f"{driver.value} is not a baseline driver")
    if not dt > 0:
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    params = ScheduleParams(p=p)
    gates = [GateOp("HadamardAll")]
    for k in range(p):
        gates += _baseline_slice(driver, instance, interpolation(k, p), dt)
    prov = {"instance": instance.content_hash(), "dt": dt}
    return CircuitPlan(instance.n, tuple(gates), driver, params, prov)


def build_circuit(driver, instance: RfimInstance, params: ScheduleParams = ScheduleParams(),
                  dt: float = 1.0, encode_per_slice: bool = False) -> CircuitPlan:
    driver = Driver.parse(driver)
    if driver is Driver.RFOX:
        return build_rfox_circuit(instance, params, encode_per_slice)
    return build_baseline_circuit(driver, instance, params.p, dt)


_APPLY = {
    "Phase": sv.apply_phase,
    "RX": sv.apply_rx,
    "RZ": sv.apply_rz,
    "RXX": sv.apply_rxx,
    "RZX": sv.apply_rzx,
    "RZZ": sv.apply_rzz,
}


def run(plan: CircuitPlan, max_qubits: int = sv.MAX_QUBITS) -> sv.Statevector:
    """Apply the plan's gates, in order, to ``|0...0>``."""
    state = sv.init_zero(plan.n, max_qubits)
    for g in plan.gates:
        if g.kind == "HadamardAll":
            sv.apply_hadamard_all(state)
        else:
            _APPLY[g.kind](state, *g.qubits, g.angle)
    return state
