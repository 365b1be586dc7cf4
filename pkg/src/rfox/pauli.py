"""Weighted Pauli-string sums and the Hamiltonians built from an RFIM instance.

A Pauli string is a plain ``str`` over ``IXYZ`` whose character ``q`` acts
on qubit ``q``; qubit 0 is the least-significant bit of a basis index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .errors import InvalidParameterError, ResourceLimitError
from .instances import RfimInstance
from .schedule import Driver, ScheduleParams, interpolation, rfox_angles

DENSE_LIMIT = 14
SPARSE_LIMIT = 22
_LETTERS = frozenset("IXYZ")


def letters(n: int, ops: dict[int, str]) -> str:
    """Pauli string on ``n`` qubits with ``ops[q]`` on qubit ``q`` and I elsewhere."""
    out = ["I"] * n
    for q, op in ops.items():
        out[q] = op
    return "".join(out)


@dataclass(frozen=True)
class PauliSum:
    """Real-weighted sum of Pauli strings, always held in canonical form.

    Canonical form merges equal strings, drops exact zeros and sorts terms by
    their letters, so two equal operators compare equal.
    """

    n: int
    terms: tuple[tuple[float, str], ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError(f"qubit count must be >= 1, got {self.n}")
        merged: dict[str, float] = {}
        for coeff, word in self.terms:
            if len(word) != self.n or set(word) - _LETTERS:
                raise InvalidParameterError(f"bad Pauli string {word!r} for n={self.n}")
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise InvalidParameterError(f"non-finite coefficient on {word}")
            merged[word] = merged.get(word, 0.0) + coeff
        canon = tuple((c, w) for w, c in sorted(merged.items()) if c != 0.0)
        object.__setattr__(self, "terms", canon)

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[tuple[float, str]]) -> "PauliSum":
        return cls(n, tuple(terms))

    def canonicalize(self) -> "PauliSum":
        # Construction already canonicalizes; kept as an explicit, idempotent step.
        return PauliSum(self.n, self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if self.n != other.n:
            raise InvalidParameterError("cannot add Pauli sums on different qubit counts")
        return PauliSum(self.n, self.terms + other.terms)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-other)

    def __mul__(self, scalar: float) -> "PauliSum":
        return PauliSum(self.n, tuple((scalar * c, w) for c, w in self.terms))

    __rmul__ = __mul__

    def __neg__(self) -> "PauliSum":
        return self * -1.0

    def __len__(self) -> int:
        return len(self.terms)

    def coefficient(self, word: str) -> float:
        return dict((w, c) for c, w in self.terms).get(word, 0.0)

    def is_diagonal(self) -> bool:
        return all(set(w) <= {"I", "Z"} for _, w in self.terms)

    def dumps(self) -> str:
        """One ``coefficient<TAB>letters`` line per term, canonical order."""
        return "".join(f"{c!r}\t{w}\n" for c, w in self.terms)

    @classmethod
    def loads(cls, text: str) -> "PauliSum":
        rows = [line.split("\t") for line in text.splitlines() if line.strip()]
        if not rows:
            raise InvalidParameterError("empty Pauli dump")
        return cls(len(rows[0][1]), tuple((float(c), w) for c, w in rows))


def _masks(word: str) -> tuple[int, int, int]:
    flip = zmask = 0
    n_y = 0
    for q, op in enumerate(word):
        if op in "XY":
            flip |= 1 << q
        if op in "ZY":
            zmask |= 1 << q
        if op == "Y":
            n_y += 1
    return flip, zmask, n_y


def _term_action(word: str, cols: np.ndarray):
    """Rows and values of ``P|col>`` for every basis column."""
    flip, zmask, n_y = _masks(word)
    parity = np.bitwise_count(cols & zmask) & 1
    vals = (1.0 - 2.0 * parity) * (1j ** n_y)
    return cols ^ flip, vals


def to_matrix(h: PauliSum, sparse: bool | None = None, dense_limit: int = DENSE_LIMIT):
    """Matrix of ``h`` in the computational basis.

    Dense ``ndarray`` up to ``dense_limit`` qubits, CSR matrix above it (or
    when ``sparse=True``).  The dtype is real when no term carries an odd
    number of Y letters.
    """
    n = h.n
    if sparse is None:
        sparse = n > dense_limit
    if not sparse and n > dense_limit:
        raise ResourceLimitError(f"dense matrix for n={n} exceeds limit {dense_limit}")
    if n > SPARSE_LIMIT:
        raise ResourceLimitError(f"matrix for n={n} exceeds limit {SPARSE_LIMIT}")
    dim = 1 << n
    real = all(w.count("Y") % 2 == 0 for _, w in h.terms)
    dtype = np.float64 if real else np.complex128
    cols = np.arange(dim, dtype=np.int64)
    if not sparse:
        mat = np.zeros((dim, dim), dtype=dtype)
        for coeff, word in sorted(h.terms, key=lambda t: _accumulation_key(t[1])):
            rows, vals = _term_action(word, cols)
            mat[rows, cols] += coeff * (vals.real if real else vals)
        return mat
    all_rows, all_cols, all_vals = [], [], []
    for coeff, word in h.terms:
        rows, vals = _term_action(word, cols)
        all_rows.append(rows)
        all_cols.append(cols)
        all_vals.append(coeff * (vals.real if real else vals))
    if not all_rows:
        return sp.csr_matrix((dim, dim), dtype=dtype)
    return sp.coo_matrix(
        (np.concatenate(all_vals), (np.concatenate(all_rows), np.concatenate(all_cols))),
        shape=(dim, dim), dtype=dtype).tocsr()


def _accumulation_key(word: str):
    # many-body terms first, then by qubit positions: for an Ising operator
    # this is "edges in sorted order, then nodes ascending"
    support = tuple(q for q, op in enumerate(word) if op != "I")
    return -len(support), support


def diagonal(h: PauliSum) -> np.ndarray:
    """Diagonal of a Z-only operator without building the matrix.

    Terms are accumulated edges-first, then nodes, matching the summation
    order of :func:`rfox.instances.classical_energy`.
    """
    if not h.is_diagonal():
        raise InvalidParameterError("operator has off-diagonal (X/Y) terms")
    if h.n > 26:
        raise ResourceLimitError(f"diagonal for n={h.n} too large")
    cols = np.arange(1 << h.n, dtype=np.int64)
    out = np.zeros(1 << h.n)
    for coeff, word in sorted(h.terms, key=lambda t: _accumulation_key(t[1])):
        _, zmask, _ = _masks(word)
        out += coeff * (1.0 - 2.0 * (np.bitwise_count(cols & zmask) & 1))
    return out


# -- field encoding ---------------------------------------------------------

def phase_map(h: float, h_max: float) -> float:
    """Field value to phase in ``[0, pi]``: ``pi (h/h_max + 1) / 2``."""
    if not h_max > 0:
        raise InvalidParameterError(f"h_max must be positive, got {h_max}")
    if abs(h) > h_max:
        raise InvalidParameterError(f"|h|={abs(h)} exceeds h_max={h_max}")
    return math.pi * (h / h_max + 1.0) / 2.0


def field_phases(instance: RfimInstance) -> list[float]:
    """Encoding phase of every node, normalized by the largest |h|.

    An all-zero field vector maps every phase to pi/2 (the h -> 0 limit).
    """
    h_max = max(abs(h) for h in instance.fields)
    if h_max == 0.0:
        return [math.pi / 2] * instance.n
    return [phase_map(h, h_max) for h in instance.fields]


# -- operator building blocks -----------------------------------------------

def sum_x(n: int, weights=None) -> PauliSum:
    weights = [1.0] * n if weights is None else weights
    return PauliSum(n, tuple((w, letters(n, {j: "X"})) for j, w in enumerate(weights)))


def sum_z(n: int, weights) -> PauliSum:
    return PauliSum(n, tuple((w, letters(n, {j: "Z"})) for j, w in enumerate(weights)))


def sum_two_body(n: int, edges, first: str, second: str, weights=None) -> PauliSum:
    """``sum_e w_e P_u Q_v`` with ``P`` on the lower endpoint ``u``."""
    weights = [1.0] * len(edges) if weights is None else weights
    return PauliSum(n, tuple((w, letters(n, {u: first, v: second}))
                             for (u, v), w in zip(edges, weights)))


def build_hb(instance: RfimInstance) -> PauliSum:
    """Field-encoding Hamiltonian ``sum_j phi_j X_j``."""
    return sum_x(instance.n, field_phases(instance))


def _ising_terms(instance: RfimInstance) -> PauliSum:
    """Spin-operator sum ``sum J s_u s_v + sum h_j s_j`` written on qubits.

    The spin operator of qubit ``j`` is ``-Z_j`` (bit 1 is spin up), so the
    field terms carry ``-h_j Z_j`` and the couplings ``J Z_u Z_v``.
    """
    n = instance.n
    return (sum_two_body(n, instance.edges, "Z", "Z", instance.couplings)
            + sum_z(n, [-h for h in instance.fields]))


def build_problem_hamiltonian(instance: RfimInstance) -> PauliSum:
    """Diagonal cost operator whose entry at bitstring ``x`` is the RFIM energy of ``x``.

    In qubit letters this is ``-sum J Z_u Z_v + sum h_j Z_j``.
    """
    return -_ising_terms(instance)


def build_slice_hamiltonian(driver, instance: RfimInstance, k: int,
                            params: ScheduleParams) -> PauliSum:
    """Instantaneous Hamiltonian of slice ``k`` for one of the four drivers.

    Baseline problem parts are written with spin operators (see
    :func:`_ising_terms`); RFOX uses gate-level Z in its ZX kick.
    """
    driver = Driver.parse(driver)
    n, edges = instance.n, instance.edges
    if driver is Driver.RFOX:
        theta, phi = rfox_angles(k, params.p, params.n_cycles(n), params.delta)
        return (build_hb(instance)
                + theta * sum_two_body(n, edges, "X", "X")
                + phi * sum_two_body(n, edges, "Z", "X"))
    s = interpolation(k, params.p)
    ising = _ising_terms(instance)
    if driver is Driver.X:
        return (1 - s) * sum_x(n) + s * ising
    if driver is Driver.XX:
        return (1 - s) * sum_two_body(n, edges, "X", "X") - s * ising
    return (-(1 - s) * sum_x(n) + s * (1 - s) * sum_two_body(n, edges, "X", "X")
            - s * ising)
