"""Per-slice spectral gaps and a numerical check of the Floquet-Magnus effective Hamiltonian."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sl
import scipy.sparse.linalg as spl
from scipy.optimize import minimize_scalar

from .errors import InvalidParameterError, NumericalError, ResourceLimitError
from .instances import RfimInstance
from .pauli import DENSE_LIMIT, PauliSum, build_hb, build_slice_hamiltonian, letters, \
    sum_two_body, to_matrix
from .schedule import Driver, ScheduleParams

GAP_CSV_HEADER = ("k", "s_or_t", "E0", "E1", "gap")
GAP_SCHEMA = "# rfox-gap-profile v1"
SPARSE_RESIDUAL_TOL = 1e-8


class IntegrationWarning(RuntimeWarning):
    """The period propagator changed by more than the tolerance under step halving."""


def lowest_two_eigs(h: PauliSum, dense_limit: int = DENSE_LIMIT) -> tuple[float, float]:
    """Two smallest eigenvalues ``E0 <= E1`` of a Hermitian Pauli sum.

    Dense LAPACK up to ``dense_limit`` qubits, ARPACK Lanczos above it.
    Degenerate ground spaces give ``E0 == E1``.
    """
    if h.n <= dense_limit:
        mat = to_matrix(h, sparse=False, dense_limit=dense_limit)
        vals = sl.eigh(mat, eigvals_only=True, subset_by_index=[0, 1], driver="evr")
        return float(vals[0]), float(vals[1])
    mat = to_matrix(h, sparse=True)
    try:
        vals, vecs = spl.eigsh(mat, k=3, which="SA", tol=1e-12, ncv=40, maxiter=20000)
    except spl.ArpackNoConvergence as exc:
        raise NumericalError(f"Lanczos did not converge: {exc}") from exc
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    scale = max(1.0, float(np.abs(vals).max()))
    resid = np.linalg.norm(mat @ vecs - vecs * vals, axis=0) / scale
    if resid[:2].max() > SPARSE_RESIDUAL_TOL:
        raise NumericalError(f"Lanczos relative residual {resid[:2].max():.3e} above "
                             f"{SPARSE_RESIDUAL_TOL:g}")
    return float(vals[0]), float(vals[1])


@dataclass
class GapProfile:
    driver: Driver
    records: list[tuple[int, float, float, float, float]]  # (k, s, E0, E1, gap)
    params: ScheduleParams
    delta_min: float = field(init=False)
    argmin_k: int = field(init=False)

    def __post_init__(self):
        if not self.records:
            raise InvalidParameterError("gap profile needs at least one slice")
        gaps = [r[4] for r in self.records]
        i = int(np.argmin(gaps))
        self.delta_min = gaps[i]
        self.argmin_k = self.records[i][0]

    @property
    def gaps(self) -> np.ndarray:
        return np.array([r[4] for r in self.records])

    def spread(self) -> float:
        g = self.gaps
        return float(g.max() - g.min())

    def to_csv(self, path, instance_id: str | None = None) -> None:
        tag = f" instance={instance_id}" if instance_id else ""
        with open(path, "w", newline="") as fh:
            fh.write(f"{GAP_SCHEMA} driver={self.driver.value} p={self.params.p} "
                     f"delta={self.params.delta!r}{tag}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(GAP_CSV_HEADER)
            for k, s, e0, e1, gap in self.records:
                w.writerow([k, repr(s), repr(e0), repr(e1), repr(gap)])


def gap_profile(driver, instance: RfimInstance, params: ScheduleParams = ScheduleParams(),
                dense_limit: int = DENSE_LIMIT) -> GapProfile:
    """Diagonalize every slice Hamiltonian ``k = 0..p-1`` of one driver."""
    driver = Driver.parse(driver)
    records = []
    for k in range(params.p):
        h = build_slice_hamiltonian(driver, instance, k, params)
        try:
            e0, e1 = lowest_two_eigs(h, dense_limit)
        except NumericalError as exc:
            raise NumericalError(f"slice k={k} ({driver.value}): {exc}") from exc
        records.append((k, k / params.p, e0, e1, max(e1 - e0, 0.0)))
    return GapProfile(driver, records, params)


def runtime_estimate(delta_min: float) -> float:
    """Adiabatic runtime heuristic ``delta_min**-2``; a closed gap gives ``inf``."""
    if delta_min < 0 or math.isnan(delta_min):
        raise InvalidParameterError(f"gap must be non-negative, got {delta_min}")
    if delta_min == 0:
        return math.inf
    return delta_min ** -2


# -- Floquet-Magnus check ---------------------------------------------------

_P2 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def exchange_commutator() -> tuple[np.ndarray, np.ndarray]:
    """``[X(x)X, Z(x)X]`` and ``-2i Y(x)I`` as explicit 4x4 Kronecker products."""
    xx = np.kron(_P2["X"], _P2["X"])
    zx = np.kron(_P2["Z"], _P2["X"])
    return xx @ zx - zx @ xx, -2j * np.kron(_P2["Y"], _P2["I"])


@dataclass
class MagnusReport:
    delta: float
    omega: float
    period: float
    n_steps: int
    err1: float            # ||U_period - exp(-i T (H_B + sum XX))||
    err2: float            # same, with the fitted Y correction added
    y_coeff: float         # best c in c * sum_{(u,v)} Y_u
    y_coeff_even: float    # (c(delta) + c(-delta)) / 2: the part even in delta
    step_change: float     # ||U(n_steps) - U(2 n_steps)||
    commutator_exact: bool


def _period_propagator(h_static, a, b, delta, omega, period, n_steps) -> np.ndarray:
    """Exponential-midpoint product for ``H_static - delta cos(wt) A + delta sin(wt) B``."""
    dt = period / n_steps
    u = np.eye(h_static.shape[0], dtype=complex)
    for m in range(n_steps):
        t = (m + 0.5) * dt
        h = h_static - delta * math.cos(omega * t) * a + delta * math.sin(omega * t) * b
        w, v = np.linalg.eigh(h)
        u = (v * np.exp(-1j * dt * w)) @ v.conj().T @ u
    return u


def _fit_y(u, h0, ysum, period, err1) -> tuple[float, float]:
    """Real ``c`` minimizing ``||u - exp(-i T (h0 + c ysum))||_2``."""
    def err(c):
        return np.linalg.norm(u - sl.expm(-1j * period * (h0 + c * ysum)), 2)

    # beyond this |c| the correction alone costs more than err1 twice over
    bound = 4.0 * err1 / (period * np.linalg.norm(ysum, 2)) + 1e-15
    res = minimize_scalar(err, bounds=(-bound, bound), method="bounded",
                          options={"xatol": bound * 1e-10, "maxiter": 500})
    c = float(res.x)
    best = float(res.fun)
    if err(0.0) < best:
        c, best = 0.0, float(err(0.0))
    return c, best


def magnus_check(instance: RfimInstance, delta: float, n_steps: int = 2000,
                 cycles: int | None = None, tol: float = 1e-9) -> MagnusReport:
    """Compare the exact one-period propagator with the Magnus effective Hamiltonian.

    The drive frequency is ``omega = 2 pi N`` (``N`` defaults to the qubit
    count), so one period is ``T = 1/N`` in schedule time.
    """
    n = instance.n
    if n > 6:
        raise ResourceLimitError(f"magnus_check supports n <= 6, got {n}")
    if n_steps < 1000:
        raise InvalidParameterError(f"need n_steps >= 1000 substeps, got {n_steps}")
    n_cycles = n if cycles is None else cycles
    if n_cycles < 1:
        raise InvalidParameterError("drive needs at least one cycle")
    omega = 2 * math.pi * n_cycles
    period = 2 * math.pi / omega

    hb = to_matrix(build_hb(instance), sparse=False).astype(complex)
    a = to_matrix(sum_two_body(n, instance.edges, "X", "X"), sparse=False).astype(complex)
    b = to_matrix(sum_two_body(n, instance.edges, "Z", "X"), sparse=False).astype(complex)
    ysum = to_matrix(PauliSum(n, tuple((1.0, letters(n, {u: "Y"})) for u, _ in instance.edges)),
                     sparse=False).astype(complex)
    h0 = hb + a
    u_static = sl.expm(-1j * period * h0)

    def fitted(d, steps):
        u = _period_propagator(h0, a, b, d, omega, period, steps)
        e1 = float(np.linalg.norm(u - u_static, 2))
        return u, e1

    u, err1 = fitted(delta, n_steps)
    u_fine = _period_propagator(h0, a, b, delta, omega, period, 2 * n_steps)
    step_change = float(np.linalg.norm(u - u_fine, 2))
    if step_change > tol:
        warnings.warn(f"period propagator moved by {step_change:.2e} under step halving "
                      f"(tolerance {tol:g}); increase n_steps", IntegrationWarning, stacklevel=2)
    c, err2 = _fit_y(u, h0, ysum, period, err1)
    u_neg, err1_neg = fitted(-delta, n_steps)
    c_neg, _ = _fit_y(u_neg, h0, ysum, period, err1_neg)

    lhs, rhs = exchange_commutator()
    return MagnusReport(delta=delta, omega=omega, period=period, n_steps=n_steps,
                        err1=err1, err2=err2, y_coeff=c, y_coeff_even=0.5 * (c + c_neg),
                        step_change=step_change, commutator_exact=bool(np.array_equal(lhs, rhs)))
