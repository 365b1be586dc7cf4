"""Brute-force ground truth and the evaluation metrics computed from output distributions."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Mapping

import numpy as np

from .errors import InvalidParameterError, ResourceLimitError
from .instances import RfimInstance, bitstring_from_index, classical_energy, energy_table
from .statevector import ShotDistribution

MAX_BRUTE_FORCE = 24
NORMALIZATION_TOL = 1e-9

METRICS_COLUMNS = (
    "instance_id", "driver", "p", "delta", "shots", "winner", "winner_energy", "e_min",
    "cost_diff", "eev", "hamming", "f_overlap", "d_js", "avg_hamming", "wall_time_ms",
)


@dataclass(frozen=True)
class GroundTruth:
    x_min: str
    e_min: float
    degeneracy: int
    energies: np.ndarray | None = None  # indexed by basis-state index


def brute_force_ground(instance: RfimInstance, keep_table: bool = True) -> GroundTruth:
    """Exhaustive minimum over all ``2**n`` spin configurations.

    Among degenerate minima the lexicographically smallest bitstring wins.
    """
    n = instance.n
    if n > MAX_BRUTE_FORCE:
        raise ResourceLimitError(f"brute force limited to n <= {MAX_BRUTE_FORCE}, got {n}")
    table = energy_table(instance)
    e_min = float(table.min())
    minima = [bitstring_from_index(int(i), n) for i in np.flatnonzero(table == e_min)]
    return GroundTruth(min(minima), e_min, len(minima), table if keep_table else None)


def winner(dist: ShotDistribution) -> str:
    """Most frequent bitstring; ties go to the lexicographically smallest."""
    if not dist.counts:
        raise InvalidParameterError("empty distribution has no winner")
    top = max(dist.counts.values())
    return min(x for x, c in dist.counts.items() if c == top)


def _energy(instance: RfimInstance, bits: str, gt: GroundTruth | None) -> float:
    if gt is not None and gt.energies is not None:
        return float(gt.energies[int(bits[::-1], 2)])
    return classical_energy(instance, bits)


def cost_difference(instance: RfimInstance, dist: ShotDistribution, gt: GroundTruth) -> float:
    return classical_energy(instance, winner(dist)) - gt.e_min


def eev(instance: RfimInstance, dist: ShotDistribution, gt: GroundTruth | None = None) -> float:
    """Expected energy ``sum_x p_x E(x)`` under the measured frequencies."""
    probs = dist.probabilities()
    return math.fsum(p * _energy(instance, x, gt) for x, p in sorted(probs.items()))


def hamming(a: str, b: str) -> int:
    if len(a) != len(b):
        raise InvalidParameterError(f"length mismatch: {len(a)} vs {len(b)}")
    return sum(x != y for x, y in zip(a, b))


def string_overlap_fidelity(winner_bits: str, x_min: str, n: int | None = None) -> float:
    """``1 - d_H(winner, ground) / n``."""
    n = len(x_min) if n is None else n
    return 1.0 - hamming(winner_bits, x_min) / n


def _normalized(dist, name: str) -> dict[str, float]:
    if isinstance(dist, ShotDistribution):
        return dist.probabilities()
    probs = {k: float(v) for k, v in dist.items()}
    if any(v < 0 for v in probs.values()):
        raise InvalidParameterError(f"{name} has negative weights")
    if abs(math.fsum(probs.values()) - 1.0) > NORMALIZATION_TOL:
        raise InvalidParameterError(f"{name} does not sum to 1")
    return probs


def js_distance(p: ShotDistribution | Mapping[str, float],
                q: ShotDistribution | Mapping[str, float]) -> float:
    """Jensen-Shannon divergence with base-2 logarithms (range [0, 1]).

    Shot distributions are normalized by their totals; plain mappings must
    already sum to one.  Outcomes missing from one side count as zero.
    """
    p, q = _normalized(p, "p"), _normalized(q, "q")
    total = []
    for x in sorted(set(p) | set(q)):
        px, qx = p.get(x, 0.0), q.get(x, 0.0)
        m = 0.5 * (px + qx)
        if px > 0:
            total.append(0.5 * px * math.log2(px / m))
        if qx > 0:
            total.append(0.5 * qx * math.log2(qx / m))
    return min(max(math.fsum(total), 0.0), 1.0)


def avg_hamming(dist: ShotDistribution, x_min: str) -> float:
    """``sum_x p_x d_H(x, x_min)``."""
    probs = dist.probabilities()
    return math.fsum(p * hamming(x, x_min) for x, p in sorted(probs.items()))


@dataclass(frozen=True)
class MetricsReport:
    winner: str
    winner_energy: float
    e_min: float
    cost_difference: float
    eev: float
    hamming_to_gs: int
    f_overlap: float
    d_js: float
    avg_hamming: float

    def as_dict(self) -> dict:
        return asdict(self)


def evaluate(instance: RfimInstance, dist: ShotDistribution, gt: GroundTruth,
             reference: ShotDistribution | Mapping[str, float] | None = None) -> MetricsReport:
    """All metrics for one output distribution.

    ``reference`` is the distribution the JS divergence compares against
    (for example the noiseless simulation when ``dist`` is a finite-shot or
    hardware record); without one ``d_js`` is 0 against itself.
    """
    w = winner(dist)
    w_energy = classical_energy(instance, w)
    ham = hamming(w, gt.x_min)
    return MetricsReport(
        winner=w,
        winner_energy=w_energy,
        e_min=gt.e_min,
        cost_difference=w_energy - gt.e_min,
        eev=eev(instance, dist, gt),
        hamming_to_gs=ham,
        f_overlap=string_overlap_fidelity(w, gt.x_min, instance.n),
        d_js=js_distance(dist, reference if reference is not None else dist),
        avg_hamming=avg_hamming(dist, gt.x_min),
    )
