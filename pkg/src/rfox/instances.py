"""Random-field Ising instances: graph generators, field assignment, energies, file I/O.

Conventions used across the package:

* bitstrings are written with character ``i`` holding qubit/spin ``i``;
* bit ``1`` maps to spin ``+1`` and bit ``0`` to spin ``-1``, so the spin
  is the eigenvalue of ``-Z`` on that qubit.  Under this map the field
  encoding (phase near pi for strongly positive h, hence bit 1) favours
  spins aligned with their fields;
* basis-state index of a bitstring is ``sum(bit_i << i)`` (qubit 0 is the LSB).

All randomness goes through ``numpy.random.Generator`` with the PCG64 bit
generator, seeded explicitly, so golden outputs are reproducible.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

import numpy as np

from .errors import InvalidParameterError, SchemaError

SCHEMA_VERSION = 1


def make_rng(seed: int) -> np.random.Generator:
    """The project-wide RNG: PCG64 seeded from a non-negative integer."""
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    Edges are stored as ``(u, v)`` with ``u < v``, sorted and duplicate-free.
    ``provenance`` records how the graph was generated and takes no part in
    equality.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    provenance: dict[str, Any] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n < 2:
            raise InvalidParameterError(f"graph needs n >= 2, got {self.n}")
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        for u, v in edges:
            if not (0 <= u < v < self.n):
                raise InvalidParameterError(f"bad edge ({u}, {v}) for n={self.n}")
        if list(edges) != sorted(set(edges)):
            raise InvalidParameterError("edges must be sorted and duplicate-free")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], provenance=None) -> "Graph":
        """Build a graph from arbitrary unordered pairs (normalized, deduplicated)."""
        norm = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise InvalidParameterError(f"self-loop on vertex {u}")
            norm.add((min(u, v), max(u, v)))
        return cls(n, tuple(sorted(norm)), provenance)

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def neighbors(self, i: int) -> set[int]:
        return {v if u == i else u for u, v in self.edges if i in (u, v)}


@dataclass(frozen=True)
class SpinConfig:
    """A classical spin configuration given by its bitstring."""

    bits: str

    def __post_init__(self):
        if not self.bits or set(self.bits) - {"0", "1"}:
            raise InvalidParameterError(f"not a bitstring: {self.bits!r}")

    @property
    def spins(self) -> tuple[int, ...]:
        return tuple(spin_of_bit(b) for b in self.bits)

    @property
    def index(self) -> int:
        return index_from_bitstring(self.bits)


@dataclass(frozen=True)
class RfimInstance:
    """Graph plus per-edge couplings ``J`` and per-node fields ``h``."""

    graph: Graph
    couplings: tuple[float, ...]
    fields: tuple[float, ...]
    field_range: float
    generator: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "couplings", tuple(float(j) for j in self.couplings))
        object.__setattr__(self, "fields", tuple(float(h) for h in self.fields))
        if len(self.fields) != self.graph.n:
            raise InvalidParameterError(
                f"expected {self.graph.n} fields, got {len(self.fields)}")
        if len(self.couplings) != len(self.graph.edges):
            raise InvalidParameterError(
                f"expected {len(self.graph.edges)} couplings, got {len(self.couplings)}")
        if not (self.field_range > 0 and math.isfinite(self.field_range)):
            raise InvalidParameterError(f"field_range must be positive, got {self.field_range}")
        if any(abs(h) > self.field_range for h in self.fields):
            raise InvalidParameterError("a field lies outside [-field_range, field_range]")
        if not all(math.isfinite(x) for x in self.couplings + self.fields):
            raise InvalidParameterError("couplings and fields must be finite")

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return self.graph.edges

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "edges": [list(e) for e in self.edges],
            "couplings": list(self.couplings),
            "fields": list(self.fields),
            "field_range": self.field_range,
            "generator": self.generator,
        }

    def content_hash(self) -> str:
        """Short SHA-256 digest of the canonical JSON form (provenance tag)."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def spin_of_bit(bit: str) -> int:
    """The package-wide bit-to-spin map: ``"1" -> +1``, ``"0" -> -1``."""
    return 1 if bit == "1" else -1


def bitstring_from_index(index: int, n: int) -> str:
    return "".join("1" if (index >> i) & 1 else "0" for i in range(n))


def index_from_bitstring(bits: str) -> int:
    return sum(1 << i for i, b in enumerate(bits) if b == "1")


def gen_erdos_renyi(n: int, p_edge: float, seed: int) -> Graph:
    """G(n, p): every pair ``u < v``, in lexicographic order, kept with probability ``p_edge``."""
    if n < 2:
        raise InvalidParameterError(f"n must be >= 2, got {n}")
    if not 0.0 <= p_edge <= 1.0:
        raise InvalidParameterError(f"p_edge must lie in [0, 1], got {p_edge}")
    rng = make_rng(seed)
    pairs = list(combinations(range(n), 2))
    draws = rng.random(len(pairs))
    edges = tuple(pair for pair, r in zip(pairs, draws) if r < p_edge)
    prov = {"model": "erdos_renyi", "params": {"n": n, "p_edge": p_edge}, "seed": int(seed)}
    return Graph(n, edges, prov)


def gen_watts_strogatz(n: int, k: int, p_rewire: float, seed: int) -> Graph:
    """Watts-Strogatz small-world graph.

    Starts from the ring lattice where vertex ``i`` links to ``i+1 .. i+k/2``
    (mod n).  Clockwise edges are visited offset by offset (all ``i`` for
    ``r=1``, then ``r=2``, ...); each is rewired with probability
    ``p_rewire`` to a uniformly chosen vertex that is neither ``i`` nor a
    current neighbour of ``i``.  If no such vertex exists the edge stays.
    """
    if k % 2 or not 2 <= k < n:
        raise InvalidParameterError(f"k must be even with 2 <= k < n, got k={k}, n={n}")
    if not 0.0 <= p_rewire <= 1.0:
        raise InvalidParameterError(f"p_rewire must lie in [0, 1], got {p_rewire}")
    rng = make_rng(seed)
    adj: list[set[int]] = [set() for _ in range(n)]
    for i in range(n):
        for r in range(1, k // 2 + 1):
            j = (i + r) % n
            adj[i].add(j)
            adj[j].add(i)
    for r in range(1, k // 2 + 1):
        for i in range(n):
            j = (i + r) % n
            if rng.random() >= p_rewire:
                continue
            candidates = sorted(set(range(n)) - adj[i] - {i})
            if not candidates:
                continue
            w = candidates[int(rng.integers(len(candidates)))]
            adj[i].discard(j)
            adj[j].discard(i)
            adj[i].add(w)
            adj[w].add(i)
    edges = {(min(i, j), max(i, j)) for i in range(n) for j in adj[i]}
    prov = {"model": "watts_strogatz",
            "params": {"n": n, "k": k, "p_rewire": p_rewire}, "seed": int(seed)}
    return Graph(n, tuple(sorted(edges)), prov)


def assign_fields(graph: Graph, field_range: float, seed: int) -> RfimInstance:
    """Attach i.i.d. uniform fields on ``[-field_range, field_range]`` and unit couplings."""
    if not field_range > 0:
        raise InvalidParameterError(f"field_range must be positive, got {field_range}")
    rng = make_rng(seed)
    h = rng.uniform(-field_range, field_range, size=graph.n)
    prov = dict(graph.provenance or {"model": "custom", "params": {"n": graph.n}, "seed": None})
    prov["params"] = dict(prov.get("params", {}), field_range=float(field_range),
                          field_seed=int(seed))
    return RfimInstance(graph, (1.0,) * len(graph.edges), tuple(h.tolist()),
                        float(field_range), prov)


def _as_bits(config: Union[SpinConfig, str, Sequence[int]]) -> str:
    if isinstance(config, SpinConfig):
        return config.bits
    if isinstance(config, str):
        return SpinConfig(config).bits
    return SpinConfig("".join(str(int(b)) for b in config)).bits


def classical_energy(instance: RfimInstance, config) -> float:
    """RFIM energy ``-sum J_uv s_u s_v - sum h_i s_i`` of one configuration."""
    bits = _as_bits(config)
    if len(bits) != instance.n:
        raise InvalidParameterError(
            f"configuration has {len(bits)} spins, instance has {instance.n}")
    s = [spin_of_bit(b) for b in bits]
    e = 0.0
    for (u, v), j in zip(instance.edges, instance.couplings):
        e -= j * s[u] * s[v]
    for i, h in enumerate(instance.fields):
        e -= h * s[i]
    return e


def energy_table(instance: RfimInstance) -> np.ndarray:
    """Classical energy of every configuration, indexed by basis-state index.

    Vectorized version of :func:`classical_energy`; used by the brute-force
    oracle.  Terms are accumulated in the same order as the scalar version
    (edges, then nodes) so both agree bit for bit.  Memory is ``O(n 2^n)``.
    """
    n = instance.n
    idx = np.arange(1 << n, dtype=np.int64)
    spins = 2 * ((idx[:, None] >> np.arange(n)) & 1).astype(np.int8) - 1
    e = np.zeros(1 << n)
    for (u, v), j in zip(instance.edges, instance.couplings):
        e -= j * (spins[:, u] * spins[:, v])
    for i, h in enumerate(instance.fields):
        e -= h * spins[:, i]
    return e


def instance_from_dict(data: dict[str, Any]) -> RfimInstance:
    required = ("schema_version", "n", "edges", "couplings", "fields", "field_range")
    missing = [key for key in required if key not in data]
    if missing:
        raise SchemaError(f"instance file missing keys: {', '.join(missing)}")
    if data["schema_version"] != SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported schema_version {data['schema_version']!r}, expected {SCHEMA_VERSION}")
    try:
        edges = [tuple(e) for e in data["edges"]]
        if any(len(e) != 2 for e in edges):
            raise SchemaError("every edge must be a pair [u, v]")
        if len(set(edges)) != len(edges):
            raise SchemaError("duplicate edge in instance file")
        graph = Graph(int(data["n"]), tuple(edges))
        return RfimInstance(graph, tuple(data["couplings"]), tuple(data["fields"]),
                            float(data["field_range"]), dict(data.get("generator") or {}))
    except SchemaError:
        raise
    except (InvalidParameterError, TypeError, ValueError) as exc:
        raise SchemaError(f"invalid instance: {exc}") from exc


def save_instance(instance: RfimInstance, path) -> None:
    Path(path).write_text(json.dumps(instance.to_dict(), indent=2) + "\n")


def load_instance(path) -> RfimInstance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: top level must be an object")
    return instance_from_dict(data)
