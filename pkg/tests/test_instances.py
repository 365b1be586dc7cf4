import json
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rfox.errors import InvalidParameterError, SchemaError
from rfox.instances import (Graph, SpinConfig, assign_fields, bitstring_from_index,
                            classical_energy, energy_table, gen_erdos_renyi,
                            gen_watts_strogatz, index_from_bitstring, load_instance,
                            save_instance, spin_of_bit)
from conftest import make_instance

# Frozen generator outputs (PCG64).
ER_7_08_SEED42 = ((0, 1), (0, 2), (0, 4), (0, 5), (1, 2), (1, 3), (1, 4), (1, 5), (1, 6),
                  (2, 4), (2, 6), (3, 4), (3, 5), (3, 6), (4, 6), (5, 6))
WS_9_6_07_SEED7 = ((0, 1), (0, 2), (0, 5), (0, 8), (1, 2), (1, 3), (1, 4), (1, 5), (1, 6),
                   (2, 3), (2, 4), (2, 5), (2, 6), (2, 7), (3, 5), (3, 6), (3, 7), (3, 8),
                   (4, 5), (4, 6), (4, 7), (4, 8), (5, 6), (5, 8), (6, 7), (6, 8), (7, 8))


class TestGenerators:
    def test_er_complete_and_empty(self):
        assert len(gen_erdos_renyi(4, 1.0, 3).edges) == 6
        assert gen_erdos_renyi(4, 0.0, 3).edges == ()

    def test_er_golden(self):
        assert gen_erdos_renyi(7, 0.8, 42).edges == ER_7_08_SEED42

    def test_er_edge_count_mean(self):
        counts = np.array([len(gen_erdos_renyi(7, 0.8, s).edges) for s in range(2000)])
        se = counts.std(ddof=1) / np.sqrt(len(counts))
        assert abs(counts.mean() - 16.8) <= 3 * se

    def test_ws_ring_lattice(self):
        g = gen_watts_strogatz(9, 6, 0.0, 11)
        ring = {tuple(sorted((i, (i + r) % 9))) for i in range(9) for r in (1, 2, 3)}
        assert set(g.edges) == ring and len(g.edges) == 27

    def test_ws_full_rewire(self):
        g = gen_watts_strogatz(9, 6, 1.0, 7)
        assert len(g.edges) == 27
        assert min(g.degrees()) >= 3

    def test_ws_golden(self):
        assert gen_watts_strogatz(9, 6, 0.7, 7).edges == WS_9_6_07_SEED7

    def test_ws_complete_neighbourhood_keeps_edges(self):
        # k = n - 1: every vertex already sees all others, nothing can move
        assert len(gen_watts_strogatz(7, 6, 1.0, 1).edges) == 21

    @given(n=st.integers(5, 14), half_k=st.integers(1, 3), p=st.floats(0, 1),
           seed=st.integers(0, 2**32 - 1))
    def test_ws_edge_count_property(self, n, half_k, p, seed):
        k = 2 * half_k
        if k >= n:
            return
        g = gen_watts_strogatz(n, k, p, seed)
        assert len(g.edges) == n * k // 2
        assert all(u < v for u, v in g.edges)
        assert len(set(g.edges)) == len(g.edges)

    def test_determinism(self):
        assert gen_watts_strogatz(12, 4, 0.3, 99) == gen_watts_strogatz(12, 4, 0.3, 99)
        assert gen_erdos_renyi(12, 0.5, 99) == gen_erdos_renyi(12, 0.5, 99)

    @pytest.mark.parametrize("args", [(1, 0.5, 0), (5, 1.5, 0), (5, -0.1, 0)])
    def test_er_rejects(self, args):
        with pytest.raises(InvalidParameterError):
            gen_erdos_renyi(*args)

    @pytest.mark.parametrize("args", [(9, 3, 0.5, 0), (9, 10, 0.5, 0), (9, 4, 2.0, 0)])
    def test_ws_rejects(self, args):
        with pytest.raises(InvalidParameterError):
            gen_watts_strogatz(*args)


class TestFields:
    def test_ranges(self):
        g = gen_erdos_renyi(12, 0.5, 1)
        inst1 = assign_fields(g, 1.0, 5)
        assert all(abs(h) <= 1 for h in inst1.fields)
        inst5 = assign_fields(g, 5.0, 5)
        assert len(inst5.fields) == 12 and all(abs(h) <= 5 for h in inst5.fields)

    def test_deterministic(self):
        g = gen_erdos_renyi(6, 0.5, 1)
        assert assign_fields(g, 3.0, 8).fields == assign_fields(g, 3.0, 8).fields

    def test_provenance(self):
        inst = assign_fields(gen_erdos_renyi(6, 0.5, 1), 3.0, 8)
        assert inst.generator["model"] == "erdos_renyi"
        assert inst.generator["params"]["field_seed"] == 8


class TestEnergy:
    def test_bit_map(self):
        assert spin_of_bit("1") == 1 and spin_of_bit("0") == -1
        assert SpinConfig("10").spins == (1, -1)

    def test_single_edge(self, single_edge):
        assert classical_energy(single_edge, "00") == -1
        assert classical_energy(single_edge, "01") == 1

    def test_single_edge_fields(self, single_edge_fields):
        # spins for "11" are (+1, +1): -1 - (2 - 0.5)
        assert classical_energy(single_edge_fields, "11") == -2.5
        assert classical_energy(single_edge_fields, "00") == 0.5
        assert classical_energy(single_edge_fields, "10") == -1.5
        assert classical_energy(single_edge_fields, "01") == 3.5

    def test_table_matches_scalar(self):
        inst = assign_fields(gen_erdos_renyi(7, 0.8, 42), 3.0, 1)
        table = energy_table(inst)
        for i in range(128):
            assert table[i] == classical_energy(inst, bitstring_from_index(i, 7))

    @given(seed=st.integers(0, 10**6), bits=st.text("01", min_size=6, max_size=6))
    def test_flip_symmetry(self, seed, bits):
        g = gen_erdos_renyi(6, 0.6, seed)
        flipped = "".join("1" if b == "0" else "0" for b in bits)
        no_field = make_instance(6, g.edges, (0.0,) * 6)
        assert classical_energy(no_field, bits) == classical_energy(no_field, flipped)
        h = tuple(np.random.default_rng(seed).uniform(-2, 2, 6))
        free = make_instance(6, [], h, field_range=2.0)
        assert classical_energy(free, bits) == pytest.approx(-classical_energy(free, flipped))

    def test_length_mismatch(self, single_edge):
        with pytest.raises(InvalidParameterError):
            classical_energy(single_edge, "000")

    def test_index_roundtrip(self):
        for i in range(32):
            assert index_from_bitstring(bitstring_from_index(i, 5)) == i
        assert index_from_bitstring("100") == 1


class TestIO:
    def test_roundtrip(self, tmp_path):
        inst = assign_fields(gen_watts_strogatz(9, 6, 0.7, 7), 5.0, 3)
        save_instance(inst, tmp_path / "i.json")
        back = load_instance(tmp_path / "i.json")
        assert back == inst and back.fields == inst.fields
        assert back.generator == inst.generator

    def _write(self, tmp_path, data):
        p = tmp_path / "x.json"
        p.write_text(json.dumps(data))
        return p

    def _base(self):
        return {"schema_version": 1, "n": 3, "edges": [[0, 1], [1, 2]],
                "couplings": [1.0, 1.0], "fields": [0.1, 0.2, 0.3], "field_range": 1.0,
                "generator": {}}

    def test_duplicate_edge(self, tmp_path):
        d = self._base()
        d["edges"] = [[0, 1], [0, 1]]
        with pytest.raises(SchemaError):
            load_instance(self._write(tmp_path, d))

    def test_missing_fields(self, tmp_path):
        d = self._base()
        del d["fields"]
        with pytest.raises(SchemaError, match="fields"):
            load_instance(self._write(tmp_path, d))

    def test_bad_version_and_json(self, tmp_path):
        d = self._base()
        d["schema_version"] = 2
        with pytest.raises(SchemaError):
            load_instance(self._write(tmp_path, d))
        p = tmp_path / "bad.json"
        p.write_text("{nope")
        with pytest.raises(SchemaError):
            load_instance(p)

    def test_graph_validation(self):
        with pytest.raises(InvalidParameterError):
            Graph(3, ((1, 0),))
        with pytest.raises(InvalidParameterError):
            Graph.from_edges(3, [(1, 1)])
