import math
import warnings

import numpy as np
import pytest

from rfox.errors import InvalidParameterError, ResourceLimitError
from rfox.instances import assign_fields, gen_erdos_renyi, gen_watts_strogatz
from rfox.pauli import PauliSum, build_slice_hamiltonian, sum_two_body, sum_x, to_matrix
from rfox.schedule import ScheduleParams
from rfox.spectral import (GapProfile, IntegrationWarning, exchange_commutator, gap_profile,
                           lowest_two_eigs, magnus_check, runtime_estimate)
from conftest import make_instance


class TestEigs:
    def test_examples(self):
        assert lowest_two_eigs(PauliSum(1, ((0.7, "X"),))) == pytest.approx((-0.7, 0.7))
        e0, e1 = lowest_two_eigs(PauliSum(2, ((1.0, "ZZ"),)))
        assert e0 == pytest.approx(-1) and e1 == pytest.approx(-1)
        inst = make_instance(3, [(0, 1), (1, 2)], (0.1, 0.2, 0.3))
        h = build_slice_hamiltonian("X", inst, 0, ScheduleParams())
        assert lowest_two_eigs(h) == pytest.approx((-3, -1), abs=1e-12)

    def test_dense_oracle(self):
        for seed in range(5):
            inst = assign_fields(gen_erdos_renyi(8, 0.5, seed), 3.0, seed)
            h = build_slice_hamiltonian("XplusSXX", inst, 40, ScheduleParams())
            full = np.linalg.eigvalsh(to_matrix(h))
            e0, e1 = lowest_two_eigs(h)
            assert e0 <= e1
            assert abs(e0 - full[0]) <= 1e-9 and abs(e1 - full[1]) <= 1e-9

    def test_sparse_matches_dense(self):
        inst = assign_fields(gen_watts_strogatz(9, 4, 0.3, 1), 2.0, 2)
        h = build_slice_hamiltonian("RFOX", inst, 13, ScheduleParams())
        dense = lowest_two_eigs(h)
        sparse = lowest_two_eigs(h, dense_limit=8)
        assert sparse == pytest.approx(dense, abs=1e-9)


class TestProfiles:
    inst = assign_fields(gen_erdos_renyi(6, 0.8, 5), 2.0, 6)

    def test_rfox_flat(self):
        prof = gap_profile("RFOX", self.inst)
        assert len(prof.records) == 100
        assert prof.spread() <= 4e-3 * len(self.inst.edges)

    def test_delta_zero_constant(self):
        prof = gap_profile("RFOX", self.inst, ScheduleParams(delta=0.0, p=10))
        assert prof.spread() == 0.0

    def test_xx_k0(self):
        prof = gap_profile("XX", self.inst, ScheduleParams(p=10))
        e0, e1 = lowest_two_eigs(sum_two_body(6, self.inst.edges, "X", "X"))
        assert prof.records[0][4] == pytest.approx(e1 - e0, abs=1e-12)

    def test_csv(self, tmp_path):
        prof = gap_profile("X", self.inst, ScheduleParams(p=5))
        prof.to_csv(tmp_path / "g.csv", instance_id="abc")
        lines = (tmp_path / "g.csv").read_text().splitlines()
        assert lines[0].startswith("# rfox-gap-profile v1 driver=X p=5")
        assert "instance=abc" in lines[0]
        assert lines[1] == "k,s_or_t,E0,E1,gap" and len(lines) == 7

    def test_empty_profile(self):
        with pytest.raises(InvalidParameterError):
            GapProfile("X", [], ScheduleParams())


class TestRuntime:
    def test_values(self):
        assert runtime_estimate(1.0) == 1.0
        assert runtime_estimate(0.1) == pytest.approx(100)
        assert runtime_estimate(0.03) / runtime_estimate(2.0) == pytest.approx(4444.44, rel=1e-4)
        assert runtime_estimate(0.0) == math.inf
        with pytest.raises(InvalidParameterError):
            runtime_estimate(-1.0)


def path3(fields=(0.0, 0.0, 0.0)):
    return make_instance(3, [(0, 1), (1, 2)], fields, field_range=3.0)


class TestMagnus:
    def test_commutator(self):
        lhs, rhs = exchange_commutator()
        assert np.array_equal(lhs, rhs)
        # -2i Y is real with entries in {-2, 0, 2}
        assert not lhs.imag.any()
        assert set(np.unique(lhs.real)) == {-2.0, 0.0, 2.0}

    def test_static(self):
        rep = magnus_check(path3(), 0.0, n_steps=1000)
        assert rep.err1 <= 1e-9

    def test_sweep(self):
        reps = [magnus_check(path3((1.0, -2.0, 3.0)), d) for d in (4e-3, 2e-3, 1e-3)]
        err1 = [r.err1 for r in reps]
        assert err1[0] > err1[1] > err1[2]
        assert all(r.err2 <= r.err1 for r in reps)
        assert all(r.step_change <= 1e-9 for r in reps)
        ratios = [r.err1 / r.delta for r in reps]
        assert max(ratios) / min(ratios) <= 1.5
        # the even-in-delta part of the Y coefficient carries the delta^2 term
        even = [abs(r.y_coeff_even) for r in reps]
        assert even[0] / even[1] == pytest.approx(4, rel=0.1)
        assert even[1] / even[2] == pytest.approx(4, rel=0.1)

    def test_limits(self):
        with pytest.raises(ResourceLimitError):
            magnus_check(assign_fields(gen_erdos_renyi(7, 0.5, 1), 1.0, 1), 1e-3)
        with pytest.raises(InvalidParameterError):
            magnus_check(path3(), 1e-3, n_steps=10)

    def test_warning(self):
        with pytest.warns(IntegrationWarning):
            magnus_check(path3(), 0.5, n_steps=1000, tol=1e-15)
