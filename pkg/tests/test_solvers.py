"""Tests for exhaustive enumeration and simulated annealing."""

import numpy as np
import pytest

from reluqubo.algebra import AffineExpr, QuadraticExpr, QuboModel, energy
from reluqubo.encoding import BinaryExpansion
from reluqubo.formulation import ReluPenaltySpec, build_cost_plus_relu
from reluqubo.solvers import (
    AnnealConfig,
    BitCapExceeded,
    energy_delta,
    exhaustive_solve,
    fix_bits,
    simulated_anneal,
)


def random_model(rng, n, density=0.5):
    linear = {i: float(rng.uniform(-2, 2)) for i in range(n) if rng.random() < density}
    quadratic = {(i, j): float(rng.uniform(-2, 2))
                 for i in range(n) for j in range(i + 1, n)
                 if rng.random() < density}
    return QuboModel(n, linear, quadratic, float(rng.uniform(-1, 1)))


def relu_instance(m=-1.0, d_t=4, d_z=4, alpha_z=2.0, M=30.0):
    spec = ReluPenaltySpec(
        BinaryExpansion(d_t, 1.0, -1.0),
        BinaryExpansion(d_z, alpha_z, 0.0),
        BinaryExpansion(d_z, alpha_z, 0.0),
        M)
    return build_cost_plus_relu(QuadraticExpr(), AffineExpr.from_constant(m), spec)


class TestExhaustive:
    def test_positive_linear_prefers_zero(self):
        m = QuboModel(1, {0: 2.0}, {}, offset=0.5)
        res = exhaustive_solve(m)
        assert res.assignment == (0,)
        assert res.energy == 0.5

    def test_two_bit_coupler(self):
        m = QuboModel(2, {0: 1.0, 1: 1.0}, {(0, 1): -3.0}, 0.0)
        res = exhaustive_solve(m)
        assert res.assignment == (1, 1)
        assert res.energy == -1.0

    def test_relu_instance_minimum_matches_hinge(self):
        built = relu_instance(m=-1.0, alpha_z=1.0)  # z grid hits 1 exactly
        res = exhaustive_solve(built.model)
        assert res.energy == pytest.approx(1.0, abs=1e-9)

    def test_tie_broken_by_lowest_assignment_integer(self):
        m = QuboModel(2, {0: -1.0, 1: -1.0}, {(0, 1): 2.0}, 0.0)
        res = exhaustive_solve(m)
        # (1,0) and (0,1) tie at -1; integer order prefers bit 0 set
        assert res.assignment == (1, 0)

    def test_empty_tie_prefers_all_zero(self):
        m = QuboModel(3, {}, {}, offset=7.0)
        res = exhaustive_solve(m)
        assert res.assignment == (0, 0, 0)
        assert res.energy == 7.0

    def test_energy_is_exact_reevaluation(self):
        rng = np.random.default_rng(2)
        m = random_model(rng, 9)
        res = exhaustive_solve(m)
        assert res.energy == energy(m, res.assignment)

    def test_matches_naive_enumeration(self):
        rng = np.random.default_rng(4)
        m = random_model(rng, 8)
        res = exhaustive_solve(m)
        naive = min(energy(m, tuple((k >> i) & 1 for i in range(8)))
                    for k in range(256))
        assert res.energy == pytest.approx(naive, abs=1e-12)

    def test_planted_minimum_across_chunks(self):
        # 19 free bits forces the chunked path (chunk size 2^18)
        rng = np.random.default_rng(6)
        n = 19
        target = tuple(int(b) for b in rng.integers(0, 2, size=n))
        linear = {i: (1.0 if target[i] == 0 else -1.0) for i in range(n)}
        m = QuboModel(n, linear, {}, offset=float(sum(target)))
        res = exhaustive_solve(m)
        assert res.assignment == target
        assert res.energy == 0.0

    def test_fixed_bits_restrict_search(self):
        m = QuboModel(2, {0: -1.0, 1: -1.0}, {(0, 1): 5.0}, 0.0)
        res = exhaustive_solve(m, fixed={0: 1})
        assert res.assignment == (1, 0)
        assert res.energy == -1.0

    def test_fixed_all_bits(self):
        m = QuboModel(2, {0: 1.0}, {(0, 1): 1.0}, 0.5)
        res = exhaustive_solve(m, fixed={0: 1, 1: 1})
        assert res.assignment == (1, 1)
        assert res.energy == 2.5

    def test_cap_enforced(self):
        m = QuboModel(8, {}, {}, 0.0)
        with pytest.raises(BitCapExceeded):
            exhaustive_solve(m, bit_cap=7)

    def test_env_overrides_cap(self, monkeypatch):
        monkeypatch.setenv("RELUQUBO_BIT_CAP", "3")
        m = QuboModel(4, {}, {}, 0.0)
        with pytest.raises(BitCapExceeded):
            exhaustive_solve(m)
        assert exhaustive_solve(m, fixed={0: 0}).energy == 0.0


class TestFixBits:
    @pytest.mark.parametrize("seed", range(3))
    def test_reduction_preserves_energy(self, seed):
        rng = np.random.default_rng(seed)
        m = random_model(rng, 8)
        fixed = {0: 1, 3: 0, 7: 1}
        sub, free = fix_bits(m, fixed)
        assert sub.n_vars == 5
        assert free == [1, 2, 4, 5, 6]
        for _ in range(30):
            free_bits = [int(b) for b in rng.integers(0, 2, size=5)]
            full = dict(fixed)
            for k, orig in enumerate(free):
                full[orig] = free_bits[k]
            pattern = tuple(full[i] for i in range(8))
            assert sub.energy(free_bits) == pytest.approx(energy(m, pattern), abs=1e-12)

    def test_labels_follow_free_vars(self):
        m = QuboModel(3, {}, {}, 0.0, labels=["a", "b", "c"])
        sub, free = fix_bits(m, {1: 0})
        assert sub.labels == ["a", "c"]

    def test_invalid_fixed_rejected(self):
        m = QuboModel(2, {}, {}, 0.0)
        with pytest.raises(ValueError):
            fix_bits(m, {5: 1})
        with pytest.raises(ValueError):
            fix_bits(m, {0: 2})


class TestEnergyDelta:
    def test_single_flip_matches_direct(self):
        rng = np.random.default_rng(8)
        m = random_model(rng, 7)
        b = [int(x) for x in rng.integers(0, 2, size=7)]
        for i in range(7):
            flipped = list(b)
            flipped[i] ^= 1
            assert energy_delta(m, b, i) == pytest.approx(
                energy(m, flipped) - energy(m, b), abs=1e-12)

    def test_accumulated_walk_matches_full_reevaluation(self):
        rng = np.random.default_rng(10)
        m = random_model(rng, 10)
        b = [int(x) for x in rng.integers(0, 2, size=10)]
        e = energy(m, b)
        for _ in range(500):
            i = int(rng.integers(0, 10))
            e += energy_delta(m, b, i)
            b[i] ^= 1
        assert e == pytest.approx(energy(m, b), abs=1e-9)


class TestAnnealConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            AnnealConfig(sweeps=0)
        with pytest.raises(ValueError):
            AnnealConfig(beta_initial=0.0)
        with pytest.raises(ValueError):
            AnnealConfig(beta_initial=2.0, beta_final=1.0)
        with pytest.raises(ValueError):
            AnnealConfig(restarts=0)

    def test_geometric_schedule(self):
        cfg = AnnealConfig(sweeps=5, beta_initial=0.1, beta_final=10.0)
        sched = cfg.schedule()
        assert sched[0] == pytest.approx(0.1)
        assert sched[-1] == pytest.approx(10.0)
        ratios = [b / a for a, b in zip(sched, sched[1:])]
        assert all(r == pytest.approx(ratios[0]) for r in ratios)


class TestSimulatedAnneal:
    CFG = AnnealConfig(sweeps=2000, beta_initial=0.1, beta_final=10.0,
                       restarts=16, seed=42)

    def test_trivial_model_returns_offset(self):
        m = QuboModel(5, {}, {}, offset=3.25)
        res = simulated_anneal(m, AnnealConfig(sweeps=10, restarts=2, seed=1))
        assert res.energy == 3.25
        assert res.restart_energies == [3.25, 3.25]

    def test_relu_instance_most_restarts_hit_optimum(self):
        built = relu_instance()  # 12 free bits
        exact = exhaustive_solve(built.model)
        res = simulated_anneal(built.model, self.CFG)
        hits = sum(1 for e in res.restart_energies
                   if abs(e - exact.energy) <= 1e-9)
        assert hits >= 14
        assert res.energy == pytest.approx(exact.energy, abs=1e-9)

    def test_same_seed_reproduces_result(self):
        built = relu_instance(m=0.5)
        cfg = AnnealConfig(sweeps=200, restarts=4, seed=7)
        a = simulated_anneal(built.model, cfg)
        b = simulated_anneal(built.model, cfg)
        assert a.assignment == b.assignment
        assert a.energy == b.energy
        assert a.restart_energies == b.restart_energies

    def test_never_below_exhaustive_minimum(self):
        rng = np.random.default_rng(14)
        for seed in range(5):
            m = random_model(rng, 8)
            exact = exhaustive_solve(m)
            res = simulated_anneal(m, AnnealConfig(sweeps=100, restarts=4, seed=seed))
            assert res.energy >= exact.energy - 1e-12

    def test_best_so_far_non_increasing(self):
        rng = np.random.default_rng(16)
        m = random_model(rng, 10)
        res = simulated_anneal(m, AnnealConfig(sweeps=300, restarts=3, seed=3),
                               record_best_trace=True)
        assert res.best_trace is not None
        for restart_trace in res.best_trace:
            assert all(a >= b for a, b in zip(restart_trace, restart_trace[1:]))

    def test_reported_energy_is_exact(self):
        rng = np.random.default_rng(18)
        m = random_model(rng, 9)
        res = simulated_anneal(m, AnnealConfig(sweeps=50, restarts=2, seed=0))
        assert res.energy == energy(m, res.assignment)

    def test_json_dict_excludes_wall_time(self):
        m = QuboModel(2, {0: 1.0}, {}, 0.0)
        res = simulated_anneal(m, AnnealConfig(sweeps=10, restarts=1, seed=0))
        d = res.to_json_dict()
        assert set(d) == {"solver", "n_vars", "energy", "assignment", "restart_energies"}
        assert d["assignment"] == res.assignment_str()
