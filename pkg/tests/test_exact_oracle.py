import math

import numpy as np
import pytest

from primalbp.exact_oracle import (
    StateSpaceTooLarge,
    entropy_exact,
    is_acyclic,
    joint_energy,
    kl_exact,
    log_partition_exact,
    marginals_exact,
)
from primalbp.generators import random_model, random_theta, random_tree_model
from primalbp.local import check_local_polytope
from primalbp.model import ConstantShift, Model, ModelError, PairVector, apply_reparam, build_model, zero_model

from conftest import slow_log_partition, slow_variable_marginal


def _random_alpha(model, rng):
    g = model.graph
    return PairVector.from_flat(g, rng.normal(size=PairVector.zeros(g).flat().size))


class TestLogPartition:
    def test_uniform(self, t1, t2, l1):
        assert log_partition_exact(t2) == pytest.approx(math.log(3), abs=1e-15)
        assert log_partition_exact(t1) == pytest.approx(math.log(4), abs=1e-15)
        assert log_partition_exact(l1) == pytest.approx(math.log(8), abs=1e-15)

    def test_matches_slow_enumeration(self, rng):
        for _ in range(10):
            m = random_model(rng, scale=3.0)
            assert log_partition_exact(m) == pytest.approx(slow_log_partition(m), abs=1e-12)

    def test_stable_for_large_energies(self):
        m = build_model(2, (2, 2), [(0, 1)], [[800, 0], [0, 0]], [[0, 0, 0, 0]])
        assert log_partition_exact(m) == pytest.approx(800 + math.log(2), abs=1e-12)

    def test_cap(self):
        m = zero_model((2,) * 12, [(0, 1)])
        with pytest.raises(StateSpaceTooLarge):
            log_partition_exact(m, cap=1000)
        assert log_partition_exact(m, cap=None) == pytest.approx(12 * math.log(2))

    def test_reparameterization(self, rng):
        for _ in range(20):
            m = random_model(rng)
            g = m.graph
            f = log_partition_exact(m)
            assert abs(log_partition_exact(apply_reparam(m, _random_alpha(m, rng))) - f) <= 1e-10
            beta = ConstantShift(rng.normal(size=g.num_vars), rng.normal(size=g.num_edges))
            assert abs(log_partition_exact(apply_reparam(m, None, beta)) - f - beta.total) <= 1e-10


class TestMarginals:
    def test_uniform(self, t1):
        mu = marginals_exact(t1)
        assert np.allclose(mu.unary[0], 0.5) and np.allclose(mu.unary[1], 0.5)
        assert np.allclose(mu.higher[0], 0.25)

    def test_bumped_pair(self, t1_bumped):
        # p proportional to (e, 1, 1, 1) over (00, 01, 10, 11)
        mu = marginals_exact(t1_bumped)
        e = math.e
        assert mu.unary[0][0] == pytest.approx((e + 1) / (e + 3), abs=1e-15)
        assert mu.unary[0][0] == pytest.approx(0.650244, abs=1e-6)
        assert np.allclose(mu.higher[0].ravel(), np.array([e, 1, 1, 1]) / (e + 3))

    def test_matches_slow_enumeration(self, rng):
        m = random_model(rng, num_vars=4)
        mu = marginals_exact(m)
        for v in range(m.num_vars):
            assert np.allclose(mu.unary[v], slow_variable_marginal(m, v), atol=1e-12)

    def test_reparameterization_invariant(self, rng):
        for _ in range(10):
            m = random_model(rng)
            moved = apply_reparam(m, _random_alpha(m, rng))
            assert marginals_exact(moved).max_abs_diff(marginals_exact(m)) <= 1e-10

    def test_in_local_polytope_and_positive(self, rng):
        for _ in range(10):
            mu = marginals_exact(random_model(rng, scale=2.0))
            assert check_local_polytope(mu, 1e-12).ok
            assert all(np.all(t > 0) for t in mu.tables())


class TestEntropy:
    def test_uniform(self, t1, t2):
        assert entropy_exact(t2) == pytest.approx(math.log(3), abs=1e-14)
        assert entropy_exact(t1) == pytest.approx(math.log(4), abs=1e-14)

    def test_is_f_minus_mean_energy(self, rng):
        for _ in range(10):
            m = random_model(rng, num_vars=3)
            mean_energy = m.theta.dot(marginals_exact(m))
            # same quantity through the full joint table
            e = joint_energy(m)
            p = np.exp(e - log_partition_exact(m))
            assert mean_energy == pytest.approx(float(np.sum(p * e)), abs=1e-12)
            assert abs(entropy_exact(m) - (log_partition_exact(m) - mean_energy)) <= 1e-10


class TestKL:
    def test_identical(self, rng):
        m = random_model(rng)
        assert kl_exact(m, m) == 0.0

    def test_reparameterized(self, rng):
        m = random_model(rng)
        assert abs(kl_exact(m, apply_reparam(m, _random_alpha(m, rng)))) <= 1e-10

    def test_positive(self, t1):
        q = build_model(2, (2, 2), [(0, 1)], [[1, 0], [0, 0]], [[0, 0, 0, 0]])
        # p uniform, q_0 = (e, 1)/(e + 1): KL = log((e+1)/2) - 1/2
        expected = math.log((math.e + 1) / 2) - 0.5
        assert kl_exact(t1, q) == pytest.approx(expected, abs=1e-14)
        assert kl_exact(t1, q) > 0

    def test_structure_mismatch(self, t1, l1):
        with pytest.raises(ModelError):
            kl_exact(t1, l1)

    def test_fenchel_gap(self, rng):
        for _ in range(20):
            m = random_model(rng)
            other = Model(random_theta(m.graph, rng))
            gap = log_partition_exact(m) - entropy_exact(other) - m.theta.dot(marginals_exact(other))
            kl = kl_exact(other, m)
            assert gap >= -1e-10
            assert abs(gap - kl) <= 1e-9
        gap_self = log_partition_exact(m) - entropy_exact(m) - m.theta.dot(marginals_exact(m))
        assert abs(gap_self) <= 1e-9


class TestAcyclic:
    def test_cases(self, t1, l1, t2):
        assert is_acyclic(t1)
        assert not is_acyclic(l1)
        assert is_acyclic(zero_model((2, 2, 2), [(0, 1), (1, 2)]))
        assert is_acyclic(t2)

    def test_hyperedges_sharing_two_variables(self):
        assert not is_acyclic(zero_model((2, 2, 2), [(0, 1, 2), (0, 1)]))

    def test_generated_trees(self, rng):
        for _ in range(20):
            assert is_acyclic(random_tree_model(rng))


def test_deterministic(rng):
    m = random_model(rng, num_vars=5)
    assert log_partition_exact(m) == log_partition_exact(m)
    assert np.array_equal(marginals_exact(m).flat(), marginals_exact(m).flat())
