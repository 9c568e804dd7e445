import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncq.algebra import BlockAlgebra
from ncq.channel import random_channel
from ncq.entropy import h_min_optimize
from ncq.optimize import OptimizerConfig, Problem, basis_starts, minimize_on_sphere, multistart


class Rayleigh:
    def __init__(self, a):
        self.a = a
        self.evaluations = 0

    def value(self, v):
        return float(np.real(np.vdot(v, self.a @ v)))

    def __call__(self, v):
        self.evaluations += 1
        return self.value(v), 2 * (self.a @ v)


def hermitian(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (x + x.conj().T) / 2


@given(st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_rayleigh_quotient_reaches_smallest_eigenvalue(n, seed):
    a = hermitian(n, seed)
    res = multistart([Problem((0,), Rayleigh(a), n)], OptimizerConfig(restarts=4, seed=seed))
    assert res.value == pytest.approx(np.linalg.eigvalsh(a)[0], abs=1e-7)
    assert np.linalg.norm(res.vector) == pytest.approx(1)


def test_single_run_decreases_objective():
    a = hermitian(5, 1)
    v0 = np.ones(5, complex)
    obj = Rayleigh(a)
    run = minimize_on_sphere(obj, v0, OptimizerConfig())
    assert run.value <= obj.value(v0 / np.linalg.norm(v0))


def test_best_is_minimum_over_restarts_and_blocks():
    probs = [Problem((k,), Rayleigh(hermitian(3, k)), 3) for k in range(3)]
    res = multistart(probs, OptimizerConfig(restarts=5))
    assert len(res.restart_values) == 15
    assert res.value == min(res.restart_values)
    assert res.block == (int(np.argmin([np.linalg.eigvalsh(hermitian(3, k))[0] for k in range(3)])),)


def test_one_dimensional_blocks_are_evaluated_directly():
    res = multistart([Problem((0,), Rayleigh(np.array([[2.5]])), 1)], OptimizerConfig())
    assert res.value == 2.5 and res.iterations == 0


def test_results_are_deterministic_in_the_seed():
    t = random_channel(BlockAlgebra((1, 2), (1 / 3, 1 / 3)), 4)
    cfg = OptimizerConfig(restarts=6, seed=9)
    a, b = h_min_optimize(t, cfg), h_min_optimize(t, cfg)
    assert a.value == b.value
    assert a.restart_values == b.restart_values


def test_basis_starts():
    s = basis_starts(6, limit=3)
    assert len(s) == 3
    assert np.allclose(np.stack(s), np.eye(6)[:3])


@pytest.mark.parametrize("field", ["restarts", "max_iters"])
def test_config_validation(field):
    with pytest.raises(ValueError):
        OptimizerConfig(**{field: 0})
