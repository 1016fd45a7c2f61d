import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qkbench import oracles
from qkbench.errors import ConfigurationError, ContractError
from qkbench.statevec import (
    PhaseVector,
    Statevector,
    apply_phases,
    hadamard_all,
    inner_product,
    sample_zero_frequency,
    zero_state,
)
from conftest import random_state


def test_zero_state():
    assert np.array_equal(zero_state(1).amplitudes, [1, 0])
    assert np.array_equal(zero_state(2).amplitudes, [1, 0, 0, 0])
    with pytest.raises(ConfigurationError):
        zero_state(25)
    with pytest.raises(ConfigurationError):
        zero_state(0)


def test_states_are_read_only():
    s = zero_state(2)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0


def test_hadamard_examples(rng):
    r = 1 / math.sqrt(2)
    assert np.allclose(hadamard_all(zero_state(1)).amplitudes, [r, r], atol=1e-15)
    assert np.allclose(hadamard_all(zero_state(2)).amplitudes, [0.5] * 4, atol=1e-15)
    psi = Statevector(3, random_state(rng, 3))
    back = hadamard_all(hadamard_all(psi))
    assert np.abs(back.amplitudes - psi.amplitudes).max() < 1e-14


def test_apply_phases_examples(rng):
    psi = Statevector(3, random_state(rng, 3))
    assert np.array_equal(apply_phases(psi, PhaseVector(3, np.zeros(8))).amplitudes, psi.amplitudes)
    c = 0.83
    shifted = apply_phases(psi, PhaseVector(3, np.full(8, c)))
    assert np.allclose(shifted.amplitudes, np.exp(1j * c) * psi.amplitudes, atol=1e-15)
    r = 1 / math.sqrt(2)
    out = apply_phases(Statevector(1, [r, r]), PhaseVector(1, [0, math.pi]))
    assert np.allclose(out.amplitudes, [r, -r], atol=1e-15)
    with pytest.raises(ContractError):
        apply_phases(psi, PhaseVector(2, np.zeros(4)))


def test_inner_product(rng):
    psi = Statevector(3, random_state(rng, 3))
    phi = Statevector(3, random_state(rng, 3))
    assert abs(inner_product(psi, psi) - 1) < 1e-14
    assert inner_product(zero_state(1), Statevector(1, [0, 1])) == 0
    naive = sum(np.conj(a) * b for a, b in zip(psi.amplitudes, phi.amplitudes))
    assert abs(inner_product(psi, phi) - naive) < 1e-14
    with pytest.raises(ContractError):
        inner_product(psi, zero_state(2))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_layers_match_dense_matrices(rng, n):
    psi = random_state(rng, n)
    phases = rng.uniform(-10, 10, 2**n)
    fast = apply_phases(hadamard_all(Statevector(n, psi)), PhaseVector(n, phases))
    dense = np.diag(np.exp(1j * phases)) @ oracles.dense_hadamard(n) @ psi
    assert np.abs(fast.amplitudes - dense).max() < 1e-12


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1), depth=st.integers(1, 6))
def test_norm_preserved(n, seed, depth):
    rng = np.random.default_rng(seed)
    s = Statevector(n, random_state(rng, n))
    for _ in range(depth):
        s = apply_phases(hadamard_all(s), PhaseVector(n, rng.uniform(-50, 50, 2**n)))
    assert abs(s.norm() ** 2 - 1) < 1e-12


def test_sampling_edge_cases():
    assert sample_zero_frequency(zero_state(3), 100, 5) == 1.0
    assert sample_zero_frequency(Statevector(2, [0, 0.6, 0.8, 0]), 100, 5) == 0.0
    with pytest.raises(ConfigurationError):
        sample_zero_frequency(zero_state(1), 0, 1)


def test_sampling_deterministic():
    s = hadamard_all(zero_state(3))
    assert sample_zero_frequency(s, 1024, 11) == sample_zero_frequency(s, 1024, 11)


def test_sampling_unbiased():
    r = 1 / math.sqrt(2)
    state = Statevector(1, [r, r])
    shots, seeds, p = 1024, 200, 0.5
    estimates = np.array([sample_zero_frequency(state, shots, s) for s in range(seeds)])
    assert abs(estimates.mean() - p) < 3 * math.sqrt(p * (1 - p) / shots) / math.sqrt(seeds)
