import numpy as np
import pytest

from qftkit.circuit import CircuitBuilder, dyadic
from qftkit.errors import CapacityError
from qftkit.qft_pow2 import bit_reversed_indices, standard_qft
from qftkit.sim import (
    DEFAULT_SEED,
    MAX_DFT_DIM,
    basis_state,
    dft_reference,
    extract_unitary,
    pure_trace_distance,
    run_classical_bits,
    run_dense,
    run_sparse,
    sparse_marginal,
    sparse_to_dense,
)


class TestBackendsAgree:
    def test_dense_and_sparse_match_on_random_circuits(self, rng, random_circuit):
        for _ in range(8):
            c = random_circuit(rng, n_qubits=5, n_gates=16)
            x = int(rng.integers(0, 32))
            dense = run_dense(c, x=x).state
            sparse = sparse_to_dense(run_sparse(c, x=x).amplitudes, 5)
            assert np.linalg.norm(dense - sparse) < 1e-12

    def test_norm_preserved(self, rng, random_circuit):
        c = random_circuit(rng, n_qubits=4, n_gates=20)
        amps = run_sparse(c, x=3).amplitudes
        assert sum(abs(a) ** 2 for a in amps.values()) == pytest.approx(1.0, abs=1e-12)

    def test_hadamard_wall_is_uniform(self):
        b = CircuitBuilder(4)
        for w in range(4):
            b.h(w)
        amps = run_sparse(b.build()).amplitudes
        assert len(amps) == 16
        assert all(abs(a - 0.25) < 1e-12 for a in amps.values())


class TestStateConventions:
    def test_wire_zero_is_least_significant(self):
        b = CircuitBuilder(3)
        b.x(0)
        assert set(run_sparse(b.build()).amplitudes) == {1}
        b = CircuitBuilder(3)
        b.x(2)
        assert set(run_sparse(b.build()).amplitudes) == {4}

    def test_basis_state(self):
        v = basis_state(3, 5)
        assert v[5] == 1 and np.count_nonzero(v) == 1

    def test_initial_amplitudes_override(self):
        b = CircuitBuilder(2)
        b.cnot(0, 1)
        initial = {0: 0.6, 1: 0.8}
        amps = run_sparse(b.build(), initial=initial).amplitudes
        assert amps[0] == pytest.approx(0.6)
        assert amps[3] == pytest.approx(0.8)

    def test_sparse_marginal_orders_low_wire_first(self):
        b = CircuitBuilder(3)
        b.x(1)
        b.h(2)
        amps = run_sparse(b.build()).amplitudes
        probs = sparse_marginal(amps, [1, 2])
        # index bit 0 <- wire 1 (set), bit 1 <- wire 2 (uniform)
        assert probs == pytest.approx([0.0, 0.5, 0.0, 0.5])


class TestClassicalPath:
    def test_toffoli_adder_bits(self):
        b = CircuitBuilder(3)
        b.toffoli(0, 1, 2)
        b.cnot(0, 1)
        c = b.build()
        for x in range(8):
            out = run_classical_bits(c, x)
            a, s, carry = x & 1, (x >> 1) & 1, (x >> 2) & 1
            assert out == a | ((s ^ a) << 1) | ((carry ^ (a & s)) << 2)

    def test_rejects_non_classical_gates(self):
        with pytest.raises(Exception):
            run_classical_bits(standard_qft(2), 0)


class TestExtractUnitary:
    def test_qft_matches_reference_after_bit_reversal(self):
        for n in (1, 2, 3, 4):
            u = extract_unitary(standard_qft(n))[bit_reversed_indices(n), :]
            assert np.linalg.norm(u - dft_reference(1 << n), 2) < 1e-10

    def test_result_is_unitary(self, rng, random_circuit):
        c = random_circuit(rng, n_qubits=4, n_gates=12)
        u = extract_unitary(c)
        assert np.linalg.norm(u.conj().T @ u - np.eye(16), 2) < 1e-10


class TestReferencesAndMetrics:
    def test_dft_reference_is_unitary(self):
        for m in (2, 3, 7, 12):
            f = dft_reference(m)
            assert np.linalg.norm(f.conj().T @ f - np.eye(m), 2) < 1e-12

    def test_dft_reference_entries(self):
        f = dft_reference(4)
        assert f[1, 1] == pytest.approx(1j / 2)
        assert f[2, 3] == pytest.approx(-0.5)

    def test_dft_dimension_cap(self):
        with pytest.raises(CapacityError):
            dft_reference(MAX_DFT_DIM + 1)

    def test_pure_trace_distance_extremes(self):
        u = np.array([1, 0], dtype=complex)
        v = np.array([0, 1], dtype=complex)
        assert pure_trace_distance(u, u) == pytest.approx(0.0, abs=1e-12)
        assert pure_trace_distance(u, v) == pytest.approx(1.0)

    def test_pure_trace_distance_formula(self, rng):
        u = rng.normal(size=4) + 1j * rng.normal(size=4)
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        u /= np.linalg.norm(u)
        v /= np.linalg.norm(v)
        expected = np.sqrt(1 - abs(np.vdot(u, v)) ** 2)
        assert pure_trace_distance(u, v) == pytest.approx(expected)


class TestMeasurement:
    def test_measured_hadamard_is_balanced(self):
        b = CircuitBuilder(1)
        b.h(0)
        b.measure(0, "z")
        c = b.build()
        rng = np.random.default_rng(DEFAULT_SEED)
        ones = 0
        for _ in range(400):
            res = run_sparse(c, rng=rng)
            ones += res.classical[0]
        assert 160 <= ones <= 240

    def test_measurement_collapses_support(self):
        b = CircuitBuilder(2)
        b.h(0)
        b.cnot(0, 1)
        b.measure(0, "z")
        res = run_sparse(b.build(), rng=np.random.default_rng(0))
        assert len(res.amplitudes) == 1

    def test_seeded_runs_reproduce(self):
        b = CircuitBuilder(2)
        b.h(0)
        b.h(1)
        b.measure(0, "z")
        b.measure(1, "x")
        c = b.build()
        first = run_sparse(c, rng=np.random.default_rng(11)).classical
        second = run_sparse(c, rng=np.random.default_rng(11)).classical
        assert first == second


class TestCapacity:
    def test_sparse_support_cap(self):
        b = CircuitBuilder(8)
        for w in range(8):
            b.h(w)
        with pytest.raises(CapacityError):
            run_sparse(b.build(), support_cap=64)
