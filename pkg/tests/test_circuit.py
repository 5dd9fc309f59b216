import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qftkit.circuit import (
    CNOT,
    CP,
    MAX_LOG_DENOMINATOR,
    Circuit,
    CircuitBuilder,
    DyadicAngle,
    H,
    Toffoli,
    X,
    dyadic,
    lower,
)
from qftkit.errors import StructuralError
from qftkit.qft_pow2 import copy_fourier, prep_exact, standard_qft
from qftkit.sim import extract_unitary


class TestDyadicAngle:
    def test_reduces_to_odd_numerator(self):
        assert dyadic(2, 3) == dyadic(1, 2)
        assert dyadic(12, 4) == dyadic(3, 2)

    def test_wraps_mod_one_turn(self):
        assert dyadic(9, 3) == dyadic(1, 3)
        assert dyadic(-1, 3) == dyadic(7, 3)

    def test_zero_collapses_denominator(self):
        assert dyadic(0, 7) == dyadic(0, 0)
        assert str(dyadic(0, 7)) == "0"

    def test_str_form(self):
        assert str(dyadic(3, 3)) == "3/2^3"

    def test_negation_is_involution_mod_one(self):
        a = dyadic(3, 4)
        assert -(-a) == a
        assert float(-a) == pytest.approx(1 - 3 / 16)

    def test_denominator_cap(self):
        dyadic(1, MAX_LOG_DENOMINATOR)
        with pytest.raises(StructuralError):
            dyadic(1, MAX_LOG_DENOMINATOR + 1)

    @given(st.integers(-500, 500), st.integers(0, 16))
    def test_phase_matches_float(self, num, ld):
        a = DyadicAngle(num, ld)
        assert 0 <= float(a) < 1
        expected = complex(math.cos(math.tau * float(a)), math.sin(math.tau * float(a)))
        assert a.phase() == pytest.approx(expected)


class TestBuilderAndLayers:
    def test_asap_packs_disjoint_gates(self):
        b = CircuitBuilder(4)
        b.h(0)
        b.h(1)
        b.cnot(2, 3)
        c = b.build()
        assert c.depth == 1
        assert c.size == 3

    def test_asap_stacks_overlapping_gates(self):
        b = CircuitBuilder(2)
        b.h(0)
        b.cnot(0, 1)
        b.h(1)
        assert b.build().depth == 3

    def test_from_layers_rejects_wire_reuse_in_layer(self):
        with pytest.raises(StructuralError):
            Circuit.from_layers([[H(0), CNOT(0, 1)]], 2)

    def test_ancillas_extend_width(self):
        b = CircuitBuilder(2)
        w = b.new_ancillas(3)
        assert w == [2, 3, 4]
        b.h(w[0])
        c = b.build()
        assert (c.n_qubits, c.n_ancilla, c.width) == (2, 3, 5)

    def test_metadata_is_attached_but_not_compared(self):
        mk = lambda meta: CircuitBuilder(1).build(metadata=meta)
        assert mk({"kind": "a"}) == mk({"kind": "b"})
        assert mk({"kind": "a"}).metadata["kind"] == "a"


class TestComposeInverse:
    def test_compose_size_additive_depth_subadditive(self):
        a = prep_exact(3)
        b = copy_fourier(3, 2)
        c = a.compose(b)
        assert c.size == a.size + b.size
        assert c.depth <= a.depth + b.depth

    def test_compose_requires_matching_data_width(self):
        with pytest.raises(StructuralError):
            standard_qft(2).compose(standard_qft(3))

    def test_inverse_reverses_unitary(self, rng, random_circuit):
        for _ in range(5):
            c = random_circuit(rng, n_qubits=4, n_gates=10)
            u = extract_unitary(c)
            v = extract_unitary(c.inverse())
            assert np.linalg.norm(v @ u - np.eye(u.shape[0]), 2) < 1e-10

    def test_inverse_preserves_layer_count(self):
        c = standard_qft(4)
        assert c.inverse().depth == c.depth


class TestLightCone:
    def test_empty_circuit_cone_is_singleton(self):
        c = CircuitBuilder(3).build()
        assert c.light_cone([1]) == {1}

    def test_out_of_range_wire_rejected(self):
        with pytest.raises(StructuralError):
            standard_qft(2).light_cone([5])

    def test_qft_top_qubit_sees_every_input(self):
        for n in (2, 4, 7):
            assert standard_qft(n).light_cone([n - 1]) == set(range(n))

    def test_cone_bounded_by_three_to_depth(self, rng, random_circuit):
        # Toffoli acts on 3 wires, so the growth base is 3
        for _ in range(10):
            c = random_circuit(rng, n_qubits=5, n_gates=8)
            for w in range(5):
                assert len(c.light_cone([w])) <= 3 ** c.depth

    def test_cone_matches_brute_force(self, rng, random_circuit):
        def brute(c, w):
            cone = {w}
            for layer in reversed(c.layers):
                for g in layer:
                    if set(g.qubits()) & cone:
                        cone |= set(g.qubits())
            return cone

        for _ in range(5):
            c = random_circuit(rng, n_qubits=6, n_gates=15)
            for w in range(6):
                assert c.light_cone([w]) == brute(c, w)


class TestLowering:
    def test_lowered_gate_set(self, rng, random_circuit):
        c = random_circuit(rng, n_qubits=4, n_gates=10)
        assert set(lower(c).gate_histogram()) <= {"h", "p", "cp"}

    def test_lowering_preserves_unitary(self, rng, random_circuit):
        for _ in range(4):
            c = random_circuit(rng, n_qubits=3, n_gates=8)
            d = np.linalg.norm(extract_unitary(lower(c)) - extract_unitary(c), 2)
            assert d < 1e-10

    def test_already_lowered_circuit_unchanged(self):
        c = standard_qft(3)
        assert lower(c).gate_histogram() == c.gate_histogram()


class TestGateBasics:
    def test_qubit_supports(self):
        assert set(CNOT(2, 0).qubits()) == {0, 2}
        assert set(Toffoli(1, 4, 2).qubits()) == {1, 2, 4}
        assert set(X(3).qubits()) == {3}

    def test_cp_is_symmetric_in_unitary(self):
        theta = dyadic(1, 2)
        b1 = CircuitBuilder(2)
        b1.cp(0, 1, theta)
        b2 = CircuitBuilder(2)
        b2.cp(1, 0, theta)
        u1 = extract_unitary(b1.build())
        u2 = extract_unitary(b2.build())
        assert np.allclose(u1, u2)

    def test_self_inverse_gates(self):
        for g in (H(0), X(1), CNOT(0, 1), Toffoli(0, 1, 2)):
            assert g.inverse() == g

    def test_cp_inverse_negates_angle(self):
        g = CP(0, 1, dyadic(3, 3))
        assert g.inverse() == CP(0, 1, dyadic(-3, 3))
