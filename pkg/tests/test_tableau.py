"""Tests for the stabilizer-tableau oracle."""
import numpy as np
import pytest
import stim

from starcluster.core.circuit import Circuit, CircuitBuilder, FaultLocation
from starcluster.core.pauli import PauliOp
from starcluster.core.tableau import (
    gf2_null_space,
    gf2_rref,
    learn_detectors,
    root_stabilizers,
    tableau_simulate,
    to_stim,
    verify_against_oracle,
)
from starcluster.exceptions import ResourceLimitError
from starcluster.suite import builtin_suite, discard_arm_circuit


def _pair():
    builder = CircuitBuilder()
    a = builder.qubit("a", root=True)
    b = builder.qubit("b", root=True)
    builder.cz(a, b)
    return builder.build()


class TestGf2:
    """Tests for the GF(2) helpers."""

    def test_rref(self):
        reduced, pivots = gf2_rref(np.array([[1, 1, 0], [1, 1, 0], [0, 1, 1]]))
        assert pivots == [0, 1]
        assert reduced.tolist() == [[1, 0, 1], [0, 1, 1]]

    def test_null_space(self):
        matrix = np.array([[1, 1, 0, 1], [0, 1, 1, 0]], dtype=np.uint8)
        basis = gf2_null_space(matrix, 4)
        assert basis.shape == (2, 4)
        assert not ((matrix.astype(int) @ basis.T.astype(int)) % 2).any()

    def test_null_space_of_empty(self):
        basis = gf2_null_space(np.zeros((0, 3), dtype=np.uint8), 3)
        assert basis.tolist() == np.eye(3, dtype=np.uint8).tolist()


class TestTableauSimulate:
    """Tests for single oracle runs."""

    def test_to_stim(self):
        assert to_stim(PauliOp.from_string("XIZ")) == stim.PauliString("+X_Z")

    def test_graph_state_pair(self):
        run = tableau_simulate(_pair(), (), seed=3)
        assert run.outcomes.shape == (0,)
        assert run.expectation(PauliOp.from_string("XZ")) == 1
        assert run.expectation(PauliOp.from_string("ZX")) == 1
        assert run.expectation(PauliOp.from_string("XI")) == 0

    def test_fault_changes_sign(self):
        circuit = _pair()
        fault = FaultLocation(2, PauliOp.from_string("ZI"))
        run = tableau_simulate(circuit, (fault,), seed=3)
        assert run.expectation(PauliOp.from_string("XZ")) == -1
        assert run.expectation(PauliOp.from_string("ZX")) == 1

    def test_root_stabilizers_of_pair(self):
        circuit = _pair()
        generators = root_stabilizers(tableau_simulate(circuit, (), seed=0), circuit)
        assert len(generators) == 2
        run = tableau_simulate(circuit, (), seed=0)
        assert all(run.expectation(g) in (1, -1) for g in generators)

    def test_cherry_outcomes_agree(self):
        """A Z-measured arm tip and its X-measured cherries report the same bit."""
        circuit = discard_arm_circuit(2)
        for seed in range(8):
            run = tableau_simulate(circuit, (), seed=seed)
            assert len(set(run.outcomes.tolist())) == 1
            assert run.fired == (bool(run.outcomes[0]),)

    def test_learned_detectors_are_even_parities(self):
        circuit = discard_arm_circuit(2)
        detectors, reference = learn_detectors(circuit, list(range(20)))
        assert detectors.shape == (2, 3)
        assert not (detectors.sum(axis=1) % 2).any()
        assert reference.shape == (3,)

    def test_qubit_cap(self):
        builder = CircuitBuilder()
        for _ in range(65):
            builder.qubit(root=True)
        circuit = builder.build()
        with pytest.raises(ResourceLimitError):
            tableau_simulate(circuit, (), seed=0)
        with pytest.raises(ResourceLimitError):
            verify_against_oracle(circuit, seed=0)


class TestVerifyAgainstOracle:
    """Frame propagation agrees with the oracle on the built-in suite."""

    @pytest.mark.parametrize("name", sorted(builtin_suite()))
    def test_builtin_suite(self, name):
        circuit = builtin_suite()[name]
        report = verify_against_oracle(circuit, seed=11)
        assert report.ok, report.as_dict()["disagreements"][:3]
        assert report.faults_checked > 0
        assert report.root_generators == len(circuit.roots)

    def test_empty_circuit(self):
        report = verify_against_oracle(Circuit(n=0, events=(), roots=()), seed=0)
        assert report.ok
        assert report.faults_checked == 0

    def test_detects_wrong_byproduct(self):
        """A rule with the wrong Pauli leaves a seed-dependent root state."""
        builder = CircuitBuilder()
        r = builder.qubit("r", root=True)
        m = builder.qubit("m")
        t = builder.qubit("t", root=True)
        builder.cz(r, m)
        builder.cz(m, t)
        outcome = builder.measure_x(m)
        builder.correct((outcome,), [("Z", t)])
        report = verify_against_oracle(builder.build(), seed=5)
        assert not report.ok
        assert "reference" in {d.kind for d in report.disagreements}

    def test_report_dict(self, chain3):
        data = verify_against_oracle(chain3, seed=2).as_dict()
        assert data["qubits"] == 3
        assert data["detectors"] == 0
        assert data["disagreements"] == []
