"""Tests for Pauli-frame propagation."""
import numpy as np
import pytest

from starcluster.core.circuit import CircuitBuilder, FaultLocation
from starcluster.core.faults import all_oracle_faults
from starcluster.core.pauli import PauliOp, pauli_mul
from starcluster.core.propagation import (
    LaneSet,
    RootFlip,
    batch_to_effect,
    propagate_batch,
    propagate_fault,
    propagate_fault_set,
    root_flip_class,
)
from starcluster.exceptions import InvalidArgumentError
from starcluster.protocol import assemble
from starcluster.suite import discard_arm_circuit


def _fault(circuit, event, text):
    return FaultLocation(event, PauliOp.from_string(text))


class TestSingleFault:
    """Hand-checked single faults on small circuits."""

    def test_measurement_flip_applies_byproduct(self, chain3):
        """Z before the X readout flips it and fires the X byproduct on the far root."""
        effect = propagate_fault(chain3, _fault(chain3, 5, "IZI"))
        assert effect.flipped_outcomes == frozenset({5})
        assert str(effect.residual) == "IIX"
        assert root_flip_class(effect, 2) is RootFlip.BENIGN
        assert root_flip_class(effect, 2, count_benign_as_flip=True) is RootFlip.FLIP
        assert root_flip_class(effect, 0) is RootFlip.NONE

    def test_root_prep_error(self, chain3):
        effect = propagate_fault(chain3, _fault(chain3, 0, "ZII"))
        assert effect.flipped_outcomes == frozenset()
        assert str(effect.residual) == "ZII"
        assert root_flip_class(effect, 0) is RootFlip.FLIP

    def test_x_spreads_through_cz(self, chain3):
        """X on the middle qubit becomes a stabilizer-like Z pair on the roots."""
        effect = propagate_fault(chain3, _fault(chain3, 1, "IXI"))
        assert effect.flipped_outcomes == frozenset()
        assert str(effect.residual) == "ZIZ"

    def test_two_root_byproduct(self):
        """A rule acting on two roots applies both factors when its outcome flips."""
        builder = CircuitBuilder()
        r = builder.qubit("r", root=True)
        m = builder.qubit("m")
        t = builder.qubit("t", root=True)
        builder.cz(r, m)
        builder.cz(m, t)
        outcome = builder.measure_x(m)
        builder.correct((outcome,), [("Z", r), ("Z", t)])
        circuit = builder.build()
        effect = propagate_fault(circuit, FaultLocation(outcome, PauliOp.single(3, m, "Z")))
        assert str(effect.residual) == "ZIZ"
        assert root_flip_class(effect, r) is RootFlip.FLIP
        assert root_flip_class(effect, t) is RootFlip.FLIP

    def test_failed_cz_does_not_spread(self):
        builder = CircuitBuilder()
        root = builder.qubit(root=True)
        other = builder.qubit()
        builder.cz(root, other, succeeded=False)
        builder.measure_z(other)
        circuit = builder.build()
        effect = propagate_fault(circuit, FaultLocation(1, PauliOp.single(2, other, "X")))
        assert effect.flipped_outcomes == frozenset({3})
        assert effect.residual.is_identity

    def test_vote_needs_majority(self):
        circuit = discard_arm_circuit(2)
        single = propagate_fault(circuit, _fault(circuit, 7, "IXII"))
        assert single.flipped_outcomes == frozenset({7})
        assert single.residual.is_identity
        double = propagate_fault_set(
            circuit, [_fault(circuit, 7, "IXII"), _fault(circuit, 8, "IIZI")]
        )
        assert double.flipped_outcomes == frozenset({7, 8})
        assert str(double.residual) == "ZIII"

    def test_root_flip_class_rejects_non_root(self, chain3):
        effect = propagate_fault(chain3, _fault(chain3, 0, "ZII"))
        with pytest.raises(InvalidArgumentError):
            root_flip_class(effect, 1, roots=chain3.roots)
        with pytest.raises(InvalidArgumentError):
            root_flip_class(effect, 7)


class TestBatchPropagation:
    """The vectorized path agrees with the single-fault path."""

    @pytest.fixture
    def record(self, p2_params):
        return assemble(p2_params.with_updates(L=4), [False, True], neighbor_count=1)

    def test_batch_matches_single(self, record):
        circuit = record.circuit
        faults = all_oracle_faults(circuit)
        batch = propagate_batch(circuit, LaneSet.single_faults(circuit, faults))
        assert batch.lanes == len(faults)
        for lane, fault in enumerate(faults):
            assert batch_to_effect(circuit, batch, lane) == propagate_fault(circuit, fault)

    def test_linearity(self, p1_params):
        """Two faults propagate to the product of their individual effects."""
        circuit = assemble(p1_params.with_updates(L=5), [True, False, True], 2).circuit
        faults = all_oracle_faults(circuit)
        pairs = [(faults[k], faults[-1 - 3 * k]) for k in range(0, len(faults) // 4, 5)]
        for first, second in pairs:
            a = propagate_fault(circuit, first)
            b = propagate_fault(circuit, second)
            both = propagate_fault_set(circuit, [first, second])
            assert both.flipped_outcomes == a.flipped_outcomes ^ b.flipped_outcomes
            assert both.residual == pauli_mul(a.residual, b.residual)

    def test_multi_fault_lanes(self, chain3):
        lane_set = LaneSet(chain3, 3)
        lane_set.add_to_lanes(np.array([0, 2]), _fault(chain3, 5, "IZI"))
        lane_set.add(2, _fault(chain3, 0, "ZII"))
        batch = propagate_batch(chain3, lane_set)
        assert batch.flips.tolist() == [[1, 0, 1]]
        # roots are (0, 2)
        assert batch.root_z.tolist() == [[0, 0, 1], [0, 0, 0]]
        assert batch.root_x.tolist() == [[0, 0, 0], [1, 0, 1]]
        assert batch.root_flips().tolist() == [[0, 0, 1], [0, 0, 0]]
        assert batch.root_flips(count_benign_as_flip=True).tolist() == [[0, 0, 1], [1, 0, 1]]

    def test_lane_out_of_range(self, chain3):
        lane_set = LaneSet(chain3, 2)
        with pytest.raises(InvalidArgumentError):
            lane_set.add(2, _fault(chain3, 5, "IZI"))

    def test_empty_lanes(self, chain3):
        batch = propagate_batch(chain3, LaneSet(chain3, 0))
        assert batch.flips.shape == (1, 0)
