"""Tests for star graphs, the connection process and star failure."""
import itertools

import numpy as np
import pytest

from starcluster.core.config_manager import config_manager
from starcluster.exceptions import InvalidArgumentError, ResourceLimitError
from starcluster.models.records import LeafLabel
from starcluster.protocol import (
    QubitRole,
    assemble,
    build_extended_star,
    build_star,
    chain_byproduct,
    estimate_failure_rate,
    failure_probability,
    format_assembly,
    indirect_z_decode,
    min_leaves,
    sample_assembly,
)


class TestClusterGraphs:
    """Tests for star and extended-star graphs."""

    def test_plain_star(self):
        star = build_star(7)
        assert star.n == 8
        assert star.qubits_with_role(QubitRole.ROOT) == [0]
        assert star.qubits_with_role(QubitRole.LEAF_TIP) == list(range(1, 8))
        assert star.edges == {frozenset((0, k)) for k in range(1, 8)}
        assert set(star.owner.values()) == {"central"}

    def test_cherry_star(self):
        star = build_extended_star(5, config_manager.get_geometry("default"))
        assert star.n == 16
        assert len(star.qubits_with_role(QubitRole.LEAF_TIP)) == 5
        assert len(star.qubits_with_role(QubitRole.CHERRY)) == 10
        assert len(star.edges) == 15
        for arm in star.arms:
            assert all(star.graph.degree[c] == 1 for group in arm.cherries for c in group)
            assert star.graph.has_edge(0, arm.chain[0])

    def test_long_arm_star(self):
        star = build_extended_star(4, config_manager.get_geometry("long_arm"), owner="n0")
        assert star.n == 25
        assert len(star.qubits_with_role(QubitRole.CHAIN)) == 4
        assert len(star.qubits_with_role(QubitRole.LEAF_TIP)) == 4
        assert star.roles[star.arms[0].tip] is QubitRole.LEAF_TIP
        assert star.owner[0] == "n0"
        assert len(star.arms[0].qubits) == 6

    def test_invalid(self):
        with pytest.raises(InvalidArgumentError):
            build_star(3)
        with pytest.raises(InvalidArgumentError):
            build_extended_star(5, {"chain_length": 1})


class TestStarFailure:
    """Tests for failure_probability, min_leaves and the Monte Carlo check."""

    @pytest.mark.parametrize(
        "L,p_s,expected",
        [(7, 0.9, 2.7279e-3), (6, 0.9, 0.015850), (17, 0.5, 834 / 131072)],
    )
    def test_failure_probability(self, L, p_s, expected):
        assert failure_probability(L, p_s) == pytest.approx(expected, rel=1e-3)

    def test_too_few_leaves_always_fail(self):
        assert failure_probability(3, 0.9) == 1.0
        assert failure_probability(0, 0.5) == 1.0

    def test_perfect_gates(self):
        assert failure_probability(4, 1.0) == 0.0

    @pytest.mark.parametrize(
        "p_s,expected", [(0.9, 7), (0.5, 17), (0.1, 97), (0.95, 6), (1.0, 4)]
    )
    def test_min_leaves(self, p_s, expected):
        L = min_leaves(p_s, 0.01)
        assert L == expected
        assert failure_probability(L, p_s) < 0.01
        if L > 4:
            assert failure_probability(L - 1, p_s) >= 0.01

    def test_min_leaves_cap(self):
        with pytest.raises(ResourceLimitError):
            min_leaves(0.01, 0.01, cap=10)

    @pytest.mark.parametrize("p_s,p_f", [(0.0, 0.01), (1.2, 0.01), (0.5, 0.0), (0.5, 1.0)])
    def test_min_leaves_invalid(self, p_s, p_f):
        with pytest.raises(InvalidArgumentError):
            min_leaves(p_s, p_f)

    def test_monte_carlo_matches_binomial(self, p1_params):
        estimate = estimate_failure_rate(p1_params, 200_000, np.random.default_rng(1))
        assert estimate.expected == pytest.approx(failure_probability(7, 0.9))
        assert 3 * estimate.stderr < 0.15 * estimate.expected
        assert abs(estimate.rate - estimate.expected) <= 3 * estimate.stderr

    def test_monte_carlo_invalid(self, p1_params):
        with pytest.raises(InvalidArgumentError):
            estimate_failure_rate(p1_params, 0)


class TestDecoders:
    """Tests for the indirect Z decoder and chain byproducts."""

    @pytest.mark.parametrize("bits", list(itertools.product((0, 1), repeat=3)))
    def test_majority(self, bits):
        assert indirect_z_decode(*bits) == int(sum(bits) >= 2)

    def test_single_error_corrected(self):
        assert indirect_z_decode(1, 0, 0) == 0
        assert indirect_z_decode(0, 1, 1) == 1

    def test_rejects_non_bits(self):
        with pytest.raises(InvalidArgumentError):
            indirect_z_decode(2, 0, 0)

    @pytest.mark.parametrize(
        "position,interior,expected",
        [
            (1, 1, ("X", "far")),
            (1, 2, ("Z", "far")),
            (2, 2, ("Z", "near")),
            (1, 3, ("X", "far")),
            (2, 3, ("Z", "far")),
            (3, 3, ("X", "far")),
            (4, 4, ("Z", "near")),
        ],
    )
    def test_chain_byproduct(self, position, interior, expected):
        assert chain_byproduct(position, interior) == expected

    def test_chain_byproduct_range(self):
        with pytest.raises(InvalidArgumentError):
            chain_byproduct(0, 2)
        with pytest.raises(InvalidArgumentError):
            chain_byproduct(3, 2)


class TestAssemble:
    """Tests for assembling the central star with its neighbors."""

    def test_all_succeed(self, p1_params):
        record = assemble(p1_params, [True] * 4)
        assert [leaf.label for leaf in record.leaves] == [LeafLabel.SUCCESS] * 4 + [
            LeafLabel.REDUNDANT
        ] * 3
        assert [leaf.direction for leaf in record.leaves[:4]] == [0, 1, 2, 3]
        assert not record.star_failed
        assert record.attempts == 4
        assert record.circuit.n == 5 + 7 + 4
        assert record.circuit.roots == (0, 1, 2, 3, 4)
        assert {c.partner_root for c in record.connections} == {1, 2, 3, 4}

    def test_failed_direction_retried(self, p1_params):
        record = assemble(p1_params, [False, True, True, True, True])
        assert [(leaf.label, leaf.direction) for leaf in record.leaves[:5]] == [
            (LeafLabel.FAILED, 0),
            (LeafLabel.SUCCESS, 1),
            (LeafLabel.SUCCESS, 2),
            (LeafLabel.SUCCESS, 3),
            (LeafLabel.SUCCESS, 0),
        ]
        assert record.success_count == 4
        assert record.circuit.qubit_label(5) == "c0.q1"
        assert record.circuit.qubit_label(12) == "n0.a0.q1"

    def test_star_failure(self, p1_params):
        record = assemble(p1_params, [False] * 7)
        assert record.star_failed
        assert record.success_count == 0
        assert record.connections == ()
        assert record.attempts == 7

    def test_outcomes_exhausted(self, p1_params):
        with pytest.raises(InvalidArgumentError, match="exhausted"):
            assemble(p1_params, [True])

    def test_neighbor_count_range(self, p1_params):
        with pytest.raises(InvalidArgumentError):
            assemble(p1_params, [True] * 5, neighbor_count=5)

    def test_cherry_arms(self, p2_params):
        record = assemble(p2_params, [True] * 4)
        # 5 roots, 7 central arms and 4 neighbor arms of 3 qubits each
        assert record.circuit.n == 5 + 3 * 11
        connection = record.connection_of(5)
        assert connection is not None and connection.direction == 0
        assert len(connection.qubits) == 6
        assert record.connection_of(0) is None

    def test_discarded_qubits(self, p2_params):
        record = assemble(p2_params, [False, True, True, True, True])
        assert record.discarded_qubits
        assert not record.discarded_qubits & set(record.circuit.roots)
        for connection in record.connections:
            assert not connection.qubits & record.discarded_qubits

    def test_format_assembly(self, p1_params):
        text = format_assembly(assemble(p1_params, [False, True, True, True, True]))
        assert text.splitlines() == [
            "# variant p1 L 7 p_s 0.9 successes 4 star_failed false",
            "leaf 0 FAILED 0",
            "leaf 1 SUCCESS 1",
            "leaf 2 SUCCESS 2",
            "leaf 3 SUCCESS 3",
            "leaf 4 SUCCESS 0",
            "leaf 5 REDUNDANT -",
            "leaf 6 REDUNDANT -",
        ]

    def test_sample_assembly_reproducible(self, p2_params):
        first = sample_assembly(p2_params, rng=np.random.default_rng(42))
        second = sample_assembly(p2_params, rng=np.random.default_rng(42))
        assert format_assembly(first) == format_assembly(second)
        assert first.circuit == second.circuit

    def test_sample_assembly_certain_success(self, p1_params):
        record = sample_assembly(p1_params.with_updates(p_s=1.0))
        assert record.success_count == 4
        assert record.attempts == 4
