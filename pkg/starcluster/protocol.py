"""Star clusters and the near-deterministic connection process."""
from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum
import logging
import math

import networkx as nx
import numpy as np
from scipy import stats

from .const import MIN_LEAVES, MIN_LEAVES_CAP, REQUIRED_CONNECTIONS
from .core.circuit import CircuitBuilder
from .exceptions import InvalidArgumentError, ResourceLimitError
from .models.config import ArmGeometry
from .models.params import STAR_ARM, ProtocolParams, check_probability
from .models.records import AssemblyRecord, Connection, LeafLabel, LeafOutcome

_LOGGER = logging.getLogger(__name__)

CENTRAL = "central"
_SEARCH_BLOCK = 4096
_FAILURE_CHUNK = 65_536


class QubitRole(str, Enum):
    """Role of a qubit inside a star."""

    ROOT = "ROOT"
    CHAIN = "CHAIN"
    LEAF_TIP = "LEAF_TIP"
    CHERRY = "CHERRY"


@dataclass(frozen=True)
class Arm:
    """Qubits of one arm: chain from the root outwards, cherries per chain qubit."""

    chain: tuple[int, ...]
    cherries: tuple[tuple[int, ...], ...]

    @property
    def tip(self) -> int:
        """The leaf tip used for fusion."""
        return self.chain[-1]

    @property
    def qubits(self) -> frozenset[int]:
        """Every qubit of the arm."""
        return frozenset(self.chain).union(*self.cherries)


class ClusterGraph:
    """Graph of a (possibly extended) star cluster.

    Node attributes: `role` (QubitRole), `owner` (star identifier) and, for
    non-root qubits, `arm` (arm index).
    """

    def __init__(self, graph: nx.Graph, arms: Sequence[Arm]) -> None:
        """Initialize from a built graph and its arm index."""
        self.graph = graph
        self.arms = tuple(arms)

    @property
    def n(self) -> int:
        """Number of qubits."""
        return self.graph.number_of_nodes()

    @property
    def roles(self) -> dict[int, QubitRole]:
        """Map qubit -> role."""
        return dict(self.graph.nodes(data="role"))

    @property
    def owner(self) -> dict[int, str]:
        """Map qubit -> star identifier."""
        return dict(self.graph.nodes(data="owner"))

    @property
    def edges(self) -> set[frozenset[int]]:
        """Undirected edge set."""
        return {frozenset(edge) for edge in self.graph.edges}

    def qubits_with_role(self, role: QubitRole) -> list[int]:
        """Sorted qubits carrying `role`."""
        return sorted(q for q, r in self.graph.nodes(data="role") if r is role)


def build_extended_star(L: int, geometry: ArmGeometry, owner: str = CENTRAL) -> ClusterGraph:
    """Build a star whose L arms follow `geometry`; qubit 0 is the root."""
    if L < MIN_LEAVES:
        raise InvalidArgumentError(f"L must be >= {MIN_LEAVES}, got {L}")
    if not isinstance(geometry, ArmGeometry):
        raise InvalidArgumentError(f"invalid geometry descriptor {geometry!r}")
    graph = nx.Graph()
    graph.add_node(0, role=QubitRole.ROOT, owner=owner)
    arms = []
    next_node = 1
    for index in range(L):
        chain = []
        previous = 0
        for depth in range(1, geometry.chain_length + 1):
            role = QubitRole.LEAF_TIP if depth == geometry.chain_length else QubitRole.CHAIN
            graph.add_node(next_node, role=role, owner=owner, arm=index)
            graph.add_edge(previous, next_node)
            chain.append(next_node)
            previous = next_node
            next_node += 1
        cherries = []
        for parent in chain:
            group = []
            for _ in range(geometry.cherries_per_chain_qubit):
                graph.add_node(next_node, role=QubitRole.CHERRY, owner=owner, arm=index)
                graph.add_edge(parent, next_node)
                group.append(next_node)
                next_node += 1
            cherries.append(tuple(group))
        arms.append(Arm(tuple(chain), tuple(cherries)))
    return ClusterGraph(graph, arms)


def build_star(L: int) -> ClusterGraph:
    """Build a plain star: one root and L leaf tips."""
    return build_extended_star(L, STAR_ARM)


def failure_probability(L: int, p_s: float) -> float:
    """Probability that fewer than the required connections succeed among L attempts."""
    if L < 0:
        raise InvalidArgumentError(f"L must be >= 0, got {L}")
    check_probability("p_s", p_s, allow_one=True)
    return float(stats.binom.cdf(REQUIRED_CONNECTIONS - 1, L, p_s))


def min_leaves(p_s: float, p_f_max: float, cap: int = MIN_LEAVES_CAP) -> int:
    """Smallest L >= 4 whose failure probability is below p_f_max."""
    if not 0 < p_s <= 1:
        raise InvalidArgumentError(f"p_s must be in (0, 1], got {p_s}")
    if not 0 < p_f_max < 1:
        raise InvalidArgumentError(f"p_f_max must be in (0, 1), got {p_f_max}")
    for start in range(MIN_LEAVES, cap + 1, _SEARCH_BLOCK):
        leaves = np.arange(start, min(start + _SEARCH_BLOCK, cap + 1))
        below = stats.binom.cdf(REQUIRED_CONNECTIONS - 1, leaves, p_s) < p_f_max
        if below.any():
            L = int(leaves[np.argmax(below)])
            _LOGGER.debug("min_leaves(p_s=%s, p_f_max=%s) = %d", p_s, p_f_max, L)
            return L
    raise ResourceLimitError(
        f"no L <= {cap} reaches failure probability {p_f_max} at p_s={p_s}"
    )


def indirect_z_decode(z0: int, x1: int, x2: int) -> int:
    """Majority vote of a Z outcome and its two indirect estimates."""
    bits = (z0, x1, x2)
    if any(bit not in (0, 1) for bit in bits):
        raise InvalidArgumentError(f"outcomes must be bits, got {bits}")
    return int(sum(bits) >= 2)


def _allocate_arm(builder: CircuitBuilder, geometry: ArmGeometry, prefix: str) -> Arm:
    chain = [builder.qubit(f"{prefix}.q{depth}") for depth in range(1, geometry.chain_length + 1)]
    cherries = tuple(
        tuple(
            builder.qubit(f"{prefix}.q{depth}.k{k}")
            for k in range(geometry.cherries_per_chain_qubit)
        )
        for depth in range(1, geometry.chain_length + 1)
    )
    return Arm(tuple(chain), cherries)


def _entangle_arm(builder: CircuitBuilder, root: int, arm: Arm) -> None:
    builder.cz(root, arm.chain[0])
    for a, b in zip(arm.chain, arm.chain[1:]):
        builder.cz(a, b)
    for parent, group in zip(arm.chain, arm.cherries):
        for cherry in group:
            builder.cz(parent, cherry)


def chain_byproduct(position: int, interior: int) -> tuple[str, str]:
    """Byproduct of the X outcome at `position` (1-based from the near root).

    Returns (letter, "near" | "far") for a linear chain with `interior`
    X-measured qubits between two kept roots.
    """
    if not 1 <= position <= interior:
        raise InvalidArgumentError(f"position {position} outside 1..{interior}")
    if interior % 2 == 0:
        return ("Z", "far") if position % 2 else ("Z", "near")
    return ("X", "far") if position % 2 else ("Z", "far")


def _connect(builder: CircuitBuilder, central: int, partner: int, near: Arm, far: Arm) -> None:
    """Measure out a fused chain root-near-far-partner, leaving a root-root edge."""
    interior = list(zip(near.chain, near.cherries)) + list(
        zip(reversed(far.chain), reversed(far.cherries))
    )
    roots = {"near": central, "far": partner}
    terms = []
    for position in range(1, len(interior) + 1):
        letter, side = chain_byproduct(position, len(interior))
        terms.append([(letter, roots[side])])
    for (_, group), term in zip(interior, terms):
        for cherry in group:
            builder.correct((builder.measure_z(cherry),), term)
    for (qubit, _), term in zip(interior, terms):
        builder.correct((builder.measure_x(qubit),), term)


def _discard(builder: CircuitBuilder, root: int, arm: Arm) -> None:
    """Cut an arm off its root; cherries give a majority vote on the first Z outcome."""
    z_outcomes = [builder.measure_z(qubit) for qubit in arm.chain]
    x_outcomes = [[builder.measure_x(cherry) for cherry in group] for group in arm.cherries]
    builder.correct((z_outcomes[0], *x_outcomes[0]), [("Z", root)])


def _plan_attempts(
    L: int, fusion_outcomes: Iterable[bool], neighbor_count: int
) -> tuple[list[LeafOutcome], list[tuple[int, int, bool]]]:
    leaves: list[LeafOutcome] = []
    attempts: list[tuple[int, int, bool]] = []
    outcomes = iter(fusion_outcomes)
    connected: set[int] = set()
    cursor = 0
    for leaf in range(L):
        if len(connected) >= neighbor_count:
            leaves.append(LeafOutcome(leaf, LeafLabel.REDUNDANT))
            continue
        direction = next(
            d
            for d in ((cursor + k) % neighbor_count for k in range(neighbor_count))
            if d not in connected
        )
        try:
            succeeded = bool(next(outcomes))
        except StopIteration:
            raise InvalidArgumentError(
                f"fusion outcomes exhausted after {len(attempts)} attempts"
            ) from None
        attempts.append((leaf, direction, succeeded))
        cursor = (direction + 1) % neighbor_count
        if succeeded:
            connected.add(direction)
            leaves.append(LeafOutcome(leaf, LeafLabel.SUCCESS, direction))
        else:
            leaves.append(LeafOutcome(leaf, LeafLabel.FAILED, direction))
    return leaves, attempts


def assemble(
    params: ProtocolParams,
    fusion_outcomes: Iterable[bool],
    neighbor_count: int = REQUIRED_CONNECTIONS,
) -> AssemblyRecord:
    """Build the assembly circuit for given fusion results, consumed in attempt order.

    Qubit 0 is the central root, qubits 1-4 the neighbor roots. All stars are
    fully prepared before the first fusion attempt.
    """
    if not 0 <= neighbor_count <= REQUIRED_CONNECTIONS:
        raise InvalidArgumentError(
            f"neighbor_count must be in [0, {REQUIRED_CONNECTIONS}], got {neighbor_count}"
        )
    geometry = params.arm
    leaves, attempts = _plan_attempts(params.L, fusion_outcomes, neighbor_count)

    builder = CircuitBuilder()
    central = builder.qubit("root", root=True)
    neighbor_roots = tuple(
        builder.qubit(f"n{d}.root", root=True) for d in range(REQUIRED_CONNECTIONS)
    )
    central_arms = [_allocate_arm(builder, geometry, f"c{leaf}") for leaf in range(params.L)]
    neighbor_arms = [
        _allocate_arm(builder, geometry, f"n{direction}.a{attempt}")
        for attempt, (_, direction, _) in enumerate(attempts)
    ]

    for arm in central_arms:
        _entangle_arm(builder, central, arm)
    for arm, (_, direction, _) in zip(neighbor_arms, attempts):
        _entangle_arm(builder, neighbor_roots[direction], arm)

    connections = []
    discarded: set[int] = set()
    for arm, (leaf, direction, succeeded) in zip(neighbor_arms, attempts):
        near = central_arms[leaf]
        partner = neighbor_roots[direction]
        fusion = builder.cz(near.tip, arm.tip, succeeded)
        if succeeded:
            _connect(builder, central, partner, near, arm)
            connections.append(Connection(direction, partner, fusion, near.qubits | arm.qubits))
        else:
            _discard(builder, central, near)
            _discard(builder, partner, arm)
            discarded |= near.qubits | arm.qubits
    for outcome in leaves:
        if outcome.label is LeafLabel.REDUNDANT:
            _discard(builder, central, central_arms[outcome.leaf])
            discarded |= central_arms[outcome.leaf].qubits

    record = AssemblyRecord(
        params=params,
        leaves=tuple(leaves),
        circuit=builder.build(),
        connections=tuple(connections),
        neighbor_roots=neighbor_roots,
        neighbor_count=neighbor_count,
        attempts=len(attempts),
        central_root=central,
        discarded_qubits=frozenset(discarded),
    )
    _LOGGER.debug(
        "Assembled star: %d attempts, %d successes, star_failed=%s, %d qubits",
        record.attempts,
        record.success_count,
        record.star_failed,
        record.circuit.n,
    )
    return record


def sample_assembly(
    params: ProtocolParams,
    neighbor_count: int = REQUIRED_CONNECTIONS,
    rng: np.random.Generator | None = None,
) -> AssemblyRecord:
    """Draw one fusion result per leaf and assemble."""
    rng = rng if rng is not None else np.random.default_rng(params.seed)
    outcomes = rng.random(params.L) < params.p_s
    return assemble(params, outcomes.tolist(), neighbor_count)


@dataclass(frozen=True)
class FailureEstimate:
    """Monte Carlo star-failure rate next to the exact binomial value."""

    L: int
    p_s: float
    samples: int
    failures: int
    expected: float

    @property
    def rate(self) -> float:
        """Empirical failure rate."""
        return self.failures / self.samples

    @property
    def stderr(self) -> float:
        """Binomial standard error of the rate, from the expected value."""
        return math.sqrt(self.expected * (1 - self.expected) / self.samples)

    @property
    def z_score(self) -> float:
        """Deviation from the expected value in standard errors."""
        if self.stderr == 0:
            return 0.0 if self.rate == self.expected else math.inf
        return (self.rate - self.expected) / self.stderr


def estimate_failure_rate(
    params: ProtocolParams, samples: int, rng: np.random.Generator | None = None
) -> FailureEstimate:
    """Count stars with fewer than the required successes among L leaf trials."""
    if samples <= 0:
        raise InvalidArgumentError(f"samples must be > 0, got {samples}")
    rng = rng if rng is not None else np.random.default_rng(params.seed)
    failures = 0
    remaining = samples
    while remaining:
        rows = min(remaining, _FAILURE_CHUNK)
        successes = (rng.random((rows, params.L)) < params.p_s).sum(axis=1)
        failures += int((successes < REQUIRED_CONNECTIONS).sum())
        remaining -= rows
    estimate = FailureEstimate(
        L=params.L,
        p_s=params.p_s,
        samples=samples,
        failures=failures,
        expected=failure_probability(params.L, params.p_s),
    )
    _LOGGER.info(
        "Star failure: %d/%d (rate %.6g, expected %.6g)",
        failures,
        samples,
        estimate.rate,
        estimate.expected,
    )
    return estimate


def format_assembly(record: AssemblyRecord) -> str:
    """Render one leaf per line: `leaf <index> <LABEL> <direction|->`."""
    params = record.params
    lines = [
        f"# variant {params.variant.value} L {params.L} p_s {params.p_s} "
        f"successes {record.success_count} star_failed {str(record.star_failed).lower()}"
    ]
    for outcome in record.leaves:
        direction = "-" if outcome.direction is None else str(outcome.direction)
        lines.append(f"leaf {outcome.leaf} {outcome.label.value} {direction}")
    return "\n".join(lines) + "\n"
