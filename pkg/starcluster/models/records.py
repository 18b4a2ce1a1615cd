"""Records produced by one sampled star assembly."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..core.circuit import Circuit
from .params import ProtocolParams


class LeafLabel(str, Enum):
    """Fate of one leaf of the central star."""

    SUCCESS = "SUCCESS"
    FAILED = "FAILED"
    REDUNDANT = "REDUNDANT"


@dataclass(frozen=True)
class LeafOutcome:
    """One central leaf: its label and, for attempted leaves, the direction."""

    leaf: int
    label: LeafLabel
    direction: int | None = None


@dataclass(frozen=True)
class Connection:
    """A successful fusion between the central star and neighbor `direction`."""

    direction: int
    partner_root: int
    fusion_event: int
    qubits: frozenset[int]


@dataclass(frozen=True)
class AssemblyRecord:
    """Outcome of assembling the central star with its neighbors."""

    params: ProtocolParams
    leaves: tuple[LeafOutcome, ...]
    circuit: Circuit
    connections: tuple[Connection, ...]
    neighbor_roots: tuple[int, ...]
    neighbor_count: int
    attempts: int
    central_root: int = 0
    discarded_qubits: frozenset[int] = field(default_factory=frozenset)

    @property
    def success_count(self) -> int:
        """Number of leaves labeled SUCCESS."""
        return sum(1 for leaf in self.leaves if leaf.label is LeafLabel.SUCCESS)

    @property
    def star_failed(self) -> bool:
        """True when fewer connections than required were made."""
        return self.success_count < self.neighbor_count

    def connection_of(self, qubit: int) -> Connection | None:
        """Return the successful connection a qubit belongs to, if any."""
        for connection in self.connections:
            if qubit in connection.qubits:
                return connection
        return None
