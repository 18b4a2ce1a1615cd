"""Assembly circuits: preparations, probabilistic CZ gates and basis measurements."""
from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
import logging

from ..exceptions import CircuitConstructionError, InvalidArgumentError
from .pauli import PauliOp, pauli_mul

_LOGGER = logging.getLogger(__name__)


class EventKind(str, Enum):
    """Kinds of circuit events."""

    PREP_PLUS = "P"
    CZ = "CZ"
    MEAS_X = "MX"
    MEAS_Z = "MZ"

    @property
    def is_measurement(self) -> bool:
        """Return True for X/Z basis measurements."""
        return self in (EventKind.MEAS_X, EventKind.MEAS_Z)


@dataclass(frozen=True, slots=True)
class CircuitEvent:
    """One event of the ordered assembly sequence."""

    index: int
    kind: EventKind
    qubits: tuple[int, ...]
    succeeded: bool = True

    @property
    def observable(self) -> str | None:
        """Return the measured Pauli letter, or None for non-measurements."""
        if self.kind is EventKind.MEAS_X:
            return "X"
        if self.kind is EventKind.MEAS_Z:
            return "Z"
        return None


@dataclass(frozen=True, slots=True)
class CorrectionRule:
    """Feed-forward byproduct driven by one outcome or a majority vote.

    With a single source the byproduct fires when that outcome is 1. With an
    odd number of sources it fires when the majority of the outcomes is 1;
    the sources are redundant estimates of the same bit.
    """

    sources: tuple[int, ...]
    byproduct: PauliOp

    @property
    def is_vote(self) -> bool:
        """Return True for majority-vote rules."""
        return len(self.sources) > 1


@dataclass(frozen=True)
class Circuit:
    """Validated, immutable assembly circuit."""

    n: int
    events: tuple[CircuitEvent, ...]
    roots: tuple[int, ...]
    rules: tuple[CorrectionRule, ...] = ()
    labels: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        """Check every structural invariant."""
        validate_circuit(self)

    @cached_property
    def measurements(self) -> tuple[int, ...]:
        """Event indices of all measurements, in time order."""
        return tuple(e.index for e in self.events if e.kind.is_measurement)

    @cached_property
    def measurement_row(self) -> dict[int, int]:
        """Map a measurement event index to its row in outcome records."""
        return {index: row for row, index in enumerate(self.measurements)}

    @cached_property
    def measured_by(self) -> dict[int, int]:
        """Map a measured qubit to its measurement event index."""
        return {e.qubits[0]: e.index for e in self.events if e.kind.is_measurement}

    @cached_property
    def root_mask(self) -> int:
        """Bit mask of the root qubits."""
        mask = 0
        for root in self.roots:
            mask |= 1 << root
        return mask

    def qubit_label(self, qubit: int) -> str:
        """Return a human-readable name for a qubit."""
        if qubit < len(self.labels) and self.labels[qubit]:
            return self.labels[qubit]
        return f"q{qubit}"


def validate_circuit(circuit: Circuit) -> None:
    """Raise CircuitConstructionError if the circuit breaks an invariant."""
    n = circuit.n
    prepared: set[int] = set()
    measured: set[int] = set()
    roots = set(circuit.roots)
    if len(roots) != len(circuit.roots):
        raise CircuitConstructionError("duplicate root qubit")
    for root in roots:
        if not 0 <= root < n:
            raise CircuitConstructionError(f"root {root} out of range for n={n}")

    for position, event in enumerate(circuit.events):
        if event.index != position:
            raise CircuitConstructionError(
                f"index {event.index} does not match position {position}", position
            )
        for qubit in event.qubits:
            if not 0 <= qubit < n:
                raise CircuitConstructionError(f"qubit {qubit} out of range", position)
            if qubit in measured:
                raise CircuitConstructionError(
                    f"qubit {qubit} used after its measurement", position
                )
        if event.kind is EventKind.PREP_PLUS:
            (qubit,) = event.qubits
            if qubit in prepared:
                raise CircuitConstructionError(f"qubit {qubit} prepared twice", position)
            prepared.add(qubit)
            continue
        for qubit in event.qubits:
            if qubit not in prepared:
                raise CircuitConstructionError(
                    f"qubit {qubit} used before preparation", position
                )
        if event.kind is EventKind.CZ:
            if len(event.qubits) != 2 or event.qubits[0] == event.qubits[1]:
                raise CircuitConstructionError("CZ needs two distinct qubits", position)
            continue
        (qubit,) = event.qubits
        if qubit in roots:
            raise CircuitConstructionError(f"root {qubit} must stay unmeasured", position)
        measured.add(qubit)

    unprepared = set(range(n)) - prepared
    if unprepared:
        raise CircuitConstructionError(f"qubits never prepared: {sorted(unprepared)}")
    unmeasured = set(range(n)) - measured - roots
    if unmeasured:
        raise CircuitConstructionError(
            f"non-root qubits never measured: {sorted(unmeasured)}"
        )

    for rule in circuit.rules:
        if not rule.sources or len(rule.sources) % 2 == 0:
            raise CircuitConstructionError(
                f"correction rule needs an odd number of sources, got {rule.sources}"
            )
        for source in rule.sources:
            if not 0 <= source < len(circuit.events):
                raise CircuitConstructionError(f"rule source {source} out of range")
            if not circuit.events[source].kind.is_measurement:
                raise CircuitConstructionError(
                    "rule source is not a measurement", source
                )
        if rule.byproduct.n != n:
            raise CircuitConstructionError("byproduct size does not match circuit")
        if rule.byproduct.support & ~_mask(roots):
            raise CircuitConstructionError(
                f"byproduct {rule.byproduct} acts outside the root set"
            )


def _mask(qubits: Iterable[int]) -> int:
    mask = 0
    for qubit in qubits:
        mask |= 1 << qubit
    return mask


class CircuitBuilder:
    """Incrementally assemble a Circuit; validation happens in build()."""

    def __init__(self) -> None:
        """Initialize an empty builder."""
        self._events: list[CircuitEvent] = []
        self._labels: list[str] = []
        self._roots: list[int] = []
        self._rules: list[tuple[tuple[int, ...], list[tuple[str, int]]]] = []

    @property
    def n(self) -> int:
        """Number of qubits allocated so far."""
        return len(self._labels)

    def qubit(self, label: str = "", root: bool = False) -> int:
        """Allocate a qubit and emit its |+> preparation."""
        qubit = len(self._labels)
        self._labels.append(label)
        if root:
            self._roots.append(qubit)
        self._append(EventKind.PREP_PLUS, (qubit,))
        return qubit

    def cz(self, a: int, b: int, succeeded: bool = True) -> int:
        """Emit a CZ gate; a failed gate contributes no edge."""
        return self._append(EventKind.CZ, (a, b), succeeded)

    def measure_x(self, qubit: int) -> int:
        """Emit an X-basis measurement and return its event index."""
        return self._append(EventKind.MEAS_X, (qubit,))

    def measure_z(self, qubit: int) -> int:
        """Emit a Z-basis measurement and return its event index."""
        return self._append(EventKind.MEAS_Z, (qubit,))

    def correct(self, sources: Sequence[int], terms: Sequence[tuple[str, int]]) -> None:
        """Register a byproduct (letter, qubit) list driven by `sources`."""
        self._rules.append((tuple(sources), list(terms)))

    def build(self) -> Circuit:
        """Return the validated circuit."""
        n = self.n
        rules = tuple(
            CorrectionRule(sources, PauliOp.from_terms(n, terms))
            for sources, terms in self._rules
        )
        return Circuit(
            n=n,
            events=tuple(self._events),
            roots=tuple(self._roots),
            rules=rules,
            labels=tuple(self._labels),
        )

    def _append(self, kind: EventKind, qubits: tuple[int, ...], succeeded: bool = True) -> int:
        index = len(self._events)
        self._events.append(CircuitEvent(index, kind, qubits, succeeded))
        return index


@dataclass(frozen=True, slots=True)
class FaultLocation:
    """A Pauli fault attached to one event.

    Faults on preparations and gates act immediately after the ideal event;
    faults on measurements act immediately before it.
    """

    event_index: int
    pauli: PauliOp


@dataclass(frozen=True, slots=True)
class FaultEffect:
    """Outcome flips and the residual root error caused by faults."""

    flipped_outcomes: frozenset[int]
    residual: PauliOp


def check_fault(circuit: Circuit, fault: FaultLocation) -> CircuitEvent:
    """Validate a fault against its event and return the event."""
    if not 0 <= fault.event_index < len(circuit.events):
        raise InvalidArgumentError(f"fault event index {fault.event_index} out of range")
    if fault.pauli.n != circuit.n:
        raise InvalidArgumentError("fault size does not match circuit")
    event = circuit.events[fault.event_index]
    if fault.pauli.is_identity:
        raise InvalidArgumentError("fault must not be the identity")
    if fault.pauli.support & ~_mask(event.qubits):
        raise InvalidArgumentError(
            f"fault {fault.pauli} reaches outside event {event.index} qubits {event.qubits}"
        )
    return event


def combine_byproducts(n: int, byproducts: Iterable[PauliOp]) -> PauliOp:
    """Multiply byproducts together (phase discarded)."""
    result = PauliOp.identity(n)
    for byproduct in byproducts:
        result = pauli_mul(result, byproduct)
    return result
