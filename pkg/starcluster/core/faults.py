"""Fault sources: where unheralded errors can strike and with what weight."""
from __future__ import annotations

from collections.abc import Callable, Iterable, Iterator, Sequence
from dataclasses import dataclass
import itertools
import logging

from ..const import CONVENTION_DEPOLARIZING
from ..exceptions import InvalidArgumentError
from ..models.config import Conventions
from .circuit import Circuit, EventKind, FaultLocation
from .pauli import PauliOp

_LOGGER = logging.getLogger(__name__)

SOURCE_GATE = "gate"
SOURCE_PREP = "prep"
SOURCE_MEAS = "meas"
ALL_SOURCES = (SOURCE_GATE, SOURCE_PREP, SOURCE_MEAS)


@dataclass(frozen=True, slots=True)
class WeightedFault:
    """A fault location with its probability relative to its source's rate."""

    location: FaultLocation
    source: str
    weight: float


FaultSource = Callable[[Circuit, Conventions], Iterator[WeightedFault]]
FAULT_SOURCES: dict[str, FaultSource] = {}


def fault_source(func: FaultSource, name: str | None = None) -> FaultSource:
    """Register a fault source under its function name."""
    if not name:
        name = func.__name__
    if name in FAULT_SOURCES:
        raise InvalidArgumentError(f"fault source {name!r} is already defined")
    FAULT_SOURCES[name] = func
    return func


def _single_qubit(circuit: Circuit, event_index: int, qubit: int, source: str) -> Iterator[WeightedFault]:
    for letter in "XYZ":
        pauli = PauliOp.single(circuit.n, qubit, letter)
        yield WeightedFault(FaultLocation(event_index, pauli), source, 1.0 / 3.0)


@fault_source
def gate(circuit: Circuit, conventions: Conventions) -> Iterator[WeightedFault]:
    """Two-qubit depolarizing noise after every successful CZ: 15 Paulis at p_u/15."""
    for event in circuit.events:
        if event.kind is not EventKind.CZ:
            continue
        a, b = event.qubits
        if event.succeeded:
            for la, lb in itertools.product("IXYZ", repeat=2):
                if la == lb == "I":
                    continue
                terms = [(letter, q) for letter, q in ((la, a), (lb, b)) if letter != "I"]
                pauli = PauliOp.from_terms(circuit.n, terms)
                yield WeightedFault(FaultLocation(event.index, pauli), SOURCE_GATE, 1.0 / 15.0)
        elif conventions.failed_gate_noise:
            yield from _single_qubit(circuit, event.index, a, SOURCE_GATE)
            yield from _single_qubit(circuit, event.index, b, SOURCE_GATE)


@fault_source
def prep(circuit: Circuit, conventions: Conventions) -> Iterator[WeightedFault]:
    """Preparation errors: Z at p_P, or depolarization at p_P."""
    for event in circuit.events:
        if event.kind is not EventKind.PREP_PLUS:
            continue
        (qubit,) = event.qubits
        if conventions.prep_convention == CONVENTION_DEPOLARIZING:
            yield from _single_qubit(circuit, event.index, qubit, SOURCE_PREP)
        else:
            pauli = PauliOp.single(circuit.n, qubit, "Z")
            yield WeightedFault(FaultLocation(event.index, pauli), SOURCE_PREP, 1.0)


@fault_source
def meas(circuit: Circuit, conventions: Conventions) -> Iterator[WeightedFault]:
    """Measurement errors: an outcome flip at p_M, or depolarization at p_M."""
    for event in circuit.events:
        if not event.kind.is_measurement:
            continue
        (qubit,) = event.qubits
        if conventions.measurement_convention == CONVENTION_DEPOLARIZING:
            yield from _single_qubit(circuit, event.index, qubit, SOURCE_MEAS)
        else:
            letter = "Z" if event.kind is EventKind.MEAS_X else "X"
            pauli = PauliOp.single(circuit.n, qubit, letter)
            yield WeightedFault(FaultLocation(event.index, pauli), SOURCE_MEAS, 1.0)


def enumerate_fault_locations(
    circuit: Circuit,
    sources: Sequence[str] | Iterable[str] = ALL_SOURCES,
    conventions: Conventions | None = None,
) -> list[WeightedFault]:
    """Return every weighted single-fault location of the selected sources."""
    conventions = conventions or Conventions()
    faults: list[WeightedFault] = []
    for name in sources:
        if name not in FAULT_SOURCES:
            raise InvalidArgumentError(
                f"unknown fault source {name!r}; known: {sorted(FAULT_SOURCES)}"
            )
        faults.extend(FAULT_SOURCES[name](circuit, conventions))
    _LOGGER.debug("Enumerated %d fault locations from %s", len(faults), list(sources))
    return faults


def all_oracle_faults(circuit: Circuit) -> list[FaultLocation]:
    """Every distinct single fault: X/Y/Z on prep and measurement, 15 Paulis per CZ."""
    conventions = Conventions(
        measurement_convention=CONVENTION_DEPOLARIZING,
        prep_convention=CONVENTION_DEPOLARIZING,
        failed_gate_noise=True,
    )
    return [wf.location for wf in enumerate_fault_locations(circuit, ALL_SOURCES, conventions)]
