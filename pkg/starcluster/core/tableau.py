"""Stabilizer-tableau oracle used to cross-check frame propagation."""
from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
import logging

import numpy as np
import stim

from ..const import ORACLE_EXTRA_REFERENCE_RUNS, ORACLE_QUBIT_CAP
from ..exceptions import ResourceLimitError
from .circuit import Circuit, EventKind, FaultLocation, check_fault
from .faults import all_oracle_faults
from .pauli import PauliOp, commutes
from .propagation import propagate_fault
from .util import derive_seed

_LOGGER = logging.getLogger(__name__)

_STIM_LETTER = {0: "I", 1: "X", 2: "Y", 3: "Z"}


@dataclass
class TableauRun:
    """One oracle run: raw outcomes, fired correction rules, final state.

    `outcomes` is indexed by measurement row (time order). The simulator is
    left in the post-correction state and must not be shared between threads.
    """

    outcomes: np.ndarray
    fired: tuple[bool, ...]
    simulator: stim.TableauSimulator = field(repr=False)

    def expectation(self, pauli: PauliOp) -> int:
        """Return +1, -1 or 0 for the expectation of `pauli`."""
        return int(self.simulator.peek_observable_expectation(to_stim(pauli)))


def to_stim(pauli: PauliOp) -> stim.PauliString:
    """Convert a PauliOp to a stim PauliString (sign +)."""
    return stim.PauliString("+" + str(pauli).replace("I", "_"))


def _check_cap(circuit: Circuit) -> None:
    if circuit.n > ORACLE_QUBIT_CAP:
        raise ResourceLimitError(
            f"circuit has {circuit.n} qubits; the oracle is capped at {ORACLE_QUBIT_CAP}"
        )


def _apply(simulator: stim.TableauSimulator, pauli: PauliOp) -> None:
    for qubit in range(pauli.n):
        letter = pauli.letter(qubit)
        if letter == "X":
            simulator.x(qubit)
        elif letter == "Y":
            simulator.y(qubit)
        elif letter == "Z":
            simulator.z(qubit)


def tableau_simulate(
    circuit: Circuit, faults: Iterable[FaultLocation], seed: int
) -> TableauRun:
    """Run the circuit on a full stabilizer tableau with the given faults injected."""
    _check_cap(circuit)
    before: dict[int, list[PauliOp]] = {}
    after: dict[int, list[PauliOp]] = {}
    for fault in faults:
        event = check_fault(circuit, fault)
        slot = before if event.kind.is_measurement else after
        slot.setdefault(event.index, []).append(fault.pauli)

    simulator = stim.TableauSimulator(seed=seed)
    outcomes = np.zeros(len(circuit.measurements), dtype=np.uint8)
    rows = circuit.measurement_row
    for event in circuit.events:
        for pauli in before.get(event.index, ()):
            _apply(simulator, pauli)
        if event.kind is EventKind.PREP_PLUS:
            simulator.h(event.qubits[0])
        elif event.kind is EventKind.CZ:
            if event.succeeded:
                simulator.cz(*event.qubits)
        else:
            (qubit,) = event.qubits
            if event.kind is EventKind.MEAS_X:
                simulator.h(qubit)
            outcomes[rows[event.index]] = int(simulator.measure(qubit))
        for pauli in after.get(event.index, ()):
            _apply(simulator, pauli)

    fired = []
    for rule in circuit.rules:
        votes = int(sum(outcomes[rows[source]] for source in rule.sources))
        triggered = 2 * votes > len(rule.sources)
        if triggered:
            _apply(simulator, rule.byproduct)
        fired.append(triggered)
    return TableauRun(outcomes=outcomes, fired=tuple(fired), simulator=simulator)


def gf2_rref(matrix: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2); returns (matrix, pivot columns)."""
    reduced = (np.asarray(matrix, dtype=np.uint8) & 1).copy()
    rows, cols = reduced.shape
    pivots: list[int] = []
    row = 0
    for col in range(cols):
        if row >= rows:
            break
        candidates = np.nonzero(reduced[row:, col])[0]
        if candidates.size == 0:
            continue
        pivot = row + int(candidates[0])
        if pivot != row:
            reduced[[row, pivot]] = reduced[[pivot, row]]
        mask = reduced[:, col].astype(bool)
        mask[row] = False
        reduced[mask] ^= reduced[row]
        pivots.append(col)
        row += 1
    return reduced[:row], pivots


def gf2_null_space(matrix: np.ndarray, cols: int) -> np.ndarray:
    """Basis (as rows) of {d : matrix · d = 0 mod 2}."""
    if matrix.size == 0:
        return np.eye(cols, dtype=np.uint8)
    reduced, pivots = gf2_rref(matrix)
    pivot_set = set(pivots)
    free = [col for col in range(cols) if col not in pivot_set]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for k, col in enumerate(free):
        basis[k, col] = 1
        for r, pivot in enumerate(pivots):
            basis[k, pivot] = reduced[r, col]
    return basis


def root_stabilizers(run: TableauRun, circuit: Circuit) -> list[PauliOp]:
    """Generators of the stabilizer group of the final state supported on the roots."""
    n = circuit.n
    root_set = set(circuit.roots)
    order = [q for q in range(n) if q not in root_set] + list(circuit.roots)
    matrix = np.zeros((n, 2 * n), dtype=np.uint8)
    for r, stabilizer in enumerate(run.simulator.canonical_stabilizers()[:n]):
        for k, qubit in enumerate(order):
            letter = _STIM_LETTER[stabilizer[qubit]]
            matrix[r, k] = letter in ("X", "Y")
            matrix[r, n + k] = letter in ("Z", "Y")
    # Non-root columns first: root-only generators are the rows left with root pivots.
    non_root = n - len(circuit.roots)
    columns = (
        list(range(non_root))
        + list(range(n, n + non_root))
        + list(range(non_root, n))
        + list(range(n + non_root, 2 * n))
    )
    reduced, pivots = gf2_rref(matrix[:, columns])
    boundary = 2 * non_root
    generators = []
    for r, pivot in enumerate(pivots):
        if pivot < boundary:
            continue
        row = reduced[r]
        x_mask = z_mask = 0
        for k, qubit in enumerate(circuit.roots):
            if row[boundary + k]:
                x_mask |= 1 << qubit
            if row[boundary + len(circuit.roots) + k]:
                z_mask |= 1 << qubit
        generators.append(PauliOp(x_mask, z_mask, n))
    return generators


@dataclass(frozen=True)
class Disagreement:
    """One mismatch between frame propagation and the oracle."""

    kind: str
    detail: str
    fault: FaultLocation | None = None


@dataclass
class VerificationReport:
    """Outcome of an oracle comparison over every single-fault location."""

    qubits: int = 0
    faults_checked: int = 0
    detectors: int = 0
    root_generators: int = 0
    disagreements: list[Disagreement] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        """Return True when nothing disagreed."""
        return not self.disagreements

    def as_dict(self) -> dict[str, object]:
        """Plain-dict form for reports."""
        return {
            "qubits": self.qubits,
            "faults_checked": self.faults_checked,
            "detectors": self.detectors,
            "root_generators": self.root_generators,
            "disagreements": [
                {
                    "kind": d.kind,
                    "detail": d.detail,
                    "event": None if d.fault is None else d.fault.event_index,
                    "pauli": None if d.fault is None else str(d.fault.pauli),
                }
                for d in self.disagreements
            ],
        }


def learn_detectors(circuit: Circuit, seeds: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Learn deterministic outcome parities from fault-free runs.

    Returns (detectors, reference outcomes of the first seed).
    """
    records = np.array([tableau_simulate(circuit, (), seed).outcomes for seed in seeds])
    differences = records[1:] ^ records[0]
    detectors = gf2_null_space(differences, records.shape[1])
    return detectors, records[0]


def verify_against_oracle(
    circuit: Circuit,
    seed: int,
    faults: Sequence[FaultLocation] | None = None,
) -> VerificationReport:
    """Compare frame propagation with the tableau oracle for every single fault."""
    report = VerificationReport(qubits=circuit.n)
    if not circuit.events:
        return report
    _check_cap(circuit)
    faults = list(faults) if faults is not None else all_oracle_faults(circuit)
    runs = len(circuit.measurements) + ORACLE_EXTRA_REFERENCE_RUNS
    seeds = [derive_seed(seed, index) for index in range(runs)]

    detectors, reference = learn_detectors(circuit, seeds)
    report.detectors = len(detectors)

    clean = tableau_simulate(circuit, (), seeds[0])
    generators = root_stabilizers(clean, circuit)
    report.root_generators = len(generators)
    signs = [clean.expectation(g) for g in generators]
    for other in seeds[1:]:
        run = tableau_simulate(circuit, (), other)
        if [run.expectation(g) for g in generators] != signs:
            report.disagreements.append(
                Disagreement("reference", f"fault-free root state depends on seed {other}")
            )
            break
    if any(sign == 0 for sign in signs):
        report.disagreements.append(
            Disagreement("reference", "root stabilizer generator has no definite sign")
        )

    rows = circuit.measurement_row
    for fault in faults:
        effect = propagate_fault(circuit, fault)
        predicted = np.zeros(len(circuit.measurements), dtype=np.uint8)
        for index in effect.flipped_outcomes:
            predicted[rows[index]] = 1
        run = tableau_simulate(circuit, (fault,), seeds[0])
        observed = run.outcomes ^ reference
        mismatch = (detectors.astype(np.int64) @ (predicted ^ observed)) & 1
        if mismatch.any():
            report.disagreements.append(
                Disagreement(
                    "flips",
                    f"{int(mismatch.sum())} detector(s) disagree",
                    fault,
                )
            )
        for generator, sign in zip(generators, signs):
            expected_change = not commutes(effect.residual, generator)
            if (run.expectation(generator) != sign) != expected_change:
                report.disagreements.append(
                    Disagreement(
                        "residual",
                        f"sign of {generator} disagrees with residual {effect.residual}",
                        fault,
                    )
                )
                break
    report.faults_checked = len(faults)
    _LOGGER.info(
        "Oracle check: %d qubits, %d faults, %d detectors, %d disagreements",
        circuit.n,
        report.faults_checked,
        report.detectors,
        len(report.disagreements),
    )
    return report
