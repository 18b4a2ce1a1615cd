"""Pauli-frame propagation of injected faults through assembly circuits."""
from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum
import logging

import numpy as np

from ..exceptions import InvalidArgumentError
from .circuit import Circuit, EventKind, FaultEffect, FaultLocation, check_fault
from .pauli import PauliOp, commutes, conjugate_cz, pauli_mul

_LOGGER = logging.getLogger(__name__)


class RootFlip(str, Enum):
    """Effect of a residual on a root consumed by an X-basis measurement."""

    NONE = "none"
    FLIP = "flip"
    BENIGN = "benign"


def _injects_before(kind: EventKind) -> bool:
    return kind.is_measurement


def propagate_fault(circuit: Circuit, fault: FaultLocation) -> FaultEffect:
    """Propagate one fault to outcome flips and a residual on the roots."""
    return propagate_fault_set(circuit, (fault,))


def propagate_fault_set(circuit: Circuit, faults: Iterable[FaultLocation]) -> FaultEffect:
    """Propagate several faults together in one frame."""
    before: dict[int, PauliOp] = {}
    after: dict[int, PauliOp] = {}
    identity = PauliOp.identity(circuit.n)
    for fault in faults:
        event = check_fault(circuit, fault)
        slot = before if _injects_before(event.kind) else after
        slot[event.index] = pauli_mul(slot.get(event.index, identity), fault.pauli)

    frame = identity
    flipped: set[int] = set()
    for event in circuit.events:
        if event.index in before:
            frame = pauli_mul(frame, before[event.index])
        if event.kind is EventKind.CZ:
            if event.succeeded:
                frame = conjugate_cz(frame, *event.qubits)
        elif event.kind.is_measurement:
            (qubit,) = event.qubits
            observable = PauliOp.single(circuit.n, qubit, event.observable)
            if not commutes(frame, observable):
                flipped.add(event.index)
            frame = frame.without(qubit)
        if event.index in after:
            frame = pauli_mul(frame, after[event.index])

    residual = frame.restrict(circuit.roots)
    for rule in circuit.rules:
        votes = sum(1 for source in rule.sources if source in flipped)
        if 2 * votes > len(rule.sources):
            residual = pauli_mul(residual, rule.byproduct)
    return FaultEffect(frozenset(flipped), residual)


def root_flip_class(
    effect: FaultEffect,
    root: int,
    roots: Sequence[int] | None = None,
    count_benign_as_flip: bool = False,
) -> RootFlip:
    """Classify the residual on `root` against an X-basis readout."""
    if roots is not None and root not in roots:
        raise InvalidArgumentError(f"qubit {root} is not a root")
    if not 0 <= root < effect.residual.n:
        raise InvalidArgumentError(f"root {root} out of range")
    letter = effect.residual.letter(root)
    if letter in ("Z", "Y"):
        return RootFlip.FLIP
    if letter == "X":
        return RootFlip.FLIP if count_benign_as_flip else RootFlip.BENIGN
    return RootFlip.NONE


@dataclass(frozen=True)
class BatchEffect:
    """Vectorized fault effects; column k belongs to lane k.

    `flips[row, k]` is 1 when the measurement in `circuit.measurements[row]`
    is flipped in lane k; `root_x`/`root_z` hold the residual on
    `circuit.roots` in the same root order.
    """

    flips: np.ndarray
    root_x: np.ndarray
    root_z: np.ndarray

    @property
    def lanes(self) -> int:
        """Number of lanes."""
        return self.flips.shape[1]

    def root_flips(self, count_benign_as_flip: bool = False) -> np.ndarray:
        """Return a (roots, lanes) array of FLIP indicators."""
        if count_benign_as_flip:
            return self.root_x | self.root_z
        return self.root_z.copy()


class LaneSet:
    """Fault lanes for batch propagation; a lane may hold several faults."""

    def __init__(self, circuit: Circuit, lanes: int = 0) -> None:
        """Initialize with a number of (initially fault-free) lanes."""
        self.circuit = circuit
        self.lanes = lanes
        self._chunks: dict[int, list[tuple[np.ndarray, ...]]] = defaultdict(list)

    @classmethod
    def single_faults(cls, circuit: Circuit, faults: Sequence[FaultLocation]) -> LaneSet:
        """One lane per fault, in the given order."""
        lane_set = cls(circuit, len(faults))
        for lane, fault in enumerate(faults):
            lane_set.add(lane, fault)
        return lane_set

    def add(self, lane: int, fault: FaultLocation) -> None:
        """Attach a fault to one lane."""
        self.add_to_lanes(np.array([lane], dtype=np.int64), fault)

    def add_to_lanes(self, lanes: np.ndarray, fault: FaultLocation) -> None:
        """Attach the same fault to every lane in `lanes`."""
        lanes = np.asarray(lanes, dtype=np.int64)
        if lanes.size == 0:
            return
        if lanes.min() < 0 or lanes.max() >= self.lanes:
            raise InvalidArgumentError(f"lane index out of range for {self.lanes} lanes")
        event = check_fault(self.circuit, fault)
        for qubit in event.qubits:
            x_bit = (fault.pauli.x_mask >> qubit) & 1
            z_bit = (fault.pauli.z_mask >> qubit) & 1
            if not (x_bit or z_bit):
                continue
            count = lanes.size
            self._chunks[event.index].append(
                (
                    np.full(count, qubit, dtype=np.int64),
                    lanes,
                    np.full(count, x_bit, dtype=np.uint8),
                    np.full(count, z_bit, dtype=np.uint8),
                )
            )

    def compiled(self) -> dict[int, tuple[np.ndarray, ...]]:
        """Return per-event (qubits, lanes, x, z) arrays."""
        return {
            index: tuple(np.concatenate(parts) for parts in zip(*chunks))
            for index, chunks in self._chunks.items()
            if chunks
        }


def propagate_batch(circuit: Circuit, lane_set: LaneSet) -> BatchEffect:
    """Propagate every lane of `lane_set` in one vectorized pass."""
    lanes = lane_set.lanes
    x_frame = np.zeros((circuit.n, lanes), dtype=np.uint8)
    z_frame = np.zeros((circuit.n, lanes), dtype=np.uint8)
    flips = np.zeros((len(circuit.measurements), lanes), dtype=np.uint8)
    injections = lane_set.compiled()
    rows = circuit.measurement_row

    def inject(index: int) -> None:
        qubits, lane_idx, x_bits, z_bits = injections[index]
        np.bitwise_xor.at(x_frame, (qubits, lane_idx), x_bits)
        np.bitwise_xor.at(z_frame, (qubits, lane_idx), z_bits)

    for event in circuit.events:
        pending = event.index in injections
        if pending and _injects_before(event.kind):
            inject(event.index)
        if event.kind is EventKind.CZ:
            if event.succeeded:
                a, b = event.qubits
                z_frame[a] ^= x_frame[b]
                z_frame[b] ^= x_frame[a]
        elif event.kind.is_measurement:
            (qubit,) = event.qubits
            source = z_frame if event.kind is EventKind.MEAS_X else x_frame
            flips[rows[event.index]] = source[qubit]
            x_frame[qubit] = 0
            z_frame[qubit] = 0
        if pending and not _injects_before(event.kind):
            inject(event.index)

    roots = list(circuit.roots)
    root_x = x_frame[roots].copy()
    root_z = z_frame[roots].copy()
    root_pos = {root: k for k, root in enumerate(roots)}
    for rule in circuit.rules:
        votes = flips[[rows[s] for s in rule.sources]].sum(axis=0, dtype=np.int64)
        fired = (2 * votes > len(rule.sources)).astype(np.uint8)
        for qubit in range(circuit.n):
            letter = rule.byproduct.letter(qubit)
            if letter in ("X", "Y"):
                root_x[root_pos[qubit]] ^= fired
            if letter in ("Z", "Y"):
                root_z[root_pos[qubit]] ^= fired
    return BatchEffect(flips=flips, root_x=root_x, root_z=root_z)


def batch_to_effect(circuit: Circuit, batch: BatchEffect, lane: int) -> FaultEffect:
    """Convert one batch lane back to a FaultEffect."""
    flipped = frozenset(
        index for row, index in enumerate(circuit.measurements) if batch.flips[row, lane]
    )
    x_mask = z_mask = 0
    for k, root in enumerate(circuit.roots):
        if batch.root_x[k, lane]:
            x_mask |= 1 << root
        if batch.root_z[k, lane]:
            z_mask |= 1 << root
    return FaultEffect(flipped, PauliOp(x_mask, z_mask, circuit.n))
