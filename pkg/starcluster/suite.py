"""Built-in circuits for oracle verification."""
from __future__ import annotations

import logging

from .const import DEFAULT_GEOMETRY
from .core.circuit import Circuit, CircuitBuilder
from .core.config_manager import config_manager
from .exceptions import InvalidArgumentError
from .models.params import ProtocolParams, Variant
from .protocol import assemble, chain_byproduct

_LOGGER = logging.getLogger(__name__)


def chain_circuit(length: int) -> Circuit:
    """Linear cluster of `length` qubits; both ends kept, the interior X-measured."""
    if length < 2:
        raise InvalidArgumentError(f"a chain needs at least 2 qubits, got {length}")
    builder = CircuitBuilder()
    near = builder.qubit("r", root=True)
    interior = [builder.qubit(f"m{k}") for k in range(1, length - 1)]
    far = builder.qubit("t", root=True)
    path = [near, *interior, far]
    for a, b in zip(path, path[1:]):
        builder.cz(a, b)
    roots = {"near": near, "far": far}
    for position, qubit in enumerate(interior, start=1):
        letter, side = chain_byproduct(position, len(interior))
        builder.correct((builder.measure_x(qubit),), [(letter, roots[side])])
    return builder.build()


def discard_arm_circuit(cherries: int = 2) -> Circuit:
    """A root with one arm cut off by a Z measurement voted on by its cherries."""
    builder = CircuitBuilder()
    root = builder.qubit("r", root=True)
    tip = builder.qubit("q1")
    leaves = [builder.qubit(f"q1.k{k}") for k in range(cherries)]
    builder.cz(root, tip)
    for cherry in leaves:
        builder.cz(tip, cherry)
    z_outcome = builder.measure_z(tip)
    x_outcomes = [builder.measure_x(cherry) for cherry in leaves]
    builder.correct((z_outcome, *x_outcomes), [("Z", root)])
    return builder.build()


def builtin_suite() -> dict[str, Circuit]:
    """Named circuits covered by `verify`."""
    p1 = ProtocolParams(variant=Variant.P1, L=5, seed=0)
    p2 = ProtocolParams(
        variant=Variant.P2, L=4, seed=0, geometry=config_manager.get_geometry(DEFAULT_GEOMETRY)
    )
    long_arm = p2.with_updates(geometry=config_manager.get_geometry("long_arm"))
    suite = {
        "chain3": chain_circuit(3),
        "chain4": chain_circuit(4),
        "chain5": chain_circuit(5),
        "p1_L5_one_connection": assemble(p1, [True], neighbor_count=1).circuit,
        "p1_L5_two_connections": assemble(p1, [False, True, True], neighbor_count=2).circuit,
        "p2_discard_arm": discard_arm_circuit(2),
        "p2_L4_one_connection": assemble(p2, [False, True], neighbor_count=1).circuit,
        "long_arm_L4_one_connection": assemble(long_arm, [True], neighbor_count=1).circuit,
    }
    _LOGGER.debug("Built-in suite: %s", {name: c.n for name, c in suite.items()})
    return suite
