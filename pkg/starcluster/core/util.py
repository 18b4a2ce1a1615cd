"""Text codecs and small parsing helpers."""
from __future__ import annotations

from decimal import Decimal, InvalidOperation
import logging

import numpy as np

from ..exceptions import CircuitConstructionError, InvalidArgumentError
from .circuit import Circuit, CircuitEvent, CorrectionRule, EventKind
from .pauli import PauliOp

_LOGGER = logging.getLogger(__name__)

_OK = {"ok": True, "fail": False}


def format_circuit(circuit: Circuit) -> str:
    """Render a circuit in the line-oriented dump format.

    Example:
        N 3
        ROOTS 0 2
        P 0
        CZ 0 1 ok
        MX 1
        CORR 5 -> X 2
    """
    lines = [f"N {circuit.n}", "ROOTS " + " ".join(str(r) for r in circuit.roots)]
    for event in circuit.events:
        if event.kind is EventKind.CZ:
            a, b = event.qubits
            lines.append(f"CZ {a} {b} {'ok' if event.succeeded else 'fail'}")
        else:
            lines.append(f"{event.kind.value} {event.qubits[0]}")
    for rule in circuit.rules:
        keyword = "VOTE" if rule.is_vote else "CORR"
        sources = " ".join(str(s) for s in rule.sources)
        lines.append(f"{keyword} {sources} -> {_format_terms(rule.byproduct)}")
    return "\n".join(lines) + "\n"


def _format_terms(pauli: PauliOp) -> str:
    terms = [
        f"{pauli.letter(qubit)} {qubit}"
        for qubit in range(pauli.n)
        if pauli.letter(qubit) != "I"
    ]
    return " | ".join(terms)


def parse_circuit(text: str) -> Circuit:
    """Parse the dump format produced by format_circuit."""
    n: int | None = None
    roots: tuple[int, ...] = ()
    events: list[CircuitEvent] = []
    raw_rules: list[tuple[tuple[int, ...], list[tuple[str, int]]]] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        try:
            if head == "N":
                n = int(rest[0])
            elif head == "ROOTS":
                roots = tuple(int(token) for token in rest)
            elif head == "CZ":
                a, b, flag = rest
                if flag not in _OK:
                    raise ValueError(f"expected ok|fail, got {flag!r}")
                events.append(CircuitEvent(len(events), EventKind.CZ, (int(a), int(b)), _OK[flag]))
            elif head in ("P", "MX", "MZ"):
                events.append(CircuitEvent(len(events), EventKind(head), (int(rest[0]),)))
            elif head in ("CORR", "VOTE"):
                sources_text, terms_text = line[len(head):].split("->", 1)
                sources = tuple(int(token) for token in sources_text.split())
                terms = []
                for term in terms_text.split("|"):
                    letter, qubit = term.split()
                    terms.append((letter, int(qubit)))
                raw_rules.append((sources, terms))
            else:
                raise ValueError(f"unknown keyword {head!r}")
        except (ValueError, IndexError) as err:
            raise CircuitConstructionError(f"line {line_no}: {err}") from err

    if n is None:
        raise CircuitConstructionError("missing 'N <qubits>' header")
    rules = tuple(
        CorrectionRule(sources, PauliOp.from_terms(n, terms)) for sources, terms in raw_rules
    )
    return Circuit(n=n, events=tuple(events), roots=roots, rules=rules)


def parse_grid(spec: str) -> list[float]:
    """Parse 'a:b:step' into an inclusive grid of probabilities.

    Both endpoints are included when the step divides the span exactly;
    otherwise the last point below b is final.
    """
    parts = spec.split(":")
    if len(parts) != 3:
        raise InvalidArgumentError(f"grid must look like a:b:step, got {spec!r}")
    try:
        start, stop, step = (Decimal(part.strip()) for part in parts)
    except InvalidOperation as err:
        raise InvalidArgumentError(f"invalid grid {spec!r}") from err
    if step <= 0 or stop < start:
        raise InvalidArgumentError(f"grid needs step > 0 and b >= a, got {spec!r}")
    count = int((stop - start) / step) + 1
    grid = [float(start + k * step) for k in range(count)]
    _LOGGER.debug("Parsed grid %s into %d points", spec, len(grid))
    return grid


def parse_int_list(spec: str) -> list[int]:
    """Parse '4,7,10' into a list of integers."""
    try:
        values = [int(token) for token in spec.split(",") if token.strip()]
    except ValueError as err:
        raise InvalidArgumentError(f"invalid integer list {spec!r}") from err
    if not values:
        raise InvalidArgumentError("empty integer list")
    return values


def derive_seed(master_seed: int, *key: int) -> int:
    """Derive the 64-bit seed of the item addressed by `key`."""
    sequence = np.random.SeedSequence(master_seed, spawn_key=key)
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def sample_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Return the independent generator of the sample addressed by `key`."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))
