"""Phaseless n-qubit Pauli operators over symplectic bit masks."""
from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

from ..exceptions import InvalidArgumentError

_LETTERS = "IXZY"  # indexed by x_bit | (z_bit << 1)


@dataclass(frozen=True, slots=True)
class PauliOp:
    """Pauli operator as paired X/Z bit masks; bit k belongs to qubit k.

    Phases are not tracked: downstream code only asks whether a measurement
    outcome flips, which depends on anticommutation parity alone.
    """

    x_mask: int
    z_mask: int
    n: int

    def __post_init__(self) -> None:
        """Validate the masks against the qubit count."""
        if self.n < 0:
            raise InvalidArgumentError(f"qubit count must be >= 0, got {self.n}")
        if self.x_mask < 0 or self.z_mask < 0:
            raise InvalidArgumentError("masks must be non-negative")
        if (self.x_mask | self.z_mask) >> self.n:
            raise InvalidArgumentError(
                f"mask has a set bit at index >= n ({self.n})"
            )

    @classmethod
    def identity(cls, n: int) -> PauliOp:
        """Return the identity on n qubits."""
        return cls(0, 0, n)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> PauliOp:
        """Return a weight-one operator ('X', 'Y' or 'Z') on one qubit."""
        if not 0 <= qubit < n:
            raise InvalidArgumentError(f"qubit {qubit} out of range for n={n}")
        code = _LETTERS.find(letter.upper())
        if code <= 0:
            raise InvalidArgumentError(f"unknown Pauli letter: {letter!r}")
        bit = 1 << qubit
        return cls(bit if code & 1 else 0, bit if code & 2 else 0, n)

    @classmethod
    def from_string(cls, text: str) -> PauliOp:
        """Parse the 'IXZY…' rendering (index-ascending, one letter per qubit)."""
        x_mask = z_mask = 0
        for qubit, letter in enumerate(text.strip().upper()):
            code = _LETTERS.find(letter)
            if code < 0:
                raise InvalidArgumentError(f"unknown Pauli letter: {letter!r}")
            if code & 1:
                x_mask |= 1 << qubit
            if code & 2:
                z_mask |= 1 << qubit
        return cls(x_mask, z_mask, len(text.strip()))

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[tuple[str, int]]) -> PauliOp:
        """Build a product from (letter, qubit) pairs."""
        result = cls.identity(n)
        for letter, qubit in terms:
            result = pauli_mul(result, cls.single(n, qubit, letter))
        return result

    @property
    def is_identity(self) -> bool:
        """Return True when both masks are empty."""
        return not (self.x_mask or self.z_mask)

    @property
    def support(self) -> int:
        """Return the mask of qubits carrying a non-identity factor."""
        return self.x_mask | self.z_mask

    @property
    def weight(self) -> int:
        """Return the number of non-identity factors."""
        return self.support.bit_count()

    def letter(self, qubit: int) -> str:
        """Return the single-qubit factor on `qubit` as one of 'IXZY'."""
        x_bit = (self.x_mask >> qubit) & 1
        z_bit = (self.z_mask >> qubit) & 1
        return _LETTERS[x_bit | (z_bit << 1)]

    def restrict(self, qubits: Iterable[int]) -> PauliOp:
        """Return the factor of this operator supported on `qubits`."""
        mask = 0
        for qubit in qubits:
            mask |= 1 << qubit
        return PauliOp(self.x_mask & mask, self.z_mask & mask, self.n)

    def without(self, qubit: int) -> PauliOp:
        """Return this operator with the factor on `qubit` removed."""
        keep = ~(1 << qubit)
        return PauliOp(self.x_mask & keep, self.z_mask & keep, self.n)

    def __str__(self) -> str:
        """Render as 'IXZY…'."""
        return "".join(self.letter(qubit) for qubit in range(self.n))


def _check_sizes(p: PauliOp, q: PauliOp) -> None:
    if p.n != q.n:
        raise InvalidArgumentError(f"size mismatch: {p.n} != {q.n}")


def commutes(p: PauliOp, q: PauliOp) -> bool:
    """Return True iff the symplectic inner product of p and q is even."""
    _check_sizes(p, q)
    overlap = (p.x_mask & q.z_mask).bit_count() + (p.z_mask & q.x_mask).bit_count()
    return overlap % 2 == 0


def pauli_mul(p: PauliOp, q: PauliOp) -> PauliOp:
    """Return the product of p and q with the phase discarded."""
    _check_sizes(p, q)
    return PauliOp(p.x_mask ^ q.x_mask, p.z_mask ^ q.z_mask, p.n)


def conjugate_cz(p: PauliOp, a: int, b: int) -> PauliOp:
    """Return CZ(a, b) · p · CZ(a, b): X_a -> X_a Z_b, X_b -> X_b Z_a."""
    if a == b:
        raise InvalidArgumentError(f"CZ needs two distinct qubits, got {a} twice")
    if not (0 <= a < p.n and 0 <= b < p.n):
        raise InvalidArgumentError(f"CZ({a}, {b}) out of range for n={p.n}")
    z_mask = p.z_mask
    if (p.x_mask >> a) & 1:
        z_mask ^= 1 << b
    if (p.x_mask >> b) & 1:
        z_mask ^= 1 << a
    return PauliOp(p.x_mask, z_mask, p.n)
