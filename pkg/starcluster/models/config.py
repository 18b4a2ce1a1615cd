"""Configuration models: arm geometry and error-accounting conventions."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any

from ..const import (
    ATTRIBUTION_CONNECTION,
    ATTRIBUTIONS,
    CONVENTION_FACE_VALUE,
    DEFAULT_GEOMETRY,
    ERROR_CONVENTIONS,
)
from ..exceptions import InvalidArgumentError


@dataclass(frozen=True)
class ArmGeometry:
    """Shape of one star arm.

    An arm is a chain of `chain_length` qubits hanging off the root; the last
    one is the leaf tip used for fusion. Every chain qubit carries
    `cherries_per_chain_qubit` degree-1 cherries.
    """

    name: str = DEFAULT_GEOMETRY
    chain_length: int = 1
    cherries_per_chain_qubit: int = 2

    def __post_init__(self) -> None:
        """Validate the descriptor."""
        if self.chain_length < 1:
            raise InvalidArgumentError(
                f"geometry {self.name!r}: chain_length must be >= 1, got {self.chain_length}"
            )
        if self.cherries_per_chain_qubit < 0 or self.cherries_per_chain_qubit % 2:
            raise InvalidArgumentError(
                f"geometry {self.name!r}: cherries_per_chain_qubit must be even and >= 0, "
                f"got {self.cherries_per_chain_qubit}"
            )

    @property
    def qubits_per_arm(self) -> int:
        """Number of qubits in one arm, cherries included."""
        return self.chain_length * (1 + self.cherries_per_chain_qubit)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ArmGeometry:
        """Create a geometry from a preset dictionary."""
        try:
            return cls(
                name=str(data.get("name", DEFAULT_GEOMETRY)),
                chain_length=int(data.get("chain_length", 1)),
                cherries_per_chain_qubit=int(data.get("cherries_per_chain_qubit", 2)),
            )
        except (TypeError, ValueError) as err:
            raise InvalidArgumentError(f"invalid geometry descriptor: {err}") from err

    def as_dict(self) -> dict[str, Any]:
        """Plain-dict form for provenance blocks."""
        return asdict(self)


@dataclass(frozen=True)
class Conventions:
    """Switches that decide how faults are weighted and attributed."""

    measurement_convention: str = CONVENTION_FACE_VALUE
    prep_convention: str = CONVENTION_FACE_VALUE
    count_benign_as_flip: bool = False
    failed_gate_noise: bool = False
    attribution: str = ATTRIBUTION_CONNECTION

    def __post_init__(self) -> None:
        """Validate enumerated fields."""
        for key in ("measurement_convention", "prep_convention"):
            value = getattr(self, key)
            if value not in ERROR_CONVENTIONS:
                raise InvalidArgumentError(
                    f"{key} must be one of {ERROR_CONVENTIONS}, got {value!r}"
                )
        if self.attribution not in ATTRIBUTIONS:
            raise InvalidArgumentError(
                f"attribution must be one of {ATTRIBUTIONS}, got {self.attribution!r}"
            )

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Conventions:
        """Create conventions from a dictionary; missing keys take defaults."""
        return cls(
            measurement_convention=data.get("measurement_convention", CONVENTION_FACE_VALUE),
            prep_convention=data.get("prep_convention", CONVENTION_FACE_VALUE),
            count_benign_as_flip=bool(data.get("count_benign_as_flip", False)),
            failed_gate_noise=bool(data.get("failed_gate_noise", False)),
            attribution=data.get("attribution", ATTRIBUTION_CONNECTION),
        )

    def as_dict(self) -> dict[str, Any]:
        """Plain-dict form for provenance blocks."""
        return asdict(self)
