"""Gate-count overhead of star preparation and of the full topological layer."""
from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
import logging
import math
import sys
from typing import Any

from .const import (
    DEFAULT_IMPROVED_CONSTANT,
    DEFAULT_LOG_BASE,
    DEFAULT_P_F_MAX,
    LITERATURE_SCHEMES,
    RESOURCE_CSV_HEADER,
    SENSITIVITY_LOG_BASES,
)
from .exceptions import InvalidArgumentError, ResourceRangeError
from .protocol import min_leaves

_LOGGER = logging.getLogger(__name__)

_MAX_LOG10 = math.log10(sys.float_info.max)
SCHEME_LABEL = "star_cluster"


@dataclass(frozen=True, order=True)
class LogCount:
    """A positive count carried by its base-10 logarithm."""

    log10: float

    @classmethod
    def from_value(cls, value: float) -> LogCount:
        """Wrap a positive float."""
        if isinstance(value, LogCount):
            return value
        if not value > 0:
            raise InvalidArgumentError(f"counts must be > 0, got {value}")
        return cls(math.log10(value))

    @property
    def exponent(self) -> int:
        """Decimal exponent: floor(log10)."""
        return math.floor(self.log10)

    @property
    def mantissa(self) -> float:
        """Mantissa in [1, 10)."""
        return 10 ** (self.log10 - self.exponent)

    @property
    def order(self) -> int:
        """Nearest power of ten."""
        return round(self.log10)

    @property
    def value(self) -> float:
        """The count as a float; raises ResourceRangeError when it overflows."""
        if self.log10 > _MAX_LOG10:
            raise ResourceRangeError("count exceeds the float range", self.log10)
        return 10**self.log10

    def __mul__(self, other: LogCount | float) -> LogCount:
        """Product of two counts."""
        return LogCount(self.log10 + LogCount.from_value(other).log10)

    __rmul__ = __mul__

    def __truediv__(self, other: LogCount | float) -> LogCount:
        """Ratio of two counts."""
        return LogCount(self.log10 - LogCount.from_value(other).log10)

    def __str__(self) -> str:
        """Render as mantissa e exponent."""
        return f"{self.mantissa:.4g}e{self.exponent}"


def _check_inputs(L: int, p_s: float, min_L: int) -> None:
    if L < min_L:
        raise InvalidArgumentError(f"L must be >= {min_L}, got {L}")
    if not 0 < p_s <= 1:
        raise InvalidArgumentError(f"p_s must be in (0, 1], got {p_s}")


def r_star(L: int, p_s: float) -> LogCount:
    """Expected gates to prepare one star by sequential growth."""
    _check_inputs(L, p_s, 1)
    return LogCount(math.log10(L / p_s + L) - L * math.log10(p_s))


def r_star_improved(
    L: int,
    p_s: float,
    log_base: float = DEFAULT_LOG_BASE,
    constant: float = DEFAULT_IMPROVED_CONSTANT,
) -> LogCount:
    """Expected gates under log-depth star preparation: c L / p_s^2 (1/p_s)^(log L)."""
    _check_inputs(L, p_s, 2)
    if log_base <= 1:
        raise InvalidArgumentError(f"log_base must be > 1, got {log_base}")
    if constant <= 0:
        raise InvalidArgumentError(f"constant must be > 0, got {constant}")
    depth = math.log(L, log_base)
    return LogCount(
        math.log10(constant) + math.log10(L) - 2 * math.log10(p_s) - depth * math.log10(p_s)
    )


def log_base_sensitivity(L: int, p_s: float) -> dict[str, float]:
    """log10 of the improved count for each standard logarithm base."""
    labels = {2.0: "2", 10.0: "10", math.e: "e"}
    return {
        labels.get(base, f"{base:g}"): r_star_improved(L, p_s, base).log10
        for base in SENSITIVITY_LOG_BASES
    }


def r_total(r_star_value: LogCount | float, r_towc: LogCount | float) -> LogCount:
    """Total gates per encoded operation."""
    return LogCount.from_value(r_star_value) * LogCount.from_value(r_towc)


def implied_r_towc(r_total_value: LogCount | float, r_star_value: LogCount | float) -> LogCount:
    """Back-solve the topological-layer count from a quoted total."""
    return LogCount.from_value(r_total_value) / LogCount.from_value(r_star_value)


@dataclass(frozen=True)
class ResourceEstimate:
    """Resource counts for one operating point."""

    L: int
    p_s: float
    r_towc: LogCount
    r_star: LogCount
    r_star_improved: LogCount | None
    r_total: LogCount
    improved: bool = False
    log_base: float = DEFAULT_LOG_BASE

    def as_dict(self) -> dict[str, Any]:
        """Plain-dict form; counts as log10 plus mantissa/exponent."""

        def encode(count: LogCount | None) -> dict[str, float] | None:
            if count is None:
                return None
            return {"log10": count.log10, "mantissa": count.mantissa, "exponent": count.exponent}

        return {
            "L": self.L,
            "p_s": self.p_s,
            "improved": self.improved,
            "log_base": self.log_base,
            "r_towc": encode(self.r_towc),
            "r_star": encode(self.r_star),
            "r_star_improved": encode(self.r_star_improved),
            "r_total": encode(self.r_total),
        }


def estimate_resources(
    L: int,
    p_s: float,
    r_towc: float,
    improved: bool = False,
    log_base: float = DEFAULT_LOG_BASE,
) -> ResourceEstimate:
    """Star and total counts; r_total uses the improved count when requested."""
    towc = LogCount.from_value(r_towc)
    baseline = r_star(L, p_s)
    better = r_star_improved(L, p_s, log_base) if improved or L >= 2 else None
    selected = better if improved else baseline
    return ResourceEstimate(
        L=L,
        p_s=p_s,
        r_towc=towc,
        r_star=baseline,
        r_star_improved=better,
        r_total=r_total(selected, towc),
        improved=improved,
        log_base=log_base,
    )


@dataclass(frozen=True)
class OperatingPoint:
    """One row request for the comparison table."""

    p_s: float
    p_u: float
    r_towc: float
    L: int | None = None


def comparison_table(
    points: Iterable[OperatingPoint],
    p_f_max: float = DEFAULT_P_F_MAX,
    improved: bool = False,
) -> list[dict[str, Any]]:
    """Rows for this scheme, each followed by published values at the same p_s."""
    rows: list[dict[str, Any]] = []
    for point in points:
        L = point.L if point.L is not None else min_leaves(point.p_s, p_f_max)
        estimate = estimate_resources(L, point.p_s, point.r_towc, improved)
        star = estimate.r_star_improved if improved else estimate.r_star
        rows.append(
            dict(
                zip(
                    RESOURCE_CSV_HEADER,
                    (
                        SCHEME_LABEL,
                        point.p_s,
                        point.p_u,
                        L,
                        star.log10,
                        estimate.r_towc.log10,
                        estimate.r_total.log10,
                        "computed",
                    ),
                )
            )
        )
        for scheme in LITERATURE_SCHEMES:
            if math.isclose(scheme["p_s"], point.p_s):
                rows.append(
                    dict(
                        zip(
                            RESOURCE_CSV_HEADER,
                            (
                                scheme["scheme"],
                                scheme["p_s"],
                                "",
                                "",
                                "",
                                "",
                                scheme["r_total_log10"],
                                scheme["source"],
                            ),
                        )
                    )
                )
    _LOGGER.debug("Comparison table with %d rows", len(rows))
    return rows
