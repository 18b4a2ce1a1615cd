"""Renormalized root error: closed forms, thresholds and simulation-based estimates."""
from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
import logging
import math
from typing import Any

import numpy as np
from scipy import optimize

from .const import (
    ATTRIBUTION_CONNECTION,
    BISECTION_LOWER,
    BISECTION_MAXITER,
    BISECTION_UPPER,
    BISECTION_XTOL,
    COEFFICIENT_TOLERANCE_FACTOR,
    DEFAULT_L_GRID,
    DEFAULT_P_F_MAX,
    DEFAULT_SAMPLES,
    DEFAULT_TARGET_P_R,
    GATE_COEFFICIENTS,
    MIN_FIT_POINTS,
    MIN_LEAVES,
    MIN_SAMPLES_PER_POINT,
    P_R_TOLERANCE,
    REQUIRED_CONNECTIONS,
)
from .coordinator import SamplingCoordinator
from .core.faults import ALL_SOURCES, SOURCE_GATE, SOURCE_MEAS, SOURCE_PREP, enumerate_fault_locations
from .core.propagation import LaneSet, propagate_batch
from .core.util import sample_rng
from .exceptions import InfeasibleThresholdError, InvalidArgumentError, StarClusterError
from .models.params import ProtocolParams, Variant, check_probability
from .models.records import AssemblyRecord
from .protocol import failure_probability, min_leaves, sample_assembly

_LOGGER = logging.getLogger(__name__)

ROOT_SELF = "ROOT_SELF"
SUCCESS_ARMS = "SUCCESS_ARMS"
DISCARDED_LEAVES = "DISCARDED_LEAVES"
GATE_ERRORS = "GATE_ERRORS"
PREP = "PREP"
MEAS = "MEAS"
DETECTED_FAILURES = "DETECTED_FAILURES"

INDEPENDENT = "independent"
NEAREST_NEIGHBOR = "nearest_neighbor"
SECOND_NEAREST = "second_nearest"
HIGHER_ORDER = "higher_order"
CORRELATION_CLASSES = (INDEPENDENT, NEAREST_NEIGHBOR, SECOND_NEAREST, HIGHER_ORDER)
REGIONS = (ROOT_SELF, SUCCESS_ARMS, DISCARDED_LEAVES)


@dataclass(frozen=True)
class RenormalizedError:
    """Renormalized error of a root and its term-by-term decomposition.

    `breakdown` splits p_r by where the error originates; `by_source` splits
    the same total by error kind (gate, preparation, measurement). Both sum
    to p_r.
    """

    p_r: float
    breakdown: dict[str, float]
    by_source: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        """Plain-dict form."""
        return {
            "p_r": float(self.p_r),
            "breakdown": {k: float(v) for k, v in self.breakdown.items()},
            "by_source": {k: float(v) for k, v in self.by_source.items()},
        }


def _check_leaves(L: int) -> None:
    if L < MIN_LEAVES:
        raise InvalidArgumentError(f"L must be >= {MIN_LEAVES}, got {L}")


def p_r_independent(variant: Variant | str, p_u: float, L: int) -> RenormalizedError:
    """Leading-order p_r when every operation fails with the same rate p_u."""
    variant = Variant.parse(variant)
    _check_leaves(L)
    check_probability("p_u", p_u)
    spare = L - REQUIRED_CONNECTIONS
    if variant is Variant.P1:
        success = REQUIRED_CONNECTIONS * 2 * p_u
        discarded = spare * p_u
    else:
        success = REQUIRED_CONNECTIONS * 4 * p_u
        discarded = spare * 3 * p_u**2
    breakdown = {ROOT_SELF: p_u, SUCCESS_ARMS: success, DISCARDED_LEAVES: discarded}
    return RenormalizedError(p_r=p_u + success + discarded, breakdown=breakdown)


def p_r_full(
    variant: Variant | str,
    p_u: float,
    p_P: float,
    p_M: float,
    L: int,
    detected_failures: float = 0.0,
) -> RenormalizedError:
    """p_r with separate gate, preparation and measurement error rates.

    A non-zero `detected_failures` folds the star-failure probability into
    p_r, treating failed stars as undetected errors.
    """
    variant = Variant.parse(variant)
    _check_leaves(L)
    for name, value in (("p_u", p_u), ("p_P", p_P), ("p_M", p_M)):
        check_probability(name, value)
    intercept, slope = GATE_COEFFICIENTS[variant.value]
    spare = L - REQUIRED_CONNECTIONS
    gate = (intercept + slope * L) * p_u
    root_self = p_P + p_M
    if variant is Variant.P1:
        success = REQUIRED_CONNECTIONS * 2 * (p_M + p_P)
        discarded = spare * p_M
        prep = p_P + REQUIRED_CONNECTIONS * 2 * p_P
        meas = p_M + REQUIRED_CONNECTIONS * 2 * p_M + spare * p_M
    else:
        success = REQUIRED_CONNECTIONS * 2 * (2 * p_M + p_P)
        discarded = spare * (3 * p_M + p_P) * (p_M + p_P)
        prep = p_P + REQUIRED_CONNECTIONS * 2 * p_P + spare * (p_P**2 + 2 * p_M * p_P)
        meas = p_M + REQUIRED_CONNECTIONS * 4 * p_M + spare * (3 * p_M**2 + 2 * p_M * p_P)

    breakdown = {
        GATE_ERRORS: gate,
        ROOT_SELF: root_self,
        SUCCESS_ARMS: success,
        DISCARDED_LEAVES: discarded,
    }
    by_source = {GATE_ERRORS: gate, PREP: prep, MEAS: meas}
    if detected_failures:
        check_probability("detected_failures", detected_failures, allow_one=True)
        breakdown[DETECTED_FAILURES] = detected_failures
        by_source[DETECTED_FAILURES] = detected_failures
    return RenormalizedError(p_r=sum(breakdown.values()), breakdown=breakdown, by_source=by_source)


@dataclass(frozen=True)
class ThresholdPoint:
    """Largest p_u meeting the p_r target at one success probability."""

    p_s: float
    variant: Variant
    L: int
    p_f: float
    p_u_threshold: float
    p_r_target: float = DEFAULT_TARGET_P_R
    error: str | None = None

    def as_row(self) -> list[Any]:
        """CSV row matching the threshold table header."""
        return [self.p_s, self.variant.value, self.L, self.p_f, self.p_u_threshold]

    def as_dict(self) -> dict[str, Any]:
        """Plain-dict form."""
        return {
            "p_s": self.p_s,
            "variant": self.variant.value,
            "L": self.L,
            "p_f": self.p_f,
            "p_u_threshold": self.p_u_threshold,
            "p_r_target": self.p_r_target,
            "error": self.error,
        }


def threshold_pu(
    p_s: float,
    variant: Variant | str,
    p_r_target: float = DEFAULT_TARGET_P_R,
    p_f_max: float = DEFAULT_P_F_MAX,
    p_P: float | None = None,
    p_M: float | None = None,
    memory_error: float = 0.0,
    fold_failures: bool = False,
) -> ThresholdPoint:
    """Solve p_r = p_r_target for p_u at L = min_leaves(p_s, p_f_max).

    `p_P`/`p_M` left as None track p_u; fixed values hold them constant.
    `memory_error` is added to the measurement error.
    """
    variant = Variant.parse(variant)
    if not 0 < p_s <= 1:
        raise InvalidArgumentError(f"p_s must be in (0, 1], got {p_s}")
    if not 0 < p_r_target < 1:
        raise InvalidArgumentError(f"p_r_target must be in (0, 1), got {p_r_target}")
    if memory_error < 0:
        raise InvalidArgumentError(f"memory_error must be >= 0, got {memory_error}")
    L = min_leaves(p_s, p_f_max)
    p_f = failure_probability(L, p_s)

    def excess(p_u: float) -> float:
        prep = p_u if p_P is None else p_P
        meas = (p_u if p_M is None else p_M) + memory_error
        folded = p_f if fold_failures else 0.0
        return p_r_full(variant, p_u, prep, meas, L, folded).p_r - p_r_target

    low, high = excess(BISECTION_LOWER), excess(BISECTION_UPPER)
    if low >= 0 or high <= 0:
        raise InfeasibleThresholdError(
            f"p_r - target is {low:.4g} at p_u={BISECTION_LOWER} and {high:.4g} at "
            f"p_u={BISECTION_UPPER}; no threshold in the bracket"
        )
    try:
        root = optimize.bisect(
            excess,
            BISECTION_LOWER,
            BISECTION_UPPER,
            xtol=BISECTION_XTOL,
            maxiter=BISECTION_MAXITER,
        )
    except RuntimeError as err:
        raise InfeasibleThresholdError(f"bisection did not converge: {err}") from err
    residual = abs(excess(root))
    if residual > P_R_TOLERANCE:
        _LOGGER.warning("Threshold residual %.3g exceeds tolerance at p_s=%s", residual, p_s)
    _LOGGER.debug("threshold_pu(p_s=%s, %s) = %.6g with L=%d", p_s, variant.value, root, L)
    return ThresholdPoint(
        p_s=p_s, variant=variant, L=L, p_f=p_f, p_u_threshold=float(root), p_r_target=p_r_target
    )


def threshold_curve(
    p_s_grid: Iterable[float],
    variants: Iterable[Variant | str],
    p_r_target: float = DEFAULT_TARGET_P_R,
    p_f_max: float = DEFAULT_P_F_MAX,
    **options: Any,
) -> list[ThresholdPoint]:
    """Threshold per (p_s, variant); a failing point is recorded and the curve goes on."""
    variants = [Variant.parse(v) for v in variants]
    points = []
    for p_s in p_s_grid:
        for variant in variants:
            try:
                points.append(threshold_pu(p_s, variant, p_r_target, p_f_max, **options))
            except StarClusterError as err:
                _LOGGER.warning("Threshold at p_s=%s (%s) failed: %s", p_s, variant.value, err)
                try:
                    L = min_leaves(p_s, p_f_max)
                    p_f = failure_probability(L, p_s)
                except StarClusterError:
                    L, p_f = 0, math.nan
                points.append(
                    ThresholdPoint(p_s, variant, L, p_f, math.nan, p_r_target, error=str(err))
                )
    return points


def _first_order_coefficient(variant: Variant, L: int) -> Fraction:
    # Exact for polynomials of degree two in p_u.
    h = Fraction(1, 10**6)
    single = Fraction(p_r_independent(variant, h, L).p_r)
    double = Fraction(p_r_independent(variant, 2 * h, L).p_r)
    return 2 * single / h - double / (2 * h)


def independent_crossover_L() -> Fraction:
    """L at which both variants have the same first-order p_r as p_u -> 0."""
    base = MIN_LEAVES
    p1 = [_first_order_coefficient(Variant.P1, L) for L in (base, base + 1)]
    p2 = [_first_order_coefficient(Variant.P2, L) for L in (base, base + 1)]
    slope_gap = (p1[1] - p1[0]) - (p2[1] - p2[0])
    if slope_gap == 0:
        raise InfeasibleThresholdError("first-order coefficients never cross")
    return base + (p2[0] - p1[0]) / slope_gap


@dataclass
class SingleFaultTally:
    """Root-flip weights of every single fault in one assembly.

    `counted` and `regions` follow the attribution convention and are in
    units of each source's error rate; `classes` is keyed by correlation
    class and also per source.
    """

    counted: dict[str, float] = field(default_factory=dict)
    regions: dict[str, dict[str, float]] = field(default_factory=dict)
    classes: dict[str, dict[str, float]] = field(default_factory=dict)


def _root_positions(record: AssemblyRecord) -> dict[int, int]:
    roots = record.circuit.roots
    positions = {}
    for connection in record.connections:
        row = roots.index(connection.partner_root)
        for qubit in connection.qubits:
            positions[qubit] = row
    return positions


def tally_single_faults(record: AssemblyRecord, sources: Sequence[str]) -> SingleFaultTally:
    """Enumerate every single fault of `sources` and weigh its root flips.

    Correlation classes go by the number of flipped roots only. A fault that
    flips one neighbor root and leaves the central root alone is therefore
    classed as independent, so `classes` also covers flips that `counted`
    leaves out under root attribution, and the independent total used as the
    denominator of the second-nearest ratio includes them.
    """
    circuit = record.circuit
    conventions = record.params.conventions
    faults = enumerate_fault_locations(circuit, sources, conventions)
    tally = SingleFaultTally(
        counted={s: 0.0 for s in sources},
        regions={s: dict.fromkeys(REGIONS, 0.0) for s in sources},
        classes={s: dict.fromkeys(CORRELATION_CLASSES, 0.0) for s in sources},
    )
    if SOURCE_MEAS in sources:
        # The root's own readout is a virtual measurement location.
        tally.counted[SOURCE_MEAS] += 1.0
        tally.regions[SOURCE_MEAS][ROOT_SELF] += 1.0
        tally.classes[SOURCE_MEAS][INDEPENDENT] += 1.0
    if not faults:
        return tally

    batch = propagate_batch(circuit, LaneSet.single_faults(circuit, [f.location for f in faults]))
    flips = batch.root_flips(conventions.count_benign_as_flip).astype(bool)
    central_row = circuit.roots.index(record.central_root)
    central = flips[central_row]
    positions = _root_positions(record)
    lanes = np.arange(len(faults))
    partner_row = np.full(len(faults), -1, dtype=np.int64)
    touches_discard = np.zeros(len(faults), dtype=bool)
    for lane, fault in enumerate(faults):
        qubits = circuit.events[fault.location.event_index].qubits
        for qubit in qubits:
            if qubit in positions:
                partner_row[lane] = positions[qubit]
            if qubit in record.discarded_qubits:
                touches_discard[lane] = True
    on_connection = partner_row >= 0
    partner = np.zeros(len(faults), dtype=bool)
    partner[on_connection] = flips[partner_row[on_connection], lanes[on_connection]]
    if conventions.attribution == ATTRIBUTION_CONNECTION:
        counted = central | (on_connection & partner)
    else:
        counted = central

    flipped_roots = flips.sum(axis=0)
    classes = np.full(len(faults), -1, dtype=np.int64)
    classes[flipped_roots == 1] = 0
    classes[(flipped_roots == 2) & central] = 1
    classes[(flipped_roots == 2) & ~central] = 2
    classes[flipped_roots >= 3] = 3

    region = np.where(on_connection, 1, np.where(touches_discard, 2, 0))
    weights = np.array([f.weight for f in faults])
    source_of = np.array([f.source for f in faults])
    for source in sources:
        mine = source_of == source
        tally.counted[source] += float(weights[mine & counted].sum())
        for k, name in enumerate(REGIONS):
            tally.regions[source][name] += float(weights[mine & counted & (region == k)].sum())
        for k, name in enumerate(CORRELATION_CLASSES):
            tally.classes[source][name] += float(weights[mine & (classes == k)].sum())
    return tally


def _tally_sample(
    index: int, params: ProtocolParams, sources: tuple[str, ...], neighbor_count: int
) -> SingleFaultTally | None:
    rng = sample_rng(params.seed, params.L, index)
    record = sample_assembly(params, neighbor_count, rng)
    if record.star_failed:
        return None
    return tally_single_faults(record, sources)


def _collect_tallies(
    params: ProtocolParams,
    samples: int,
    sources: Sequence[str],
    coordinator: SamplingCoordinator | None,
) -> tuple[list[SingleFaultTally], int]:
    coordinator = coordinator or SamplingCoordinator(workers=1)
    results = coordinator.map(
        _tally_sample, samples, params, tuple(sources), REQUIRED_CONNECTIONS
    )
    kept = [tally for tally in results if tally is not None]
    return kept, samples - len(kept)


@dataclass(frozen=True)
class CoefficientFit:
    """Linear fit p_r / p ~ intercept + slope * L from single-fault enumeration."""

    intercept: float
    slope: float
    r_squared: float
    L_grid: tuple[int, ...]
    means: tuple[float, ...]
    stderrs: tuple[float, ...]
    region_means: dict[str, tuple[float, ...]]
    samples: int
    star_failures: tuple[int, ...]
    sources: tuple[str, ...]
    variant: Variant
    geometry: str
    conventions: dict[str, Any]
    seed: int
    reference: tuple[float, float] | None = None
    within_tolerance: bool | None = None
    warnings: tuple[str, ...] = ()

    @property
    def intercept_at_min_leaves(self) -> float:
        """Fitted value at L = 4, i.e. the constant when written in (L - 4)."""
        return self.intercept + self.slope * MIN_LEAVES

    def predict(self, L: int) -> float:
        """Fitted p_r / p at L."""
        return self.intercept + self.slope * L

    def as_dict(self) -> dict[str, Any]:
        """Plain-dict form."""
        return {
            "intercept": self.intercept,
            "slope": self.slope,
            "intercept_at_min_leaves": self.intercept_at_min_leaves,
            "r_squared": self.r_squared,
            "L_grid": list(self.L_grid),
            "means": list(self.means),
            "stderrs": list(self.stderrs),
            "region_means": {k: list(v) for k, v in self.region_means.items()},
            "samples": self.samples,
            "star_failures": list(self.star_failures),
            "sources": list(self.sources),
            "variant": self.variant.value,
            "geometry": self.geometry,
            "conventions": self.conventions,
            "seed": self.seed,
            "reference": None if self.reference is None else list(self.reference),
            "within_tolerance": self.within_tolerance,
            "warnings": list(self.warnings),
        }


def _r_squared(x: np.ndarray, y: np.ndarray, slope: float, intercept: float) -> float:
    residual = float(((y - (intercept + slope * x)) ** 2).sum())
    total = float(((y - y.mean()) ** 2).sum())
    if total == 0:
        return 1.0 if residual < 1e-24 else 0.0
    return 1.0 - residual / total


def extract_coefficients(
    params: ProtocolParams,
    L_grid: Sequence[int] = DEFAULT_L_GRID,
    samples: int = DEFAULT_SAMPLES,
    sources: Sequence[str] = (SOURCE_GATE,),
    coordinator: SamplingCoordinator | None = None,
) -> CoefficientFit:
    """Fit the per-rate root-flip probability against L by exhaustive single-fault enumeration."""
    grid = tuple(sorted(set(int(L) for L in L_grid)))
    if len(grid) < MIN_FIT_POINTS:
        raise InvalidArgumentError(
            f"need at least {MIN_FIT_POINTS} distinct L values, got {len(grid)}"
        )
    if samples <= 0:
        raise InvalidArgumentError(f"samples must be > 0, got {samples}")
    for source in sources:
        if source not in ALL_SOURCES:
            raise InvalidArgumentError(f"unknown fault source {source!r}")
    warnings: list[str] = []
    if samples < MIN_SAMPLES_PER_POINT:
        message = f"only {samples} samples per L (< {MIN_SAMPLES_PER_POINT}); low statistical power"
        _LOGGER.warning(message)
        warnings.append(message)

    means, stderrs, failures = [], [], []
    region_means: dict[str, list[float]] = {name: [] for name in REGIONS}
    for L in grid:
        kept, failed = _collect_tallies(params.with_updates(L=L), samples, sources, coordinator)
        failures.append(failed)
        if not kept:
            raise InfeasibleThresholdError(f"every sampled star failed at L={L}")
        totals = np.array([sum(t.counted.values()) for t in kept])
        means.append(float(totals.mean()))
        stderrs.append(float(totals.std(ddof=1) / math.sqrt(len(kept))) if len(kept) > 1 else 0.0)
        for name in REGIONS:
            region_means[name].append(
                float(np.mean([sum(t.regions[s][name] for s in sources) for t in kept]))
            )
        _LOGGER.info(
            "L=%d: p_r/p = %.6g +- %.2g over %d stars (%d star failures)",
            L,
            means[-1],
            stderrs[-1],
            len(kept),
            failed,
        )

    x = np.array(grid, dtype=float)
    y = np.array(means)
    slope, intercept = np.polyfit(x, y, 1)
    r_squared = _r_squared(x, y, slope, intercept)

    reference = within = None
    if tuple(sources) == (SOURCE_GATE,):
        reference = GATE_COEFFICIENTS[params.variant.value]
        factor = COEFFICIENT_TOLERANCE_FACTOR
        within = all(
            ref / factor <= value <= ref * factor
            for value, ref in zip((intercept, slope), reference)
        )
        if not within:
            message = (
                f"fitted ({intercept:.3g}, {slope:.3g}) deviates from reference "
                f"{reference} by more than a factor {factor:g}"
            )
            _LOGGER.warning(message)
            warnings.append(message)

    fit = CoefficientFit(
        intercept=float(intercept),
        slope=float(slope),
        r_squared=r_squared,
        L_grid=grid,
        means=tuple(means),
        stderrs=tuple(stderrs),
        region_means={k: tuple(v) for k, v in region_means.items()},
        samples=samples,
        star_failures=tuple(failures),
        sources=tuple(sources),
        variant=params.variant,
        geometry=params.arm.name,
        conventions=params.conventions.as_dict(),
        seed=params.seed,
        reference=reference,
        within_tolerance=within,
        warnings=tuple(warnings),
    )
    _LOGGER.info("Fit %s: %.4g + %.4g L (R^2 %.4f)", list(sources), fit.intercept, fit.slope, r_squared)
    return fit


def simulated_p_r(
    fits: Mapping[str, CoefficientFit],
    p_u: float,
    p_P: float,
    p_M: float,
    L: int,
    variant: Variant | str,
) -> dict[str, Any]:
    """p_r from fitted per-source coefficients next to the closed form."""
    rates = {SOURCE_GATE: p_u, SOURCE_PREP: p_P, SOURCE_MEAS: p_M}
    parts = {}
    for source, fit in fits.items():
        if source not in rates:
            raise InvalidArgumentError(f"unknown fault source {source!r}")
        parts[source] = fit.predict(L) * rates[source]
    formula = p_r_full(variant, p_u, p_P, p_M, L)
    return {
        "L": L,
        "simulated": sum(parts.values()),
        "simulated_by_source": parts,
        "formula": formula.p_r,
        "formula_by_source": formula.by_source,
    }


@dataclass(frozen=True)
class CorrelationReport:
    """Probabilities that one fault flips a given pattern of roots."""

    independent: float
    nearest_neighbor: float
    second_nearest: float
    higher_order: float
    samples: int
    star_failures: int
    params: dict[str, Any]

    @property
    def ratio(self) -> float:
        """second_nearest / independent."""
        return self.second_nearest / self.independent if self.independent else math.nan

    def as_dict(self) -> dict[str, Any]:
        """Plain-dict form."""
        return {
            INDEPENDENT: self.independent,
            NEAREST_NEIGHBOR: self.nearest_neighbor,
            SECOND_NEAREST: self.second_nearest,
            HIGHER_ORDER: self.higher_order,
            "ratio_second_nearest_to_independent": self.ratio,
            "samples": self.samples,
            "star_failures": self.star_failures,
            "params": self.params,
        }


def _rates(params: ProtocolParams) -> dict[str, float]:
    return {SOURCE_GATE: params.p_u, SOURCE_PREP: params.p_P, SOURCE_MEAS: params.p_M}


def classify_correlations(
    params: ProtocolParams,
    samples: int = DEFAULT_SAMPLES,
    coordinator: SamplingCoordinator | None = None,
    sources: Sequence[str] = ALL_SOURCES,
) -> CorrelationReport:
    """Classify root-flipping single faults by the set of roots they flip.

    Single-root flips count as independent whichever root they hit,
    neighbor roots included.
    """
    if samples <= 0:
        raise InvalidArgumentError(f"samples must be > 0, got {samples}")
    kept, failed = _collect_tallies(params, samples, sources, coordinator)
    rates = _rates(params)
    totals = dict.fromkeys(CORRELATION_CLASSES, 0.0)
    for tally in kept:
        for source in sources:
            for name in CORRELATION_CLASSES:
                totals[name] += tally.classes[source][name] * rates[source]
    count = max(len(kept), 1)
    report = CorrelationReport(
        independent=totals[INDEPENDENT] / count,
        nearest_neighbor=totals[NEAREST_NEIGHBOR] / count,
        second_nearest=totals[SECOND_NEAREST] / count,
        higher_order=totals[HIGHER_ORDER] / count,
        samples=samples,
        star_failures=failed,
        params=params.as_dict(),
    )
    _LOGGER.info(
        "Correlations over %d stars: independent %.4g, second-nearest %.4g (ratio %.3g)",
        len(kept),
        report.independent,
        report.second_nearest,
        report.ratio,
    )
    return report


@dataclass(frozen=True)
class FlipRateEstimate:
    """Random-fault Monte Carlo flip rate against the single-fault sum."""

    flips: int
    shots: int
    leading_order: float
    samples: int
    star_failures: int

    @property
    def rate(self) -> float:
        """Empirical central-root flip rate."""
        return self.flips / self.shots if self.shots else math.nan

    @property
    def stderr(self) -> float:
        """Binomial standard error of the rate."""
        if not self.shots:
            return math.nan
        return math.sqrt(max(self.rate * (1 - self.rate), 0.0) / self.shots)

    def as_dict(self) -> dict[str, Any]:
        """Plain-dict form."""
        return {
            "rate": self.rate,
            "stderr": self.stderr,
            "leading_order": self.leading_order,
            "flips": self.flips,
            "shots": self.shots,
            "samples": self.samples,
            "star_failures": self.star_failures,
        }


def _flip_sample(
    index: int, params: ProtocolParams, shots: int
) -> tuple[int, float] | None:
    rng = sample_rng(params.seed, params.L, index)
    record = sample_assembly(params, REQUIRED_CONNECTIONS, rng)
    if record.star_failed:
        return None
    circuit = record.circuit
    conventions = record.params.conventions
    rates = _rates(params)
    faults = enumerate_fault_locations(circuit, ALL_SOURCES, conventions)
    tally = tally_single_faults(record, ALL_SOURCES)
    leading = sum(tally.counted[s] * rates[s] for s in ALL_SOURCES)

    positions = _root_positions(record)
    lane_set = LaneSet(circuit, shots)
    touched = np.zeros((len(circuit.roots), shots), dtype=bool)
    probabilities = np.array([rates[f.source] * f.weight for f in faults])
    hits = rng.random((len(faults), shots)) < probabilities[:, None]
    for fault, row in zip(faults, hits):
        lanes = np.flatnonzero(row)
        if lanes.size == 0:
            continue
        lane_set.add_to_lanes(lanes, fault.location)
        for qubit in circuit.events[fault.location.event_index].qubits:
            if qubit in positions:
                touched[positions[qubit], lanes] = True
    flips = propagate_batch(circuit, lane_set).root_flips(conventions.count_benign_as_flip)
    flips = flips.astype(bool)
    central_row = circuit.roots.index(record.central_root)
    flipped = flips[central_row] ^ (rng.random(shots) < params.p_M)
    if conventions.attribution == ATTRIBUTION_CONNECTION:
        flipped = flipped | (touched & flips).any(axis=0)
    return int(flipped.sum()), leading


def sample_root_flip_rate(
    params: ProtocolParams,
    samples: int,
    shots: int = 256,
    coordinator: SamplingCoordinator | None = None,
) -> FlipRateEstimate:
    """Draw random faults at the configured rates, higher orders included."""
    if samples <= 0 or shots <= 0:
        raise InvalidArgumentError("samples and shots must be > 0")
    coordinator = coordinator or SamplingCoordinator(workers=1)
    results = coordinator.map(_flip_sample, samples, params, shots)
    kept = [r for r in results if r is not None]
    estimate = FlipRateEstimate(
        flips=sum(r[0] for r in kept),
        shots=shots * len(kept),
        leading_order=float(np.mean([r[1] for r in kept])) if kept else math.nan,
        samples=samples,
        star_failures=samples - len(kept),
    )
    _LOGGER.info(
        "Random-fault flip rate %.5g +- %.2g (leading order %.5g)",
        estimate.rate,
        estimate.stderr,
        estimate.leading_order,
    )
    return estimate
