"""End-to-end experiment drivers: build graph, quench, measure, analyze, fit.

Every runner is deterministic given its config; the seed only feeds the
optional outcome sampling, which no reported quantity consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import fitting
from .entanglement import (
    CorrelationCurve,
    EntropyCurve,
    Region,
    correlation_curve,
    entropy_of_modes,
    mutual_information,
    mutual_information_curve,
    region_entropy_curve,
    renyi_entropy,
    subsystem_spectrum,
    two_sided_entropy_curve,
    von_neumann_entropy,
)
from .fitting import FitError, FitResult
from .graphs import (
    CouplingGraph,
    DiskSpec,
    WormholeSpec,
    attach_probe,
    build_decorated_disk,
    build_disk_graph,
    build_wormhole_graph,
    poincare_coordinates,
)
from .holography import RtSurface, entanglement_wedge_contains, rt_geodesic_arc
from .phase_space import (
    GaussianState,
    apply_quench,
    condition_on_momentum_measurement,
    make_initial_state,
)

GEOMETRIES = ("disk", "wormhole", "decorated_disk")
TASKS = (
    "entropy_scan",
    "renyi_scan",
    "correlation_scan",
    "mi_scan",
    "probe_map",
    "squeeze_sweep",
)
PROBE_REGION_PRESETS = (
    "small_interval",
    "large_interval",
    "two_disconnected",
    "two_connected",
    "full_boundary",
)

_PURITY_TOL = 1e-8
_PROBE_DECOUPLED_TOL = 1e-12

#: throat level used for wormholes when the config leaves it unset; one
#: level below the boundary reproduces the reference thermal fits
DEFAULT_THROAT_OFFSET = 1


class ProtocolError(RuntimeError):
    """The measurement protocol produced an unphysical result."""


class ProbeDecoupledError(ProtocolError):
    """A probe ended up unentangled, so normalized MI is undefined."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one pipeline run."""

    geometry: str
    depth: int
    mu: float
    task: str
    t: float = 1.0
    throat_depth: int | None = None
    interior: str = "ring_bridge"
    alpha: float = 1.0
    alphas: tuple[float, ...] = (0.5, 1.0, 2.0, 3.0, 5.0)
    region_size: int = 4
    mu_values: tuple[float, ...] = ()
    region: str | None = None
    intervals: tuple[tuple[int, int], ...] | None = None
    side: str = "single"
    average_offsets: bool = True
    exclude_margin: int = 0
    seed: int = 0
    output_dir: str | None = None

    def __post_init__(self) -> None:
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.depth < 2:
            raise ValueError("depth must be >= 2")
        if self.task == "probe_map" and self.geometry != "disk":
            raise ValueError("probe maps are defined for the undecorated disk geometry")
        if self.region is not None and self.region not in PROBE_REGION_PRESETS:
            raise ValueError(f"unknown region preset {self.region!r}")
        if self.geometry != "wormhole" and self.throat_depth is not None:
            raise ValueError("throat_depth only applies to wormhole geometry")


def build_graph(config: ExperimentConfig) -> CouplingGraph:
    if config.geometry == "disk":
        return build_disk_graph(DiskSpec(config.depth))
    if config.geometry == "decorated_disk":
        return build_decorated_disk(config.depth)
    throat = config.throat_depth
    if throat is None:
        throat = config.depth - DEFAULT_THROAT_OFFSET
    return build_wormhole_graph(WormholeSpec(config.depth, throat, config.interior))


def graph_descriptor(config: ExperimentConfig) -> str:
    if config.geometry == "wormhole":
        throat = config.throat_depth
        if throat is None:
            throat = config.depth - DEFAULT_THROAT_OFFSET
        return f"wormhole(depth={config.depth},throat={throat},interior={config.interior})"
    return f"{config.geometry}(depth={config.depth})"


def run_protocol(graph: CouplingGraph, mu: float, t: float = 1.0) -> GaussianState:
    """Initial squeezed state -> quench on J -> momentum homodyne of bulk+split.

    Returns the conditional state of the unmeasured (boundary and probe)
    modes and verifies it is pure; a purity failure signals numerical
    breakdown or a measured component decoupled from the boundary.
    """
    measured = graph.measured_nodes()
    unmeasured = graph.num_nodes - len(measured)
    if not measured or unmeasured < 1:
        raise ValueError("graph must have at least one measured and one kept node")
    state = make_initial_state(graph.num_nodes, mu, roles=graph.roles())
    quenched = apply_quench(state, graph.coupling_matrix, t)
    boundary = condition_on_momentum_measurement(quenched, measured)
    nu = boundary.symplectic_eigenvalues()
    worst = float(np.max(np.abs(nu - 0.5)))
    if worst > _PURITY_TOL:
        raise ProtocolError(
            f"boundary state is not pure (max |nu - 1/2| = {worst:.3e})"
        )
    return boundary


def boundary_mode_rings(graph: CouplingGraph) -> dict[str, tuple[int, ...]]:
    """Ring-ordered mode indices of the conditional state, keyed by side.

    Conditioning keeps unmeasured nodes in ascending node-id order, so the
    state mode index of a node is its rank among unmeasured nodes.
    """
    kept = sorted(set(range(graph.num_nodes)) - set(graph.measured_nodes()))
    position = {node_id: idx for idx, node_id in enumerate(kept)}
    sides = {node.side for node in graph.nodes if node.role == "boundary"}
    rings: dict[str, tuple[int, ...]] = {}
    if sides == {None}:
        rings["single"] = tuple(position[n] for n in graph.boundary_ring())
    else:
        for side in sorted(s for s in sides if s is not None):
            rings[side] = tuple(position[n] for n in graph.boundary_ring(side))
    return rings


def probe_mode_index(graph: CouplingGraph) -> int:
    """State mode index of the (single) probe node after conditioning."""
    probes = graph.nodes_with_role("probe")
    if len(probes) != 1:
        raise ValueError("expected exactly one probe node")
    kept = sorted(set(range(graph.num_nodes)) - set(graph.measured_nodes()))
    return kept.index(probes[0])


def offset_classes(config: ExperimentConfig) -> int:
    """Number of rotationally inequivalent region offsets for the geometry.

    The disk (and its decorated variant) is invariant under rotation by
    half the boundary; the wormhole under rotation by one throat-ring step.
    Averaging over one offset per class equals averaging over all offsets.
    """
    if config.geometry == "wormhole":
        throat = config.throat_depth
        if throat is None:
            throat = config.depth - DEFAULT_THROAT_OFFSET
        return 2 ** (config.depth - throat)
    boundary = 2**config.depth if config.geometry == "disk" else 2 ** (config.depth - 1)
    return boundary // 2


def _curve_offsets(config: ExperimentConfig, ring_size: int) -> Sequence[int] | None:
    if not config.average_offsets:
        return None
    classes = min(offset_classes(config), ring_size)
    return range(classes)


def _base_metadata(config: ExperimentConfig) -> dict:
    return {
        "graph": graph_descriptor(config),
        "mu": config.mu,
        "t": config.t,
    }


@dataclass(frozen=True)
class EntropyScanResult:
    config: ExperimentConfig
    graph: CouplingGraph
    curves: dict[str, EntropyCurve]
    fits: dict[str, FitResult]


def run_entropy_scan(config: ExperimentConfig) -> EntropyScanResult:
    """Entropy curve(s) plus the matching minimal-surface model fit."""
    graph = build_graph(config)
    state = run_protocol(graph, config.mu, config.t)
    rings = boundary_mode_rings(graph)
    meta = _base_metadata(config)
    curves: dict[str, EntropyCurve] = {}
    fits: dict[str, FitResult] = {}
    if config.geometry == "wormhole":
        left, right = rings["left"], rings["right"]
        offsets = _curve_offsets(config, len(left))
        curves["one_sided"] = region_entropy_curve(
            state,
            left,
            alpha=config.alpha,
            average_offsets=config.average_offsets,
            offsets=offsets,
            metadata={**meta, "model": "btz_one_sided", "side": "left"},
        )
        curves["two_sided"] = two_sided_entropy_curve(
            state,
            left,
            right,
            alpha=config.alpha,
            average_offsets=config.average_offsets,
            offsets=offsets,
            metadata={**meta, "model": "btz_two_sided", "side": "two_sided"},
        )
        if abs(config.alpha - 1.0) <= 1e-9:
            fits["btz_one_sided"] = fitting.fit_btz_entropy(
                curves["one_sided"], exclude_margin=config.exclude_margin
            )
            fits["btz_two_sided"] = fitting.fit_btz_entropy(
                curves["one_sided"],
                curves["two_sided"],
                exclude_margin=config.exclude_margin,
            )
    else:
        ring = rings["single"]
        offsets = _curve_offsets(config, len(ring))
        curves["boundary"] = region_entropy_curve(
            state,
            ring,
            alpha=config.alpha,
            average_offsets=config.average_offsets,
            offsets=offsets,
            metadata={**meta, "model": "cft_disk", "side": "single"},
        )
        if abs(config.alpha - 1.0) <= 1e-9:
            fits["cft_disk"] = fitting.fit_cft_entropy(
                curves["boundary"], exclude_margin=config.exclude_margin
            )
    return EntropyScanResult(config, graph, curves, fits)


@dataclass(frozen=True)
class RenyiScanResult:
    """Entropy ratios S_alpha / S at fixed region size, per squeezing value."""

    config: ExperimentConfig
    region_size: int
    rows: tuple[tuple[float, float, float], ...]  # (mu, alpha, ratio)

    @staticmethod
    def cft_ratio(alpha: float) -> float:
        return 0.5 * (1.0 + 1.0 / alpha)


def run_renyi_scan(config: ExperimentConfig) -> RenyiScanResult:
    """Ratio table over (mu, alpha) at fixed region size on the boundary ring."""
    mus = config.mu_values or (config.mu,)
    ell = config.region_size
    rows: list[tuple[float, float, float]] = []
    for mu in mus:
        run_config = replace(config, mu=mu, task="entropy_scan")
        graph = build_graph(run_config)
        state = run_protocol(graph, mu, config.t)
        rings = boundary_mode_rings(graph)
        ring = rings["single"] if "single" in rings else rings["left"]
        length = len(ring)
        if not 1 <= ell < length:
            raise ValueError(f"region size {ell} does not fit a ring of {length}")
        offsets = _curve_offsets(run_config, length)
        if offsets is None:
            offsets = [0]
        spectra = [
            subsystem_spectrum(state, [ring[(o + k) % length] for k in range(ell)])
            for o in offsets
        ]
        base = float(np.mean([von_neumann_entropy(s) for s in spectra]))
        for alpha in config.alphas:
            value = float(np.mean([renyi_entropy(s, alpha) for s in spectra]))
            rows.append((mu, alpha, value / base))
    return RenyiScanResult(config, ell, tuple(rows))


@dataclass(frozen=True)
class SqueezeSweepResult:
    """Fitted central charge per squeezing value, with optional log-law fit."""

    config: ExperimentConfig
    rows: tuple[tuple[float, float, float], ...]  # (mu, c, c_stderr)
    log_fit: FitResult | None


def run_squeeze_sweep(config: ExperimentConfig) -> SqueezeSweepResult:
    """Fit c(mu) over the configured squeezing list.

    For undecorated geometries, additionally fits c = a ln(1/mu) + b on the
    small-mu half of the sweep.
    """
    mus = tuple(config.mu_values)
    if len(mus) < 3:
        raise ValueError("squeeze sweep needs at least three mu values")
    if max(mus) / min(mus) < 10.0:
        raise ValueError("squeeze sweep mu values should span at least a decade")
    rows = []
    for mu in mus:
        scan = run_entropy_scan(replace(config, mu=mu, task="entropy_scan"))
        fit = scan.fits["cft_disk"]
        rows.append((mu, fit.params["c"], fit.std_errors["c"]))
    log_fit = None
    if config.geometry == "disk":
        ordered = sorted(rows, key=lambda row: row[0])
        half = ordered[: max(2, (len(ordered) + 1) // 2)]
        x = np.log(1.0 / np.array([row[0] for row in half]))
        y = np.array([row[1] for row in half])
        design = np.column_stack([x, np.ones_like(x)])
        beta, errors, rss = fitting._linear_fit(design, y)
        log_fit = FitResult(
            model_id="log_squeeze",
            params={"a": float(beta[0]), "b": float(beta[1])},
            std_errors={"a": float(errors[0]), "b": float(errors[1])},
            residual_norm=math.sqrt(rss),
            domain=tuple(float(v) for v in x),
        )
    return SqueezeSweepResult(config, tuple(rows), log_fit)


@dataclass(frozen=True)
class CorrelationScanResult:
    config: ExperimentConfig
    graph: CouplingGraph
    curves: dict[str, CorrelationCurve]  # keys "x", "p", "mi"
    fits: dict[str, FitResult]
    fit_failures: dict[str, str]


def run_correlation_scan(config: ExperimentConfig) -> CorrelationScanResult:
    """Boundary two-point covariances and MI vs separation, with power-law fits.

    Power-law fits that cannot run (sign-alternating covariances on
    undecorated graphs) are recorded as failures, not raised.
    """
    graph = build_graph(config)
    state = run_protocol(graph, config.mu, config.t)
    rings = boundary_mode_rings(graph)
    ring = rings["single"] if "single" in rings else rings["left"]
    meta = _base_metadata(config)
    curves = {
        "x": correlation_curve(state, ring, "x", metadata={**meta, "model": "power_law"}),
        "p": correlation_curve(state, ring, "p", metadata={**meta, "model": "power_law"}),
        "mi": mutual_information_curve(state, ring, metadata={**meta, "model": "power_law"}),
    }
    wanted = ("mi",) if config.task == "mi_scan" else ("x", "p", "mi")
    fits: dict[str, FitResult] = {}
    failures: dict[str, str] = {}
    for label in wanted:
        try:
            fits[label] = fitting.fit_power_law(curves[label])
        except FitError as exc:
            failures[label] = str(exc)
    return CorrelationScanResult(config, graph, curves, fits, failures)


@dataclass(frozen=True)
class ProbeMapResult:
    """Normalized mutual information I(A:b)/S(b) per probed bulk node."""

    config: ExperimentConfig
    graph: CouplingGraph
    region: Region
    entries: dict[int, float]
    missing: dict[int, str]
    surface: RtSurface | None
    coordinates: dict[int, tuple[float, float]]

    def __post_init__(self) -> None:
        for node, value in self.entries.items():
            if not -1e-9 <= value <= 2.0 + 1e-9:
                raise ValueError(f"normalized MI {value!r} out of [0, 2] at node {node}")


def probe_region(preset: str, boundary_size: int) -> Region:
    """Fig-style boundary region presets for probe maps."""
    quarter = boundary_size // 4
    eighth = boundary_size // 8
    if preset == "small_interval":
        return Region(((0, quarter),))
    if preset == "large_interval":
        return Region(((0, 5 * boundary_size // 8),))
    if preset == "two_disconnected":
        return Region(((0, eighth), (boundary_size // 2, eighth)))
    if preset == "two_connected":
        return Region(((0, 3 * eighth), (boundary_size // 2, 3 * eighth)))
    if preset == "full_boundary":
        return Region(((0, boundary_size),))
    raise ValueError(f"unknown region preset {preset!r}")


def run_probe_map(config: ExperimentConfig) -> ProbeMapResult:
    """Attach a probe to each bulk node in turn and map I(A:b)/S(b).

    A probe whose marginal entropy vanishes is recorded as missing rather
    than zero.  The minimal-surface arcs for the region are attached for
    overlay plotting (absent for the full-boundary region).
    """
    base = build_graph(config)
    boundary_size = len(base.boundary_ring())
    if config.intervals is not None:
        region = Region(config.intervals, side=config.side)
    else:
        preset = config.region or "small_interval"
        region = probe_region(preset, boundary_size)
    positions = region.positions(boundary_size)
    full_region = len(positions) == boundary_size
    surface = None if full_region else rt_geodesic_arc(region.intervals, boundary_size)
    entries: dict[int, float] = {}
    missing: dict[int, str] = {}
    for bulk_node in base.nodes_with_role("bulk"):
        probed = attach_probe(base, bulk_node)
        state = run_protocol(probed, config.mu, config.t)
        rings = boundary_mode_rings(probed)
        ring = rings["single"]
        probe_mode = probe_mode_index(probed)
        s_probe = entropy_of_modes(state, [probe_mode])
        if s_probe < _PROBE_DECOUPLED_TOL:
            missing[bulk_node] = "probe decoupled (S(b) ~ 0)"
            continue
        region_modes = [ring[pos] for pos in positions]
        info = mutual_information(state, region_modes, [probe_mode])
        entries[bulk_node] = info / s_probe
    return ProbeMapResult(
        config, base, region, entries, missing, surface, poincare_coordinates(base)
    )


def classify_probe_map(result: ProbeMapResult) -> dict[int, bool]:
    """Whether each probed bulk node lies inside the region's wedge."""
    if result.surface is None:
        return {node: True for node in result.entries}
    pairing = result.surface.minimal.pairing
    boundary_size = len(result.graph.boundary_ring())
    out = {}
    for node in result.entries:
        xy = result.coordinates[node]
        out[node] = entanglement_wedge_contains(
            result.region.intervals, boundary_size, xy, pairing=pairing
        )
    return out


def run_task(config: ExperimentConfig):
    """Dispatch a config to its task runner."""
    if config.task == "entropy_scan":
        return run_entropy_scan(config)
    if config.task == "renyi_scan":
        return run_renyi_scan(config)
    if config.task in ("correlation_scan", "mi_scan"):
        return run_correlation_scan(config)
    if config.task == "probe_map":
        return run_probe_map(config)
    if config.task == "squeeze_sweep":
        return run_squeeze_sweep(config)
    raise ValueError(f"unknown task {config.task!r}")
