"""Serialized run outputs: CSV curves, fit records, probe maps and manifests.

Data files are byte-reproducible for a fixed config; the timestamp lives
only in the manifest.  Floating-point values are written with 17
significant digits so they round-trip exactly.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import format_config
from .entanglement import CorrelationCurve, EntropyCurve
from .fitting import FitResult
from .graphs import graph_to_text
from .pipelines import (
    CorrelationScanResult,
    EntropyScanResult,
    ProbeMapResult,
    RenyiScanResult,
    SqueezeSweepResult,
)


def fmt(value: float) -> str:
    return f"{float(value):.17g}"


@dataclass(frozen=True)
class RunManifest:
    tool_version: str
    timestamp: str
    config_text: str
    files: dict[str, str]  # file name -> sha256 hex digest


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _metadata_header(metadata: dict) -> str:
    parts = []
    for key in sorted(metadata):
        value = metadata[key]
        text = fmt(value) if isinstance(value, float) else str(value)
        parts.append(f"{key}={text}")
    return "# " + " ".join(parts)


def write_entropy_curve_csv(path: Path, curve: EntropyCurve) -> None:
    lines = [_metadata_header(curve.metadata), "ell,S"]
    for ell, s in zip(curve.sizes, curve.entropies):
        lines.append(f"{int(ell)},{fmt(s)}")
    path.write_text("\n".join(lines) + "\n")


def read_entropy_curve_csv(path: str | Path) -> EntropyCurve:
    """Inverse of write_entropy_curve_csv; restores header metadata."""
    lines = Path(path).read_text().splitlines()
    metadata: dict = {}
    data_lines = []
    for line in lines:
        if line.startswith("#"):
            for part in line[1:].split():
                key, _, value = part.partition("=")
                metadata[key] = _coerce(value)
        elif line and not line.startswith("ell"):
            data_lines.append(line)
    sizes = []
    entropies = []
    for line in data_lines:
        ell_text, s_text = line.split(",")
        sizes.append(int(ell_text))
        entropies.append(float(s_text))
    return EntropyCurve(np.array(sizes), np.array(entropies), metadata)


def _coerce(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            continue
    return value


def write_correlation_csv(path: Path, curves: dict[str, CorrelationCurve]) -> None:
    x, p, mi = curves["x"], curves["p"], curves["mi"]
    lines = [_metadata_header(x.metadata), "d,cov_x,cov_p,corr_x,corr_p,mi"]
    for i, d in enumerate(x.separations):
        lines.append(
            ",".join(
                [
                    str(int(d)),
                    fmt(x.values[i]),
                    fmt(p.values[i]),
                    fmt(x.normalized[i]),
                    fmt(p.normalized[i]),
                    fmt(mi.values[i]),
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n")


def read_correlation_column(path: str | Path, column: str) -> CorrelationCurve:
    """Read one value column of a correlations CSV as a fit-ready curve."""
    lines = Path(path).read_text().splitlines()
    metadata: dict = {}
    header: list[str] | None = None
    seps: list[int] = []
    values: list[float] = []
    for line in lines:
        if line.startswith("#"):
            for part in line[1:].split():
                key, _, value = part.partition("=")
                metadata[key] = _coerce(value)
            continue
        if header is None:
            header = line.split(",")
            if column not in header:
                raise ValueError(f"column {column!r} not in {header}")
            continue
        cells = line.split(",")
        seps.append(int(cells[0]))
        values.append(float(cells[header.index(column)]))
    label = {"cov_x": "x", "cov_p": "p", "mi": "mi"}.get(column, column)
    return CorrelationCurve(np.array(seps), np.array(values), None, label, metadata)


def format_fit_record(fit: FitResult) -> str:
    lines = [
        f"model = {fit.model_id}",
        f"n_points = {len(fit.domain)}",
        f"residual_norm = {fmt(fit.residual_norm)}",
        f"rms_residual = {fmt(fit.rms_residual)}",
    ]
    for name in fit.params:
        lines.append(f"{name} = {fmt(fit.params[name])}")
        lines.append(f"{name}_stderr = {fmt(fit.std_errors[name])}")
    for key in sorted(fit.extra):
        lines.append(f"{key} = {fit.extra[key]}")
    return "\n".join(lines) + "\n"


def write_fit_record(path: Path, fit: FitResult) -> None:
    path.write_text(format_fit_record(fit))


def write_probe_map_csv(path: Path, result: ProbeMapResult) -> None:
    lines = [
        f"# graph={result.config.geometry}(depth={result.config.depth})"
        f" mu={fmt(result.config.mu)} region={_region_text(result)}",
        "node_id,R,theta,px,py,norm_mi",
    ]
    for node_id in result.graph.nodes_with_role("bulk"):
        node = result.graph.node(node_id)
        px, py = result.coordinates[node_id]
        value = result.entries.get(node_id)
        value_text = fmt(value) if value is not None else "nan"
        lines.append(
            f"{node_id},{node.depth},{fmt(node.theta)},{fmt(px)},{fmt(py)},{value_text}"
        )
    path.write_text("\n".join(lines) + "\n")


def _region_text(result: ProbeMapResult) -> str:
    return ";".join(f"{start}:{length}" for start, length in result.region.intervals)


def write_arcs_csv(path: Path, result: ProbeMapResult) -> None:
    surface = result.surface
    lines = [
        f"# pairing={surface.minimal.pairing}"
        f" regularized_length={fmt(surface.minimal.regularized_length)}",
        "arc_index,x,y",
    ]
    for index, arc in enumerate(surface.minimal.arcs):
        for x, y in arc.points:
            lines.append(f"{index},{fmt(x)},{fmt(y)}")
    path.write_text("\n".join(lines) + "\n")


def write_outputs(result, output_dir: str | Path) -> RunManifest:
    """Write a run's data files plus a manifest with content hashes."""
    outdir = Path(output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def emit(name: str, writer, *args) -> None:
        target = outdir / name
        writer(target, *args)
        written.append(target)

    if isinstance(result, EntropyScanResult):
        if "boundary" in result.curves:
            emit("entropy_curve.csv", write_entropy_curve_csv, result.curves["boundary"])
        for key in ("one_sided", "two_sided"):
            if key in result.curves:
                emit(f"entropy_{key}.csv", write_entropy_curve_csv, result.curves[key])
        for model_id, fit in result.fits.items():
            emit(f"fit_{model_id}.txt", write_fit_record, fit)
        emit("graph.txt", lambda p, g: p.write_text(graph_to_text(g)), result.graph)
    elif isinstance(result, RenyiScanResult):
        emit("renyi_ratios.csv", _write_renyi_csv, result)
    elif isinstance(result, SqueezeSweepResult):
        emit("squeeze_sweep.csv", _write_sweep_csv, result)
        if result.log_fit is not None:
            emit("fit_log_squeeze.txt", write_fit_record, result.log_fit)
    elif isinstance(result, CorrelationScanResult):
        emit("correlations.csv", write_correlation_csv, result.curves)
        for label, fit in result.fits.items():
            emit(f"fit_power_law_{label}.txt", write_fit_record, fit)
        if result.fit_failures:
            emit("fit_failures.txt", _write_failures, result.fit_failures)
        emit("graph.txt", lambda p, g: p.write_text(graph_to_text(g)), result.graph)
    elif isinstance(result, ProbeMapResult):
        emit("probe_map.csv", write_probe_map_csv, result)
        if result.surface is not None:
            emit("rt_arcs.csv", write_arcs_csv, result)
        emit("graph.txt", lambda p, g: p.write_text(graph_to_text(g)), result.graph)
    else:
        raise TypeError(f"cannot serialize result of type {type(result).__name__}")

    manifest = RunManifest(
        tool_version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(),
        config_text=format_config(result.config),
        files={path.name: _sha256(path) for path in written},
    )
    manifest_lines = [
        f"tool = holoquench {manifest.tool_version}",
        f"timestamp = {manifest.timestamp}",
        "[config]",
        manifest.config_text.rstrip("\n"),
        "[files]",
    ]
    for name in sorted(manifest.files):
        manifest_lines.append(f"{name} sha256={manifest.files[name]}")
    (outdir / "manifest.txt").write_text("\n".join(manifest_lines) + "\n")
    return manifest


def _write_renyi_csv(path: Path, result: RenyiScanResult) -> None:
    lines = [
        f"# region_size={result.region_size} graph={result.config.geometry}"
        f"(depth={result.config.depth})",
        "mu,alpha,ratio,cft_ratio",
    ]
    for mu, alpha, ratio in result.rows:
        lines.append(
            f"{fmt(mu)},{fmt(alpha)},{fmt(ratio)},{fmt(result.cft_ratio(alpha))}"
        )
    path.write_text("\n".join(lines) + "\n")


def _write_sweep_csv(path: Path, result: SqueezeSweepResult) -> None:
    lines = [
        f"# graph={result.config.geometry}(depth={result.config.depth})",
        "mu,c,c_stderr",
    ]
    for mu, c, err in result.rows:
        lines.append(f"{fmt(mu)},{fmt(c)},{fmt(err)}")
    path.write_text("\n".join(lines) + "\n")


def _write_failures(path: Path, failures: dict[str, str]) -> None:
    lines = [f"{label}: {reason}" for label, reason in sorted(failures.items())]
    path.write_text("\n".join(lines) + "\n")
