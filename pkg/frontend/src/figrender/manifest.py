"""Figure manifests: which CSV tables feed each figure and how to draw them.

A manifest lists the table files behind one figure together with a style
hint per layer and the axis labels per panel.  Building a manifest fully
validates every referenced file against the documented schema (numeric
columns followed by one trailing label column; histogram tables carry bin
edges), so a manifest in hand guarantees the render step cannot hit a
missing or malformed table.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .errors import ManifestError

# Style hints follow the house plotting convention.
SOLID = "solid"
SHORT_DASH = "short-dash"
LONG_DASH = "long-dash"
BARS = "bars"

_WIDTHS = (SOLID, SHORT_DASH, LONG_DASH)


@dataclass(frozen=True)
class CsvLayer:
    """One plotted table: a curve or a histogram."""

    path: Path
    label: str
    kind: str  # "curve" or "hist"
    style: str
    color: str
    panel: int = 0


@dataclass(frozen=True)
class LoadedLayer:
    """A layer with its parsed numeric columns."""

    layer: CsvLayer
    columns: tuple


@dataclass(frozen=True)
class FigureManifest:
    figure_id: int
    layers: tuple[CsvLayer, ...]
    x_labels: tuple[str, ...]
    y_label: str

    def __post_init__(self):
        if not self.layers:
            raise ManifestError(f"figure {self.figure_id} has an empty layer list")
        panels = {layer.panel for layer in self.layers}
        if panels != set(range(len(self.x_labels))):
            raise ManifestError(
                f"figure {self.figure_id} layers use panels {sorted(panels)} "
                f"but {len(self.x_labels)} axis labels were given"
            )

    @property
    def n_panels(self) -> int:
        return len(self.x_labels)


def _curve(name: str, label: str, style: str, color: str, panel: int = 0) -> CsvLayer:
    return CsvLayer(Path(name), label, "curve", style, color, panel)


def _hist(name: str, label: str, color: str, panel: int = 0) -> CsvLayer:
    return CsvLayer(Path(name), label, "hist", BARS, color, panel)


def _interval_family(fig: int, widths) -> list[CsvLayer]:
    layers = []
    for color, prior in (("C0", 0.5), ("C1", 0.3)):
        for style, eps in zip(_WIDTHS, widths):
            layers.append(
                _curve(
                    f"fig{fig}_eps{eps:g}_prior{prior:g}_curve.csv",
                    f"eps={eps:g}, prior={prior:g}",
                    style,
                    color,
                )
            )
    return layers


def _mean_family(fig: int) -> list[CsvLayer]:
    return [
        _curve(f"fig{fig}_xbar{xbar:g}_curve.csv", f"xbar={xbar:g}", style, "C0")
        for style, xbar in zip(_WIDTHS, (1.7, 2.1, 2.5))
    ]


def _layout(figure_id: int) -> FigureManifest:
    if figure_id == 1:
        return FigureManifest(1, tuple(_interval_family(1, (0.0, 0.25, 0.5))),
                              ("observed mean",), "post-data probability")
    if figure_id == 2:
        return FigureManifest(2, tuple(_mean_family(2)), ("mean",), "density")
    if figure_id == 3:
        return FigureManifest(3, tuple(_interval_family(3, (0.0, 0.1, 0.2))),
                              ("observed mean",), "band probability")
    if figure_id == 4:
        layers = tuple(
            _hist(f"fig4_x{x}_hist.csv", f"x={x}", color)
            for color, x in (("C0", 5), ("C1", 4), ("C2", 3))
        )
        return FigureManifest(4, layers, ("proportion",), "density")
    if figure_id == 5:
        return FigureManifest(5, tuple(_mean_family(5)), ("mean",), "density")
    if figure_id == 6:
        layers = (
            _hist("fig6_mu_hist.csv", "chain", "C0", panel=0),
            _curve("fig6_mu_fiducial_curve.csv", "fiducial", SOLID, "C3", panel=0),
            _hist("fig6_sigma_hist.csv", "chain", "C0", panel=1),
            _curve("fig6_sigma_fiducial_curve.csv", "fiducial", SOLID, "C3", panel=1),
        )
        return FigureManifest(6, layers, ("mean", "deviation"), "density")
    if figure_id == 7:
        return FigureManifest(7, tuple(_interval_family(7, (0.0, 0.25, 0.5))),
                              ("observed mean",), "post-data probability")
    if figure_id == 8:
        layers = tuple(
            _curve(f"fig8_mu_xbar{xbar:g}_curve.csv", f"xbar={xbar:g}", style, "C0", panel=0)
            for style, xbar in zip(_WIDTHS, (1.7, 2.1, 2.5))
        ) + (
            _curve("fig8_sigma_post_curve.csv", "post-data", SOLID, "C0", panel=1),
            _curve("fig8_sigma_fiducial_curve.csv", "fiducial", SHORT_DASH, "C3", panel=1),
        )
        return FigureManifest(8, layers, ("mean", "deviation"), "density")
    if figure_id == 9:
        layers = []
        for panel, key in enumerate(("pit", "pic", "rho")):
            layers.append(_hist(f"fig9_{key}_hist.csv", "fiducial mixture", "C0", panel))
            for style, e_t in zip(_WIDTHS, (5, 6, 7)):
                layers.append(
                    _curve(f"fig9_{key}_jeffreys_et{e_t}_curve.csv",
                           f"Jeffreys, e_t={e_t}", style, "C3", panel)
                )
        return FigureManifest(
            9, tuple(layers),
            ("treatment proportion", "control proportion", "risk ratio"), "density",
        )
    raise ManifestError(f"unknown figure id {figure_id}; expected 1..9")


def load_table(path: Path, kind: str):
    """Parse one table, enforcing the documented schema.

    Curves carry two numeric columns then a label; histograms carry bin
    left / bin right / density then a label.  Returns the numeric columns.
    """
    want = 3 if kind == "curve" else 4
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ManifestError(f"cannot read {path.name}: {exc}") from exc
    if len(rows) < 2:
        raise ManifestError(f"{path.name}: no data rows")
    header = rows[0]
    if len(header) != want or header[-1] != "label":
        raise ManifestError(
            f"{path.name}: header {header} does not match the {kind} schema"
        )
    numeric = []
    for row in rows[1:]:
        if len(row) != want:
            raise ManifestError(f"{path.name}: ragged row {row}")
        try:
            numeric.append([float(cell) for cell in row[:-1]])
        except ValueError as exc:
            raise ManifestError(f"{path.name}: non-numeric cell in {row}") from exc
    cols = tuple(tuple(vals) for vals in zip(*numeric))
    if kind == "hist" and any(b <= a for a, b in zip(cols[0], cols[1])):
        raise ManifestError(f"{path.name}: histogram bins must have positive width")
    return cols


def build_manifest(figure_id: int, table_dir) -> FigureManifest:
    """Manifest for one figure with every layer resolved against a directory.

    Validates existence and schema of every table up front; the returned
    manifest carries absolute paths.
    """
    base = _layout(int(figure_id))
    table_dir = Path(table_dir)
    resolved = []
    for layer in base.layers:
        path = table_dir / layer.path
        if not path.is_file():
            raise ManifestError(f"figure {base.figure_id} needs {layer.path.name}, "
                                f"not found in {table_dir}")
        load_table(path, layer.kind)
        resolved.append(CsvLayer(path, layer.label, layer.kind, layer.style,
                                 layer.color, layer.panel))
    return FigureManifest(base.figure_id, tuple(resolved), base.x_labels, base.y_label)


def load_layers(manifest: FigureManifest) -> list[LoadedLayer]:
    """Parse every table in the manifest, in layer order."""
    return [
        LoadedLayer(layer, load_table(layer.path, layer.kind))
        for layer in manifest.layers
    ]
