"""Compose and write figure images from validated manifests.

Rendering consumes only the CSV tables; nothing is recomputed.  Output is
deterministic given the inputs: the Agg backend, a pinned SVG hash salt,
and fixed metadata keep repeated renders byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import RenderError
from .manifest import BARS, LONG_DASH, SHORT_DASH, SOLID, FigureManifest, load_layers

plt.rcParams["svg.hashsalt"] = "figrender"

_LINESTYLES = {
    SOLID: "solid",
    SHORT_DASH: (0, (3.0, 2.0)),
    LONG_DASH: (0, (8.0, 3.0)),
}

FORMATS = ("png", "svg")


def compose(manifest: FigureManifest):
    """Build the matplotlib Figure for a manifest without writing it."""
    loaded = load_layers(manifest)
    n = manifest.n_panels
    fig, axes = plt.subplots(1, n, figsize=(4.4 * n, 3.4), squeeze=False)
    axes = axes[0]
    for item in loaded:
        layer = item.layer
        ax = axes[layer.panel]
        if layer.kind == "hist":
            left, right, density = item.columns
            ax.bar(left, density, width=np.subtract(right, left), align="edge",
                   color=layer.color, alpha=0.45, edgecolor="0.3", linewidth=0.4,
                   label=layer.label)
        else:
            x, y = item.columns
            ax.plot(x, y, linestyle=_LINESTYLES[layer.style], color=layer.color,
                    linewidth=1.4, label=layer.label)
    for panel, ax in enumerate(axes):
        ax.set_xlabel(manifest.x_labels[panel])
        ax.set_ylabel(manifest.y_label)
        ax.legend(fontsize=7, frameon=False)
    fig.suptitle(f"Figure {manifest.figure_id}", fontsize=10)
    fig.tight_layout()
    return fig


def render(manifest: FigureManifest, out_path, dpi: int = 150) -> Path:
    """Write one image for the manifest; the suffix picks the format."""
    out_path = Path(out_path)
    fmt = out_path.suffix.lstrip(".").lower()
    if fmt not in FORMATS:
        raise RenderError(f"unsupported image format {out_path.suffix!r}; "
                          f"use one of {FORMATS}")
    fig = compose(manifest)
    # fixed metadata: no embedded timestamps, so renders are byte-stable
    metadata = {"Software": "figrender"} if fmt == "png" else {"Date": None}
    try:
        fig.savefig(out_path, dpi=dpi, metadata=metadata)
    except OSError as exc:
        raise RenderError(f"cannot write {out_path}: {exc}") from exc
    finally:
        plt.close(fig)
    return out_path
