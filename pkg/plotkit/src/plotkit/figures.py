"""Figure specifications and deterministic rendering.

A figure spec is a JSON file:

    {
      "output": "case2_panels.png",
      "figsize": [9.0, 6.5],
      "panels": [
        {"kind": "profile", "csv": "out/potential.csv", "title": "potential"},
        {"kind": "profile", "csv": "out/phi0.csv", "title": "eigenfunction"},
        {"kind": "profile", "csv": "out/field_0063.csv"},
        {"kind": "bifurcation", "branch": "out/branch.csv",
         "predictor": "out/predictor.csv"}
      ]
    }

Panel kinds: "scan" (csv, optional m and mark [omega, d]), "profile"
(csv), "bifurcation" (branch, optional predictor).  Relative paths are
resolved against the spec file's directory.  1 to 4 panels are laid out
on a 1x1, 1x2 or 2x2 grid.  Rendering is pixel-deterministic: fixed
style, fixed dpi, no timestamps in the image metadata.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .io import SchemaError, read_json
from .panels import plot_bifurcation, plot_profile, plot_scan

_STYLE = {
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.25,
    "svg.hashsalt": "plotkit",
}

_KINDS = ("scan", "profile", "bifurcation")


@dataclass
class FigureSpec:
    output: Path
    panels: list
    figsize: tuple = (9.0, 6.5)
    base: Path = field(default_factory=Path)

    @classmethod
    def load(cls, path) -> "FigureSpec":
        path = Path(path)
        raw = read_json(path)
        base = path.parent
        panels = raw.get("panels", [])
        if not 1 <= len(panels) <= 4:
            raise SchemaError("a figure needs between 1 and 4 panels")
        for p in panels:
            if p.get("kind") not in _KINDS:
                raise SchemaError(f"unknown panel kind {p.get('kind')!r}")
            for key in ("csv", "branch", "predictor"):
                if key in p and not (base / p[key]).exists():
                    raise SchemaError(f"referenced input missing: {p[key]}")
        if "output" not in raw:
            raise SchemaError("figure spec needs an 'output' file name")
        return cls(
            output=base / raw["output"],
            panels=panels,
            figsize=tuple(raw.get("figsize", (9.0, 6.5))),
            base=base,
        )


def _layout(n):
    return {1: (1, 1), 2: (1, 2), 3: (2, 2), 4: (2, 2)}[n]


def render_figure(spec: FigureSpec) -> Path:
    with plt.rc_context(_STYLE):
        rows, cols = _layout(len(spec.panels))
        fig, axes = plt.subplots(rows, cols, figsize=spec.figsize)
        axes = [axes] if rows * cols == 1 else list(axes.ravel())
        for ax in axes[len(spec.panels):]:
            ax.set_visible(False)
        for ax, p in zip(axes, spec.panels):
            kind = p["kind"]
            if kind == "scan":
                plot_scan(ax, spec.base / p["csv"], m=p.get("m"),
                          mark=p.get("mark"), title=p.get("title"))
            elif kind == "profile":
                plot_profile(ax, spec.base / p["csv"], title=p.get("title"),
                             ylabel=p.get("ylabel"), xlim=p.get("xlim"))
            else:
                pred = p.get("predictor")
                plot_bifurcation(
                    ax, spec.base / p["branch"],
                    spec.base / pred if pred else None,
                    title=p.get("title"))
        fig.tight_layout()
        suffix = spec.output.suffix.lower()
        if suffix == ".svg":
            metadata = {"Date": None}
        elif suffix == ".png":
            metadata = {"Software": "plotkit"}
        else:
            raise SchemaError(f"unsupported output format {suffix!r}")
        fig.savefig(spec.output, metadata=metadata)
        plt.close(fig)
    return spec.output
