"""Figures from sppbif CLI outputs.

Read-only consumers of the documented CSV/JSON schemas: width-condition
scans, field profiles, potentials and bifurcation diagrams.  No physics
is recomputed here; rerunning on identical inputs produces identical
image bytes.
"""

__version__ = "0.1.0"

from .io import read_columns, read_json
from .figures import FigureSpec, render_figure
from .panels import plot_bifurcation, plot_profile, plot_scan
