"""Individual panel renderers drawing into matplotlib axes."""

from __future__ import annotations

import numpy as np

from .io import SchemaError, read_columns


def plot_scan(ax, csv_path, m=None, mark=None, title=None):
    """Re/Im of the admissible width versus frequency (scan CSV schema)."""
    cols = read_columns(csv_path,
                        required=("omega", "re_dtilde", "im_dtilde", "m",
                                  "singular_flag"))
    sel = np.ones(len(cols["omega"]), dtype=bool)
    if m is not None:
        sel &= cols["m"] == m
    sel &= cols["singular_flag"] == 0
    if not np.any(sel):
        raise SchemaError(f"{csv_path}: no usable samples for m={m}")
    om = cols["omega"][sel]
    order = np.argsort(om)
    om = om[order]
    ax.plot(om, cols["re_dtilde"][sel][order], "b-", lw=1.5,
            label=r"Re $\tilde d_m$")
    ax.plot(om, cols["im_dtilde"][sel][order], "r--", lw=1.2,
            label=r"Im $\tilde d_m$")
    ax.axhline(0.0, color="0.6", lw=0.6)
    if mark is not None:
        ax.plot([mark[0]], [mark[1]], "ko", ms=6, mfc="none")
    ax.set_xlabel(r"$\omega$")
    ax.set_ylabel(r"$\tilde d_m(\omega)$")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)


def plot_profile(ax, csv_path, title=None, ylabel=None, xlim=None):
    """Complex field or potential profile (x, re, im)."""
    cols = read_columns(csv_path, required=("x", "re", "im"))
    ax.plot(cols["x"], cols["re"], "b-", lw=1.2, label="Re")
    ax.plot(cols["x"], cols["im"], "r--", lw=1.0, label="Im")
    ax.set_xlabel(r"$x$")
    if ylabel:
        ax.set_ylabel(ylabel)
    if xlim:
        ax.set_xlim(*xlim)
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)


def plot_bifurcation(ax, branch_csv, predictor_csv=None, title=None):
    """Branch norm over frequency, with the asymptotic overlay when given."""
    br = read_columns(branch_csv, required=("omega", "eps", "l2norm",
                                            "residual"))
    ax.plot(br["omega"], br["l2norm"], "b--", lw=1.5, label="numerical branch")
    if predictor_csv is not None:
        pr = read_columns(predictor_csv, required=("omega", "eps", "l2norm"))
        lo = max(br["omega"].min(), pr["omega"].min())
        hi = min(br["omega"].max(), pr["omega"].max())
        if hi <= lo:
            raise SchemaError(
                "branch and predictor curves do not share a frequency range")
        ax.plot(pr["omega"], pr["l2norm"], "r-", lw=1.2,
                label="first-order approximation")
    ax.set_xlabel(r"$\omega$")
    ax.set_ylabel(r"$\|\varphi\|$")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
