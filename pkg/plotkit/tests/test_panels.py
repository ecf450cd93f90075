import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pytest

from plotkit.io import SchemaError, read_columns
from plotkit.figures import FigureSpec, render_figure
from plotkit.cli import main


def test_read_columns_schema(profile_csv):
    cols = read_columns(profile_csv, required=("x", "re", "im"))
    assert len(cols["x"]) == 200
    with pytest.raises(SchemaError):
        read_columns(profile_csv, required=("nope",))


def test_read_columns_empty(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("omega,re_dtilde\n")
    with pytest.raises(SchemaError):
        read_columns(p)
    with pytest.raises(SchemaError):
        read_columns(tmp_path / "missing.csv")


def test_scan_panel(scan_csv, tmp_path):
    spec = tmp_path / "fig.json"
    spec.write_text(json.dumps({
        "output": "scan.png",
        "panels": [{"kind": "scan", "csv": scan_csv.name, "m": -1,
                    "mark": [3.8275, 1.0]}],
    }))
    out = render_figure(FigureSpec.load(spec))
    assert out.exists() and out.stat().st_size > 1000


def test_bifurcation_panel(branch_pair, tmp_path):
    br, pr = branch_pair
    spec = tmp_path / "fig.json"
    spec.write_text(json.dumps({
        "output": "bif.png",
        "panels": [{"kind": "bifurcation", "branch": br.name,
                    "predictor": pr.name}],
    }))
    assert render_figure(FigureSpec.load(spec)).exists()


def test_bifurcation_predictor_only(branch_pair, tmp_path):
    br, _ = branch_pair
    spec = tmp_path / "fig.json"
    spec.write_text(json.dumps({
        "output": "bif.png",
        "panels": [{"kind": "bifurcation", "branch": br.name}],
    }))
    assert render_figure(FigureSpec.load(spec)).exists()


def test_spec_validation(tmp_path, profile_csv):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "output": "x.png",
        "panels": [{"kind": "profile", "csv": "missing.csv"}],
    }))
    with pytest.raises(SchemaError, match="missing"):
        FigureSpec.load(bad)
    bad.write_text(json.dumps({"output": "x.png", "panels": []}))
    with pytest.raises(SchemaError, match="panels"):
        FigureSpec.load(bad)
    bad.write_text(json.dumps({
        "output": "x.png",
        "panels": [{"kind": "mystery", "csv": profile_csv.name}],
    }))
    with pytest.raises(SchemaError, match="mystery"):
        FigureSpec.load(bad)


def test_cli_roundtrip_and_determinism(tmp_path, profile_csv, branch_pair):
    br, pr = branch_pair
    spec = tmp_path / "four.json"
    spec.write_text(json.dumps({
        "output": "four.png",
        "panels": [
            {"kind": "profile", "csv": profile_csv.name, "title": "a"},
            {"kind": "profile", "csv": profile_csv.name, "title": "b"},
            {"kind": "profile", "csv": profile_csv.name, "title": "c"},
            {"kind": "bifurcation", "branch": br.name, "predictor": pr.name},
        ],
    }))
    assert main([str(spec)]) == 0
    first = (tmp_path / "four.png").read_bytes()
    assert main([str(spec)]) == 0
    assert (tmp_path / "four.png").read_bytes() == first


def test_cli_error_exit(tmp_path):
    spec = tmp_path / "nope.json"
    assert main([str(spec)]) == 2


def test_svg_output(tmp_path, profile_csv):
    spec = tmp_path / "fig.json"
    spec.write_text(json.dumps({
        "output": "p.svg",
        "panels": [{"kind": "profile", "csv": profile_csv.name}],
    }))
    assert main([str(spec)]) == 0
    first = (tmp_path / "p.svg").read_bytes()
    assert main([str(spec)]) == 0
    assert (tmp_path / "p.svg").read_bytes() == first
