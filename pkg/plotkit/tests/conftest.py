import numpy as np
import pytest


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format(float(v), ".17g") for v in row))
    path.write_text("\n".join(lines) + "\n")


@pytest.fixture
def scan_csv(tmp_path):
    p = tmp_path / "scan.csv"
    oms = np.linspace(2.3, 5.0, 60)
    rows = [(om, 2.0 / om, 1e-12, -1, 0) for om in oms]
    write_csv(p, ("omega", "re_dtilde", "im_dtilde", "m", "singular_flag"), rows)
    return p


@pytest.fixture
def profile_csv(tmp_path):
    p = tmp_path / "profile.csv"
    x = np.linspace(-5, 5, 200)
    rows = [(xi, np.exp(-xi**2), 0.3 * np.sin(xi)) for xi in x]
    write_csv(p, ("x", "re", "im"), rows)
    return p


@pytest.fixture
def branch_pair(tmp_path):
    br = tmp_path / "branch.csv"
    eps = np.linspace(1e-3, 0.08, 40)
    rows = [(3.8275 - 7.42 * e, e, np.sqrt(e) * (1 + 0.2 * e), 1e-11)
            for e in eps]
    write_csv(br, ("omega", "eps", "l2norm", "residual"), rows)
    pr = tmp_path / "predictor.csv"
    rows = [(3.8275 - 7.42 * e, e, np.sqrt(e)) for e in eps]
    write_csv(pr, ("omega", "eps", "l2norm"), rows)
    return br, pr
