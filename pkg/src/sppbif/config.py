"""Configuration files: flat INI-style key-value sections per case.

A case file describes the layer stack, the grid, numerical tolerances and
the per-task parameters (scan ranges, target width, branch endpoint).
Three reference configurations ship with the package and are addressable
by bare name (case1, case2, case3).
"""

from __future__ import annotations

import configparser
import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path

from .materials import LayerStack, MaterialModel

__all__ = ["ConfigError", "CaseConfig", "parse_config", "bundled_config_path"]


class ConfigError(ValueError):
    pass


_KNOWN_SECTIONS = {
    "stack", "grid", "numerics", "scan", "find", "linear", "expand",
    "branch", "floquet",
}


@dataclass
class CaseConfig:
    stack: LayerStack
    label: str
    n: int = 2048
    padding_decades: float = 10.0
    newton_tol: float = 1e-10
    max_iter: int = 40
    scan: dict = field(default_factory=dict)
    find: dict = field(default_factory=dict)
    linear: dict = field(default_factory=dict)
    expand: dict = field(default_factory=dict)
    branch: dict = field(default_factory=dict)
    floquet: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


def bundled_config_path(name: str) -> Path:
    ref = importlib.resources.files("sppbif") / "configs" / f"{name}.cfg"
    with importlib.resources.as_file(ref) as p:
        return Path(p)


def _parse_layer(spec: str, where: str, chi3: complex) -> MaterialModel:
    parts = spec.split()
    if not parts:
        raise ConfigError(f"{where}: empty layer definition")
    kind, kwargs = parts[0], {}
    for item in parts[1:]:
        if "=" not in item:
            raise ConfigError(f"{where}: expected key=value, got {item!r}")
        key, val = item.split("=", 1)
        kwargs[key] = val
    try:
        if kind == "const":
            eta = complex(kwargs.pop("eta"))
            model = MaterialModel(kind="const", eta=eta, chi3=chi3)
        elif kind == "drude":
            gamma = float(kwargs.pop("gamma"))
            plasma = float(kwargs.pop("plasma", 1.0))
            model = MaterialModel(kind="drude", gamma=gamma, plasma=plasma, chi3=chi3)
        else:
            raise ConfigError(f"{where}: unknown layer kind {kind!r}")
    except KeyError as exc:
        raise ConfigError(f"{where}: missing field {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    if kwargs:
        raise ConfigError(f"{where}: unknown keys {sorted(kwargs)}")
    return model


def _floats(text: str):
    return [float(t) for t in text.replace(",", " ").split()]


def parse_config(path) -> CaseConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    warnings_ = [
        f"unknown section [{s}]" for s in cp.sections() if s not in _KNOWN_SECTIONS
    ]
    known_keys = {
        "stack": {"k", "chi3", "interfaces"},
        "grid": {"n", "padding_decades"},
        "numerics": {"newton_tol", "max_iter"},
    }
    for sec, keys in known_keys.items():
        if sec in cp:
            for key in cp[sec]:
                if key not in keys and not key.startswith("layer"):
                    warnings_.append(f"unknown key '{key}' in [{sec}]")

    if "stack" not in cp:
        raise ConfigError(f"{path}: missing [stack] section")
    st = cp["stack"]
    if "k" not in st:
        raise ConfigError(f"{path}: [stack] is missing the field 'k'")
    try:
        k = float(st["k"])
        chi3 = complex(st.get("chi3", "1.0"))
        interfaces = _floats(st.get("interfaces", ""))
    except ValueError as exc:
        raise ConfigError(f"{path}: [stack]: {exc}") from None
    if any(b <= a for a, b in zip(interfaces, interfaces[1:])):
        raise ConfigError(f"{path}: interface positions must be increasing")
    layer_keys = sorted(key for key in st if key.startswith("layer"))
    layers = []
    for key in layer_keys:
        layers.append(_parse_layer(st[key], f"{path}: [stack] {key}", chi3))
    if len(layers) != len(interfaces) + 1:
        raise ConfigError(
            f"{path}: {len(layers)} layers need {len(layers)-1} interfaces, "
            f"got {len(interfaces)}"
        )
    try:
        stack = LayerStack(layers, interfaces, k)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    def section(name):
        if name not in cp:
            return {}
        out = {}
        for key, val in cp[name].items():
            try:
                if key in ("m", "steps", "n", "max_iter", "m_window", "samples"):
                    out[key] = int(val)
                elif key == "bracket":
                    out[key] = tuple(_floats(val))
                else:
                    out[key] = float(val)
            except ValueError as exc:
                raise ConfigError(f"{path}: [{name}] {key}: {exc}") from None
        return out

    grid_sec = section("grid")
    num_sec = section("numerics")
    return CaseConfig(
        stack=stack,
        label=path.stem,
        n=int(grid_sec.get("n", 2048)),
        padding_decades=float(grid_sec.get("padding_decades", 10.0)),
        newton_tol=float(num_sec.get("newton_tol", 1e-10)),
        max_iter=int(num_sec.get("max_iter", 40)),
        scan=section("scan"),
        find=section("find"),
        linear=section("linear"),
        expand=section("expand"),
        branch=section("branch"),
        floquet=section("floquet"),
        warnings=warnings_,
    )
