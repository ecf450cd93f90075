"""Command-line front end.

    sppbif <subcommand> --config <file-or-bundled-name> [--out DIR]
                        [--threads N] [--dump-fields]

Subcommands: scan-dtilde, find-omega0, solve-linear, expand, branch,
floquet-scan, validate.  Outputs are CSV (comma separated, header row,
LF) and JSON with floats printed to 17 significant digits; every run
writes a manifest.json listing the produced files and the config hash.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import CaseConfig, ConfigError, bundled_config_path, parse_config
from . import layered
from . import floquet as floquet_mod
from .grid import ComplexField, build_grid, inner, norm, potential_on_grid
from .spectrum import SpectrumError, adjoint_conjugation_defect, solve_eigenpair
from .expansion import ExpansionError, expand, predictor, second_order_correction
from .continuation import (
    ContinuationError,
    continue_branch,
    jacobian_apply,
    nonlinear_residual,
    pt_defect,
)

SUBCOMMANDS = (
    "scan-dtilde", "find-omega0", "solve-linear", "expand", "branch",
    "floquet-scan", "validate",
)


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return format(x, ".17g")


def _atomic_write(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


def write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path: Path, obj):
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def field_rows(field):
    x = field.grid.x
    v = field.values
    return [(x[i], v[i].real, v[i].imag) for i in range(len(x))]


class Runner:
    def __init__(self, cfg: CaseConfig, cfg_path: Path, out: Path, threads: int,
                 dump_fields: bool):
        self.cfg = cfg
        self.cfg_path = cfg_path
        self.out = out
        self.threads = threads
        self.dump_fields = dump_fields
        self.outputs = []
        out.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        p = self.out / name
        self.outputs.append(name)
        return p

    def manifest(self, subcommand: str, ok: bool = True):
        digest = hashlib.sha256(self.cfg_path.read_bytes()).hexdigest()
        write_json(self.out / "manifest.json", {
            "artifact": "sppbif",
            "version": __version__,
            "subcommand": subcommand,
            "config": str(self.cfg_path),
            "config_sha256": digest,
            "case": self.cfg.label,
            "complete": ok,
            "outputs": sorted(self.outputs),
        })

    # ----- grid / eigen helpers -------------------------------------
    def grid_builder(self):
        n = self.cfg.n
        pad = self.cfg.padding_decades
        return lambda stack, omega: build_grid(stack, pad, n, omega=omega)

    def eigendata(self):
        lin = self.cfg.linear
        if "omega_guess" not in lin or "bracket" not in lin:
            raise ConfigError(
                f"{self.cfg.label}: [linear] needs omega_guess and bracket"
            )
        return solve_eigenpair(
            self.cfg.stack, self.grid_builder(),
            lin["omega_guess"], lin["bracket"],
        )

    # ----- subcommands ----------------------------------------------
    def run_scan_dtilde(self):
        scan = self.cfg.scan
        lo, hi = scan.get("omega_min", 0.5), scan.get("omega_max", 5.0)
        steps = scan.get("steps", 500)
        window = scan.get("m_window", 0)
        ms = [scan.get("m", -1)] if not window else list(range(-window, window + 1))
        rows = []
        admissible = 0
        for m in ms:
            for om, re_d, im_d, singular in layered.scan_widths(
                self.cfg.stack, (lo, hi), steps, m
            ):
                rows.append((om, re_d, im_d, m, singular))
                if not singular and re_d > 0 and abs(im_d) < 1e-6:
                    admissible += 1
        write_csv(self.path("scan_dtilde.csv"),
                  ("omega", "re_dtilde", "im_dtilde", "m", "singular_flag"), rows)
        write_json(self.path("scan_summary.json"), {
            "omega_min": lo, "omega_max": hi, "steps": steps,
            "m_values": ms, "admissible_samples": admissible,
        })

    def run_find_omega0(self):
        find = self.cfg.find
        for key in ("d", "m", "bracket"):
            if key not in find:
                raise ConfigError(f"{self.cfg.label}: [find] needs '{key}'")
        omega0 = layered.find_eigenfrequency(
            self.cfg.stack, find["d"], find["m"], find["bracket"]
        )
        d_check = layered.admissible_width(self.cfg.stack, omega0, find["m"])
        write_json(self.path("omega0.json"), {
            "omega0": omega0, "d": find["d"], "m": find["m"],
            "dtilde_re": d_check.real, "dtilde_im": d_check.imag,
        })

    def run_solve_linear(self):
        eig = self.eigendata()
        grid = eig.grid
        write_json(self.path("linear.json"), {
            "omega0": eig.omega0,
            "transversality_re": eig.transversality.real,
            "transversality_im": eig.transversality.imag,
            "gap": eig.gap,
            "adjoint_conjugation_defect": adjoint_conjugation_defect(eig),
            "grid": {"n": grid.n, "h": grid.h,
                     "xmin": grid.x_min, "xmax": grid.x_max},
        })
        write_csv(self.path("phi0.csv"), ("x", "re", "im"), field_rows(eig.phi0))
        write_csv(self.path("phi0_star.csv"), ("x", "re", "im"),
                  field_rows(eig.phi0_star))
        W = potential_on_grid(grid, self.cfg.stack, eig.omega0)
        write_csv(self.path("potential.csv"), ("x", "re", "im"),
                  [(x, w.real, w.imag) for x, w in zip(grid.x, W)])
        return eig

    def run_expand(self):
        eig = self.run_solve_linear()
        tau = self.cfg.expand.get("tau", 1.0)
        epsilon = self.cfg.expand.get("epsilon", 1e-3)
        exp_data = expand(eig, tau=tau)
        second = second_order_correction(eig, exp_data, epsilon)
        center = self.cfg.stack.center
        write_json(self.path("expansion.json"), {
            "nu_re": exp_data.nu.real, "nu_im": exp_data.nu.imag,
            "sigma_re": second.sigma.real, "sigma_im": second.sigma.imag,
            "tau": tau, "epsilon": epsilon,
            "defects": {
                "solvability": exp_data.solvability_defect,
                "phi_corr_orthogonality": abs(inner(exp_data.phi_corr, eig.phi0_star)),
                "psi_orthogonality": abs(inner(second.psi, eig.phi0_star)),
                "pt_phi0": pt_defect(eig.phi0, center),
                "pt_phi_corr": pt_defect(exp_data.phi_corr, center),
                "pt_psi": pt_defect(second.psi, center),
                "contraction_estimate": second.contraction_estimate,
                "fixed_point_residual_sigma": second.residual_sigma,
                "fixed_point_residual_psi": second.residual_psi,
            },
            "iterations": second.iterations,
        })
        write_csv(self.path("phi_corr.csv"), ("x", "re", "im"),
                  field_rows(exp_data.phi_corr))
        write_csv(self.path("psi.csv"), ("x", "re", "im"), field_rows(second.psi))
        return eig, exp_data

    def run_branch(self):
        eig = self.eigendata()
        exp_data = expand(eig, tau=self.cfg.expand.get("tau", 1.0))
        br = self.cfg.branch
        if "omega_end" not in br:
            raise ConfigError(f"{self.cfg.label}: [branch] needs omega_end")
        branch = continue_branch(
            eig, exp_data, self.cfg.stack, eig.grid,
            br["omega_end"], steps=br.get("steps", 64),
            tol=self.cfg.newton_tol, case_label=self.cfg.label,
        )
        rows = [(p.omega, p.eps, p.l2norm, p.residual) for p in branch.points]
        write_csv(self.path("branch.csv"),
                  ("omega", "eps", "l2norm", "residual"), rows)
        # first-order predictor curve over the same frequency range
        nu = exp_data.nu.real
        eps_max = (br["omega_end"] - eig.omega0) / nu
        pred_rows = []
        for eps in np.linspace(0.0, eps_max, 200):
            om, phi = predictor(exp_data, eig, float(eps))
            pred_rows.append((complex(om).real, eps, norm(phi)))
        write_csv(self.path("predictor.csv"), ("omega", "eps", "l2norm"),
                  pred_rows)
        if self.dump_fields:
            for i, p in enumerate(branch.points):
                write_csv(self.path(f"field_{i:04d}.csv"), ("x", "re", "im"),
                          field_rows(p.phi))
        write_json(self.path("branch_summary.json"), {
            "omega0": eig.omega0,
            "nu_re": exp_data.nu.real, "nu_im": exp_data.nu.imag,
            "points": len(branch.points),
            "omega_last": branch.points[-1].omega if branch.points else None,
            "max_residual": max((p.residual for p in branch.points), default=0.0),
        })

    def run_floquet_scan(self):
        fl = self.cfg.floquet
        stack = self.cfg.stack
        if len(stack) != 2:
            raise ConfigError("floquet-scan needs a two-layer stack")
        k = stack.k
        lo, hi = fl.get("omega_min", 0.5), fl.get("omega_max", 3.0)
        samples = fl.get("samples", 101)
        period = fl.get("period", 1.0)
        steps = fl.get("steps", 1024)
        amp = fl.get("eta_amp", 0.0)
        left, right = stack.layers

        def left_W(om):
            return om**2 * (1 + left.chi1(om)) - k**2

        def right_W(om):
            base = om**2 * (1 + right.chi1(om)) - k**2
            if amp == 0.0:
                return lambda x: base
            mod = om**2 * amp
            return lambda x: base + mod * np.cos(2 * np.pi * x / period)

        rows, summary = floquet_mod.nonexistence_scan(
            left_W, right_W, (lo, hi), samples=samples,
            period=period, steps=steps, threads=self.threads,
        )
        write_csv(self.path("floquet_scan.csv"),
                  ("omega", "re_Rp", "im_Rp", "re_Rm", "im_Rm", "gap"),
                  [(om, Rp.real, Rp.imag, Rm.real, Rm.imag, gap)
                   for om, Rp, Rm, gap in rows])
        write_json(self.path("floquet_summary.json"), summary)

    def run_validate(self):
        checks = []

        def check(name, value, tol):
            ok = bool(value <= tol)
            checks.append({"name": name, "value": float(value),
                           "tolerance": tol, "pass": ok})
            return ok

        stack = self.cfg.stack
        # material derivatives against central differences
        om_ref = self.cfg.linear.get("omega_guess", 2.0)
        hstep = 1e-4
        worst = 0.0
        for m in stack.layers:
            d1 = m.chi1_domega(om_ref, 1)
            fd = (m.chi1(om_ref + hstep) - m.chi1(om_ref - hstep)) / (2 * hstep)
            worst = max(worst, abs(d1 - fd) / max(1.0, abs(d1)))
        check("chi1_derivative_vs_central_difference", worst, 1e-6)

        if len(stack) == 3:
            pt = layered.is_pt_symmetric(stack, om_ref)
            find = self.cfg.find
            if pt and {"d", "m", "bracket"} <= set(find):
                om0 = layered.find_eigenfrequency(
                    stack, find["d"], find["m"], find["bracket"])
                dt = layered.admissible_width(stack, om0, find["m"])
                check("width_roundtrip", abs(dt - find["d"]) / abs(find["d"]), 1e-8)
                rates = layered.decay_rates(stack, om0)
                ratio = ((rates.mu - rates.lambda_minus) * (rates.mu - rates.lambda_plus)
                         / ((rates.mu + rates.lambda_minus) * (rates.mu + rates.lambda_plus)))
                lhs = np.exp(2 * rates.mu * dt)
                check("width_exponential_identity", abs(lhs - ratio) / abs(ratio), 1e-10)
                eig = self.eigendata()
                check("analytic_vs_fd_omega0", abs(eig.omega0 - om0), 2e-3)
                check("phi0_normalization", abs(norm(eig.phi0) - 1.0), 1e-12)
                check("phi0_pairing", abs(inner(eig.phi0, eig.phi0_star) - 1.0), 1e-10)
                check("phi0_pt_defect", pt_defect(eig.phi0, stack.center), 1e-6)
                exp_data = expand(eig)
                check("nu_imaginary_part",
                      abs(exp_data.nu.imag) / max(1.0, abs(exp_data.nu)), 1e-6)
                check("phi_corr_orthogonality",
                      abs(inner(exp_data.phi_corr, eig.phi0_star)), 1e-10)
                check("phi_corr_pt_defect",
                      pt_defect(exp_data.phi_corr, stack.center), 1e-6)
                eps = self.cfg.expand.get("epsilon", 1e-3)
                second = second_order_correction(eig, exp_data, eps)
                check("sigma_imaginary_part",
                      abs(second.sigma.imag) / max(1.0, abs(second.sigma)), 1e-8)
                check("psi_pt_defect", pt_defect(second.psi, stack.center), 1e-6)
                # Jacobian against a central difference at the predictor point
                om_p, phi_p = predictor(exp_data, eig, eps)
                om_p = complex(om_p).real
                rng = np.random.default_rng(11)
                dv = rng.standard_normal(eig.grid.n) + 1j * rng.standard_normal(eig.grid.n)
                dphi = ComplexField(eig.grid, dv / (np.sqrt(eig.grid.h) * np.linalg.norm(dv)))
                hd = 1e-6
                Fp = nonlinear_residual(
                    ComplexField(eig.grid, phi_p.values + hd * dphi.values),
                    om_p, stack, eig.grid)
                Fm = nonlinear_residual(
                    ComplexField(eig.grid, phi_p.values - hd * dphi.values),
                    om_p, stack, eig.grid)
                Jd = jacobian_apply(phi_p, om_p, stack, eig.grid, dphi)
                fd_dir = (Fp.values - Fm.values) / (2 * hd)
                check("jacobian_vs_central_difference",
                      np.sqrt(eig.grid.h) * np.linalg.norm(fd_dir - Jd.values), 1e-6)
            else:
                scan = self.cfg.scan
                lo = scan.get("omega_min", 0.5)
                hi = scan.get("omega_max", 5.0)
                steps = scan.get("steps", 500)
                window = scan.get("m_window", 5)
                bad = 0
                for m in range(-window, window + 1):
                    for om, re_d, im_d, singular in layered.scan_widths(
                        stack, (lo, hi), steps, m
                    ):
                        if not singular and re_d > 0 and abs(im_d) < 1e-6:
                            bad += 1
                check("no_admissible_width", float(bad), 0.0)

        ok = all(c["pass"] for c in checks)
        write_json(self.path("validate.json"), {"checks": checks, "pass": ok})
        for c in checks:
            status = "PASS" if c["pass"] else "FAIL"
            print(f"[{status}] {c['name']}: {c['value']:.3e} (tol {c['tolerance']:g})")
        if not ok:
            raise SpectrumError("validation failed")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sppbif", description=__doc__)
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True,
                        help="config file path or bundled name (case1/2/3, twolayer)")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--dump-fields", action="store_true")
    args = parser.parse_args(argv)

    cfg_path = Path(args.config)
    if not cfg_path.exists() and cfg_path.suffix == "":
        try:
            cfg_path = bundled_config_path(args.config)
        except Exception:
            pass
    try:
        cfg = parse_config(cfg_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for w in cfg.warnings:
        print(f"warning: {w}", file=sys.stderr)

    runner = Runner(cfg, cfg_path, Path(args.out), args.threads, args.dump_fields)
    method = {
        "scan-dtilde": runner.run_scan_dtilde,
        "find-omega0": runner.run_find_omega0,
        "solve-linear": runner.run_solve_linear,
        "expand": runner.run_expand,
        "branch": runner.run_branch,
        "floquet-scan": runner.run_floquet_scan,
        "validate": runner.run_validate,
    }[args.subcommand]
    try:
        method()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        runner.manifest(args.subcommand, ok=False)
        return 2
    except (layered.LayeredError, floquet_mod.FloquetError, SpectrumError,
            ExpansionError, ContinuationError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        runner.manifest(args.subcommand, ok=False)
        return 3
    runner.manifest(args.subcommand, ok=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
