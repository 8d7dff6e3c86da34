"""Command-line experiment runner.

Subcommands: geometry, spectrum, bounds, landau, uncertainty, verify-lemma,
report.  Every run writes delimited output (CSV / JSON) plus rendered figures
into --out; reruns with the same configuration and seed produce byte-identical
CSV bodies.  Configuration values resolve as committed flags > config file >
defaults.  RIESZ_LAB_THREADS caps worker threads for sweep loops.

Exit codes: 0 success, 2 an asserted bound failed, 3 a numerical
self-check failed, 4 bad configuration.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import geometry as geo
from . import plotting
from .errors import BoundViolation, ConfigError, NumericalFailure
from .operators import (
    BC_DIRICHLET,
    BC_NEUMANN,
    DENSE_CAP,
    LandauParams,
    covering_spectrum,
    dispersion_validity_cap,
    eigensolve,
    landau_hamiltonian,
    landau_levels,
    laplacian,
    save_spectrum_csv,
)
from .semiclassics import (
    RieszQuery,
    bound_report,
    fit_improvement_constants,
    semiclassical_constant,
    write_fit_json,
    write_report_csv,
)
from .traces import run_verification_suite
from .uncertainty import high_energy_mass, landau_high_energy_mass, remainders_free, zero_extend

__all__ = ["ExperimentConfig", "main", "thread_count"]

_SHAPES = (
    "square",
    "rectangle",
    "disk",
    "annulus",
    "lshape",
    "two_disks",
    "perforated_square",
    "interval",
)


def thread_count() -> int:
    raw = os.environ.get("RIESZ_LAB_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        n = min(4, os.cpu_count() or 1)
    return n


@dataclass
class ExperimentConfig:
    """Resolved experiment parameters.

    Either shape (+ its geometric parameters) or mask_file identifies the
    domain.  lambdas must respect the dispersion validity cap 0.05 / h^2
    unless allow_beyond_cap is set, in which case offending rows are flagged
    rather than asserted."""

    shape: str = "square"
    shape_params: dict = field(default_factory=dict)
    mask_file: str = ""
    h: float = 1.0 / 32.0
    bcs: tuple[str, ...] = (BC_DIRICHLET, BC_NEUMANN)
    field_strength: float = 0.0
    theta: float = 0.5
    gammas: tuple[float, ...] = (1.0,)
    lambdas: tuple[float, ...] = ()
    n_lambda: int = 10
    pad: int = 4
    dispersion: str = "discrete"
    out: str = "riesz-lab-out"
    seed: int = 7
    trials: int = 500
    lowest: int = 0
    allow_beyond_cap: bool = False
    rho_tol: float = 0.0

    def validate(self):
        if self.h <= 0:
            raise ConfigError("grid spacing h must be positive")
        if not 0 < self.theta < 1:
            raise ConfigError("theta must lie in (0, 1)")
        if self.field_strength < 0:
            raise ConfigError("field strength must be nonnegative")
        if self.pad < 2:
            raise ConfigError("pad factor must be at least 2")
        if self.dispersion not in ("discrete", "continuum"):
            raise ConfigError(f"unknown dispersion {self.dispersion!r}")
        for bc in self.bcs:
            if bc not in (BC_DIRICHLET, BC_NEUMANN):
                raise ConfigError(f"unknown boundary condition {bc!r}")
        for g in self.gammas:
            if g < 0:
                raise ConfigError("gamma must be nonnegative")
        cap = dispersion_validity_cap(self.h)
        if not self.allow_beyond_cap:
            beyond = [lam for lam in self.lambdas if lam > cap]
            if beyond:
                raise ConfigError(
                    f"Lambda values {beyond} exceed the validity cap {cap:.6g}; "
                    "pass --allow-beyond-cap to emit flagged rows"
                )

    def domain(self) -> geo.GridDomain:
        try:
            if self.mask_file:
                return geo.load_mask(self.mask_file)
            return geo.make_shape(_make_shape_name(self.shape), self.h, **self.shape_params)
        except (ValueError, OSError) as exc:
            raise ConfigError(f"cannot build domain: {exc}") from exc

    def domain_label(self) -> str:
        if self.mask_file:
            return Path(self.mask_file).stem
        return self.shape

    def tol(self, dom_h: float = 0.0) -> float:
        """Scan tolerance for the regularized inradius; never finer than the
        actual grid spacing, which a mask file may set independently of h."""
        base = self.rho_tol if self.rho_tol > 0 else self.h
        return max(base, dom_h)


# ---------------------------------------------------------------------------
# configuration plumbing


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _parse_lambda_spec(text: str, n_lambda: int) -> tuple[float, ...]:
    text = text.strip()
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)
        lo, hi = float(lo_s), float(hi_s)
        if hi < lo:
            raise ConfigError("Lambda range must be increasing")
        return tuple(np.linspace(lo, hi, n_lambda))
    return _parse_float_list(text)


def _parse_bcs(text: str) -> tuple[str, ...]:
    text = text.strip().lower()
    if text == "both":
        return (BC_DIRICHLET, BC_NEUMANN)
    return tuple(tok.strip() for tok in text.split(",") if tok.strip())


def load_config_file(path) -> dict:
    """key = value lines; # starts a comment."""
    out = {}
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    for ln, line in enumerate(raw.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"bad config line {ln}: {line!r}")
        key, val = line.split("=", 1)
        out[key.strip().lower().replace("-", "_")] = val.strip()
    return out


_SHAPE_PARAM_KEYS = {
    "side": float,
    "width": float,
    "height": float,
    "radius": float,
    "inner": float,
    "outer": float,
    "r1": float,
    "r2": float,
    "gap": float,
    "holes": int,
    "hole_radius": float,
    "length": float,
}


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    file_vals = load_config_file(args.config) if getattr(args, "config", None) else {}

    def pick(key, flag_val, conv, default):
        if flag_val is not None:
            return flag_val
        if key in file_vals:
            try:
                return conv(file_vals[key])
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"bad config value for {key}: {exc}") from exc
        return default

    def conv_bool(s):
        return s.strip().lower() in ("1", "true", "yes", "on")

    n_lambda = pick("n_lambda", getattr(args, "n_lambda", None), int, 10)
    lam_spec = pick("lambda", getattr(args, "lambdas", None), str, "")
    lambdas = _parse_lambda_spec(lam_spec, n_lambda) if lam_spec else ()
    gamma_spec = pick("gamma", getattr(args, "gammas", None), str, "")
    gammas = _parse_float_list(gamma_spec) if gamma_spec else (1.0,)
    bc_spec = pick("bc", getattr(args, "bc", None), str, "")
    bcs = _parse_bcs(bc_spec) if bc_spec else (BC_DIRICHLET, BC_NEUMANN)

    shape = pick("shape", getattr(args, "shape", None), str, "square")
    shape = shape.replace("-", "_")
    if shape not in _SHAPES:
        raise ConfigError(f"unknown shape {shape!r}; choose from {', '.join(_SHAPES)}")
    shape_params = {}
    for key, conv in _SHAPE_PARAM_KEYS.items():
        val = pick(key, getattr(args, key, None), conv, None)
        if val is not None:
            shape_params[key] = val
    shape_params = _normalize_shape_params(shape, shape_params)

    cfg = ExperimentConfig(
        shape=shape,
        shape_params=shape_params,
        mask_file=pick("mask_file", getattr(args, "mask_file", None), str, ""),
        h=pick("h", getattr(args, "h", None), float, 1.0 / 32.0),
        bcs=bcs,
        field_strength=pick("b", getattr(args, "B", None), float, 0.0),
        theta=pick("theta", getattr(args, "theta", None), float, 0.5),
        gammas=gammas,
        lambdas=lambdas,
        n_lambda=n_lambda,
        pad=pick("pad", getattr(args, "pad", None), int, 4),
        dispersion=pick("dispersion", getattr(args, "dispersion", None), str, "discrete"),
        out=pick("out", getattr(args, "out", None), str, "riesz-lab-out"),
        seed=pick("seed", getattr(args, "seed", None), int, 7),
        trials=pick("trials", getattr(args, "trials", None), int, 500),
        lowest=pick("lowest", getattr(args, "lowest", None), int, 0),
        allow_beyond_cap=pick(
            "allow_beyond_cap", getattr(args, "allow_beyond_cap", None), conv_bool, False
        ),
        rho_tol=pick("rho_tol", getattr(args, "rho_tol", None), float, 0.0),
    )
    cfg.validate()
    return cfg


def _normalize_shape_params(shape: str, params: dict) -> dict:
    """Translate flag-level parameters into make_shape keyword arguments."""
    out = dict(params)
    if shape == "two_disks":
        r1 = out.pop("r1", 0.5)
        r2 = out.pop("r2", 0.35)
        gap = out.pop("gap", 0.15)
        return {
            "radii": (r1, r2),
            "centers": ((-(r1 + 0.5 * gap), 0.0), (r2 + 0.5 * gap, 0.0)),
        }
    allowed = {
        "square": {"side"},
        "rectangle": {"width", "height"},
        "disk": {"radius"},
        "annulus": {"inner", "outer"},
        "lshape": {"side"},
        "perforated_square": {"side", "holes", "hole_radius"},
        "interval": {"length"},
    }[shape]
    return {k: v for k, v in out.items() if k in allowed}


def _make_shape_name(shape: str) -> str:
    return "union_of_disks" if shape == "two_disks" else shape


# ---------------------------------------------------------------------------
# shared computation helpers


def _build_operator(cfg: ExperimentConfig, dom: geo.GridDomain, bc: str):
    if cfg.field_strength > 0:
        return landau_hamiltonian(dom, LandauParams(cfg.field_strength), bc)
    return laplacian(dom, bc)


def _geometry_summary(cfg: ExperimentConfig, dom: geo.GridDomain) -> dict:
    rho = geo.regularized_inradius(dom, cfg.theta, cfg.tol(dom.h))
    dual_rho = rho + 2 * dom.h
    comp = geo.complement_within_box(dom, math.ceil(dual_rho / dom.h) + 2)
    cert = geo.thickness_check(comp, dual_rho, 1.0 - cfg.theta - 0.05)
    return {
        "domain": cfg.domain_label(),
        "dim": dom.dim,
        "h": dom.h,
        "cells": dom.cell_count,
        "measure": geo.measure(dom),
        "width": geo.width(dom),
        "inradius": geo.inradius(dom),
        "theta": cfg.theta,
        "rho_tol": cfg.tol(dom.h),
        "rho_theta": rho,
        "mask_digest": dom.digest(),
        "complement_thickness": {
            "rho": cert.rho,
            "kappa": cert.kappa,
            "satisfied": cert.satisfied,
            "worst_ratio": cert.worst_ratio,
        },
    }


def _sweep_reports(cfg: ExperimentConfig, dom: geo.GridDomain, fields: tuple[float, ...]):
    """Bound reports for every (B, bc, gamma, Lambda); spectra are solved once
    per (B, bc) in a small thread pool."""
    if not cfg.lambdas:
        raise ConfigError("no Lambda grid given (use --Lambda)")
    rho = geo.regularized_inradius(dom, cfg.theta, cfg.tol(dom.h))
    w = geo.width(dom)
    lam_max = max(cfg.lambdas)
    label = cfg.domain_label()

    jobs = [(b, bc) for b in fields for bc in cfg.bcs]

    def solve(job):
        b, bc = job
        sub = ExperimentConfig(**{**cfg.__dict__, "field_strength": b})
        op = _build_operator(sub, dom, bc)
        return job, covering_spectrum(op, lam_max, want_vectors=False)

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        spectra = dict(pool.map(solve, jobs))

    reports = []
    for b in fields:
        for bc in cfg.bcs:
            spec = spectra[(b, bc)]
            for gamma in cfg.gammas:
                for lam in cfg.lambdas:
                    reports.append(
                        bound_report(
                            dom,
                            spec,
                            RieszQuery(lam, gamma),
                            b,
                            bc,
                            cfg.theta,
                            rho_theta=rho,
                            dom_width=w,
                            domain_label=label,
                        )
                    )
    reports.sort(key=lambda r: (r.domain_label, r.bc, r.field_strength, r.gamma, r.lam))
    return reports, spectra


def _fit_by_bc_gamma(reports) -> tuple[dict, list[str]]:
    """One fit per (bc, gamma) over asserted rows; returns fits keyed by bc
    (for the figure) and the list of violated-row descriptions."""
    fits = {}
    violations = []
    for bc in sorted({r.bc for r in reports}):
        for gamma in sorted({r.gamma for r in reports}):
            rows = [r for r in reports if r.bc == bc and r.gamma == gamma and r.asserted]
            bad = [r for r in rows if r.signed_gap <= 0]
            violations.extend(
                f"{r.domain_label},{r.bc},B={r.field_strength},gamma={r.gamma},"
                f"Lambda={r.lam},ratio={r.ratio!r}"
                for r in bad
            )
            if len(rows) >= 5 and not bad:
                fits[(bc, gamma)] = fit_improvement_constants(rows)
    return fits, violations


def _write_fits(fits: dict, outdir: Path):
    for (bc, gamma), fit in sorted(fits.items()):
        write_fit_json(fit, outdir / f"fit_{bc}_gamma{gamma:g}.json")


def _figure_fits(fits: dict) -> dict:
    """Collapse (bc, gamma) fits to one per bc for the gap figure."""
    out = {}
    for (bc, gamma), fit in sorted(fits.items()):
        out.setdefault(bc, fit)
    return out


def _csv_metadata(cfg: ExperimentConfig, dom: geo.GridDomain) -> dict:
    return {
        "domain": cfg.domain_label(),
        "h": f"{dom.h!r}",
        "theta": f"{cfg.theta!r}",
        "dispersion": cfg.dispersion,
        "mask": dom.digest(),
    }


# ---------------------------------------------------------------------------
# subcommands


def cmd_geometry(cfg: ExperimentConfig) -> int:
    outdir = _ensure_outdir(cfg)
    dom = cfg.domain()
    summary = _geometry_summary(cfg, dom)
    _write_json(summary, outdir / "geometry.json")
    geo.save_mask(dom, outdir / "mask.txt")
    plotting.save_domain_figure(dom, outdir / "domain.svg", title=cfg.domain_label())
    print(f"rho_theta(theta={cfg.theta:g}) = {summary['rho_theta']:.6g}")
    print(f"wrote {outdir}/geometry.json")
    return 0


def cmd_spectrum(cfg: ExperimentConfig) -> int:
    outdir = _ensure_outdir(cfg)
    dom = cfg.domain()
    code = 0
    for bc in cfg.bcs:
        op = _build_operator(cfg, dom, bc)
        if cfg.lowest > 0:
            spec = eigensolve(op, ("lowest", min(cfg.lowest, op.n)))
        elif cfg.lambdas:
            spec = eigensolve(op, ("below", max(cfg.lambdas)), k_hint=None)
        else:
            if op.n > DENSE_CAP:
                raise ConfigError(
                    f"{op.n} unknowns exceed the dense cap; pass --lowest or --Lambda"
                )
            spec = eigensolve(op, "all")
        meta = _csv_metadata(cfg, dom)
        meta["bc"] = bc
        meta["B"] = f"{cfg.field_strength!r}"
        save_spectrum_csv(spec, outdir / f"spectrum_{bc}.csv", meta)
        plotting.save_spectrum_figure(
            spec,
            geo.measure(dom),
            dom.dim,
            outdir / f"spectrum_{bc}.svg",
            title=f"{cfg.domain_label()} ({bc})",
        )
        print(
            f"{bc}: {len(spec.eigenvalues)} eigenvalues, "
            f"lowest = {spec.eigenvalues[0]:.6g}"
        )
    return code


def _run_bound_pipeline(cfg: ExperimentConfig, fields: tuple[float, ...], csv_name: str) -> int:
    outdir = _ensure_outdir(cfg)
    dom = cfg.domain()
    reports, _ = _sweep_reports(cfg, dom, fields)
    write_report_csv(reports, outdir / csv_name, _csv_metadata(cfg, dom))
    fits, violations = _fit_by_bc_gamma(reports)
    _write_fits(fits, outdir)
    plotting.save_gap_figure(
        reports, _figure_fits(fits), outdir / "gap_vs_E.svg", title=cfg.domain_label()
    )
    print(f"wrote {outdir}/{csv_name} ({len(reports)} rows, {len(fits)} fits)")
    if violations:
        for row in violations:
            print(f"bound violation: {row}", file=sys.stderr)
        return 2
    return 0


def cmd_bounds(cfg: ExperimentConfig) -> int:
    return _run_bound_pipeline(cfg, (cfg.field_strength,), "bounds.csv")


def cmd_landau(cfg: ExperimentConfig) -> int:
    if cfg.field_strength <= 0:
        raise ConfigError("landau subcommand needs --B > 0")
    outdir = _ensure_outdir(cfg)
    lam_ref = max(cfg.lambdas) if cfg.lambdas else dispersion_validity_cap(cfg.h)
    levels = landau_levels(cfg.field_strength, lam_ref)
    lines = ["k,level"] + [f"{k},{lvl:.12g}" for k, lvl in levels]
    (outdir / "levels.csv").write_text("\n".join(lines) + "\n")
    return _run_bound_pipeline(cfg, (cfg.field_strength,), "landau_bounds.csv")


def cmd_uncertainty(cfg: ExperimentConfig) -> int:
    outdir = _ensure_outdir(cfg)
    dom = cfg.domain()
    if not cfg.lambdas:
        raise ConfigError("no Lambda grid given (use --Lambda)")
    rho = geo.regularized_inradius(dom, cfg.theta, cfg.tol(dom.h))
    lam_max = max(cfg.lambdas)
    b = cfg.field_strength
    mass_rows = []
    for bc in cfg.bcs:
        op = _build_operator(cfg, dom, bc)
        spec = covering_spectrum(op, lam_max, want_vectors=True)
        for lam in cfg.lambdas:
            below = np.nonzero(spec.eigenvalues < lam)[0]
            for i in below:
                f = zero_extend(spec.eigenvectors[:, i], dom, cfg.pad)
                if b > 0:
                    sm = landau_high_energy_mass(f, b, lam)
                    expo = rho * math.sqrt(lam) + rho * rho * b
                else:
                    sm = high_energy_mass(f, lam, dispersion="continuum")
                    expo = rho * math.sqrt(lam)
                mass_rows.append(
                    (bc, int(i), float(spec.eigenvalues[i]), lam, sm.high_fraction, rho, expo)
                )
        if b == 0 and op.n <= DENSE_CAP:
            full = eigensolve(op, "all", want_vectors=True)
            rem_lines = ["Lambda,riesz,main,R_less,R_greater,identity_residual"]
            for lam in cfg.lambdas:
                rem = remainders_free(dom, full, lam, bc, cfg.pad, cfg.dispersion)
                rem_lines.append(
                    f"{lam:.12g},{rem.riesz:.12g},{rem.main:.12g},{rem.r_less:.12g},"
                    f"{rem.r_greater:.12g},{rem.identity_residual:.12g}"
                )
            (outdir / f"remainders_{bc}.csv").write_text("\n".join(rem_lines) + "\n")

    mass_rows.sort(key=lambda row: (row[0], row[3], row[1]))
    lines = ["bc,n,lambda_n,Lambda,mass_high_rel,rho_theta,E"]
    for bc, i, lam_n, lam, frac, rho_v, expo in mass_rows:
        lines.append(
            f"{bc},{i},{lam_n:.12g},{lam:.12g},{frac:.12g},{rho_v:.12g},{expo:.12g}"
        )
    (outdir / "uncertainty.csv").write_text("\n".join(lines) + "\n")
    plotting.save_mass_figure(
        [(row[6], row[4]) for row in mass_rows],
        outdir / "mass_vs_E.svg",
        title=cfg.domain_label(),
    )
    print(f"wrote {outdir}/uncertainty.csv ({len(mass_rows)} rows)")
    return 0


def cmd_verify_lemma(cfg: ExperimentConfig) -> int:
    outdir = _ensure_outdir(cfg)
    summary = run_verification_suite(cfg.trials, cfg.seed)
    _write_json(summary, outdir / "verify_lemma.json")
    print(
        f"trials={summary['trials']} max_residual={summary['max_residual']:.3e} "
        f"min_remainder={summary['min_remainder']:.3e} failures={summary['failures']}"
    )
    return 3 if summary["failures"] else 0


def cmd_report(cfg: ExperimentConfig) -> int:
    outdir = _ensure_outdir(cfg)
    dom = cfg.domain()
    summary = _geometry_summary(cfg, dom)
    geo.save_mask(dom, outdir / "mask.txt")
    plotting.save_domain_figure(dom, outdir / "domain.svg", title=cfg.domain_label())

    fields = (cfg.field_strength,)
    reports, spectra = _sweep_reports(cfg, dom, fields)
    write_report_csv(reports, outdir / "bounds.csv", _csv_metadata(cfg, dom))
    fits, violations = _fit_by_bc_gamma(reports)
    _write_fits(fits, outdir)
    plotting.save_gap_figure(
        reports, _figure_fits(fits), outdir / "gap_vs_E.svg", title=cfg.domain_label()
    )

    for (b, bc), spec in sorted(spectra.items()):
        meta = _csv_metadata(cfg, dom)
        meta["bc"] = bc
        meta["B"] = f"{b!r}"
        save_spectrum_csv(spec, outdir / f"spectrum_{bc}.csv", meta)
        plotting.save_spectrum_figure(
            spec,
            summary["measure"],
            dom.dim,
            outdir / f"spectrum_{bc}.svg",
            title=f"{cfg.domain_label()} ({bc})",
        )

    lemma = run_verification_suite(min(cfg.trials, 200), cfg.seed)
    _write_json(lemma, outdir / "verify_lemma.json")

    summary["fits"] = {
        f"{bc}:gamma={gamma:g}": {
            "c": fit.c,
            "cprime": fit.cprime,
            "residual": fit.max_residual,
            "n_points": fit.n_points,
        }
        for (bc, gamma), fit in sorted(fits.items())
    }
    summary["lemma_suite"] = lemma
    summary["violations"] = violations
    _write_json(summary, outdir / "summary.json")
    print(f"report written to {outdir}")
    if violations:
        for row in violations:
            print(f"bound violation: {row}", file=sys.stderr)
        return 2
    if lemma["failures"]:
        return 3
    return 0


# ---------------------------------------------------------------------------
# wiring


def _ensure_outdir(cfg: ExperimentConfig) -> Path:
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def _write_json(payload: dict, path: Path):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--shape", choices=[s.replace("_", "-") for s in _SHAPES] + list(_SHAPES))
    p.add_argument("--mask-file", dest="mask_file")
    p.add_argument("--h", type=float)
    p.add_argument("--bc", help="dirichlet, neumann, or both")
    p.add_argument("--B", type=float, help="magnetic field strength (0 = free)")
    p.add_argument("--theta", type=float)
    p.add_argument("--gamma", dest="gammas", help="comma list of Riesz orders")
    p.add_argument("--Lambda", dest="lambdas", help="comma list or lo..hi range")
    p.add_argument("--n-lambda", dest="n_lambda", type=int)
    p.add_argument("--pad", type=int)
    p.add_argument("--dispersion", choices=["discrete", "continuum"])
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--lowest", type=int, help="how many low eigenvalues to compute")
    p.add_argument("--rho-tol", dest="rho_tol", type=float)
    p.add_argument("--allow-beyond-cap", dest="allow_beyond_cap", action="store_const", const=True)
    for key, conv in _SHAPE_PARAM_KEYS.items():
        flag = "--" + key.replace("_", "-")
        if key == "radius":
            p.add_argument("--R", dest="radius", type=conv)
        elif key == "inner":
            p.add_argument("--R-inner", dest="inner", type=conv)
        elif key == "outer":
            p.add_argument("--R-outer", dest="outer", type=conv)
        elif key == "r1":
            p.add_argument("--R1", dest="r1", type=conv)
        elif key == "r2":
            p.add_argument("--R2", dest="r2", type=conv)
        else:
            p.add_argument(flag, dest=key, type=conv)


_COMMANDS = {
    "geometry": cmd_geometry,
    "spectrum": cmd_spectrum,
    "bounds": cmd_bounds,
    "landau": cmd_landau,
    "uncertainty": cmd_uncertainty,
    "verify-lemma": cmd_verify_lemma,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riesz-lab",
        description="numerical laboratory for semiclassical eigenvalue bounds",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        _add_common(p)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help, 2 for usage errors; remap the latter
        return 0 if exc.code == 0 else 4
    try:
        cfg = _resolve_config(args)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 4
    except BoundViolation as exc:
        print(f"bound violation: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
