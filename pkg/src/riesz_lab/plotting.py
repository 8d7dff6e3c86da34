"""Figure rendering for the CLI report paths.

Everything is written to files (SVG by default) through the Agg backend; no
interactive windows are ever opened.
"""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .geometry import GridDomain
from .operators import Spectrum
from .semiclassics import semiclassical_constant

__all__ = [
    "save_domain_figure",
    "save_spectrum_figure",
    "save_gap_figure",
    "save_mass_figure",
]

_BC_COLOR = {"dirichlet": "tab:blue", "neumann": "tab:red"}


def save_domain_figure(dom: GridDomain, path, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(4.2, 4.2))
    if dom.dim == 1:
        x = dom.origin[0] + dom.h * np.arange(dom.mask.shape[0])
        ax.step(x, dom.mask.astype(int), where="mid")
        ax.set_ylim(-0.1, 1.2)
        ax.set_xlabel("x")
    else:
        (x0, x1), (y0, y1) = dom.extent
        ax.imshow(
            dom.mask.T,
            origin="lower",
            extent=(x0, x1, y0, y1),
            cmap="Greys",
            interpolation="nearest",
        )
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_spectrum_figure(
    spec: Spectrum, area: float, dim: int, path, title: str = ""
) -> None:
    """Eigenvalue staircase against the leading counting term."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    eigs = np.sort(spec.eigenvalues)
    ax.step(eigs, np.arange(1, len(eigs) + 1), where="post", label="counting function")
    lam = np.linspace(0.0, float(eigs[-1]) if len(eigs) else 1.0, 200)
    weyl = area * semiclassical_constant(0.0, dim) * lam ** (0.5 * dim)
    ax.plot(lam, weyl, "--", label="main term")
    ax.set_xlabel(r"$\Lambda$")
    ax.set_ylabel(r"$N(\Lambda)$")
    ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_gap_figure(reports, fits: dict, path, title: str = "") -> None:
    """Relative gap |1 - ratio| against the exponent E, log scale, with the
    fitted decay lines per boundary condition."""
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    by_bc: dict[str, list] = {}
    for r in reports:
        if r.signed_gap > 0:
            by_bc.setdefault(r.bc, []).append(r)
    for bc, rows in sorted(by_bc.items()):
        e = np.array([r.exponent for r in rows])
        g = np.array([r.signed_gap for r in rows])
        ax.semilogy(e, g, "o", ms=4, alpha=0.7, color=_BC_COLOR.get(bc), label=bc)
    for key, fit in sorted(fits.items()):
        rows = [r for r in reports if r.bc == key and r.signed_gap > 0]
        if not rows or fit is None:
            continue
        e = np.array(sorted(r.exponent for r in rows))
        ax.semilogy(
            e,
            fit.c * np.exp(-fit.cprime * e),
            "-",
            lw=1.0,
            color=_BC_COLOR.get(key),
            label=f"{key} fit: c={fit.c:.3g}, c'={fit.cprime:.3g}",
        )
    ax.set_xlabel(r"$E = \rho_\theta\sqrt{\Lambda} + \rho_\theta^2 B$")
    ax.set_ylabel("relative gap")
    ax.legend(frameon=False, fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_mass_figure(rows, path, title: str = "") -> None:
    """High-energy mass fraction against the exponent, log scale.  rows are
    (exponent, mass_fraction) pairs."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    if rows:
        e = np.array([r[0] for r in rows])
        m = np.array([max(r[1], 1e-300) for r in rows])
        ax.semilogy(e, m, "o", ms=4, alpha=0.7)
    ax.set_xlabel(r"$E$")
    ax.set_ylabel("high-energy mass fraction")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
