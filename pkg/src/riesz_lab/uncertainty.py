"""Spectral-mass computations behind the uncertainty-principle estimates.

A function on a domain raster is extended by zero to a surrounding torus; its
energy splits into low and high parts either through the torus mode basis
(free case: DFT modes weighted by the chosen dispersion) or through
Landau-level projections (magnetic case, d = 2).  The same machinery evaluates the exact
finite remainder terms of the trace identities for the free grid operators,
which is the strongest end-to-end correctness check in the package: with the
discrete dispersion the Dirichlet-side identity holds to machine precision.

The Landau-level projection kernel in the gauge A(x) = (B/2)(x2, -x1) is

    K_k(x, y) = (B/2pi) L_{k-1}((B/2)|x-y|^2) exp(-(B/4)|x-y|^2)
                * exp(-i (B/2) (x1 y2 - x2 y1)),

with L the Laguerre polynomial: the modulus is a radial Gaussian-Laguerre
profile and the phase is the gauge factor shared by every level.  The kernel
enters only through quadrature sums; its three oracles (exact diagonal B/2pi,
quadrature idempotency, eigen-relation against a fine-grid magnetic stencil)
live in the test suite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_laguerre

from .errors import NumericalFailure
from .geometry import GridDomain
from .operators import BC_DIRICHLET, BC_NEUMANN, Spectrum, torus_modes

__all__ = [
    "ExtendedFunction",
    "SpectralMass",
    "ProjectionLemmaResult",
    "FreeRemainders",
    "zero_extend",
    "high_energy_mass",
    "landau_kernel",
    "landau_truncation_radius",
    "landau_projection_apply",
    "landau_level_mass",
    "landau_level_masses",
    "landau_high_energy_mass",
    "projection_lemma_check",
    "remainders_free",
]

_SUPPORT_CUTOFF = 1e-14
_KERNEL_TRUNC = 1e-12


@dataclass
class ExtendedFunction:
    """Zero-extension of a cell function to a square torus grid.

    values has shape (n,) * dim; origin is the physical center of torus cell
    (0, ..., 0) so kernel evaluations see the same coordinates the domain
    used.  support marks the cells that carry the original function."""

    values: np.ndarray
    h: float
    origin: tuple[float, ...]
    support: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def norm_squared(self) -> float:
        return float(self.h**self.dim * (np.abs(self.values) ** 2).sum())

    def support_centers(self) -> np.ndarray:
        idx = np.argwhere(self.support)
        return np.asarray(self.origin) + self.h * idx

    def support_values(self) -> np.ndarray:
        return self.values[self.support]


@dataclass(frozen=True)
class SpectralMass:
    lam: float
    total: float
    mass_low: float
    mass_high: float

    @property
    def high_fraction(self) -> float:
        return self.mass_high / self.total if self.total > 0 else 0.0


def zero_extend(psi: np.ndarray, dom: GridDomain, pad: int = 4) -> ExtendedFunction:
    """Embed a cell vector (ordered like dom.cell_indices()) into a torus of
    side pad * max mask extent, centered.  The embedding is an isometry for
    the h-weighted norm by construction."""
    if pad < 2:
        raise ValueError("pad factor must be at least 2")
    psi = np.asarray(psi)
    cells = dom.cell_indices()
    if psi.shape != (len(cells),):
        raise ValueError("psi must be a vector over the active cells")
    n = pad * max(dom.mask.shape)
    offset = tuple((n - dom.mask.shape[ax]) // 2 for ax in range(dom.dim))
    values = np.zeros((n,) * dom.dim, dtype=np.complex128)
    target = tuple(cells[:, ax] + offset[ax] for ax in range(dom.dim))
    values[target] = psi
    support = np.zeros_like(values, dtype=bool)
    support[target] = True
    origin = tuple(dom.origin[ax] - offset[ax] * dom.h for ax in range(dom.dim))
    return ExtendedFunction(values=values, h=dom.h, origin=origin, support=support)


def high_energy_mass(
    f: ExtendedFunction, lam: float, dispersion: str = "continuum"
) -> SpectralMass:
    """Split ||f||^2 across torus modes: mass_high collects modes with
    dispersion eigenvalue strictly above lam.  Parseval ties the pieces to the
    total exactly (the DFT is unitary)."""
    fhat = np.fft.fftn(f.values, norm="ortho")
    modes = torus_modes(f.n, f.h, f.dim, dispersion)
    weight = f.h**f.dim * np.abs(fhat) ** 2
    high = modes.lam > lam
    mass_high = float(weight[high].sum())
    mass_low = float(weight.sum() - mass_high)
    total = float(f.h**f.dim * (np.abs(f.values) ** 2).sum())
    return SpectralMass(lam=lam, total=total, mass_low=mass_low, mass_high=mass_high)


def landau_kernel(
    x: np.ndarray, y: np.ndarray, k: int, field_strength: float
) -> np.ndarray:
    """Evaluate K_k between point sets x (..., 2) and y (..., 2), broadcasting.
    Values with radial profile below the truncation threshold are zeroed."""
    if k < 1:
        raise ValueError("level index starts at 1")
    b = field_strength
    dx = x[..., 0] - y[..., 0]
    dy = x[..., 1] - y[..., 1]
    t = 0.5 * b * (dx * dx + dy * dy)
    radial = eval_laguerre(k - 1, t) * np.exp(-0.5 * t)
    cross = x[..., 0] * y[..., 1] - x[..., 1] * y[..., 0]
    out = (b / (2.0 * math.pi)) * radial * np.exp(-0.5j * b * cross)
    return np.where(np.abs(radial) < _KERNEL_TRUNC, 0.0, out)


def landau_truncation_radius(k: int, field_strength: float) -> float:
    """Radius beyond which the level-k radial profile stays below the
    truncation threshold, found by scanning the envelope outward."""
    t = np.linspace(0.0, 400.0 + 80.0 * k, 48001)
    profile = np.abs(eval_laguerre(k - 1, t)) * np.exp(-0.5 * t)
    above = np.nonzero(profile >= _KERNEL_TRUNC)[0]
    t_star = t[above[-1]] + t[1] if len(above) else t[1]
    return math.sqrt(2.0 * t_star / field_strength)


def _apply_kernel_to_support(
    f: ExtendedFunction,
    k: int,
    field_strength: float,
    targets: np.ndarray,
    max_block: int = 4_000_000,
    values: np.ndarray | None = None,
) -> np.ndarray:
    """h^2 sum_y K_k(x, y) values(y) over the support cells, evaluated at
    target points (rows of coordinates), in row chunks sized to bound memory.
    values defaults to the support samples of f; a 2-d array applies the
    kernel to each column, reusing one kernel evaluation for the family."""
    src = f.support_centers()
    vals = f.support_values() if values is None else values
    out_shape = (len(targets),) if vals.ndim == 1 else (len(targets), vals.shape[1])
    out = np.empty(out_shape, dtype=np.complex128)
    chunk = max(1, max_block // max(1, len(src)))
    for lo in range(0, len(targets), chunk):
        hi = min(lo + chunk, len(targets))
        block = landau_kernel(
            targets[lo:hi, None, :], src[None, :, :], k, field_strength
        )
        out[lo:hi] = block @ vals
    return f.h**2 * out


def landau_projection_apply(
    f: ExtendedFunction, k: int, field_strength: float
) -> tuple[ExtendedFunction, float]:
    """Quadrature application of the level-k projection on the torus grid.

    Returns the projected function and its squared norm.  The kernel is
    truncated where its radial profile drops below 1e-12 of the diagonal;
    a truncation radius that does not fit inside the torus is an error, since
    the grid then cannot hold the kernel footprint."""
    if f.dim != 2:
        raise ValueError("Landau projections require a planar grid")
    r_trunc = landau_truncation_radius(k, field_strength)
    side = f.n * f.h
    if r_trunc > side:
        raise ValueError(
            f"kernel truncation radius {r_trunc:.3g} exceeds the torus side {side:.3g}"
        )
    idx = np.indices(f.values.shape).reshape(2, -1).T
    targets = np.asarray(f.origin) + f.h * idx
    proj = _apply_kernel_to_support(f, k, field_strength, targets).reshape(f.values.shape)
    support = np.abs(proj) > _SUPPORT_CUTOFF * (np.abs(proj).max() or 1.0)
    g = ExtendedFunction(values=proj, h=f.h, origin=f.origin, support=support)
    return g, g.norm_squared()


def landau_level_mass(f: ExtendedFunction, k: int, field_strength: float) -> float:
    """||P_k f||^2 as the quadrature quadratic form h^4 <f, K_k f> over the
    support cells only; the sampled kernel matrix is positive semidefinite, so
    the value is nonnegative up to roundoff."""
    if f.dim != 2:
        raise ValueError("Landau projections require a planar grid")
    src = f.support_centers()
    vals = f.support_values()
    g = _apply_kernel_to_support(f, k, field_strength, src)
    return float(f.h**2 * np.real(np.vdot(vals, g)))


def landau_level_masses(
    template: ExtendedFunction, columns: np.ndarray, k: int, field_strength: float
) -> np.ndarray:
    """||P_k f_j||^2 for a family of functions sharing the support of
    template, given as support-sample columns.  One kernel evaluation serves
    the whole family, which is much cheaper than per-function calls when many
    eigenfunctions of one operator are measured against the same level."""
    if template.dim != 2:
        raise ValueError("Landau projections require a planar grid")
    columns = np.ascontiguousarray(columns, dtype=np.complex128)
    if columns.ndim != 2 or columns.shape[0] != len(template.support_centers()):
        raise ValueError("columns must be (n_support, n_functions)")
    src = template.support_centers()
    g = _apply_kernel_to_support(template, k, field_strength, src, values=columns)
    masses = template.h**2 * np.real(np.einsum("ij,ij->j", columns.conj(), g))
    return masses.astype(float)


def landau_high_energy_mass(
    f: ExtendedFunction, field_strength: float, lam: float
) -> SpectralMass:
    """||f||^2 minus the mass in Landau levels B(2k-1) <= lam.  Tiny negative
    leftovers are clamped; anything below -1e-6 relative is an error."""
    total = f.norm_squared()
    mass_low = 0.0
    k = 1
    while field_strength * (2 * k - 1) <= lam:
        mass_low += landau_level_mass(f, k, field_strength)
        k += 1
    mass_high = total - mass_low
    if total > 0 and mass_high < -1e-6 * total:
        raise NumericalFailure(
            f"level masses exceed the total by {-mass_high / total:.3e} relative"
        )
    mass_high = max(mass_high, 0.0)
    return SpectralMass(lam=lam, total=total, mass_low=mass_low, mass_high=mass_high)


@dataclass(frozen=True)
class ProjectionLemmaResult:
    """Check of the two-projection inequality

        ||PQg||^2 ||(1-P)Qg||^2 >= ||Qg||^2 ||(1-Q)(1-P)Qg||^2

    and, when g lies in ran(Q) but not in ran(P), of the derived display
    ||Pg||^2 >= ||g||^2 ||(1-Q)(1-P)g||^2 / ||(1-P)g||^2."""

    lhs: float
    rhs: float
    holds: bool
    second_lhs: float | None
    second_rhs: float | None
    second_holds: bool | None


def _check_projection(p: np.ndarray, name: str):
    scale = max(1.0, float(np.abs(p).max()))
    if np.abs(p - p.conj().T).max() > 1e-10 * scale:
        raise ValueError(f"{name} is not Hermitian")
    if np.abs(p @ p - p).max() > 1e-10 * scale:
        raise ValueError(f"{name} is not idempotent")


def projection_lemma_check(
    p: np.ndarray, q: np.ndarray, g: np.ndarray
) -> ProjectionLemmaResult:
    _check_projection(p, "P")
    _check_projection(q, "Q")
    g = np.asarray(g, dtype=np.complex128)
    qg = q @ g
    pqg = p @ qg
    rest = qg - pqg
    lhs = float(np.vdot(pqg, pqg).real * np.vdot(rest, rest).real)
    tail = (np.eye(len(q)) - q) @ rest
    rhs = float(np.vdot(qg, qg).real * np.vdot(tail, tail).real)
    scale = max(1.0, float(np.vdot(g, g).real) ** 2)
    holds = bool(lhs >= rhs - 1e-12 * scale)

    second_lhs = second_rhs = None
    second_holds = None
    gnorm = math.sqrt(float(np.vdot(g, g).real))
    in_q = gnorm > 0 and np.linalg.norm(qg - g) <= 1e-10 * gnorm
    pg = p @ g
    not_in_p = np.linalg.norm(g - pg) > 1e-10 * max(gnorm, 1.0)
    if in_q and not_in_p:
        rest_g = g - pg
        tail_g = (np.eye(len(q)) - q) @ rest_g
        denom = float(np.vdot(rest_g, rest_g).real)
        second_lhs = float(np.vdot(pg, pg).real)
        second_rhs = float(np.vdot(g, g).real) * float(np.vdot(tail_g, tail_g).real) / denom
        second_holds = bool(second_lhs >= second_rhs - 1e-12 * scale)
    return ProjectionLemmaResult(
        lhs=lhs,
        rhs=rhs,
        holds=holds,
        second_lhs=second_lhs,
        second_rhs=second_rhs,
        second_holds=second_holds,
    )


@dataclass(frozen=True)
class FreeRemainders:
    """Exact remainder terms of the grid trace identity against the torus
    operator with the chosen dispersion.

    For "dirichlet" the identity riesz + r_less + r_greater = main holds to
    machine precision with the discrete dispersion, because the grid Dirichlet
    operator is exactly the torus operator compressed to the domain cells.
    For "neumann" the identity riesz = main + r_less + r_greater is exact for
    either dispersion.  identity_residual is relative to the main term."""

    bc: str
    dispersion: str
    lam: float
    riesz: float
    main: float
    r_less: float
    r_greater: float
    identity_residual: float
    torus_n: int
    pad: int


def remainders_free(
    dom: GridDomain,
    spec: Spectrum,
    lam: float,
    bc: str,
    pad: int = 4,
    dispersion: str = "discrete",
) -> FreeRemainders:
    if bc not in (BC_DIRICHLET, BC_NEUMANN):
        raise ValueError(f"unknown boundary condition {bc!r}")
    if spec.eigenvectors is None:
        raise ValueError("remainders need eigenvectors")
    eigs = spec.eigenvalues
    low = eigs < lam
    need_all = bc == BC_NEUMANN or dispersion == "continuum"
    if need_all and not spec.complete:
        raise ValueError("this remainder path needs the complete spectrum")
    if not spec.complete_below(lam):
        raise ValueError("spectrum incomplete below Lambda")

    cells = dom.cell_indices()
    n_omega = len(cells)
    n = pad * max(dom.mask.shape)
    modes = torus_modes(n, dom.h, dom.dim, dispersion)
    lam_modes = modes.lam
    minus = np.maximum(lam - lam_modes, 0.0)
    plus = np.maximum(lam_modes - lam, 0.0)
    embed_shape = (n,) * dom.dim
    target = tuple(cells[:, ax] + (n - dom.mask.shape[ax]) // 2 for ax in range(dom.dim))

    def mode_density(column: np.ndarray) -> np.ndarray:
        buf = np.zeros(embed_shape, dtype=np.complex128)
        buf[target] = column
        return np.abs(np.fft.fftn(buf, norm="ortho")) ** 2

    riesz = float((lam - eigs[low]).sum())
    frac = n_omega / n**dom.dim

    if bc == BC_DIRICHLET:
        main = float(frac * minus.sum())
        r_less = 0.0
        low_density = np.zeros(embed_shape, dtype=np.float64)
        for i in np.nonzero(low)[0]:
            d = mode_density(spec.eigenvectors[:, i])
            r_less += float((plus * d).sum())
            low_density += d
        if dispersion == "discrete":
            # completeness of the eigenbasis: summing |psi_hat|^2 over all n
            # gives frac at every mode, so the high-eigenvector part needs no
            # high eigenvectors
            r_greater = float((minus * (frac - low_density)).sum())
        else:
            r_greater = 0.0
            for i in np.nonzero(~low)[0]:
                d = mode_density(spec.eigenvectors[:, i])
                r_greater += float((minus * d).sum())
        residual = abs(riesz + r_less + r_greater - main)
    else:
        main = 0.0
        r_less = 0.0
        r_greater = 0.0
        low_mode = lam_modes < lam
        for i in range(len(eigs)):
            d = mode_density(spec.eigenvectors[:, i])
            low_mass = float(d[low_mode].sum())
            high_mass = float(d.sum() - low_mass)
            main -= (eigs[i] - lam) * low_mass
            if eigs[i] < lam:
                r_less += (lam - eigs[i]) * high_mass
            else:
                r_greater += (eigs[i] - lam) * low_mass
        residual = abs(riesz - (main + r_less + r_greater))

    return FreeRemainders(
        bc=bc,
        dispersion=dispersion,
        lam=lam,
        riesz=riesz,
        main=main,
        r_less=r_less,
        r_greater=r_greater,
        identity_residual=residual / max(abs(main), 1e-300),
        torus_n=n,
        pad=pad,
    )
