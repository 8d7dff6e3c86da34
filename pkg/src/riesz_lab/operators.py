"""Finite-difference operators on rasterized domains and their spectra.

Laplacians use the standard 3-point (1d) / 5-point (2d) stencil divided by
h^2.  Dirichlet keeps the full diagonal 2 d / h^2 (missing neighbors act as a
zero boundary); Neumann is the graph Laplacian where the diagonal counts only
active neighbors.  Magnetic operators attach a link phase exp(+i * integral of
A along the hop) to each off-diagonal entry, the lattice form of
(-i d/dx + A)^2 with the gauge A(x) = (B/2) (x2, -x1).

Eigenvalues of the free torus operator are lambda(k) = (4/h^2) sum_j
sin^2(pi k_j / N) ("discrete" dispersion) or |xi(k)|^2 with xi in
[-pi/h, pi/h)^d ("continuum").  Discrete eigenvalues track |xi|^2 only for
|xi| h small; Lambda <= 0.05 / h^2 is the validity cap used by bound reports.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NumericalFailure
from .geometry import GridDomain

__all__ = [
    "BC_DIRICHLET",
    "BC_NEUMANN",
    "DiscreteOperator",
    "Spectrum",
    "TorusModes",
    "LandauParams",
    "laplacian",
    "landau_hamiltonian",
    "eigensolve",
    "covering_spectrum",
    "torus_modes",
    "landau_levels",
    "dispersion_validity_cap",
    "save_spectrum_csv",
    "DENSE_CAP",
]

BC_DIRICHLET = "dirichlet"
BC_NEUMANN = "neumann"
DENSE_CAP = 6000

# deterministic Lanczos start vector; ARPACK's own RNG would break rerun
# reproducibility of everything downstream
_V0_SEED = 0x5EED


def dispersion_validity_cap(h: float) -> float:
    return 0.05 / (h * h)


@dataclass(frozen=True)
class LandauParams:
    field_strength: float

    def __post_init__(self):
        if self.field_strength <= 0:
            raise ValueError("field strength must be positive")


@dataclass
class DiscreteOperator:
    matrix: sp.csr_matrix
    cells: np.ndarray
    bc: str
    h: float
    dim: int
    domain: GridDomain
    field_strength: float = 0.0

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def norm_bound(self) -> float:
        """Gershgorin upper bound on the spectral norm."""
        return float(np.abs(self.matrix).sum(axis=1).max())


@dataclass
class Spectrum:
    """Sorted eigenvalues, optionally with l2-orthonormal eigenvectors
    (columns).  n_total is the operator dimension; the spectrum is complete
    when every eigenvalue is present.  certified_below records a threshold
    under which completeness was established even though eigenvalues at or
    above it were discarded."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    n_total: int
    certified_below: float | None = None

    @property
    def complete(self) -> bool:
        return len(self.eigenvalues) == self.n_total

    def complete_below(self, lam: float) -> bool:
        if self.complete:
            return True
        if self.certified_below is not None and lam <= self.certified_below:
            return True
        return self.eigenvalues.size > 0 and float(self.eigenvalues[-1]) >= lam


def _neighbor_pairs(mask: np.ndarray, rank: np.ndarray, axis: int):
    """Ranks of adjacent active cell pairs along one axis (lo, hi)."""
    sl_lo = [slice(None)] * mask.ndim
    sl_hi = [slice(None)] * mask.ndim
    sl_lo[axis] = slice(None, -1)
    sl_hi[axis] = slice(1, None)
    both = mask[tuple(sl_lo)] & mask[tuple(sl_hi)]
    lo = rank[tuple(sl_lo)][both]
    hi = rank[tuple(sl_hi)][both]
    return lo, hi


def _assemble(dom: GridDomain, bc: str, hop_phase=None) -> DiscreteOperator:
    if bc not in (BC_DIRICHLET, BC_NEUMANN):
        raise ValueError(f"unknown boundary condition {bc!r}")
    mask = dom.mask
    cells = dom.cell_indices()
    n = len(cells)
    rank = -np.ones(mask.shape, dtype=np.int64)
    rank[mask] = np.arange(n)
    h2 = dom.h * dom.h
    complex_entries = hop_phase is not None
    dtype = np.complex128 if complex_entries else np.float64

    rows, cols, vals = [], [], []
    degree = np.zeros(n, dtype=np.float64)
    centers = np.asarray(dom.origin) + dom.h * cells
    for axis in range(dom.dim):
        lo, hi = _neighbor_pairs(mask, rank, axis)
        if complex_entries:
            phase = hop_phase(centers[lo], axis)
            hop_lo_hi = -(1.0 / h2) * phase
        else:
            hop_lo_hi = np.full(len(lo), -1.0 / h2)
        rows.append(lo)
        cols.append(hi)
        vals.append(hop_lo_hi)
        rows.append(hi)
        cols.append(lo)
        vals.append(np.conj(hop_lo_hi))
        np.add.at(degree, lo, 1.0)
        np.add.at(degree, hi, 1.0)

    if bc == BC_DIRICHLET:
        diag = np.full(n, 2.0 * dom.dim / h2)
    else:
        diag = degree / h2
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(diag.astype(dtype))

    mat = sp.coo_matrix(
        (np.concatenate(vals).astype(dtype), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    ).tocsr()
    return DiscreteOperator(
        matrix=mat, cells=cells, bc=bc, h=dom.h, dim=dom.dim, domain=dom
    )


def laplacian(dom: GridDomain, bc: str) -> DiscreteOperator:
    return _assemble(dom, bc, hop_phase=None)


def landau_hamiltonian(dom: GridDomain, params: LandauParams, bc: str) -> DiscreteOperator:
    """Magnetic Laplacian: hop from x to x + h e_j carries the link phase
    exp(+i * line integral of A), discretizing (-i grad + A)^2.

    With A(x) = (B/2)(x2, -x1) the integral along a +x hop from (x, y) is
    (B/2) y h and along a +y hop is -(B/2) x h; A is constant on each straight
    segment so the integrals are exact.
    """
    if dom.dim != 2:
        raise ValueError("magnetic operator requires a planar domain")
    b = params.field_strength
    if b * dom.h * dom.h >= 1.0:
        warnings.warn(
            "flux per plaquette B*h^2 >= 1: lattice artifacts dominate",
            stacklevel=2,
        )

    def hop_phase(start_centers: np.ndarray, axis: int) -> np.ndarray:
        if axis == 0:
            integral = 0.5 * b * start_centers[:, 1] * dom.h
        else:
            integral = -0.5 * b * start_centers[:, 0] * dom.h
        return np.exp(1j * integral)

    op = _assemble(dom, bc, hop_phase=hop_phase)
    op.field_strength = b
    return op


def _dense_inertia_below(matrix_dense: np.ndarray, lam: float) -> int:
    """Number of eigenvalues < lam via the LDL^T inertia of (A - lam I)."""
    shifted = matrix_dense - lam * np.eye(matrix_dense.shape[0], dtype=matrix_dense.dtype)
    _, d, _ = scipy.linalg.ldl(shifted, hermitian=True)
    count = 0
    i = 0
    n = d.shape[0]
    while i < n:
        if i + 1 < n and abs(d[i, i + 1]) > 0:
            block = np.array(
                [[d[i, i], d[i, i + 1]], [np.conj(d[i, i + 1]), d[i + 1, i + 1]]]
            )
            count += int((np.linalg.eigvalsh(block) < 0).sum())
            i += 2
        else:
            if d[i, i].real < 0:
                count += 1
            i += 1
    return count


def _check_residuals(op: DiscreteOperator, vals: np.ndarray, vecs: np.ndarray):
    res = op.matrix @ vecs - vecs * vals[None, :]
    res_norms = np.linalg.norm(res, axis=0)
    bound = 1e-7 * op.norm_bound()
    worst = float(res_norms.max()) if len(res_norms) else 0.0
    if worst > bound:
        raise NumericalFailure(
            f"eigenpair residual {worst:.3e} exceeds {bound:.3e}"
        )


def _sparse_lowest(op: DiscreteOperator, k: int, want_vectors: bool):
    n = op.n
    k = min(k, n - 1)
    sigma = -max(1e-6, 1e-4 * op.norm_bound())
    rng = np.random.default_rng(_V0_SEED)
    v0 = rng.standard_normal(n)
    out = spla.eigsh(
        op.matrix,
        k=k,
        sigma=sigma,
        which="LM",
        v0=v0,
        return_eigenvectors=want_vectors,
    )
    if want_vectors:
        vals, vecs = out
    else:
        vals, vecs = out, None
    order = np.argsort(vals)
    vals = np.asarray(vals)[order]
    if vecs is not None:
        vecs = np.asarray(vecs)[:, order]
    return vals, vecs


def eigensolve(
    op: DiscreteOperator,
    request="all",
    want_vectors: bool = False,
    dense_cap: int = DENSE_CAP,
    k_hint: int | None = None,
) -> Spectrum:
    """Solve for the requested part of the spectrum.

    request is "all", ("lowest", m), or ("below", lam).  Dense paths serve
    operators up to dense_cap unknowns; beyond that "lowest"/"below" use
    shift-invert Lanczos with a deterministic start vector.  For "below" the
    dense path cross-checks the count against the LDL^T inertia of the shifted
    matrix, and the sparse path certifies completeness by bracketing: the
    smallest computed eigenvalue not below lam proves no eigenvalue below lam
    is missing.  Computed eigenpairs must satisfy
    ||A v - lam v|| <= 1e-7 * ||A||.
    """
    n = op.n
    mode, arg = _parse_request(request, n)

    # complex Hermitian dense solves cost several times their real
    # counterparts; hand them to the sparse path earlier
    if np.iscomplexobj(op.matrix):
        dense_cap = min(dense_cap, 2000)

    if mode == "all" and n > dense_cap:
        raise ValueError(f"full spectrum of {n} unknowns exceeds dense cap {dense_cap}")

    dense = n <= dense_cap
    if dense:
        a = op.matrix.toarray()
        if mode == "all":
            lo, hi = 0, n - 1
        elif mode == "lowest":
            lo, hi = 0, min(arg, n) - 1
        else:
            lo, hi = 0, n - 1
        if want_vectors or mode == "below":
            vals, vecs = scipy.linalg.eigh(a, subset_by_index=[lo, hi])
        else:
            vals = scipy.linalg.eigh(a, eigvals_only=True, subset_by_index=[lo, hi])
            vecs = None
        if mode == "below":
            lam = arg
            keep = vals < lam
            count = int(keep.sum())
            inertia = _dense_inertia_below(a, lam)
            if inertia != count:
                raise NumericalFailure(
                    f"inertia cross-check failed: {inertia} vs {count} below {lam}"
                )
            vals = vals[keep]
            vecs = vecs[:, keep] if (vecs is not None and want_vectors) else None
            if not want_vectors:
                vecs = None
    else:
        if mode == "lowest":
            vals, vecs = _sparse_lowest(op, arg, want_vectors)
        else:  # below
            lam = arg
            k = k_hint if k_hint is not None else 64
            while True:
                vals, vecs = _sparse_lowest(op, k, want_vectors)
                if vals[-1] >= lam or k >= n - 1:
                    break
                k = min(2 * k, n - 1)
            if vals[-1] < lam:
                raise NumericalFailure(
                    "cannot certify completeness below lambda on the sparse path"
                )
            keep = vals < lam
            vals = vals[keep]
            if vecs is not None:
                vecs = vecs[:, keep]

    if vecs is not None and vecs.size:
        _check_residuals(op, vals, vecs)
    return Spectrum(
        eigenvalues=np.asarray(vals, dtype=np.float64),
        eigenvectors=vecs if want_vectors else None,
        n_total=n,
        certified_below=arg if mode == "below" else None,
    )


def covering_spectrum(
    op: DiscreteOperator,
    lam_max: float,
    want_vectors: bool = False,
    k_start: int | None = None,
    dense_cap: int = DENSE_CAP,
) -> Spectrum:
    """Lowest eigenvalues, grown until the last one reaches lam_max (which
    certifies that nothing below lam_max is missing) or the operator is
    exhausted.  k_start seeds the batch size; by default a Weyl-style count
    estimate for the operator's own h^dim * n volume."""
    if k_start is None:
        vol = op.h**op.dim * op.n
        # free phase-space count, padded; strong fields can exceed it, in
        # which case the doubling loop below pays one extra solve
        est = vol * (lam_max / (4.0 * math.pi)) ** (0.5 * op.dim)
        if op.field_strength > 0:
            est = max(est, vol * op.field_strength / (2.0 * math.pi))
        k_start = int(math.ceil(1.5 * est)) + 12
    k = max(1, min(k_start, op.n))
    while True:
        spec = eigensolve(op, ("lowest", k), want_vectors=want_vectors, dense_cap=dense_cap)
        if spec.complete or spec.eigenvalues[-1] >= lam_max:
            return spec
        if k >= op.n - 1:
            raise NumericalFailure("spectrum did not reach the requested ceiling")
        k = min(2 * k, op.n - 1)


def _parse_request(request, n: int):
    if request == "all":
        return "all", None
    if isinstance(request, tuple) and len(request) == 2:
        kind, val = request
        if kind == "lowest":
            m = int(val)
            if not 1 <= m <= n:
                raise ValueError(f"requested {m} eigenvalues of an {n}-dim operator")
            return "lowest", m
        if kind == "below":
            return "below", float(val)
    raise ValueError(f"bad eigensolve request {request!r}")


@dataclass(frozen=True)
class TorusModes:
    """Plane-wave modes of the periodic grid: frequencies per axis and the
    eigenvalue array over the full mode grid."""

    n: int
    h: float
    dim: int
    dispersion: str
    freqs: tuple[np.ndarray, ...]
    lam: np.ndarray


def torus_modes(n: int, h: float, dim: int, dispersion: str = "discrete") -> TorusModes:
    if dispersion not in ("discrete", "continuum"):
        raise ValueError(f"unknown dispersion {dispersion!r}")
    if n < 2:
        raise ValueError("torus needs at least 2 cells per side")
    k = np.arange(n)
    xi = 2.0 * math.pi * np.fft.fftfreq(n, d=h)
    if dispersion == "discrete":
        lam1 = (4.0 / (h * h)) * np.sin(math.pi * k / n) ** 2
    else:
        lam1 = xi * xi
    if dim == 1:
        lam = lam1
    elif dim == 2:
        lam = lam1[:, None] + lam1[None, :]
    else:
        raise ValueError(f"unsupported dimension {dim}")
    return TorusModes(n=n, h=h, dim=dim, dispersion=dispersion, freqs=(xi,) * dim, lam=lam)


def landau_levels(field_strength: float, lam_cut: float) -> list[tuple[int, float]]:
    """Levels B(2k-1), k = 1, 2, ..., at or below lam_cut — the levels whose
    projections make up the low-energy mass at that cutoff."""
    if field_strength <= 0:
        raise ValueError("field strength must be positive")
    out = []
    k = 1
    while field_strength * (2 * k - 1) <= lam_cut:
        out.append((k, field_strength * (2 * k - 1)))
        k += 1
    return out


def save_spectrum_csv(spec: Spectrum, path, metadata: dict | None = None) -> None:
    lines = []
    for key, val in (metadata or {}).items():
        lines.append(f"# {key}={val}")
    lines.append("index,eigenvalue")
    for i, lam in enumerate(spec.eigenvalues):
        lines.append(f"{i},{lam:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
