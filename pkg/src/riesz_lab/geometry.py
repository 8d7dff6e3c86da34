"""Rasterized domains and their geometric functionals.

A domain is a boolean mask over cell centers of a uniform grid with spacing
h; a cell belongs to the domain iff its center lies in the ideal shape.  All
set measures are cell counts times h^d.  Density ratios |S ∩ B_rho(x)| / |B_rho(x)|
use the counted numerator but the analytic ball volume, so the denominator
carries no rasterization error.

High level:
  * make_shape / load_mask construct GridDomain objects,
  * measure, width, inradius are the elementary functionals,
  * regularized_inradius computes the density-threshold inradius
    rho_theta = inf { rho > 0 : sup_x |Omega ∩ B_rho(x)| / |B_rho(x)| <= theta },
  * thickness_check certifies the relative-density ("thick set") condition
    |S ∩ B_rho(x)| >= kappa |B_rho(x)| with centers restricted to the mask box.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.ndimage import distance_transform_edt
from scipy.signal import fftconvolve

__all__ = [
    "GridDomain",
    "ThicknessCertificate",
    "make_shape",
    "measure",
    "width",
    "inradius",
    "regularized_inradius",
    "thickness_check",
    "complement_within_box",
    "save_mask",
    "load_mask",
    "slab_ball_fraction",
    "width_domination_constant",
    "unit_ball_volume",
]


def unit_ball_volume(dim: int) -> float:
    if dim == 1:
        return 2.0
    if dim == 2:
        return math.pi
    raise ValueError(f"unsupported dimension {dim}")


@dataclass(frozen=True)
class GridDomain:
    """Boolean cell-center raster of a bounded open set.

    mask axis 0 is x, axis 1 is y; origin is the physical center of cell
    index (0, ..., 0).  Every derived quantity is translation invariant in
    origin and scales linearly with h.
    """

    dim: int
    h: float
    origin: tuple[float, ...]
    mask: np.ndarray

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"unsupported dimension {self.dim}")
        if not self.h > 0:
            raise ValueError("grid spacing must be positive")
        if self.mask.ndim != self.dim or self.mask.dtype != np.bool_:
            raise ValueError("mask must be a boolean array of rank dim")
        if len(self.origin) != self.dim:
            raise ValueError("origin length must match dim")
        if not self.mask.any():
            raise ValueError("degenerate domain: mask has no active cells")

    @property
    def cell_count(self) -> int:
        return int(self.mask.sum())

    @property
    def extent(self) -> tuple[tuple[float, float], ...]:
        """Physical bounding box of the full grid, including half-cell rims."""
        out = []
        for ax in range(self.dim):
            lo = self.origin[ax] - 0.5 * self.h
            hi = self.origin[ax] + (self.mask.shape[ax] - 0.5) * self.h
            out.append((lo, hi))
        return tuple(out)

    def cell_indices(self) -> np.ndarray:
        """Integer indices of active cells, C order.  This ordering is the
        canonical coordinate map shared with the discrete operators."""
        return np.argwhere(self.mask)

    def cell_centers(self) -> np.ndarray:
        return np.asarray(self.origin) + self.h * self.cell_indices()

    def translated(self, shift) -> "GridDomain":
        new_origin = tuple(o + s for o, s in zip(self.origin, shift))
        return replace(self, origin=new_origin)

    def upsampled(self, s: int) -> "GridDomain":
        """Refine each cell into s^d cells with h kept fixed; the physical
        domain is thereby scaled by the integer factor s."""
        if s < 1:
            raise ValueError("scale factor must be a positive integer")
        block = np.ones((s,) * self.dim, dtype=bool)
        return replace(self, mask=np.kron(self.mask, block))

    def digest(self) -> str:
        payload = b"".join(
            [
                str(self.dim).encode(),
                np.float64(self.h).tobytes(),
                np.asarray(self.mask.shape, dtype=np.int64).tobytes(),
                np.packbits(self.mask.ravel()).tobytes(),
            ]
        )
        return hashlib.sha1(payload).hexdigest()[:12]


def _axis_cells(lo: float, hi: float, h: float) -> int:
    n = (hi - lo) / h
    n_round = round(n)
    if abs(n - n_round) < 1e-9 * max(1.0, abs(n)):
        return max(int(n_round), 1)
    return max(math.ceil(n), 1)


def _raster(member, bbox, h: float, dim: int) -> GridDomain:
    ns = [_axis_cells(lo, hi, h) for (lo, hi) in bbox]
    origin = tuple(lo + 0.5 * h for (lo, _) in bbox)
    axes = [origin[ax] + h * np.arange(ns[ax]) for ax in range(dim)]
    if dim == 1:
        mask = member(axes[0])
    else:
        xg, yg = np.meshgrid(axes[0], axes[1], indexing="ij")
        mask = member(xg, yg)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("degenerate domain: shape contains no cell centers")
    return GridDomain(dim=dim, h=h, origin=origin, mask=mask)


def make_shape(kind: str, h: float, **params) -> GridDomain:
    """Rasterize one of the built-in test shapes.

    Supported kinds: interval (1d), rectangle, square, disk, annulus,
    lshape, union_of_disks, perforated_square.  Membership is strict
    (open sets), which together with half-cell grid offsets keeps cell
    centers off ideal boundaries for generic parameters.
    """
    kind = kind.replace("-", "_")
    if kind == "interval":
        length = float(params.pop("length", 1.0))
        _no_extra(params)
        if length <= 0:
            raise ValueError("degenerate domain: interval length must be positive")
        return _raster(lambda x: (x > 0) & (x < length), [(0.0, length)], h, 1)

    if kind == "square":
        side = float(params.pop("side", 1.0))
        params.setdefault("width", side)
        params.setdefault("height", side)
        kind = "rectangle"
    if kind == "rectangle":
        w = float(params.pop("width", 1.0))
        ht = float(params.pop("height", 1.0))
        _no_extra(params)
        if w <= 0 or ht <= 0:
            raise ValueError("degenerate domain: rectangle sides must be positive")
        return _raster(
            lambda x, y: (x > 0) & (x < w) & (y > 0) & (y < ht),
            [(0.0, w), (0.0, ht)],
            h,
            2,
        )

    if kind == "disk":
        r = float(params.pop("radius", 1.0))
        _no_extra(params)
        if r <= 0:
            raise ValueError("degenerate domain: disk radius must be positive")
        return _raster(
            lambda x, y: x * x + y * y < r * r, [(-r, r), (-r, r)], h, 2
        )

    if kind == "annulus":
        ro = float(params.pop("outer", 1.0))
        ri = float(params.pop("inner", 0.5))
        _no_extra(params)
        if not 0 < ri < ro:
            raise ValueError("degenerate domain: annulus needs 0 < inner < outer")
        return _raster(
            lambda x, y: (x * x + y * y < ro * ro) & (x * x + y * y > ri * ri),
            [(-ro, ro), (-ro, ro)],
            h,
            2,
        )

    if kind == "lshape":
        s = float(params.pop("side", 1.0))
        _no_extra(params)
        if s <= 0:
            raise ValueError("degenerate domain: lshape side must be positive")
        half = 0.5 * s

        def member(x, y):
            in_square = (x > 0) & (x < s) & (y > 0) & (y < s)
            notch = (x >= half) & (y >= half)
            return in_square & ~notch

        return _raster(member, [(0.0, s), (0.0, s)], h, 2)

    if kind == "union_of_disks":
        radii = tuple(float(r) for r in params.pop("radii", (0.5, 0.35)))
        centers = params.pop("centers", ((-0.6, 0.0), (0.75, 0.0)))
        centers = tuple((float(c[0]), float(c[1])) for c in centers)
        _no_extra(params)
        if len(radii) != len(centers) or not radii:
            raise ValueError("degenerate domain: radii/centers mismatch")
        if any(r <= 0 for r in radii):
            raise ValueError("degenerate domain: disk radii must be positive")
        los = [min(c[ax] - r for c, r in zip(centers, radii)) for ax in (0, 1)]
        his = [max(c[ax] + r for c, r in zip(centers, radii)) for ax in (0, 1)]

        def member(x, y):
            inside = np.zeros_like(x, dtype=bool)
            for (cx, cy), r in zip(centers, radii):
                inside |= (x - cx) ** 2 + (y - cy) ** 2 < r * r
            return inside

        return _raster(member, [(los[0], his[0]), (los[1], his[1])], h, 2)

    if kind == "perforated_square":
        s = float(params.pop("side", 1.0))
        n_holes = int(params.pop("holes", 3))
        rh = float(params.pop("hole_radius", 0.08))
        _no_extra(params)
        if s <= 0 or n_holes < 1 or rh <= 0:
            raise ValueError("degenerate domain: bad perforated_square parameters")
        hole_centers = [
            ((i + 0.5) * s / n_holes, (j + 0.5) * s / n_holes)
            for i in range(n_holes)
            for j in range(n_holes)
        ]

        def member(x, y):
            inside = (x > 0) & (x < s) & (y > 0) & (y < s)
            for cx, cy in hole_centers:
                inside &= (x - cx) ** 2 + (y - cy) ** 2 > rh * rh
            return inside

        return _raster(member, [(0.0, s), (0.0, s)], h, 2)

    raise ValueError(f"unknown shape kind {kind!r}")


def _no_extra(params: dict):
    if params:
        raise ValueError(f"unknown shape parameters {sorted(params)}")


def measure(dom: GridDomain) -> float:
    return dom.cell_count * dom.h**dom.dim


def width(dom: GridDomain, n_directions: int = 64) -> float:
    """Minimal directional extent of the active cells plus one cell diagonal.

    The h*sqrt(d) padding accounts for the physical extent of the cells whose
    centers realize the projection extremes.
    """
    pts = dom.cell_centers()
    pad = dom.h * math.sqrt(dom.dim)
    if dom.dim == 1:
        return float(pts[:, 0].max() - pts[:, 0].min()) + pad
    if n_directions < 4:
        raise ValueError("need at least 4 sampled directions")
    angles = np.pi * np.arange(n_directions) / n_directions
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    proj = pts @ dirs.T
    extents = proj.max(axis=0) - proj.min(axis=0)
    return float(extents.min()) + pad


def inradius(dom: GridDomain) -> float:
    """Largest center-to-center distance from an active cell to the nearest
    inactive-or-outside cell; approximates the inscribed radius to one cell."""
    padded = np.pad(dom.mask, 1, constant_values=False)
    dist = distance_transform_edt(padded, sampling=dom.h)
    return float(dist.max())


def _ball_kernel(rho: float, h: float, dim: int) -> np.ndarray:
    kc = math.ceil(rho / h)
    offs = np.arange(-kc, kc + 1, dtype=np.float64)
    if dim == 1:
        return ((offs * h) ** 2 < rho * rho).astype(np.float64)
    dx2 = (offs * h) ** 2
    return ((dx2[:, None] + dx2[None, :]) < rho * rho).astype(np.float64)


def _intersection_counts(mask: np.ndarray, rho: float, h: float, dim: int, mode: str) -> np.ndarray:
    kernel = _ball_kernel(rho, h, dim)
    counts = fftconvolve(mask.astype(np.float64), kernel, mode=mode)
    # counts are exact integers up to FFT roundoff
    return np.rint(np.maximum(counts, 0.0))


def _sup_density(dom: GridDomain, rho: float) -> float:
    """sup over centers x (h-pitch grid covering the bounding box dilated by
    rho) of |Omega ∩ B_rho(x)| / |B_rho(x)|.  Centers further out see smaller
    intersections, so the dilated box realizes the supremum."""
    counts = _intersection_counts(dom.mask, rho, dom.h, dom.dim, mode="full")
    ball = unit_ball_volume(dom.dim) * rho**dom.dim
    return float(counts.max()) * dom.h**dom.dim / ball


def regularized_inradius(dom: GridDomain, theta: float, tol: float) -> float:
    """Smallest scanned rho with sup_x |Omega ∩ B_rho(x)| / |B_rho(x)| <= theta.

    Scans upward from (just below) the inscribed radius in steps of tol.  The
    density need not be monotone in rho, so the first admissible grid value is
    confirmed at the two following grid values before being returned.
    """
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    if tol < dom.h:
        raise ValueError("tolerance below grid resolution")
    area = measure(dom)
    rho_upper = (area / (theta * unit_ball_volume(dom.dim))) ** (1.0 / dom.dim)
    start = max(tol, inradius(dom) - 2 * dom.h)
    n_steps = max(1, math.ceil((rho_upper + 3 * tol - start) / tol) + 1)
    candidates = start + tol * np.arange(n_steps + 3)
    ratios: dict[int, float] = {}

    def ratio(i: int) -> float:
        if i not in ratios:
            ratios[i] = _sup_density(dom, float(candidates[i]))
        return ratios[i]

    for i in range(n_steps + 1):
        if ratio(i) <= theta and ratio(i + 1) <= theta and ratio(i + 2) <= theta:
            return float(candidates[i])
    raise RuntimeError("density scan failed to reach the analytic upper bound")


@dataclass(frozen=True)
class ThicknessCertificate:
    """Outcome of a relative-density check on a finite box.

    Centers range over the cell grid of the stated box (the finite surrogate
    for 'all x'), restricted to cells whose ball of radius rho fits inside the
    box so that cells beyond the box, which carry no information about S,
    cannot deflate the count; box records the physical extents.  satisfied is
    equivalent to worst_ratio >= kappa.
    """

    rho: float
    kappa: float
    satisfied: bool
    worst_center: tuple[float, ...]
    worst_ratio: float
    box: tuple[tuple[float, float], ...]


def thickness_check(s_dom: GridDomain, rho: float, kappa: float) -> ThicknessCertificate:
    if rho <= 0:
        raise ValueError("rho must be positive")
    if not 0 < kappa <= 1:
        raise ValueError("kappa must lie in (0, 1]")
    counts = _intersection_counts(s_dom.mask, rho, s_dom.h, s_dom.dim, mode="same")
    ball = unit_ball_volume(s_dom.dim) * rho**s_dom.dim
    ratios = counts * s_dom.h**s_dom.dim / ball
    # Only centers whose ball lies inside the box see the full count; clamp
    # the inset so a too-small box still leaves its middle cell as a center.
    insets = tuple(
        min(math.ceil(rho / s_dom.h), (n - 1) // 2) for n in ratios.shape
    )
    interior = ratios[tuple(slice(i, n - i) for i, n in zip(insets, ratios.shape))]
    worst_flat = int(np.argmin(interior))
    worst_idx = tuple(
        idx + inset
        for idx, inset in zip(np.unravel_index(worst_flat, interior.shape), insets)
    )
    worst_center = tuple(
        s_dom.origin[ax] + s_dom.h * worst_idx[ax] for ax in range(s_dom.dim)
    )
    worst_ratio = float(ratios[worst_idx])
    return ThicknessCertificate(
        rho=float(rho),
        kappa=float(kappa),
        satisfied=bool(worst_ratio >= kappa),
        worst_center=worst_center,
        worst_ratio=worst_ratio,
        box=s_dom.extent,
    )


def complement_within_box(dom: GridDomain, pad_cells: int) -> GridDomain:
    """Complement of the mask inside its grid box, padded by pad_cells rings
    of active cells.  Padding wide enough for the ball radius under test makes
    the finite check agree with the complement taken in the whole space."""
    if pad_cells < 0:
        raise ValueError("pad_cells must be nonnegative")
    comp = np.pad(~dom.mask, pad_cells, constant_values=True)
    origin = tuple(o - pad_cells * dom.h for o in dom.origin)
    return GridDomain(dim=dom.dim, h=dom.h, origin=origin, mask=comp)


def save_mask(dom: GridDomain, path) -> None:
    """Text raster: line 1 is `d h nx [ny]`, then one line per row of 0/1
    characters, top row = largest y.  repr(h) round-trips the float exactly."""
    lines = []
    if dom.dim == 1:
        lines.append(f"1 {dom.h!r} {dom.mask.shape[0]}")
        lines.append("".join("1" if v else "0" for v in dom.mask))
    else:
        nx, ny = dom.mask.shape
        lines.append(f"2 {dom.h!r} {nx} {ny}")
        for iy in range(ny - 1, -1, -1):
            lines.append("".join("1" if v else "0" for v in dom.mask[:, iy]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_mask(path, origin: tuple[float, ...] | None = None) -> GridDomain:
    with open(path) as fh:
        tokens = fh.readline().split()
        if len(tokens) not in (3, 4):
            raise ValueError("bad mask header")
        dim = int(tokens[0])
        h = float(tokens[1])
        if dim == 1:
            nx = int(tokens[2])
            row = fh.readline().strip()
            if len(row) != nx:
                raise ValueError("bad mask row length")
            mask = np.frombuffer(row.encode(), dtype=np.uint8) == ord("1")
        elif dim == 2:
            nx, ny = int(tokens[2]), int(tokens[3])
            mask = np.zeros((nx, ny), dtype=bool)
            for r in range(ny):
                row = fh.readline().strip()
                if len(row) != nx:
                    raise ValueError("bad mask row length")
                mask[:, ny - 1 - r] = np.frombuffer(row.encode(), dtype=np.uint8) == ord("1")
        else:
            raise ValueError(f"unsupported dimension {dim}")
    if origin is None:
        origin = (0.5 * h,) * dim
    return GridDomain(dim=dim, h=h, origin=tuple(origin), mask=mask)


def slab_ball_fraction(tau: float, dim: int) -> float:
    """Fraction of the unit ball lying in the slab |y_d| < tau."""
    if tau >= 1.0:
        return 1.0
    if tau <= 0.0:
        return 0.0
    if dim == 1:
        return tau
    return (2.0 / math.pi) * (tau * math.sqrt(1 - tau * tau) + math.asin(tau))


def width_domination_constant(theta: float, dim: int) -> float:
    """C_theta with rho_theta <= C_theta * width: a ball of radius rho meets a
    set of width w inside a slab of half-width w/2, so the density is at most
    slab_ball_fraction(w / (2 rho)); solve for the fraction hitting theta."""
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if slab_ball_fraction(mid, dim) <= theta:
            lo = mid
        else:
            hi = mid
    tau = 0.5 * (lo + hi)
    return 1.0 / (2.0 * tau)
