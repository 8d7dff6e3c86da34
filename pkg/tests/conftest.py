"""Shared fixtures: the continuum bound-sweep data and the magnetic grid.

Both are expensive enough (tens of seconds) that the acceptance checks that
look at the same spectra from different angles share one session-scoped
build.  Everything here is deterministic: fixed shapes, fixed spacing, and
solver tolerances well below the asserted ones.
"""

from dataclasses import dataclass

import pytest

from riesz_lab import (
    BC_DIRICHLET,
    BC_NEUMANN,
    GridDomain,
    LandauParams,
    Spectrum,
    covering_spectrum,
    landau_hamiltonian,
    laplacian,
    make_shape,
    regularized_inradius,
    width,
)

SWEEP_H = 1.0 / 64
SWEEP_CAP = 0.05 / SWEEP_H**2  # 204.8, the dispersion validity cap at h=1/64
SWEEP_THETA = 0.25
SWEEP_SHAPES = (
    ("square", {"side": 1.0}),
    ("disk", {"radius": 1.0}),
    ("lshape", {}),
    ("union_of_disks", {}),
)

MAG_H = 1.0 / 32
MAG_SIDE = 2.0
MAG_FIELDS = (6.0, 10.0, 16.0)
MAG_LAMBDAS = (20.0, 35.0, 50.0)


@dataclass(frozen=True)
class SweepEntry:
    dom: GridDomain
    spec: Spectrum
    rho_theta: float
    width: float


@pytest.fixture(scope="session")
def sweep_data() -> dict:
    """Spectra with eigenvectors, certified complete below the validity cap,
    for the four sweep shapes at h = 1/64 under both boundary conditions."""
    data = {}
    for name, params in SWEEP_SHAPES:
        dom = make_shape(name, SWEEP_H, **params)
        rho = regularized_inradius(dom, SWEEP_THETA, tol=1 / 32)
        w = width(dom)
        for bc in (BC_DIRICHLET, BC_NEUMANN):
            spec = covering_spectrum(laplacian(dom, bc), SWEEP_CAP, want_vectors=True)
            data[name, bc] = SweepEntry(dom=dom, spec=spec, rho_theta=rho, width=w)
    return data


@pytest.fixture(scope="session")
def magnetic_data() -> dict:
    """Peierls spectra with eigenvectors on the side-2 square at h = 1/32,
    certified complete below the largest grid cutoff, for three fields."""
    dom = make_shape("square", MAG_H, side=MAG_SIDE)
    data = {"dom": dom}
    for b in MAG_FIELDS:
        for bc in (BC_DIRICHLET, BC_NEUMANN):
            op = landau_hamiltonian(dom, LandauParams(field_strength=b), bc)
            data[b, bc] = covering_spectrum(op, max(MAG_LAMBDAS), want_vectors=True)
    return data
