"""Discrete operators: five-point Laplacians, Peierls magnetic Hamiltonians,
eigensolver paths, and completeness certification.

Oracles: exact eigenvalues of the Dirichlet/Neumann difference operators on
boxes, (4/h^2) sin^2 closed forms; plaquette flux of the magnetic hopping
phases; translation covariance of the magnetic spectrum.
"""

import math

import numpy as np
import pytest

from riesz_lab import (
    BC_DIRICHLET,
    BC_NEUMANN,
    LandauParams,
    NumericalFailure,
    Spectrum,
    covering_spectrum,
    dispersion_validity_cap,
    eigensolve,
    landau_hamiltonian,
    landau_levels,
    laplacian,
    make_shape,
    save_spectrum_csv,
    torus_modes,
)


def dirichlet_box_eigenvalues(n_cells: tuple, h: float) -> np.ndarray:
    vals = [
        (4 / h**2) * np.sin(np.arange(1, n + 1) * math.pi / (2 * (n + 1))) ** 2
        for n in n_cells
    ]
    if len(vals) == 1:
        return np.sort(vals[0])
    return np.sort(np.add.outer(vals[0], vals[1]).ravel())


def neumann_box_eigenvalues(n_cells: tuple, h: float) -> np.ndarray:
    vals = [
        (4 / h**2) * np.sin(np.arange(n) * math.pi / (2 * n)) ** 2 for n in n_cells
    ]
    if len(vals) == 1:
        return np.sort(vals[0])
    return np.sort(np.add.outer(vals[0], vals[1]).ravel())


def test_interval_three_cells_exact():
    h = 0.25
    dom = make_shape("interval", h, length=0.75)
    assert dom.mask.sum() == 3
    spec = eigensolve(laplacian(dom, BC_DIRICHLET))
    expected = np.array([2 - math.sqrt(2), 2.0, 2 + math.sqrt(2)]) / h**2
    assert spec.eigenvalues == pytest.approx(expected, rel=1e-12)


def test_square_dirichlet_closed_form():
    h = 1 / 16
    dom = make_shape("square", h, side=1.0)
    spec = eigensolve(laplacian(dom, BC_DIRICHLET))
    expected = dirichlet_box_eigenvalues((16, 16), h)
    assert spec.complete
    assert spec.eigenvalues == pytest.approx(expected, rel=1e-10)


def test_square_neumann_closed_form_and_constant_kernel():
    h = 1 / 16
    dom = make_shape("square", h, side=1.0)
    spec = eigensolve(laplacian(dom, BC_NEUMANN), want_vectors=True)
    expected = neumann_box_eigenvalues((16, 16), h)
    assert spec.eigenvalues == pytest.approx(expected, abs=1e-8 / h**2)
    assert abs(spec.eigenvalues[0]) <= 1e-10 / h**2
    ground = spec.eigenvectors[:, 0]
    assert np.ptp(np.abs(ground)) <= 1e-8 * np.abs(ground).max()


def test_rectangle_mixed_sides():
    h = 1 / 8
    dom = make_shape("rectangle", h, width=1.0, height=0.5)
    spec = eigensolve(laplacian(dom, BC_DIRICHLET))
    expected = dirichlet_box_eigenvalues((8, 4), h)
    assert spec.eigenvalues == pytest.approx(expected, rel=1e-10)


def test_eigenvector_residuals():
    dom = make_shape("lshape", 1 / 16)
    op = laplacian(dom, BC_DIRICHLET)
    spec = eigensolve(op, ("lowest", 5), want_vectors=True)
    mat = op.matrix
    scale = 4 / dom.h**2
    for i in range(5):
        v = spec.eigenvectors[:, i]
        resid = np.linalg.norm(mat @ v - spec.eigenvalues[i] * v)
        assert resid <= 1e-8 * scale
        assert np.linalg.norm(v) == pytest.approx(1.0, rel=1e-10)


def test_sparse_and_dense_paths_agree():
    dom = make_shape("disk", 1 / 16, radius=1.0)
    op = laplacian(dom, BC_DIRICHLET)
    dense = eigensolve(op, ("lowest", 8), dense_cap=10**9)
    sparse = eigensolve(op, ("lowest", 8), dense_cap=1)
    assert dense.eigenvalues == pytest.approx(sparse.eigenvalues, rel=1e-9)


def test_completeness_certification():
    dom = make_shape("square", 1 / 8, side=1.0)
    op = laplacian(dom, BC_DIRICHLET)
    full = eigensolve(op)
    assert full.complete and full.complete_below(1e9)
    below = eigensolve(op, ("below", 100.0))
    assert below.certified_below == 100.0
    assert below.complete_below(100.0)
    assert below.complete_below(50.0)
    assert not below.complete_below(101.0)
    assert np.all(below.eigenvalues < 100.0)
    lowest = eigensolve(op, ("lowest", 3))
    assert lowest.complete_below(lowest.eigenvalues[-1])
    assert not lowest.complete_below(1e9)


def test_covering_spectrum_reaches_ceiling():
    dom = make_shape("square", 1 / 16, side=1.0)
    op = laplacian(dom, BC_DIRICHLET)
    spec = covering_spectrum(op, 200.0, k_start=1)
    assert spec.eigenvalues[-1] >= 200.0 or spec.complete
    assert spec.complete_below(200.0)


def test_covering_spectrum_unreachable_ceiling():
    dom = make_shape("square", 1 / 8, side=1.0)
    op = laplacian(dom, BC_NEUMANN)
    spec = covering_spectrum(op, 1e12)
    assert spec.complete  # growing the request ends at the full spectrum


def test_torus_modes_discrete_and_continuum():
    n, h = 16, 1 / 16
    disc = torus_modes(n, h, 2, "discrete")
    cont = torus_modes(n, h, 2, "continuum")
    assert disc.lam.shape == (n, n) and cont.lam.shape == (n, n)
    assert disc.lam.min() == 0.0 and cont.lam.min() == 0.0
    assert disc.lam.max() == pytest.approx(8 / h**2, rel=1e-12)
    # discrete dispersion never exceeds the continuum one and they agree
    # to fourth order at the lowest nonzero mode
    assert np.all(disc.lam <= cont.lam + 1e-9)
    k1 = 2 * math.pi / (n * h)
    lowest_disc = (4 / h**2) * math.sin(k1 * h / 2) ** 2
    assert disc.lam[1, 0] == pytest.approx(lowest_disc, rel=1e-12)
    assert cont.lam[1, 0] == pytest.approx(k1**2, rel=1e-12)


def test_dispersion_validity_cap_value():
    assert dispersion_validity_cap(1 / 64) == pytest.approx(0.05 * 64**2, rel=1e-12)


def test_peierls_plaquette_flux():
    h = 1 / 8
    b = 3.0
    dom = make_shape("square", h, side=0.5)
    op = landau_hamiltonian(dom, LandauParams(field_strength=b), BC_DIRICHLET)
    mat = op.matrix.toarray() if hasattr(op.matrix, "toarray") else op.matrix
    cells = np.argwhere(dom.mask)
    index = {tuple(c): i for i, c in enumerate(cells)}
    i, j = 1, 1
    a = index[(i, j)]
    bb = index[(i + 1, j)]
    c = index[(i + 1, j + 1)]
    d = index[(i, j + 1)]

    def hop(p, q):
        entry = mat[q, p]
        assert abs(abs(entry) - 1 / h**2) < 1e-12
        return entry / abs(entry)

    # counterclockwise product of hopping amplitudes <next|H|current>
    # encloses one plaquette of flux B*h^2, oriented like the continuum
    # operator whose spectrum is B(2k-1)
    loop = hop(a, bb) * hop(bb, c) * hop(c, d) * hop(d, a)
    assert loop == pytest.approx(np.exp(1j * b * h**2), abs=1e-12)
    # the reversed traversal sees the conjugate flux
    rev = hop(a, d) * hop(d, c) * hop(c, bb) * hop(bb, a)
    assert rev == pytest.approx(np.conj(loop), abs=1e-12)


def test_magnetic_spectrum_translation_covariance():
    # Translating the sample region only changes the gauge, not the spectrum.
    from dataclasses import replace

    h = 1 / 16
    dom = make_shape("square", h, side=0.75)
    moved = replace(dom, origin=(dom.origin[0] + 2.0, dom.origin[1] - 1.0))
    params = LandauParams(field_strength=5.0)
    for bc in (BC_DIRICHLET, BC_NEUMANN):
        s1 = eigensolve(landau_hamiltonian(dom, params, bc), ("lowest", 6))
        s2 = eigensolve(landau_hamiltonian(moved, params, bc), ("lowest", 6))
        assert s1.eigenvalues == pytest.approx(s2.eigenvalues, rel=1e-9)


def test_magnetic_operator_is_hermitian():
    dom = make_shape("square", 1 / 8, side=0.5)
    op = landau_hamiltonian(dom, LandauParams(field_strength=7.0), BC_NEUMANN)
    mat = op.matrix.toarray() if hasattr(op.matrix, "toarray") else op.matrix
    assert np.abs(mat - mat.conj().T).max() <= 1e-12 / dom.h**2


def test_landau_levels_enumeration():
    assert landau_levels(5.0, 40.0) == [(1, 5.0), (2, 15.0), (3, 25.0), (4, 35.0)]
    assert landau_levels(16.0, 15.0) == []
    # a cutoff exactly on a level includes it
    assert landau_levels(5.0, 15.0)[-1] == (2, 15.0)


def test_incomplete_spectrum_guards():
    spec = Spectrum(eigenvalues=np.array([1.0, 2.0]), eigenvectors=None, n_total=10)
    assert not spec.complete
    assert not spec.complete_below(5.0)
    with pytest.raises(NumericalFailure):
        covering_spectrum(
            laplacian(make_shape("square", 1 / 4, side=1.0), BC_DIRICHLET),
            1e30,
            k_start=1,
        )


def test_spectrum_csv_is_deterministic(tmp_path):
    dom = make_shape("square", 1 / 8, side=1.0)
    spec = eigensolve(laplacian(dom, BC_DIRICHLET))
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    save_spectrum_csv(spec, p1, metadata={"bc": "dirichlet"})
    save_spectrum_csv(spec, p2, metadata={"bc": "dirichlet"})
    body = p1.read_text()
    assert body == p2.read_text()
    assert body.count("\n") >= len(spec.eigenvalues)
