"""Exact finite-dimensional verification of the two trace identities behind
the Neumann (lower) and Dirichlet (upper) bounds.

Setting: an isometry J from an n-dimensional space into an m-dimensional one
(J*J = I), a nonnegative Hermitian L downstairs and L_hat upstairs, spectral
projections E(lam) = 1(L < lam) and E_hat(lam) = 1(L_hat < lam), both strict
at ties.  With T_{a,i} = |<w_a, J v_i>|^2 over eigenpairs (mu_i, v_i) of L and
(nu_a, w_a) of L_hat:

  part "neumann"   (any L):        Tr(L - lam)_- = main + R_less + R_greater,
      main      = - sum_{nu_a < lam} sum_i (mu_i - lam) T_{a,i}
      R_less    =   sum_{nu_a >= lam} sum_i (mu_i - lam)_- T_{a,i}
      R_greater =   sum_{nu_a < lam} sum_i (mu_i - lam)_+ T_{a,i}

  part "dirichlet" (L = J* L_hat J): Tr(L - lam)_- = main - R_less - R_greater,
      main      =   sum_a (nu_a - lam)_- ||J* w_a||^2
      R_less    =   sum_{mu_i < lam} sum_a (nu_a - lam)_+ T_{a,i}
      R_greater =   sum_{mu_i >= lam} sum_a (nu_a - lam)_- T_{a,i}

All four remainders are manifestly nonnegative, so dropping them bounds the
trace by the respective main term from the matching side.  The identities are
exact in finite dimensions and double as the correctness oracle for the
grid-level remainder computations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalFailure

__all__ = [
    "TracePairInstance",
    "RemainderSet",
    "KrogerSandwich",
    "random_instance",
    "verify_neumann_identity",
    "verify_dirichlet_identity",
    "bly_kroger_finite",
    "cross_term_cancellation",
    "run_verification_suite",
]

_ISO_TOL = 1e-12


@dataclass
class TracePairInstance:
    """An isometry J (m x n) with operators L (n x n) and L_hat (m x m).

    compressed marks L = J* L_hat J, the structural hypothesis of the
    dirichlet-side identity."""

    j: np.ndarray
    l: np.ndarray
    lhat: np.ndarray
    compressed: bool

    @property
    def n(self) -> int:
        return self.j.shape[1]

    @property
    def m(self) -> int:
        return self.j.shape[0]

    def validate(self):
        if self.m < self.n:
            raise ValueError("need n <= m")
        gram = self.j.conj().T @ self.j
        if np.abs(gram - np.eye(self.n)).max() > _ISO_TOL * max(1.0, self.n):
            raise ValueError("J is not an isometry")
        for name, a in (("L", self.l), ("L_hat", self.lhat)):
            if np.abs(a - a.conj().T).max() > 1e-10 * max(1.0, np.abs(a).max()):
                raise ValueError(f"{name} is not Hermitian")
            if scipy.linalg.eigvalsh(a)[0] < -1e-10 * max(1.0, np.abs(a).max()):
                raise ValueError(f"{name} is not nonnegative")

    def scale(self) -> float:
        return max(1.0, float(np.trace(self.lhat).real))


@dataclass(frozen=True)
class RemainderSet:
    part: str
    lam: float
    lhs: float
    main: float
    r_less: float
    r_greater: float
    residual: float
    scale: float


def random_instance(
    n: int, m: int, seed: int, compressed: bool = False, complex_entries: bool = True
) -> TracePairInstance:
    """Seed-deterministic instance: Haar-flavored isometry from orthonormalized
    Gaussian columns, Wishart-type nonnegative operators."""
    if not 1 <= n <= m:
        raise ValueError("need 1 <= n <= m")
    rng = np.random.default_rng(seed)

    def gauss(rows, cols):
        g = rng.standard_normal((rows, cols))
        if complex_entries:
            g = g + 1j * rng.standard_normal((rows, cols))
        return g

    q, r = np.linalg.qr(gauss(m, n))
    # fix the phase so the factorization (hence the instance) is unambiguous
    q = q * np.sign(np.diagonal(r))[None, :].conj()
    ghat = gauss(m, m)
    lhat = ghat @ ghat.conj().T / m
    if compressed:
        l = q.conj().T @ lhat @ q
        l = 0.5 * (l + l.conj().T)
    else:
        g = gauss(n, n)
        l = g @ g.conj().T / n
    return TracePairInstance(j=q, l=l, lhat=lhat, compressed=compressed)


def _overlaps(inst: TracePairInstance):
    mu, v = scipy.linalg.eigh(inst.l)
    nu, w = scipy.linalg.eigh(inst.lhat)
    t = np.abs(w.conj().T @ (inst.j @ v)) ** 2
    return mu, nu, w, t


def verify_neumann_identity(inst: TracePairInstance, lam: float) -> RemainderSet:
    """Exact decomposition of Tr(L - lam)_- from the upstairs spectral split;
    holds for any L.  Residual beyond 1e-8 * scale raises."""
    mu, nu, _, t = _overlaps(inst)
    low_hat = nu < lam
    d_all = mu - lam
    d_minus = np.maximum(-d_all, 0.0)
    d_plus = np.maximum(d_all, 0.0)
    lhs = float(d_minus.sum())
    main = -float(np.sum(t[low_hat] @ d_all)) if low_hat.any() else 0.0
    r_less = float(np.sum(t[~low_hat] @ d_minus)) if (~low_hat).any() else 0.0
    r_greater = float(np.sum(t[low_hat] @ d_plus)) if low_hat.any() else 0.0
    residual = abs(lhs - (main + r_less + r_greater))
    scale = inst.scale()
    if residual > 1e-8 * scale:
        raise NumericalFailure(
            f"neumann-side identity residual {residual:.3e} exceeds 1e-8 * {scale:.3e}"
        )
    return RemainderSet(
        part="neumann",
        lam=lam,
        lhs=lhs,
        main=main,
        r_less=r_less,
        r_greater=r_greater,
        residual=residual,
        scale=scale,
    )


def verify_dirichlet_identity(inst: TracePairInstance, lam: float) -> RemainderSet:
    """Exact decomposition of Tr(J* L_hat J - lam)_-; requires the compressed
    structure.  Residual beyond 1e-8 * scale raises."""
    if not inst.compressed:
        raise ValueError("dirichlet-side identity requires L = J* L_hat J")
    mu, nu, w, t = _overlaps(inst)
    low = mu < lam
    n_minus = np.maximum(lam - nu, 0.0)
    n_plus = np.maximum(nu - lam, 0.0)
    lhs = float(np.maximum(lam - mu, 0.0).sum())
    col_norms = (np.abs(inst.j.conj().T @ w) ** 2).sum(axis=0)
    main = float((n_minus * col_norms).sum())
    r_less = float(np.sum(n_plus @ t[:, low])) if low.any() else 0.0
    r_greater = float(np.sum(n_minus @ t[:, ~low])) if (~low).any() else 0.0
    residual = abs(lhs - (main - r_less - r_greater))
    scale = inst.scale()
    if residual > 1e-8 * scale:
        raise NumericalFailure(
            f"dirichlet-side identity residual {residual:.3e} exceeds 1e-8 * {scale:.3e}"
        )
    return RemainderSet(
        part="dirichlet",
        lam=lam,
        lhs=lhs,
        main=main,
        r_less=r_less,
        r_greater=r_greater,
        residual=residual,
        scale=scale,
    )


@dataclass(frozen=True)
class KrogerSandwich:
    """Finite-dimensional shadow of the Berezin-Li-Yau / Kroger sandwich.

    For a compressed instance the same trace is bounded above by the
    dirichlet-side main term and below by the neumann-side main term; no
    single main term serves both sides in finite dimensions, so both are
    reported.  upper_gap equals the dropped R_less + R_greater."""

    trace: float
    upper_main: float
    lower_main: float
    upper_holds: bool
    lower_holds: bool
    upper_gap: float
    lower_gap: float


def bly_kroger_finite(inst: TracePairInstance, lam: float) -> KrogerSandwich:
    if not inst.compressed:
        raise ValueError("sandwich requires a compressed instance")
    upper = verify_dirichlet_identity(inst, lam)
    lower = verify_neumann_identity(inst, lam)
    tol = 1e-10 * inst.scale()
    return KrogerSandwich(
        trace=upper.lhs,
        upper_main=upper.main,
        lower_main=lower.main,
        upper_holds=bool(upper.lhs <= upper.main + tol),
        lower_holds=bool(lower.lhs >= lower.main - tol),
        upper_gap=upper.main - upper.lhs,
        lower_gap=lower.lhs - lower.main,
    )


def cross_term_cancellation(inst: TracePairInstance, lam: float) -> float:
    """|Tr(E_hat J (L-lam)_- J* E_hat_perp) + adjoint|: the mixed terms cancel
    exactly, which is what lets the identity split along the upstairs
    projection."""
    mu, v = scipy.linalg.eigh(inst.l)
    nu, w = scipy.linalg.eigh(inst.lhat)
    minus = np.maximum(lam - mu, 0.0)
    op_minus = (v * minus[None, :]) @ v.conj().T
    x = w.conj().T @ (inst.j @ op_minus @ inst.j.conj().T) @ w
    low = nu < lam
    # the mixed blocks are adjoints of each other, so their combined trace
    # contribution vanishes; measure that directly
    total = np.trace(x) - np.trace(x[np.ix_(low, low)]) - np.trace(x[np.ix_(~low, ~low)])
    return float(abs(total))


def run_verification_suite(
    trials: int,
    seed: int,
    n_max: int = 12,
    m_max: int = 30,
) -> dict:
    """Randomized exactness suite: `trials` instances per part, lam drawn from
    [0, 2 ||L_hat||].  Returns {trials, max_residual, min_remainder, failures}
    with residuals normalized by the per-instance scale."""
    rng = np.random.default_rng(seed)
    max_residual = 0.0
    min_remainder = np.inf
    failures = 0
    total = 0
    for part in ("neumann", "dirichlet"):
        for _ in range(trials):
            n = int(rng.integers(1, n_max + 1))
            m = int(rng.integers(n, m_max + 1))
            inst = random_instance(
                n,
                m,
                seed=int(rng.integers(0, 2**31 - 1)),
                compressed=(part == "dirichlet"),
                complex_entries=bool(rng.integers(0, 2)),
            )
            norm = float(scipy.linalg.eigvalsh(inst.lhat)[-1])
            lam = float(rng.uniform(0.0, 2.0 * norm))
            try:
                if part == "neumann":
                    res = verify_neumann_identity(inst, lam)
                else:
                    res = verify_dirichlet_identity(inst, lam)
            except NumericalFailure:
                failures += 1
                total += 1
                continue
            total += 1
            max_residual = max(max_residual, res.residual / res.scale)
            min_remainder = min(min_remainder, res.r_less, res.r_greater)
    if not np.isfinite(min_remainder):
        min_remainder = 0.0
    return {
        "trials": total,
        "max_residual": max_residual,
        "min_remainder": float(min_remainder),
        "failures": failures,
    }
