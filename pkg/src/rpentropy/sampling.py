"""Random ensembles: Haar unitaries, simplex eigenvalues, seeded trial streams."""

from __future__ import annotations

import numpy as np

# Random states are redrawn, never clamped, when an eigenvalue falls below
# this floor; keeps the invertibility premise intact.
EIGENVALUE_REDRAW_FLOOR = 1e-6


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent generator for one trial, reproducible across schedules."""
    return np.random.default_rng((int(master_seed), int(trial_index)))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    # absorb the R phases so the distribution is exactly Haar
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def simplex_eigenvalues(dim: int, rng: np.random.Generator,
                        floor: float = EIGENVALUE_REDRAW_FLOOR) -> np.ndarray:
    """Flat Dirichlet draw over the probability simplex, redrawn below `floor`."""
    while True:
        lam = rng.dirichlet(np.ones(dim))
        if lam.min() >= floor:
            return lam


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Full-rank random density matrix: simplex eigenvalues, Haar eigenvectors."""
    lam = simplex_eigenvalues(dim, rng)
    u = haar_unitary(dim, rng)
    rho = (u * lam) @ u.conj().T
    return 0.5 * (rho + rho.conj().T)


def random_operator(dim: int, rng: np.random.Generator, hermitian: bool = False,
                    unit_norm: bool = True) -> np.ndarray:
    """Complex Ginibre test operator, optionally hermitized / Frobenius-normalized."""
    op = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    if hermitian:
        op = 0.5 * (op + op.conj().T)
    if unit_norm:
        op = op / np.linalg.norm(op)
    return op
