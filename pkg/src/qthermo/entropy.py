"""Entropy functionals on density operators (k_B = 1, natural log)."""
import numpy as np

from . import operators as ops
from .errors import SingularReference

#: Eigenvalues below this are treated as exact zeros (0 ln 0 = 0).
ZERO_EIG = 1e-14


def _xlogx(p):
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    mask = p > ZERO_EIG
    out[mask] = p[mask] * np.log(p[mask])
    return out


def entropy_vn(rho):
    """von Neumann entropy -Tr rho ln rho."""
    p = np.linalg.eigvalsh(ops.hermitize(np.asarray(rho, complex)))
    return 0.0 - float(np.sum(_xlogx(p)))


def energy_populations(rho, H):
    """Populations of the (merged) eigenspaces of ``H``."""
    dec = ops.eigendecompose(H)
    return np.array([ops.expectation(rho, P) for P in dec.projectors])


def entropy_shannon(p):
    return 0.0 - float(np.sum(_xlogx(p)))


def entropy_energy(rho, H):
    """Shannon entropy of the outcome distribution of an energy measurement."""
    return entropy_shannon(energy_populations(rho, H))


def log_density(rho):
    """ln rho with zero eigenvalues mapped to 0 (their weight in any trace vanishes)."""
    w, V = np.linalg.eigh(ops.hermitize(np.asarray(rho, complex)))
    lw = np.where(w > ZERO_EIG, np.log(np.clip(w, ZERO_EIG, None)), 0.0)
    return (V * lw) @ V.conj().T


def conditional_entropy(rho, sigma):
    """Relative entropy Tr rho (ln rho - ln sigma); ``sigma`` must be full rank."""
    ws, Vs = np.linalg.eigh(ops.hermitize(np.asarray(sigma, complex)))
    if ws[0] <= ZERO_EIG:
        raise SingularReference(f"reference state has eigenvalue {ws[0]:.3e}")
    log_sigma = (Vs * np.log(ws)) @ Vs.conj().T
    rho = np.asarray(rho, complex)
    return float(-entropy_vn(rho) - ops.expectation(rho, log_sigma))
