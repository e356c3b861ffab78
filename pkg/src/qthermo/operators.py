"""Dense operator algebra: Hermitian checks, spectra, vectorization.

Natural units (hbar = k_B = 1) are used everywhere. Density operators are
plain complex ``numpy`` arrays; superoperators act on column-stacked
(Fortran order) vectors, so that ``vec(A X B) = (B.T kron A) vec(X)``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonHermitianInput

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_FLOOR = -1e-10


def _square(A, name="operator"):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {A.shape}")
    return A


def check_hermitian(A, tol=HERMITIAN_TOL):
    """Return ``A`` as a complex array, raising if it is not Hermitian."""
    A = _square(A)
    err = np.max(np.abs(A - A.conj().T)) if A.size else 0.0
    if err > tol:
        raise NonHermitianInput(f"operator is not Hermitian (max |A - A^+| = {err:.3e})")
    return A


def hermitize(A):
    return 0.5 * (A + A.conj().T)


def check_density(rho, trace_tol=TRACE_TOL, floor=POSITIVITY_FLOOR):
    """Validate the density-operator invariants and return ``rho``."""
    rho = check_hermitian(rho)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density operator trace is {tr!r}, expected 1")
    lam_min = np.linalg.eigvalsh(hermitize(rho))[0]
    if lam_min < floor:
        raise ValueError(f"density operator has negative eigenvalue {lam_min:.3e}")
    return rho


def _match(rho, O):
    if rho.shape != O.shape:
        raise DimensionMismatch(f"shapes {rho.shape} and {O.shape} differ")


@dataclass(frozen=True)
class SpectralDecomposition:
    """Distinct eigenvalues (ascending) and their orthogonal projectors.

    ``vectors`` holds an orthonormal eigenbasis ordered consistently with
    ``eigenvalues`` (all vectors of a merged degenerate block share a label in
    ``labels``).
    """

    eigenvalues: np.ndarray
    projectors: tuple
    vectors: np.ndarray
    labels: np.ndarray

    def reconstruct(self):
        return sum(e * P for e, P in zip(self.eigenvalues, self.projectors))

    def bohr_frequencies(self):
        """Sorted distinct non-negative differences between eigenvalues."""
        e = self.eigenvalues
        return np.unique(np.abs(e[:, None] - e[None, :]).ravel())

    @property
    def dim(self):
        return self.vectors.shape[0]


def default_degeneracy_tol(eigenvalues):
    spread = float(np.max(eigenvalues) - np.min(eigenvalues)) if len(eigenvalues) else 0.0
    return 1e-9 * spread if spread > 0 else 1e-12


def eigendecompose(H, degeneracy_tol=None):
    """Spectral decomposition of a Hermitian operator.

    Eigenvalues closer than ``degeneracy_tol`` (chained through sorted order)
    are merged into a single projector whose eigenvalue is the block mean.
    """
    H = check_hermitian(H)
    w, V = np.linalg.eigh(hermitize(H))
    tol = default_degeneracy_tol(w) if degeneracy_tol is None else degeneracy_tol
    if tol <= 0:
        raise ValueError("degeneracy_tol must be positive")
    labels = np.zeros(len(w), dtype=int)
    for i in range(1, len(w)):
        labels[i] = labels[i - 1] + (1 if w[i] - w[i - 1] > tol else 0)
    eigenvalues = []
    projectors = []
    for k in range(labels[-1] + 1 if len(w) else 0):
        idx = labels == k
        Vk = V[:, idx]
        eigenvalues.append(float(np.mean(w[idx])))
        P = Vk @ Vk.conj().T
        P.setflags(write=False)
        projectors.append(P)
    ev = np.array(eigenvalues)
    ev.setflags(write=False)
    V.setflags(write=False)
    labels.setflags(write=False)
    return SpectralDecomposition(ev, tuple(projectors), V, labels)


def expectation(rho, O):
    """Tr{rho O}; the imaginary residue (< 1e-10 for valid input) is dropped."""
    rho = _square(rho, "rho")
    O = _square(O, "observable")
    _match(rho, O)
    return float(np.einsum("ij,ji->", rho, O).real)


def vectorize(rho):
    rho = _square(rho, "matrix")
    return rho.reshape(-1, order="F")


def devectorize(v, dim=None):
    v = np.asarray(v)
    if v.ndim != 1:
        raise DimensionMismatch("expected a 1-d vector")
    n = int(round(np.sqrt(v.size))) if dim is None else dim
    if n * n != v.size:
        raise DimensionMismatch(f"vector of length {v.size} is not a square matrix")
    return v.reshape((n, n), order="F")


def spre(A):
    """Superoperator of left multiplication X -> A X."""
    return np.kron(np.eye(A.shape[0]), A)


def spost(B):
    """Superoperator of right multiplication X -> X B."""
    return np.kron(B.T, np.eye(B.shape[0]))


def sprepost(A, B):
    """Superoperator X -> A X B."""
    return np.kron(B.T, A)


def commutator_superop(H):
    """Superoperator of X -> -i[H, X]."""
    return -1j * (spre(H) - spost(H))


def dissipator_superop(A):
    """Superoperator of X -> A X A^+ - {A^+ A, X}/2."""
    AdA = A.conj().T @ A
    return sprepost(A, A.conj().T) - 0.5 * (spre(AdA) + spost(AdA))


def dissipator(A, rho):
    AdA = A.conj().T @ A
    return A @ rho @ A.conj().T - 0.5 * (AdA @ rho + rho @ AdA)


def adjoint_dissipator(A, O):
    """Heisenberg-picture dissipator O -> A^+ O A - {A^+ A, O}/2."""
    AdA = A.conj().T @ A
    return A.conj().T @ O @ A - 0.5 * (AdA @ O + O @ AdA)


def hermitian_propagator(H, t):
    """exp(-i H t) through the spectral decomposition of ``H``."""
    H = check_hermitian(H)
    w, V = np.linalg.eigh(hermitize(H))
    return (V * np.exp(-1j * w * t)) @ V.conj().T


def hermitian_function(A, f):
    """Apply a scalar function to a Hermitian matrix via its spectrum."""
    w, V = np.linalg.eigh(hermitize(A))
    return (V * f(w)) @ V.conj().T


def trace_distance(rho, sigma):
    """Half the trace norm of the difference."""
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(rho - sigma)))))


def random_hermitian(dim, rng):
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (A + A.conj().T)


def random_density(dim, rng, rank=None):
    """Random full-rank (or given rank) density matrix from a Ginibre ensemble."""
    r = dim if rank is None else rank
    G = rng.normal(size=(dim, r)) + 1j * rng.normal(size=(dim, r))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def pure_state(psi):
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def pauli():
    """Return (sigma_x, sigma_y, sigma_z)."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    return sx, sy, sz
