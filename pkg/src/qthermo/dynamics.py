"""Propagation of master equations, steady states and cycle maps."""
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import operators as ops
from .entropy import conditional_entropy
from .errors import (DegenerateKernel, MaxItersExceeded, NoKernel, NotConverged,
                     PositivityLoss, StepSizeUnderflow)

log = logging.getLogger(__name__)

POSITIVITY_ABORT = -1e-6
TRACE_DRIFT_LOG = 1e-10

# Dormand-Prince 5(4) tableau.
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4
ORDER = 5


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    accepted: int = 0
    rejected: int = 0
    max_trace_drift: float = 0.0
    min_eigenvalue: float = 1.0

    def __len__(self):
        return len(self.times)

    @property
    def final(self):
        return self.states[-1]


def _rhs_of(gen):
    if hasattr(gen, "rhs"):
        return gen.rhs
    if callable(gen):
        return gen
    raise TypeError("expected a generator object with .rhs(t, rho) or a callable")


def _dp_step(f, t, y, h, k1):
    k = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * kj for a, kj in zip(_A[i], k) if a)
        k.append(f(t + _C[i] * h, yi))
    y_new = y + h * sum(b * kj for b, kj in zip(_B5, k) if b)
    err = h * sum(e * kj for e, kj in zip(_E, k) if e)
    return y_new, err, k[-1]


def propagate(gen, rho0, t_end, tol=1e-8, t_eval=None, t0=0.0, fixed_step=None,
              max_step=np.inf, check_positivity=True, on_step=None):
    """Integrate d rho/dt = L(t) rho with an adaptive Dormand-Prince 5(4) pair.

    ``gen`` is anything exposing ``rhs(t, rho)`` (static or driven generators)
    or a bare callable. States are stored at ``t_eval`` if given, otherwise at
    every accepted step. Trace drift is logged but never corrected; an
    eigenvalue below -1e-6 aborts with :class:`PositivityLoss`. ``fixed_step``
    switches off adaptivity (used for order checks). ``on_step(t, rho)`` runs
    on every accepted state (truncation guards hook in here).
    """
    if not 1e-12 <= tol <= 1e-4:
        raise ValueError("tol must lie in [1e-12, 1e-4]")
    f = _rhs_of(gen)
    y = np.array(rho0, dtype=complex)
    t = float(t0)
    if t_eval is None:
        targets = None
        times, states = [t], [y.copy()]
    else:
        targets = [float(s) for s in np.atleast_1d(t_eval)]
        if any(b < a for a, b in zip(targets, targets[1:])) or targets[0] < t or targets[-1] > t_end:
            raise ValueError("t_eval must be ascending and inside [t0, t_end]")
        times, states = [], []
        while targets and targets[0] <= t:
            times.append(targets.pop(0))
            states.append(y.copy())
    traj = Trajectory(np.array([]), np.array([]))

    k1 = f(t, y)
    if fixed_step:
        h = float(fixed_step)
    else:
        scale = max(np.max(np.abs(k1)), 1e-12)
        h = min(0.01 * tol ** 0.2 / scale * 10, max_step, t_end - t) if t_end > t else 0.0
    while t < t_end * (1 - 1e-15) and t_end - t > 1e-15:
        h = min(h, max_step)
        # A step clipped to hit an output time does not shrink the next one.
        h_step = min(h, t_end - t)
        if targets and targets[0] > t:
            h_step = min(h_step, targets[0] - t)
        clipped = h_step < h
        if h_step < 1e-13 * max(1.0, abs(t)) and not clipped:
            raise StepSizeUnderflow(f"step size {h_step:.3e} underflowed at t = {t:.6g}")
        y_new, err, k_last = _dp_step(f, t, y, h_step, k1)
        err_norm = np.max(np.abs(err)) / tol
        if fixed_step or err_norm <= 1.0:
            t = t + h_step
            y = y_new
            k1 = k_last
            traj.accepted += 1
            drift = abs(np.trace(y).real - 1.0)
            if drift > traj.max_trace_drift:
                if drift > TRACE_DRIFT_LOG and traj.max_trace_drift <= TRACE_DRIFT_LOG:
                    log.info("trace drift %.3e at t=%.6g (not corrected)", drift, t)
                traj.max_trace_drift = drift
            if check_positivity:
                lam = np.linalg.eigvalsh(ops.hermitize(y))[0]
                traj.min_eigenvalue = min(traj.min_eigenvalue, lam)
                if lam < POSITIVITY_ABORT:
                    raise PositivityLoss(f"eigenvalue {lam:.3e} at t = {t:.6g}")
            if on_step is not None:
                on_step(t, y)
            if targets is None:
                times.append(t)
                states.append(y.copy())
            else:
                while targets and targets[0] <= t * (1 + 1e-14) + 1e-300:
                    times.append(targets.pop(0))
                    states.append(y.copy())
            if not fixed_step:
                factor = 5.0 if err_norm == 0 else min(5.0, max(0.2, 0.9 * err_norm ** (-1 / ORDER)))
                h = max(h, h_step * factor) if clipped else h_step * factor
        else:
            traj.rejected += 1
            h = h_step * max(0.2, 0.9 * err_norm ** (-1 / ORDER))
    while targets:
        times.append(targets.pop(0))
        states.append(y.copy())
    traj.times = np.array(times)
    traj.states = np.array(states)
    return traj


def steady_state(gen, kernel_tol=1e-8):
    """Unique stationary state of a generator via dense kernel extraction.

    The kernel dimension is read off the singular values of the vectorized
    generator (relative threshold ``kernel_tol``); the state itself is then
    obtained from the bordered system ``L x = 0, Tr x = 1``.
    """
    L = gen.superoperator() if hasattr(gen, "superoperator") else np.asarray(gen)
    n = int(round(np.sqrt(L.shape[0])))
    s = scipy.linalg.svdvals(L)
    null = int(np.sum(s <= kernel_tol * max(s[0], 1e-300)))
    if null == 0:
        raise NoKernel(f"generator has no kernel (smallest singular value {s[-1]:.3e})")
    if null > 1:
        raise DegenerateKernel(f"kernel dimension {null} > 1")
    tr_row = ops.vectorize(np.eye(n)).conj()
    M = np.vstack([L, tr_row[None, :]])
    b = np.zeros(n * n + 1, dtype=complex)
    b[-1] = 1.0
    x, *_ = np.linalg.lstsq(M, b, rcond=None)
    rho = ops.hermitize(ops.devectorize(x, n))
    return rho / np.trace(rho).real


def spectral_gap(gen):
    """Smallest nonzero relaxation rate -Re(lambda) of the generator."""
    lam = np.linalg.eigvals(gen.superoperator())
    rates = np.sort(-lam.real)
    nonzero = rates[rates > 1e-9 * max(1.0, rates[-1])]
    return float(nonzero[0])


@dataclass
class CPMap:
    """Superoperator matrix of a completely positive trace-preserving map."""

    matrix: np.ndarray
    label: str = ""

    @property
    def dim(self):
        return int(round(np.sqrt(self.matrix.shape[0])))

    def apply(self, rho):
        return ops.devectorize(self.matrix @ ops.vectorize(rho), self.dim)

    def then(self, other):
        """Map applying ``self`` first and ``other`` second."""
        return CPMap(other.matrix @ self.matrix, f"{self.label}->{other.label}")

    def choi(self):
        n = self.dim
        C = np.zeros((n * n, n * n), dtype=complex)
        for i in range(n):
            for j in range(n):
                E = np.zeros((n, n), complex)
                E[i, j] = 1.0
                C += np.kron(E, self.apply(E))
        return C

    def trace_defect(self):
        """max |M^+ vec(I) - vec(I)|: zero for a trace-preserving map."""
        vI = ops.vectorize(np.eye(self.dim))
        return float(np.max(np.abs(self.matrix.conj().T @ vI - vI)))

    def choi_floor(self):
        return float(np.linalg.eigvalsh(ops.hermitize(self.choi()))[0])

    def is_cptp(self, tp_tol=1e-9, cp_floor=-1e-8):
        return self.trace_defect() < tp_tol and self.choi_floor() > cp_floor


def compose(maps):
    """Compose maps in application order (first element acts first)."""
    out = maps[0]
    for m in maps[1:]:
        out = out.then(m)
    return out


def _step_exponentials(H_of_t, t0, h, substeps):
    Hs = np.array([H_of_t(t0 + (k + 0.5) * h) for k in range(substeps)], dtype=complex)
    Hs = 0.5 * (Hs + np.conj(np.swapaxes(Hs, 1, 2)))
    w, V = np.linalg.eigh(Hs)
    return np.einsum("kij,kj,klj->kil", V, np.exp(-1j * h * w), V.conj())


def midpoint_propagator(H_of_t, t0, t1, substeps, record=False):
    """Ordered product of exponentials of H sampled at substep midpoints."""
    h = (t1 - t0) / substeps
    steps = _step_exponentials(H_of_t, t0, h, substeps)
    U = np.eye(steps.shape[1], dtype=complex)
    trail = [U] if record else None
    for E in steps:
        U = E @ U
        if record:
            trail.append(U)
    return (U, trail) if record else U


def converged_propagator(H_of_t, t0, t1, substeps=64, tol=1e-8, max_substeps=2 ** 17):
    """Midpoint propagator refined by doubling until two levels agree within ``tol``."""
    U = midpoint_propagator(H_of_t, t0, t1, substeps)
    while True:
        if 2 * substeps > max_substeps:
            raise NotConverged(f"propagator not converged at {substeps} substeps")
        U2 = midpoint_propagator(H_of_t, t0, t1, 2 * substeps)
        substeps *= 2
        if np.max(np.abs(U2 - U)) < tol:
            return U2, substeps
        U = U2


def unitary_map(U, label="unitary"):
    return CPMap(ops.sprepost(U, U.conj().T), label)


def segment_map(kind, generator=None, duration=0.0, hamiltonian=None, substeps=64,
                tol=1e-10, label=None):
    """CPTP map of one cycle segment.

    ``kind="thermal"``: ``exp(duration * L)`` for a fixed generator.
    ``kind="unitary_ramp"``: conjugation by the time-ordered propagator of
    ``hamiltonian(s)`` for ``s`` in ``[0, duration]``.
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    if kind == "thermal":
        L = generator.superoperator()
        return CPMap(scipy.linalg.expm(duration * L), label or "thermal")
    if kind == "unitary_ramp":
        n = hamiltonian(0.0).shape[0]
        if duration == 0:
            return CPMap(np.eye(n * n, dtype=complex), label or "quench")
        U, _ = converged_propagator(hamiltonian, 0.0, duration, substeps, tol)
        return unitary_map(U, label or "ramp")
    raise ValueError(f"unknown segment kind {kind!r}")


@dataclass
class LimitCycle:
    state: np.ndarray
    iterations: int
    conditional_entropies: list = field(default_factory=list)
    distances: list = field(default_factory=list)

    def max_entropy_increase(self):
        s = np.asarray(self.conditional_entropies)
        return float(np.max(np.diff(s))) if len(s) > 1 else 0.0


def fixed_point(cpmap):
    """Eigenvector of the map with eigenvalue closest to 1, as a density matrix."""
    w, V = np.linalg.eig(cpmap.matrix)
    k = int(np.argmin(np.abs(w - 1.0)))
    rho = ops.hermitize(ops.devectorize(V[:, k], cpmap.dim))
    return rho / np.trace(rho).real


def iterate_to_limit_cycle(cpmap, rho0, max_iters=1000, tol=1e-10):
    """Apply the map until successive states agree within ``tol`` in trace distance.

    The relative entropy to the exact fixed point is recorded at every
    iterate; for a CPTP map this sequence cannot increase.
    """
    rho = np.array(rho0, dtype=complex)
    nxt = cpmap.apply(rho)
    d = ops.trace_distance(nxt, rho)
    if d < tol:
        return LimitCycle(rho, 0, [], [d])
    star = fixed_point(cpmap)
    result = LimitCycle(rho, 0, [conditional_entropy(rho, star)], [d])
    for n in range(1, max_iters + 1):
        rho = nxt
        nxt = cpmap.apply(rho)
        d = ops.trace_distance(nxt, rho)
        result.conditional_entropies.append(conditional_entropy(rho, star))
        result.distances.append(d)
        if d < tol:
            result.state = rho
            result.iterations = n
            return result
    raise MaxItersExceeded(f"no limit cycle within {max_iters} iterations (last distance {d:.3e})")
