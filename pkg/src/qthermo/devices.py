"""Ready-made models: two-level system, oscillator, tricycle, driven TLS and Otto cycle."""
import math
from dataclasses import dataclass, field

import numpy as np

from . import operators as ops
from .baths import Bath, WorkBath
from .davies import CouplingChannel, build_generator, gibbs_state
from .dynamics import compose, iterate_to_limit_cycle, segment_map
from .errors import DomainError, FrequencyMismatch, TruncationLeak
from .floquet import PeriodicHamiltonian
from .tables import write_table


def build_tls(omega0):
    """``H = diag(0, omega0)`` with coupling operator sigma_x."""
    if not omega0 > 0:
        raise DomainError("omega0 must be positive")
    sx, _, _ = ops.pauli()
    return np.diag([0.0, float(omega0)]).astype(complex), sx


def build_oscillator(omega, n_max):
    """Oscillator truncated to ``n_max`` levels with coupling ``a + a^+``."""
    if n_max < 4:
        raise DomainError("n_max must be >= 4")
    if not omega > 0:
        raise DomainError("omega must be positive")
    a = np.diag(np.sqrt(np.arange(1, n_max)), 1).astype(complex)
    H = np.diag(omega * np.arange(n_max)).astype(complex)
    return H, a + a.conj().T


@dataclass
class TruncationGuard:
    """Step hook that raises :class:`TruncationLeak` when the top two levels fill up."""

    threshold: float = 1e-8
    worst: float = 0.0

    def leak(self, rho):
        d = np.real(np.diag(rho))
        return float(d[-2:].sum())

    def __call__(self, t, rho):
        p = self.leak(rho)
        self.worst = max(self.worst, p)
        if p >= self.threshold:
            raise TruncationLeak(f"top-level population {p:.3e} at t = {t:.6g}")


@dataclass(frozen=True)
class TricycleSpec:
    """Three-level junction ``diag(0, omega_c, omega_h)``.

    The hot bath drives 0 <-> 2, the cold bath 0 <-> 1 and the work bath
    1 <-> 2. Whether the device runs as an engine or a refrigerator follows
    from the parameters: it is an engine exactly when the hot-cold population
    ratio produces inversion on the work transition.
    """

    omega_h: float
    omega_c: float
    hot: Bath
    cold: Bath
    work: Bath = field(default_factory=WorkBath)
    omega_w: float = None
    couplings: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if not (self.omega_h > self.omega_c > 0):
            raise DomainError("need omega_h > omega_c > 0")
        if self.omega_w is None:
            object.__setattr__(self, "omega_w", self.omega_h - self.omega_c)
        if abs(self.omega_w - (self.omega_h - self.omega_c)) > 1e-12 * self.omega_h:
            raise FrequencyMismatch("omega_w must equal omega_h - omega_c")
        if not (self.hot.temperature >= self.cold.temperature > 0):
            raise DomainError("need T_h >= T_c > 0")


def _transition(n, i, j, g):
    S = np.zeros((n, n), complex)
    S[i, j] = S[j, i] = g
    return S


def build_tricycle(spec):
    """Hamiltonian and the three coupling channels of a tricycle."""
    H = np.diag([0.0, spec.omega_c, spec.omega_h]).astype(complex)
    gh, gc, gw = spec.couplings
    channels = [
        CouplingChannel(_transition(3, 0, 2, gh), spec.hot, "hot"),
        CouplingChannel(_transition(3, 0, 1, gc), spec.cold, "cold"),
        CouplingChannel(_transition(3, 1, 2, gw), spec.work, "work"),
    ]
    return H, channels


def build_driven_tls(omega0, g, Omega):
    """Circularly driven TLS ``(omega0/2) sz + g (cos(Omega t) sx + sin(Omega t) sy)``."""
    if not (Omega > 0 and g >= 0):
        raise DomainError("need Omega > 0 and g >= 0")
    sx, sy, sz = ops.pauli()

    def H(t):
        return 0.5 * omega0 * sz + g * (math.cos(Omega * t) * sx + math.sin(Omega * t) * sy)

    def dH(t):
        return g * Omega * (-math.sin(Omega * t) * sx + math.cos(Omega * t) * sy)

    return PeriodicHamiltonian(H, 2 * math.pi / Omega, dH)


SCHEDULES = {
    "linear": lambda s: s,
    "smooth": lambda s: math.sin(0.5 * math.pi * s) ** 2,
}


@dataclass(frozen=True)
class OttoSpec:
    """Four-stroke cycle of a TLS (``medium="tls"``) or truncated oscillator.

    The TLS medium is ``diag(0, w) + (transverse/2) sigma_x``, so endpoint
    Hamiltonians do not commute when ``transverse != 0``. Durations are
    ``(hot isochore, ramp h->c, cold isochore, ramp c->h)``.
    """

    omega_h: float = 4.0
    omega_c: float = 1.0
    hot: Bath = None
    cold: Bath = None
    durations: tuple = (10.0, 1.0, 10.0, 1.0)
    transverse: float = 0.2
    schedule: str = "linear"
    medium: str = "tls"
    n_max: int = 6

    def __post_init__(self):
        if not self.omega_h > self.omega_c > 0:
            raise DomainError("need omega_h > omega_c > 0")
        if len(self.durations) != 4 or any(d < 0 for d in self.durations):
            raise DomainError("need four non-negative durations")
        if self.durations[0] <= 0 or self.durations[2] <= 0:
            raise DomainError("isochore durations must be positive")
        if self.schedule not in SCHEDULES:
            raise DomainError(f"unknown schedule {self.schedule!r}")
        if self.medium not in ("tls", "oscillator"):
            raise DomainError(f"unknown medium {self.medium!r}")

    def hamiltonian(self, w):
        if self.medium == "tls":
            sx, _, _ = ops.pauli()
            return np.diag([0.0, w]).astype(complex) + 0.5 * self.transverse * sx
        return build_oscillator(w, self.n_max)[0]

    def coupling(self):
        if self.medium == "tls":
            return ops.pauli()[0]
        return build_oscillator(1.0, self.n_max)[1]

    def ramp(self, w_from, w_to, duration):
        f = SCHEDULES[self.schedule]
        if duration == 0:
            return lambda s: self.hamiltonian(w_to)
        return lambda s: self.hamiltonian(w_from + (w_to - w_from) * f(min(max(s / duration, 0.0), 1.0)))

    def gap(self, w):
        e = np.linalg.eigvalsh(self.hamiltonian(w))
        return e[1] - e[0]


@dataclass
class OttoCycle:
    spec: OttoSpec
    maps: list
    H_h: np.ndarray
    H_c: np.ndarray

    @property
    def cycle_map(self):
        return compose(self.maps)

    def strokes(self, rho):
        """States after each of the four segments starting from ``rho``."""
        out = [rho]
        for m in self.maps:
            out.append(m.apply(out[-1]))
        return out

    def cycle_ledger(self, rho):
        """``(Q_h, Q_c, W)`` for one cycle started at ``rho``, as energy into the medium."""
        r0, r1, r2, r3, r4 = self.strokes(rho)
        E = ops.expectation
        Q_h = E(r1, self.H_h) - E(r0, self.H_h)
        W1 = E(r2, self.H_c) - E(r1, self.H_h)
        Q_c = E(r3, self.H_c) - E(r2, self.H_c)
        W2 = E(r4, self.H_h) - E(r3, self.H_c)
        return Q_h, Q_c, W1 + W2

    def limit_cycle(self, rho0, max_iters=1000, tol=1e-10):
        return iterate_to_limit_cycle(self.cycle_map, rho0, max_iters, tol)

    def cycle_table(self, rho0, n_cycles, reference=None):
        """Rows ``(cycle, Q_h, Q_c, W, efficiency, trace distance to the fixed point)``.

        ``efficiency`` is ``-W/Q_h`` when the cycle delivers work and the
        coefficient of performance ``Q_c/W`` when it extracts heat from the
        cold bath; otherwise NaN.
        """
        if reference is None:
            reference = self.limit_cycle(rho0).state
        rows = []
        rho = np.array(rho0, complex)
        for n in range(1, n_cycles + 1):
            Q_h, Q_c, W = self.cycle_ledger(rho)
            rows.append((n, Q_h, Q_c, W, otto_efficiency(Q_h, Q_c, W),
                         ops.trace_distance(rho, reference)))
            rho = self.cycle_map.apply(rho)
        return rows

    def write_table(self, path, rows):
        header = ["cycle", "Q_h [energy]", "Q_c [energy]", "W [energy]", "efficiency [1]",
                  "trace_distance_to_fixed_point [1]"]
        return write_table(path, header, rows)


def otto_efficiency(Q_h, Q_c, W):
    if W < 0 and Q_h > 0:
        return -W / Q_h
    if Q_c > 0 and W > 0:
        return Q_c / W
    return float("nan")


def build_otto_cycle(spec, substeps=64, tol=1e-8):
    """Segment maps in application order: hot isochore, ramp h->c, cold isochore, ramp c->h."""
    if spec.hot is None or spec.cold is None:
        raise DomainError("an Otto cycle needs hot and cold baths")
    H_h, H_c = spec.hamiltonian(spec.omega_h), spec.hamiltonian(spec.omega_c)
    S = spec.coupling()
    gen_h = build_generator(H_h, [CouplingChannel(S, spec.hot, "hot")])
    gen_c = build_generator(H_c, [CouplingChannel(S, spec.cold, "cold")])
    t_h, t_hc, t_c, t_ch = spec.durations
    maps = [
        segment_map("thermal", gen_h, t_h, label="hot isochore"),
        segment_map("unitary_ramp", duration=t_hc, hamiltonian=spec.ramp(spec.omega_h, spec.omega_c, t_hc),
                    substeps=substeps, tol=tol, label="ramp h->c"),
        segment_map("thermal", gen_c, t_c, label="cold isochore"),
        segment_map("unitary_ramp", duration=t_ch, hamiltonian=spec.ramp(spec.omega_c, spec.omega_h, t_ch),
                    substeps=substeps, tol=tol, label="ramp c->h"),
    ]
    return OttoCycle(spec, maps, H_h, H_c)


def otto_initial_state(cycle):
    """Gibbs state of the cold-end Hamiltonian (a convenient starting point)."""
    return gibbs_state(cycle.H_c, cycle.spec.cold.temperature)
