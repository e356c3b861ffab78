import math
import numpy as np
import pytest

from qthermo import floquet
from qthermo import operators as ops
from qthermo.baths import HarmonicField
from qthermo.davies import CouplingChannel, bohr_jump_operators, build_generator, gibbs_state
from qthermo.devices import build_driven_tls
from qthermo.dynamics import steady_state
from qthermo.errors import TruncationError
from qthermo.ledger import entropy_production, floquet_currents, heat_currents


def static_periodic(H, period=2 * math.pi / 3):
    H = np.asarray(H, complex)
    return floquet.PeriodicHamiltonian(lambda t: H, period, lambda t: np.zeros_like(H))


def rotating_frame_quasi_energies(omega0, g, Omega):
    """Closed form for the circular drive: U(t) = R(t) exp(-i H_rot t) with R(tau) = -1."""
    r = 0.5 * math.sqrt((omega0 - Omega) ** 2 + 4 * g * g)
    return np.sort(floquet.fold(np.array([-r, r]) + 0.5 * Omega, Omega))


def floquet_superop_vs_davies(g, omega0=1.0, Omega=3.0, T=1.0):
    """Max deviation of the two generators, each written in its own eigenbasis."""
    sx, _, sz = ops.pauli()
    ph = build_driven_tls(omega0, g, Omega)
    bath = HarmonicField(temperature=T)
    fgen = floquet.build_floquet_generator(ph, [CouplingChannel(sx, bath, "b")])
    dgen = build_generator(0.5 * omega0 * sz, [CouplingChannel(sx, bath, "b")])
    F = fgen.in_basis(fgen.basis.vectors).superoperator()
    D = dgen.in_basis(np.linalg.eigh(dgen.hamiltonian)[1]).superoperator()
    return np.max(np.abs(F - D))


def test_fold_zone():
    np.testing.assert_allclose(floquet.fold([0.5, 1.5, -0.5, 2.6], 1.0), [0.5, 0.5, 0.5, -0.4])


def test_driven_tls_is_periodic():
    assert build_driven_tls(1.0, 0.3, 1.7).is_periodic()


def test_static_monodromy_is_free_propagator():
    H = np.diag([-0.4, 0.3, 1.1])
    ph = static_periodic(H)
    basis = floquet.compute_monodromy(ph)
    np.testing.assert_allclose(basis.monodromy, ops.hermitian_propagator(H, ph.period), atol=1e-9)
    np.testing.assert_allclose(basis.quasi_energies, [-0.4, 0.3, 1.1], atol=1e-9)


@pytest.mark.parametrize("omega0, g, Omega", [(1.0, 0.05, 1.0), (1.0, 0.2, 1.0), (1.3, 0.1, 1.0),
                                               (0.8, 0.3, 2.5)])
def test_quasi_energies_match_rotating_frame(omega0, g, Omega):
    basis = floquet.compute_monodromy(build_driven_tls(omega0, g, Omega))
    np.testing.assert_allclose(basis.quasi_energies,
                               rotating_frame_quasi_energies(omega0, g, Omega), atol=1e-7)


def test_resonance_splitting_is_2g():
    g, Omega = 0.05, 1.0
    eps = floquet.compute_monodromy(build_driven_tls(1.0, g, Omega)).quasi_energies
    split = abs(eps[1] - eps[0]) % Omega
    assert min(split, Omega - split) == pytest.approx(2 * g, abs=1e-7)


def test_monodromy_unitary_and_eigenphases():
    basis = floquet.compute_monodromy(build_driven_tls(1.0, 0.4, 1.3))
    U = basis.monodromy
    np.testing.assert_allclose(U.conj().T @ U, np.eye(2), atol=1e-9)
    V, eps = basis.vectors, basis.quasi_energies
    np.testing.assert_allclose(U @ V, V * np.exp(-1j * eps * basis.period), atol=1e-9)


def test_monodromy_stable_under_refinement():
    ph = build_driven_tls(1.0, 0.4, 1.3)
    a = floquet.compute_monodromy(ph, substeps=64).monodromy
    b = floquet.compute_monodromy(ph, substeps=512).monodromy
    assert np.max(np.abs(a - b)) < 1e-8


def test_floquet_modes_are_periodic():
    basis = floquet.compute_monodromy(build_driven_tls(1.0, 0.4, 1.3))
    for t in (0.3, 1.1):
        np.testing.assert_allclose(basis.floquet_modes(t + basis.period), basis.floquet_modes(t),
                                   atol=1e-8)


def test_static_jump_operators_reduce_to_bohr():
    H = np.diag([-0.5, 0.1, 0.9])
    S = np.array([[0, 1, 0.5], [1, 0, 1], [0.5, 1, 0]], complex)
    ph = static_periodic(H)
    js = floquet.floquet_jump_operators(S, ph, floquet.compute_monodromy(ph), q_max=1)
    assert {c.harmonic for c in js.components} == {0}
    ref = {round(w, 9): A for w, A in bohr_jump_operators(S, ops.eigendecompose(H))}
    for c in js.components:
        if c.bohr > 0:
            np.testing.assert_allclose(c.op, ref[round(c.bohr, 9)], atol=1e-9)


def test_driven_sidebands_and_reconstruction():
    sx, _, _ = ops.pauli()
    ph = build_driven_tls(1.0, 0.3, 1.7)
    basis = floquet.compute_monodromy(ph)
    js = floquet.floquet_jump_operators(sx, ph, basis)
    assert js.residual < 1e-7
    assert {-1, 1} <= {c.harmonic for c in js.components}
    for t in np.linspace(0, 2 * ph.period, 13):
        U = basis.propagator(t)
        np.testing.assert_allclose(js.reconstruct(t), U.conj().T @ sx @ U, atol=1e-7)


def test_explicit_qmax_too_small_raises():
    sx, _, _ = ops.pauli()
    ph = build_driven_tls(1.0, 0.8, 2.0)
    basis = floquet.compute_monodromy(ph)
    with pytest.raises(TruncationError) as info:
        floquet.floquet_jump_operators(sx, ph, basis, q_max=1)
    assert info.value.residual > 1e-7


def test_undriven_single_bath_relaxes_to_gibbs():
    sx, _, sz = ops.pauli()
    gen = floquet.build_floquet_generator(build_driven_tls(1.0, 0.0, 3.0),
                                          [CouplingChannel(sx, HarmonicField(temperature=0.7), "b")])
    np.testing.assert_allclose(steady_state(gen), gibbs_state(0.5 * sz, 0.7), atol=1e-9)


def test_driven_single_bath_produces_entropy():
    sx, _, _ = ops.pauli()
    gen = floquet.build_floquet_generator(build_driven_tls(1.0, 0.2, 1.1),
                                          [CouplingChannel(sx, HarmonicField(temperature=0.5), "b")])
    rho = steady_state(gen)
    assert entropy_production(rho, gen) > 1e-6
    assert floquet_currents(gen, rho)["b"] < -1e-10


def test_two_baths_no_drive_currents_cancel():
    sx, _, _ = ops.pauli()
    ch = [CouplingChannel(sx, HarmonicField(temperature=2.0), "h"),
          CouplingChannel(sx, HarmonicField(temperature=0.3), "c")]
    gen = floquet.build_floquet_generator(build_driven_tls(1.0, 0.0, 3.0), ch)
    J = floquet_currents(gen, steady_state(gen))
    assert abs(sum(J.values())) < 1e-9
    assert J["h"] > 0


def test_flux_currents_equal_literal_currents_without_drive():
    sx, _, _ = ops.pauli()
    ch = [CouplingChannel(sx, HarmonicField(temperature=2.0), "h"),
          CouplingChannel(sx, HarmonicField(temperature=0.3), "c")]
    gen = floquet.build_floquet_generator(build_driven_tls(1.0, 0.0, 3.0), ch)
    rho = ops.random_density(2, np.random.default_rng(3))
    flux, literal = floquet_currents(gen, rho), heat_currents(gen, rho)
    for b in flux:
        assert flux[b] == pytest.approx(literal[b], abs=1e-9)


def test_weak_drive_reduces_to_davies():
    assert floquet_superop_vs_davies(1e-4) < 1e-6


def test_colliding_components_merge_like_davies():
    # levels -0.5, 0.5, 0.7, 1.7 with Omega = 2: the two 1.2 transitions fold to different
    # quasi-Bohr frequencies (1.2 at q = 0 and -0.8 at q = 1) that share nu = 1.2
    H = np.diag([-0.5, 0.5, 0.7, 1.7])
    S = np.zeros((4, 4), complex)
    S[0, 2] = S[2, 0] = 1.0
    S[1, 3] = S[3, 1] = 0.6
    ph = static_periodic(H, period=math.pi)
    bath = HarmonicField(temperature=0.8)
    with pytest.warns(floquet.FloquetCollisionWarning):
        fgen = floquet.build_floquet_generator(ph, [CouplingChannel(S, bath, "b")])
    dgen = build_generator(H, [CouplingChannel(S, bath, "b")])
    assert [t.omega for t in fgen.terms] == pytest.approx([1.2])
    rho = ops.random_density(4, np.random.default_rng(1))
    np.testing.assert_allclose(fgen.apply_dissipator(rho), dgen.apply_dissipator(rho), atol=1e-9)


def test_rotation_identity_at_zero_and_static_invariance():
    sx, _, sz = ops.pauli()
    bath = HarmonicField(temperature=1.0)
    ph = build_driven_tls(1.0, 0.3, 1.7)
    gen = floquet.build_floquet_generator(ph, [CouplingChannel(sx, bath, "b")])
    L0 = floquet.rotate_to_schrodinger(gen, ph, 0.0)
    for a, b in zip(L0.terms, gen.terms):
        np.testing.assert_allclose(a.op, b.op, atol=1e-12)
    np.testing.assert_allclose(
        floquet.rotate_to_schrodinger(gen, ph, 0.4 + ph.period).superoperator(),
        floquet.rotate_to_schrodinger(gen, ph, 0.4).superoperator(), atol=1e-8)

    sph = static_periodic(0.5 * sz)
    sgen = floquet.build_floquet_generator(sph, [CouplingChannel(sx, bath, "b")])
    ref = floquet.rotate_to_schrodinger(sgen, sph, 0.0).superoperator()
    for t in (0.3, 1.0, 1.9):
        np.testing.assert_allclose(floquet.rotate_to_schrodinger(sgen, sph, t).superoperator(), ref,
                                   atol=1e-10)


def test_steady_orbit_is_periodic():
    sx, _, _ = ops.pauli()
    ph = build_driven_tls(1.0, 0.3, 1.7)
    gen = floquet.build_floquet_generator(ph, [CouplingChannel(sx, HarmonicField(temperature=1.0), "b")])
    driven = floquet.DrivenGenerator(gen)
    rho = steady_state(gen)
    np.testing.assert_allclose(driven.steady_orbit(rho, ph.period), rho, atol=1e-8)
    mid = driven.steady_orbit(rho, 0.37)
    np.testing.assert_allclose(driven.rhs(0.37, mid),
                               (driven.steady_orbit(rho, 0.37 + 1e-5)
                                - driven.steady_orbit(rho, 0.37 - 1e-5)) / 2e-5, atol=1e-6)
