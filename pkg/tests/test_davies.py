import math

import numpy as np
import pytest

from qthermo import davies
from qthermo import operators as ops
from qthermo.baths import HarmonicField
from qthermo.davies import CouplingChannel, build_generator, gibbs_state
from qthermo.devices import build_oscillator, build_tls
from qthermo.errors import DomainError, MissingSpectralValue


def tls_generator(T=1.0, omega0=1.0, **bath_kw):
    H, S = build_tls(omega0)
    return build_generator(H, [CouplingChannel(S, HarmonicField(temperature=T, **bath_kw), "b")])


def random_system(rng, n=5):
    H = np.diag(np.sort(rng.uniform(0, 3, n))).astype(complex)
    V = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))[0]
    return V @ H @ V.conj().T, ops.random_hermitian(n, rng)


def test_tls_jump_operator_is_lowering(paulis):
    sx, _, _ = paulis
    terms = davies.bohr_jump_operators(sx, ops.eigendecompose(np.diag([0.0, 1.0])))
    assert [w for w, _ in terms] == [1.0]
    np.testing.assert_allclose(terms[0][1], [[0, 1], [0, 0]])


def test_commuting_coupling_is_single_zero_term():
    H = np.diag([0.0, 1.0, 3.0])
    S = np.diag([2.0, -1.0, 0.5])
    terms = davies.bohr_jump_operators(S, ops.eigendecompose(H))
    assert len(terms) == 1 and terms[0][0] == 0.0
    np.testing.assert_allclose(terms[0][1], S)


def test_eigenoperator_property_and_completeness(rng):
    for _ in range(5):
        H, S = random_system(rng)
        terms = davies.bohr_jump_operators(S, ops.eigendecompose(H))
        total = np.zeros_like(S)
        for w, A in terms:
            np.testing.assert_allclose(H @ A - A @ H, -w * A, atol=1e-9)
            total = total + A + (A.conj().T if w > 0 else 0)
        np.testing.assert_allclose(total, S, atol=1e-10)


def test_tls_kms_pair():
    gen = tls_generator(T=1.0)
    assert len(gen.terms) == 1
    term = gen.terms[0]
    assert term.omega == 1.0
    assert term.gamma_up == pytest.approx(math.exp(-1) * term.gamma_down, rel=1e-14)


def test_zero_temperature_pure_decay():
    assert tls_generator(T=0.0).terms[0].gamma_up == 0.0


def test_three_level_three_channels():
    H = np.diag([0.0, 1.0, 2.5])
    channels = []
    for k, (i, j) in enumerate([(0, 1), (0, 2), (1, 2)]):
        S = np.zeros((3, 3))
        S[i, j] = S[j, i] = 1.0
        channels.append(CouplingChannel(S, HarmonicField(temperature=0.5 + k), f"b{k}"))
    gen = build_generator(H, channels)
    got = sorted((t.bath_id, t.omega) for t in gen.terms)
    assert got == [("b0", 1.0), ("b1", 2.5), ("b2", 1.5)]
    for t in gen.terms:
        assert np.count_nonzero(np.abs(t.op) > 1e-14) == 1


@pytest.mark.parametrize("builder", [
    lambda: build_tls(1.0),
    lambda: (np.diag([0.0, 1.0, 2.5]).astype(complex), np.ones((3, 3), complex)),
    lambda: build_oscillator(1.0, 6),
])
@pytest.mark.parametrize("T", [0.3, 1.0, 4.0])
def test_gibbs_is_stationary(builder, T):
    H, S = builder()
    gen = build_generator(H, [CouplingChannel(S, HarmonicField(temperature=T), "b")])
    rho = gibbs_state(H, T)
    np.testing.assert_allclose(gen.apply(rho), 0, atol=1e-10)
    assert ops.expectation(rho, gen.apply_heisenberg(H)) == pytest.approx(0, abs=1e-12)


def test_excited_decay_rate():
    gen = tls_generator(T=0.0)
    drho = gen.apply(np.diag([0.0, 1.0]))
    assert drho[1, 1].real == pytest.approx(-gen.terms[0].gamma_down, rel=1e-14)


def test_trace_preservation_and_unitality(rng):
    H, S = random_system(rng, 4)
    gen = build_generator(H, [CouplingChannel(S, HarmonicField(temperature=0.7), "b")])
    for _ in range(10):
        assert abs(np.trace(gen.apply(ops.random_density(4, rng)))) < 1e-12
    np.testing.assert_allclose(gen.apply_heisenberg(np.eye(4)), 0, atol=1e-12)


def test_schrodinger_heisenberg_duality(rng):
    H, S = random_system(rng, 4)
    gen = build_generator(H, [CouplingChannel(S, HarmonicField(temperature=1.3), "b")])
    rho, O = ops.random_density(4, rng), ops.random_hermitian(4, rng)
    assert np.trace(O @ gen.apply(rho)) == pytest.approx(np.trace(rho @ gen.apply_heisenberg(O)),
                                                         abs=1e-12)


def test_superoperator_matches_apply(rng):
    H, S = random_system(rng, 3)
    gen = build_generator(H, [CouplingChannel(S, HarmonicField(temperature=2.0), "b")])
    rho = ops.random_density(3, rng)
    np.testing.assert_allclose(ops.devectorize(gen.superoperator() @ ops.vectorize(rho)),
                               gen.apply(rho), atol=1e-12)


def test_dissipator_commutes_with_free_evolution(rng):
    H, S = random_system(rng, 4)
    gen = build_generator(H, [CouplingChannel(S, HarmonicField(temperature=0.8), "b")])
    rho = ops.random_density(4, rng)
    U = ops.hermitian_propagator(H, 0.73)
    lhs = gen.apply_dissipator(U @ rho @ U.conj().T)
    rhs = U @ gen.apply_dissipator(rho) @ U.conj().T
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_output_hermitian(rng):
    H, S = random_system(rng, 4)
    gen = build_generator(H, [CouplingChannel(S, HarmonicField(temperature=0.8), "b")])
    out = gen.apply(ops.random_density(4, rng))
    np.testing.assert_allclose(out, out.conj().T, atol=1e-10)


def test_missing_spectral_value():
    H, S = build_tls(10.0)
    with pytest.raises(MissingSpectralValue):
        build_generator(H, [CouplingChannel(S, HarmonicField(temperature=1.0, cutoff=5.0), "b")])


@pytest.mark.parametrize("T, expected", [(1.0, (0.73106, 0.26894)), (1e6, (0.5, 0.5))])
def test_gibbs_tls(T, expected):
    p = np.real(np.diag(gibbs_state(np.diag([0.0, 1.0]), T)))
    np.testing.assert_allclose(p, expected, atol=1e-5 if T == 1.0 else 1e-6)


def test_gibbs_three_level():
    p = np.real(np.diag(gibbs_state(np.diag([0.0, 1.0, 2.0]), 1.0)))
    w = np.exp(-np.arange(3.0))
    np.testing.assert_allclose(p, w / w.sum(), rtol=1e-13)


def test_gibbs_rejects_zero_temperature():
    with pytest.raises(DomainError):
        gibbs_state(np.diag([0.0, 1.0]), 0.0)


def test_lgks_generator_has_no_thermal_provenance():
    gen = davies.lindblad_generator(np.diag([0.0, 1.0]), [np.array([[0, 1], [0, 0]])])
    assert gen.provenance == "lgks"
