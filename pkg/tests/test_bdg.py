import numpy as np
import pytest

from qbsim.bdg import (
    Basis,
    build_bloch,
    build_real_space,
    from_quadrature,
    quadrature_transform,
    rotate_gauge,
    sample_momenta,
    strip_wrap_terms,
    symplectic_form,
    to_quadrature,
)
from qbsim.errors import ValidationError
from qbsim.model import CouplingTerm, QbsModel, build_preset

from conftest import random_model, random_ring_model


def ph_symmetry_defect(m):
    """|| tau_x conj(M) tau_x + M ||_max"""
    n = m.shape[0] // 2
    tau = np.zeros_like(m, dtype=float)
    tau[:n, n:] = np.eye(n)
    tau[n:, :n] = np.eye(n)
    return np.abs(tau @ m.conj() @ tau + m).max()


def match_multisets(a, b):
    """Max distance of the optimal pairing between two complex multisets."""
    from scipy.optimize import linear_sum_assignment

    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return cost[r, c].max()


class TestRealSpace:
    def test_two_mode_block_form(self):
        J, kap, pj, pk = 1.3, 0.7, 0.4, -1.1
        m = build_real_space(
            build_preset("two-mode-bkc", J=J, kappa=kap, phi_J=pj, phi_kappa=pk)
        )
        ej, ek = J * np.exp(1j * pj), kap * np.exp(1j * pk)
        ref = np.array(
            [
                [0, ej, 0, ek],
                [np.conj(ej), 0, ek, 0],
                [0, -np.conj(ek), 0, -np.conj(ej)],
                [-np.conj(ek), 0, -ej, 0],
            ]
        )
        np.testing.assert_allclose(m.data, ref, atol=1e-15)

    def test_onsite_only_is_diagonal(self):
        terms = tuple(CouplingTerm.make("onsite", j, j, 0.7) for j in range(3))
        m = build_real_space(QbsModel(3, terms))
        np.testing.assert_allclose(
            m.data, np.diag([0.7] * 3 + [-0.7] * 3), atol=1e-15
        )

    def test_single_mode_sms_commutator(self):
        # [a, (a^dag)^2] = 2 a^dag fixes the off-diagonal factor 2, checked by
        # hand algebra ahead of the build
        eta, phase = 0.45, 0.3
        m = build_real_space(QbsModel(1, (CouplingTerm.make("sms", 0, 0, eta, phase),)))
        c = eta * np.exp(1j * phase)
        ref = np.array([[0, 2 * c], [-2 * np.conj(c), 0]])
        np.testing.assert_allclose(m.data, ref, atol=1e-15)

    def test_damping_enters_both_diagonals(self):
        m = build_real_space(build_preset("two-mode-bkc", J=0.0, kappa=0.0, gamma=0.8))
        np.testing.assert_allclose(m.data, -0.4j * np.eye(4), atol=1e-15)
        assert m.has_damping

    def test_particle_hole_symmetry_randomized(self, rng):
        for _ in range(60):
            m = build_real_space(random_model(rng))
            assert ph_symmetry_defect(m.data) < 1e-12

    def test_damping_breaks_plus_minus_spectral_pairing(self):
        # the antiunitary relation survives damping (it reflects the spectrum
        # through the imaginary axis); what damping breaks is the pairing of
        # eigenvalues through zero
        m = build_real_space(build_preset("two-mode-bkc", J=1.0, kappa=0.2, gamma=0.5))
        ev = np.linalg.eigvals(m.data)
        assert match_multisets(ev, -ev) > 0.1


class TestBloch:
    def test_requires_pbc_and_covariance(self):
        with pytest.raises(ValidationError):
            build_bloch(build_preset("bkc", n=4, J=1.0, kappa=0.2))
        broken = QbsModel(
            4,
            (CouplingTerm.make("bs", 0, 1, 1.0),),
            "pbc",
            unit_cell=1,
        )
        with pytest.raises(ValidationError):
            build_bloch(broken)

    def test_periodicity(self, rng):
        bloch = build_bloch(random_ring_model(rng))
        for q in (0.0, 0.7, 2.0):
            np.testing.assert_allclose(bloch(q), bloch(q + 2 * np.pi), atol=1e-12)

    def test_chain_dispersion_closed_form(self):
        # purely-imaginary-hopping ring: branches t sin(phi) sin q +- i ...
        t, delta, phi = 1.0, 0.7, np.pi / 2
        model = build_preset(
            "bkc", n=24, J=t / 2, kappa=delta / 2,
            phi_J=-phi, phi_kappa=np.pi / 2, boundary="pbc",
        )
        bloch = build_bloch(model)
        for q in np.linspace(0, 2 * np.pi, 17):
            got = np.linalg.eigvals(bloch(q))
            ref = np.array(
                [
                    t * np.sin(phi) * np.sin(q) + 1j * delta * np.cos(q),
                    t * np.sin(phi) * np.sin(q) - 1j * delta * np.cos(q),
                ]
            )
            assert match_multisets(got, ref) < 1e-12

    def test_bs_only_ring_is_hermitian(self):
        model = build_preset("bkc", n=8, J=1.0, kappa=0.0, phi_J=0.7, boundary="pbc")
        bloch = build_bloch(model)
        for q in (0.0, 1.1, 3.9):
            m = bloch(q)
            ev = np.linalg.eigvals(m)
            assert np.abs(ev.imag).max() < 1e-12

    def test_squeezed_ssh_gap_closure_at_pi(self):
        model = build_preset("squeezed-ssh", cells=6, t1=1.0, t2=1.5, g1=0.0, g2=0.5)
        bloch = build_bloch(model)
        assert abs(np.linalg.det(bloch(np.pi))) < 1e-12

    def test_bloch_block_structure(self, rng):
        # damping-free evaluator blocks satisfy the doubled-basis relations
        # M22(q) = -conj(M11(-q)) and M21(q) = -conj(M12(-q))
        for _ in range(10):
            model = random_ring_model(rng)
            bloch = build_bloch(model)
            nc = bloch.n_cell
            for q in (0.0, 0.9, 2.7):
                mq, mneg = bloch(q), bloch(-q)
                np.testing.assert_allclose(
                    mq[nc:, nc:], -np.conj(mneg[:nc, :nc]), atol=1e-12
                )
                np.testing.assert_allclose(
                    mq[nc:, :nc], -np.conj(mneg[:nc, nc:]), atol=1e-12
                )

    def test_real_space_bloch_spectral_equality(self, rng):
        for _ in range(30):
            model = random_ring_model(rng)
            real_ev = np.linalg.eigvals(build_real_space(model).data)
            bloch = build_bloch(model)
            bloch_ev = np.concatenate(
                [np.linalg.eigvals(bloch(q)) for q in sample_momenta(model)]
            )
            assert match_multisets(real_ev, bloch_ev) < 1e-9

    def test_strip_wrap_terms(self):
        ring = build_preset("bkc", n=6, J=1.0, kappa=0.3, boundary="pbc")
        chain = strip_wrap_terms(ring)
        assert chain.boundary.value == "obc"
        assert len(chain.terms) == len(ring.terms) - 2
        assert all({t.site_j, t.site_k} != {0, 5} for t in chain.terms)


class TestQuadrature:
    def test_round_trip(self, rng):
        for _ in range(25):
            m = build_real_space(random_model(rng, with_damping=bool(rng.integers(2))))
            back = from_quadrature(to_quadrature(m))
            np.testing.assert_allclose(back.data, m.data, atol=1e-12)

    def test_drift_is_real(self, rng):
        for _ in range(10):
            k = to_quadrature(build_real_space(random_model(rng, with_damping=True)))
            assert k.data.dtype == np.float64
            assert k.basis is Basis.QUADRATURE

    def test_decoupling_at_equal_strengths(self):
        # equal beamsplitter/squeeze strengths with damping: dx1/dt loses its
        # p2 coefficient while dp2/dt keeps -2J on x1
        J, gamma = 0.6, 0.8
        k = to_quadrature(
            build_real_space(build_preset("two-mode-bkc", J=J, kappa=J, gamma=gamma))
        ).data
        assert abs(k[0, 3]) < 1e-14
        assert k[3, 0] == pytest.approx(-2 * J, abs=1e-12)
        assert k[0, 0] == pytest.approx(-gamma / 2, abs=1e-12)

    def test_bs_only_drift_is_rotation_generator(self):
        k = to_quadrature(
            build_real_space(build_preset("two-mode-bkc", J=0.9, kappa=0.0))
        ).data
        np.testing.assert_allclose(k + k.T, np.zeros_like(k), atol=1e-12)

    def test_chain_quadrature_chirality(self):
        # purely-imaginary couplings decouple x from p; at t = Delta the x of
        # a site is driven solely by its left neighbour with weight (t+D)/2
        t = delta = 0.9
        k = to_quadrature(
            build_real_space(
                build_preset("bkc", n=5, J=t / 2, kappa=delta / 2,
                             phi_J=-np.pi / 2, phi_kappa=np.pi / 2)
            )
        ).data
        x = [2 * j for j in range(5)]
        p = [2 * j + 1 for j in range(5)]
        # x couples only to x, p only to p
        assert np.abs(k[np.ix_(x, p)]).max() < 1e-14
        assert k[x[2], x[1]] == pytest.approx((t + delta) / 2)
        assert abs(k[x[2], x[3]]) < 1e-14
        assert k[p[2], p[3]] == pytest.approx(-(t + delta) / 2)
        assert abs(k[p[2], p[1]]) < 1e-14

    def test_rejects_wrong_basis(self):
        m = build_real_space(build_preset("two-mode-bkc", J=1.0, kappa=0.1))
        k = to_quadrature(m)
        with pytest.raises(ValidationError):
            to_quadrature(k)
        with pytest.raises(ValidationError):
            from_quadrature(m)


class TestGaugeRotation:
    def test_identity_and_periodicity(self, rng):
        k = to_quadrature(build_real_space(random_model(rng)))
        zero = rotate_gauge(k, np.zeros(k.n_modes))
        np.testing.assert_allclose(zero.data, k.data, atol=1e-15)
        full = rotate_gauge(k, np.full(k.n_modes, 2 * np.pi))
        np.testing.assert_allclose(full.data, k.data, atol=1e-12)

    def test_composition_adds_angles(self, rng):
        k = to_quadrature(build_real_space(random_model(rng)))
        a = rng.uniform(-1, 1, size=k.n_modes)
        b = rng.uniform(-1, 1, size=k.n_modes)
        once = rotate_gauge(rotate_gauge(k, a), b)
        both = rotate_gauge(k, a + b)
        np.testing.assert_allclose(once.data, both.data, atol=1e-12)

    def test_rotation_preserves_eigenvalues(self, rng):
        for _ in range(25):
            k = to_quadrature(build_real_space(random_model(rng)))
            angles = rng.uniform(-np.pi, np.pi, size=k.n_modes)
            ev0 = np.linalg.eigvals(k.data)
            ev1 = np.linalg.eigvals(rotate_gauge(k, angles).data)
            assert match_multisets(ev0, ev1) < 1e-10

    def test_quarter_turn_reverses_direction(self):
        J = 0.6
        k = to_quadrature(
            build_real_space(build_preset("two-mode-bkc", J=J, kappa=J, gamma=0.8))
        )
        rk = rotate_gauge(k, np.full(2, np.pi / 2)).data
        # x1 now driven by p2; p2 no longer driven by x1
        assert rk[0, 3] == pytest.approx(2 * J, abs=1e-12)
        assert abs(rk[3, 0]) < 1e-12

    def test_wrong_angle_count(self):
        k = to_quadrature(build_real_space(build_preset("two-mode-bkc", J=1, kappa=0)))
        with pytest.raises(ValidationError):
            rotate_gauge(k, [0.1])


def test_transform_matrices_are_consistent():
    lam = quadrature_transform(3)
    np.testing.assert_allclose(lam @ lam.conj().T, np.eye(6), atol=1e-15)
    om = symplectic_form(3)
    np.testing.assert_allclose(om @ om.T, np.eye(6), atol=1e-15)
    assert om[0, 1] == 1.0 and om[1, 0] == -1.0
