import numpy as np
import pytest

from qbsim.bdg import build_bloch, build_real_space
from qbsim.errors import GapClosedError, NonDiagonalizableError, ValidationError
from qbsim.model import CouplingTerm, QbsModel, build_preset
from qbsim.topology import (
    band_windings,
    bogoliubov_diagonalize,
    obc_pbc_spectra,
    skin_metrics,
    winding_number,
)

from test_bdg import match_multisets


def imag_chain(n, t, delta, boundary="obc", mu=0.0):
    """Chain with purely imaginary couplings i t a_{j+1}^dag a_j + i D ..."""
    model = build_preset(
        "bkc", n=n, J=t / 2, kappa=delta / 2,
        phi_J=-np.pi / 2, phi_kappa=np.pi / 2, boundary=boundary,
    )
    if mu:
        terms = list(model.terms)
        terms += [CouplingTerm.make("onsite", j, j, mu) for j in range(n)]
        model = QbsModel(n, tuple(terms), model.boundary, model.unit_cell)
    return model


def brute_det_winding(bloch, e_ref, n_grid=100000):
    qs = 2 * np.pi * np.arange(n_grid) / n_grid
    dets = np.linalg.det(bloch.stack(qs) - e_ref * np.eye(2 * bloch.n_cell)[None])
    steps = np.diff(np.concatenate([np.angle(dets), np.angle(dets[:1])]))
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    return steps.sum() / (2 * np.pi)


class TestWindingNumber:
    def test_hermitian_ring_zero(self):
        bloch = build_bloch(build_preset("bkc", n=8, J=1.0, kappa=0.0, boundary="pbc"))
        res = winding_number(bloch, 0.5j)
        assert res.winding == 0 and res.reliable

    def test_chain_determinant_winding_matches_brute_force(self):
        # the two counter-propagating bands cancel: the doubled determinant
        # carries zero winding at the origin, fixed here by the 1e5-point
        # phase-accumulation oracle
        bloch = build_bloch(imag_chain(12, 1.0, 0.7, boundary="pbc"))
        brute = brute_det_winding(bloch, 0.0)
        assert brute == pytest.approx(0.0, abs=1e-9)
        res = winding_number(bloch, 0.0, n_grid=4096)
        assert res.winding == 0
        assert winding_number(bloch, 0.0, n_grid=8192).winding == res.winding

    def test_grid_stability(self, rng):
        bloch = build_bloch(imag_chain(10, 1.0, 0.4, boundary="pbc", mu=0.2))
        for e_ref in (0.2j, 0.1 + 0.2j):
            w1 = winding_number(bloch, e_ref, n_grid=512)
            w2 = winding_number(bloch, e_ref, n_grid=1024)
            assert w1.winding == w2.winding

    def test_constant_on_gap_component(self):
        bloch = build_bloch(imag_chain(10, 1.0, 0.7, boundary="pbc"))
        # walk a short path inside one gap component
        values = [winding_number(bloch, 0.05j + 0.03j * k).winding for k in range(5)]
        assert len(set(values)) == 1

    def test_on_gap_error(self):
        bloch = build_bloch(
            build_preset("squeezed-ssh", cells=4, t1=1.0, t2=1.5, g1=0.0, g2=0.5)
        )
        with pytest.raises(GapClosedError):
            winding_number(bloch, 0.0, n_grid=512)


class TestBandWindings:
    def test_chain_band_loops(self):
        bloch = build_bloch(imag_chain(12, 1.0, 0.7, boundary="pbc"))
        loops = band_windings(bloch, 0.0, n_grid=512)
        assert sorted(l.winding for l in loops) == [-1, 1]
        assert all(l.phase_residual < 1e-9 for l in loops)

    def test_ssh_window_step_function(self):
        hits = {}
        for g2 in (0.25, 0.75, 1.5, 2.25, 2.75):
            model = build_preset("squeezed-ssh", cells=4, t1=1.0, t2=1.5,
                                 g1=0.0, g2=g2)
            loops = band_windings(build_bloch(model), 0.0, n_grid=512)
            loops2 = band_windings(build_bloch(model), 0.0, n_grid=1024)
            top = max(abs(l.winding) for l in loops)
            assert top == max(abs(l.winding) for l in loops2)   # grid-stable
            hits[g2] = top
        assert hits == {0.25: 0, 0.75: 1, 1.5: 1, 2.25: 1, 2.75: 0}

    def test_window_loops_are_double_cover(self):
        model = build_preset("squeezed-ssh", cells=4, t1=1.0, t2=1.5, g1=0.0, g2=1.5)
        loops = band_windings(build_bloch(model), 0.0, n_grid=512)
        assert sorted((l.traversals, l.winding) for l in loops) == [(2, -1), (2, 1)]

    def test_loop_windings_sum_to_determinant_winding(self):
        bloch = build_bloch(imag_chain(8, 1.0, 0.5, boundary="pbc", mu=0.15))
        for e_ref in (0.25j, 0.4 + 0.1j):
            det_w = winding_number(bloch, e_ref, n_grid=2048).winding
            loops = band_windings(bloch, e_ref, n_grid=2048)
            assert sum(l.winding for l in loops) == det_w


class TestObcPbcSpectra:
    def test_chain_real_line_inside_ellipse(self):
        spectra = obc_pbc_spectra(imag_chain(60, 1.0, 0.7, boundary="pbc"), n_grid=256)
        assert spectra.max_imag_obc < 1e-10
        # the ring spectrum fills the ellipse (Re/t)^2 + (Im/Delta)^2 = 1
        resid = (spectra.pbc.real / 1.0) ** 2 + (spectra.pbc.imag / 0.7) ** 2 - 1.0
        assert np.abs(resid).max() < 1e-10
        assert spectra.pbc_encloses_obc

    def test_hermitian_limit_no_enclosure(self):
        spectra = obc_pbc_spectra(imag_chain(40, 1.0, 0.0, boundary="pbc"))
        assert spectra.max_imag_obc < 1e-10
        assert np.abs(spectra.pbc.imag).max() < 1e-10
        assert not spectra.pbc_encloses_obc

    def test_near_critical_extents(self):
        # closed-form extents at t=1, Delta=0.999
        t, delta = 1.0, 0.999
        spectra = obc_pbc_spectra(imag_chain(40, t, delta, boundary="pbc"))
        obc_extent = np.abs(spectra.obc.real).max()
        # finite chain: sqrt(t^2-D^2) cos(pi/(N+1))
        ref = np.sqrt(t**2 - delta**2) * np.cos(np.pi / 41)
        assert obc_extent == pytest.approx(ref, rel=1e-9)
        assert np.abs(spectra.pbc.real).max() == pytest.approx(t, rel=1e-12)


class TestBogoliubov:
    def test_hermitian_dimer_has_no_mixing(self):
        tr = bogoliubov_diagonalize(
            build_real_space(build_preset("two-mode-bkc", J=1.0, kappa=0.0))
        )
        assert np.abs(tr.v).max() < 1e-12
        np.testing.assert_allclose(tr.u.conj().T @ tr.u, np.eye(2), atol=1e-12)
        assert tr.canonical

    def test_two_mode_residual(self):
        tr = bogoliubov_diagonalize(
            build_real_space(build_preset("two-mode-bkc", J=1.0, kappa=0.5))
        )
        assert tr.residual < 1e-10
        assert match_multisets(
            tr.values, np.array([np.sqrt(0.75), -np.sqrt(0.75)])
        ) < 1e-12

    def test_para_unitarity_for_positive_definite_form(self):
        tr = bogoliubov_diagonalize(
            build_real_space(
                build_preset("two-mode-squeeze-detuned", delta=1.0, kappa=0.4)
            )
        )
        assert (tr.signature == 1.0).all()
        assert tr.para_unitarity_defect() < 1e-10

    def test_ep_fails_loudly(self):
        with pytest.raises(NonDiagonalizableError):
            bogoliubov_diagonalize(
                build_real_space(build_preset("two-mode-bkc", J=1.0, kappa=1.0))
            )
        with pytest.raises(NonDiagonalizableError) as err:
            bogoliubov_diagonalize(
                build_real_space(build_preset("bkc", n=7, J=1.0, kappa=1.0))
            )
        assert err.value.cluster_report is not None

    def test_damped_rejected(self):
        with pytest.raises(ValidationError):
            bogoliubov_diagonalize(
                build_real_space(build_preset("two-mode-bkc", J=1.0, kappa=0.2,
                                              gamma=0.3))
            )

    def test_residual_randomized_stable_models(self, rng):
        count = 0
        while count < 20:
            J = float(rng.uniform(0.5, 1.5))
            kap = float(rng.uniform(0.0, 0.8)) * J
            n = int(rng.integers(2, 9))
            tr = bogoliubov_diagonalize(
                build_real_space(build_preset("bkc", n=n, J=J, kappa=kap))
            )
            assert tr.residual < 1e-9
            count += 1

    def test_unstable_pairs_not_canonical(self):
        tr = bogoliubov_diagonalize(
            build_real_space(build_preset("two-mode-bkc", J=1.0, kappa=1.3))
        )
        assert not tr.canonical
        assert np.abs(tr.values.real).max() < 1e-10
        assert (tr.values.imag > 0).all()   # Im > 0 branch selection


class TestSkinMetrics:
    def test_extended_states_score_the_edge_fraction(self):
        tr = bogoliubov_diagonalize(
            build_real_space(build_preset("bkc", n=50, J=0.5, kappa=0.0))
        )
        metrics = skin_metrics(tr, 0.1)
        assert metrics.mean_edge_weight == pytest.approx(0.2, abs=0.05)
        assert 1 / 50 <= metrics.ipr.min() <= metrics.ipr.max() <= 1.0

    def test_profiles_are_normalized(self):
        tr = bogoliubov_diagonalize(build_real_space(imag_chain(30, 1.0, 0.7)))
        metrics = skin_metrics(tr, 0.2)
        np.testing.assert_allclose(metrics.profiles.sum(axis=1), 1.0, atol=1e-12)

    def test_single_mode_ipr_is_one(self):
        model = QbsModel(1, (CouplingTerm.make("onsite", 0, 0, 0.7),))
        tr = bogoliubov_diagonalize(build_real_space(model))
        assert skin_metrics(tr, 0.4).ipr == pytest.approx(1.0)

    def test_unperturbed_chain_is_maximally_skinned(self):
        # the open chain with unequal effective hoppings localizes every mode
        # within ~1/ln sqrt((t+D)/(t-D)) sites of an edge
        tr = bogoliubov_diagonalize(build_real_space(imag_chain(50, 1.0, 0.7)))
        metrics = skin_metrics(tr, 0.1)
        assert metrics.mean_edge_weight > 0.99

    def test_perturbation_delocalizes_and_makes_modes_bilocal(self):
        # measured behavior of the perturbed chain: total edge mass drops
        # with mu while single modes acquire weight at both ends
        base = skin_metrics(
            bogoliubov_diagonalize(build_real_space(imag_chain(50, 1.0, 0.7))), 0.1
        )
        ne = 5
        results = {}
        for mu in (0.01, 0.1):
            tr = bogoliubov_diagonalize(
                build_real_space(imag_chain(50, 1.0, 0.7, mu=mu))
            )
            m = skin_metrics(tr, 0.1)
            left = m.profiles[:, :ne].sum(axis=1)
            right = m.profiles[:, -ne:].sum(axis=1)
            results[mu] = (m.mean_edge_weight, np.minimum(left, right).mean())
        assert results[0.01][0] < base.mean_edge_weight
        assert results[0.1][0] < results[0.01][0]
        # bilocality appears only with the perturbation
        base_left = base.profiles[:, :ne].sum(axis=1)
        base_right = base.profiles[:, -ne:].sum(axis=1)
        assert np.minimum(base_left, base_right).mean() < results[0.01][1] + 0.2

    def test_edge_fraction_bounds(self):
        tr = bogoliubov_diagonalize(build_real_space(imag_chain(10, 1.0, 0.5)))
        with pytest.raises(ValidationError):
            skin_metrics(tr, 0.0)
        with pytest.raises(ValidationError):
            skin_metrics(tr, 0.6)
