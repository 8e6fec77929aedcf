import math

import pytest

from qbsim.errors import ParseError, ValidationError
from qbsim.model import (
    Boundary,
    CouplingKind,
    CouplingTerm,
    QbsModel,
    build_preset,
    is_translation_covariant,
    load_model,
    save_model,
    shift_terms,
    validate,
)

from conftest import random_model


def term_multiset(model):
    return sorted(
        (t.kind.value, t.site_j, t.site_k, round(t.strength, 12), round(t.phase, 12))
        for t in model.terms
    )


class TestPresets:
    def test_smallest_chain_has_one_bond(self):
        model = build_preset("bkc", n=2, J=1.0, kappa=0.5)
        kinds = sorted(t.kind.value for t in model.terms)
        assert kinds == ["bs", "tms"]
        assert all(t.site_j == 0 and t.site_k == 1 for t in model.terms)

    def test_squeezed_ssh_structure(self):
        model = build_preset("squeezed-ssh", cells=4, t1=1.0, t2=1.5, g1=0.0, g2=0.5)
        assert model.n_modes == 8
        assert model.unit_cell == 2
        assert model.boundary is Boundary.PBC
        # g1 = 0 terms are absent entirely
        intra_tms = [t for t in model.terms
                     if t.kind is CouplingKind.TMS and t.site_k - t.site_j == 1
                     and t.site_j % 2 == 0]
        assert intra_tms == []
        # one t1 bond, one t2 bond, one g2 bond per cell
        assert sum(t.kind is CouplingKind.BS for t in model.terms) == 8
        assert sum(t.kind is CouplingKind.TMS for t in model.terms) == 4

    def test_detuned_pair_preset(self):
        model = build_preset("two-mode-squeeze-detuned", delta=1.0, kappa=0.95)
        onsite = [t for t in model.terms if t.kind is CouplingKind.ONSITE]
        tms = [t for t in model.terms if t.kind is CouplingKind.TMS]
        assert len(onsite) == 2 and all(t.strength == 1.0 for t in onsite)
        assert len(tms) == 1
        assert tms[0].strength == 0.95
        assert tms[0].phase == pytest.approx(math.pi / 2)

    def test_sms_preset_folds_the_half(self):
        model = build_preset("sms-bkc", n=2, g=1.0, J=0.5, eta=0.8)
        sms = [t for t in model.terms if t.kind is CouplingKind.SMS]
        assert [t.strength for t in sms] == [0.4, 0.4]

    def test_preset_errors(self):
        with pytest.raises(ValidationError):
            build_preset("no-such-model", J=1)
        with pytest.raises(ValidationError):
            build_preset("bkc", n=2, J=1.0)              # missing kappa
        with pytest.raises(ValidationError):
            build_preset("bkc", n=2, J=float("nan"), kappa=0.5)
        with pytest.raises(ValidationError):
            build_preset("bkc", n=1, J=1.0, kappa=0.5)   # below minimum size
        with pytest.raises(ValidationError):
            build_preset("bkc", n=2, J=1.0, kappa=0.5, boundary="pbc")

    def test_name_normalization(self):
        a = build_preset("TwoModeBKC", J=1.0, kappa=0.5)
        b = build_preset("two-mode-bkc", J=1.0, kappa=0.5)
        assert term_multiset(a) == term_multiset(b)


class TestValidation:
    def test_valid_model_empty_report(self):
        assert validate(build_preset("bkc", n=4, J=1.0, kappa=0.3)) == []

    def test_tms_needs_distinct_sites(self):
        model = QbsModel(2, (CouplingTerm(CouplingKind.TMS, 0, 0, 1.0, 0.0),))
        assert any("distinct sites" in v for v in validate(model))

    def test_duplicate_terms_flagged(self):
        t = CouplingTerm.make("bs", 0, 1, 1.0, 0.0)
        t2 = CouplingTerm.make("bs", 0, 1, 0.5, 0.3)
        assert any("duplicate" in v for v in validate(QbsModel(2, (t, t2))))
        # reversed storage counts as the same unordered pair
        t3 = CouplingTerm(CouplingKind.BS, 1, 0, 0.5, 0.3)
        report = validate(QbsModel(2, (t, t3)))
        assert any("duplicate" in v or "site_j < site_k" in v for v in report)

    def test_range_and_finiteness(self):
        bad = QbsModel(2, (CouplingTerm.make("bs", 0, 5, 1.0),))
        assert any("out of range" in v for v in validate(bad))
        nan = QbsModel(2, (CouplingTerm.make("bs", 0, 1, float("inf")),))
        assert any("finite" in v for v in validate(nan))
        neg = QbsModel(1, (CouplingTerm.make("damping", 0, 0, -1.0),))
        assert any(">= 0" in v for v in validate(neg))

    def test_unit_cell_division(self):
        model = QbsModel(3, (), Boundary.PBC, unit_cell=2)
        assert any("divide" in v for v in validate(model))

    def test_validate_never_mutates(self):
        model = build_preset("bkc", n=3, J=1.0, kappa=0.2)
        before = model.terms
        validate(model)
        assert model.terms == before


class TestSerialization:
    def test_round_trip_presets(self):
        presets = [
            build_preset("two-mode-bkc", J=1.2, kappa=0.4, phi_J=0.3, gamma=0.1),
            build_preset("bkc", n=5, J=1.0, kappa=0.5, phi_kappa=1.1),
            build_preset("squeezed-ssh", cells=3, t1=1.0, t2=1.5, g2=0.5),
            build_preset("two-mode-squeeze-detuned", delta=1.0, kappa=0.95),
            build_preset("sms-bkc", n=3, g=0.7, J=0.4, eta=0.6),
        ]
        for model in presets:
            again = load_model(save_model(model))
            assert again == model

    def test_round_trip_random_models(self, rng):
        for _ in range(50):
            model = random_model(rng, with_damping=bool(rng.integers(2)))
            assert load_model(save_model(model)) == model

    def test_document_matches_preset(self):
        # building the same model from an explicit document gives structural
        # equality with the preset, term for term
        model = build_preset("squeezed-ssh", cells=2, t1=1.0, t2=1.5, g2=0.5)
        doc = save_model(model)
        assert term_multiset(load_model(doc)) == term_multiset(model)

    def test_parse_error_has_locus(self):
        with pytest.raises(ParseError, match="line"):
            load_model("{not json")

    def test_schema_errors(self):
        good = save_model(build_preset("bkc", n=2, J=1.0, kappa=0.5))
        with pytest.raises(ValidationError, match="n_modes"):
            load_model(good.replace('"n_modes": 2', '"n_modes": -1'))
        with pytest.raises(ValidationError, match="unknown top-level"):
            load_model(good.replace('"n_modes"', '"extra": 1, "n_modes"'))
        with pytest.raises(ValidationError, match="boundary"):
            load_model(good.replace('"obc"', '"open"'))
        with pytest.raises(ValidationError, match=r"terms\[0\]"):
            load_model(good.replace('"kind": "bs"', '"kind": "hop"'))

    def test_validation_failure_on_load(self):
        text = save_model(build_preset("bkc", n=3, J=1.0, kappa=0.5))
        broken = text.replace('"n_modes": 3', '"n_modes": 2')
        with pytest.raises(ValidationError):
            load_model(broken)


class TestTranslationCovariance:
    def test_pbc_presets_are_covariant(self):
        bkc = build_preset("bkc", n=6, J=1.0, kappa=0.4, phi_J=0.2, boundary="pbc")
        assert is_translation_covariant(bkc)
        ssh = build_preset("squeezed-ssh", cells=4, t1=1.0, t2=1.5, g2=0.5)
        assert is_translation_covariant(ssh)

    def test_shift_maps_term_list_to_itself(self):
        model = build_preset("bkc", n=7, J=1.0, kappa=0.4, phi_kappa=0.9,
                             boundary="pbc")
        shifted = QbsModel(model.n_modes, shift_terms(model, 1), model.boundary)
        assert term_multiset(shifted) == term_multiset(model)

    def test_obc_chain_is_not_covariant(self):
        model = build_preset("bkc", n=6, J=1.0, kappa=0.4)
        assert not is_translation_covariant(model)
