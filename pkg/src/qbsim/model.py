"""Declarative description of quadratic bosonic lattice models.

A model is a list of coupling terms on ``n_modes`` bosonic modes.  Five
term kinds exist:

``BS``       excitation-conserving (beamsplitter) coupling
             ``s * exp(i*phase) * a_j^dag a_k + h.c.`` with ``j < k``,
``TMS``      two-mode squeezing ``s * exp(i*phase) * a_j^dag a_k^dag + h.c.``
             with ``j < k``,
``SMS``      single-mode squeezing ``s * exp(i*phase) * (a_j^dag)^2 + h.c.``,
``ONSITE``   detuning ``s * a_j^dag a_j`` (self-conjugate, stored once),
``DAMPING``  energy decay at rate ``s`` on mode ``j`` (enters the dynamical
             matrix as ``-i*s/2`` on both diagonals; not a Hamiltonian term).

Hermitian-conjugate partners are implied and never stored: every stored
two-site term is the ``+h.c.`` representative with ``site_j < site_k``.
ONSITE and DAMPING are intrinsically self-conjugate, are stored exactly
once, and must carry phase 0.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

from .errors import ParseError, ValidationError

__all__ = [
    "CouplingKind",
    "Boundary",
    "CouplingTerm",
    "QbsModel",
    "build_preset",
    "PRESET_NAMES",
    "validate",
    "load_model",
    "save_model",
    "model_to_dict",
    "model_from_dict",
]


class CouplingKind(str, enum.Enum):
    BS = "bs"
    TMS = "tms"
    SMS = "sms"
    ONSITE = "onsite"
    DAMPING = "damping"


class Boundary(str, enum.Enum):
    OBC = "obc"
    PBC = "pbc"


_TWO_SITE = (CouplingKind.BS, CouplingKind.TMS)
_ONE_SITE = (CouplingKind.SMS, CouplingKind.ONSITE, CouplingKind.DAMPING)


@dataclass(frozen=True)
class CouplingTerm:
    """One stored coupling term (the ``+h.c.`` representative)."""

    kind: CouplingKind
    site_j: int
    site_k: int
    strength: float
    phase: float = 0.0

    @staticmethod
    def make(kind, site_j, site_k, strength, phase=0.0):
        """Build a term in canonical form.

        Two-site terms are reordered so that ``site_j < site_k``; reordering
        a BS term conjugates its phase (``a_k^dag a_j`` representative turned
        into the ``a_j^dag a_k`` one), while a TMS term is symmetric.
        """
        kind = CouplingKind(kind)
        j, k = int(site_j), int(site_k)
        s, p = float(strength), float(phase)
        if kind in _TWO_SITE and j > k:
            j, k = k, j
            if kind is CouplingKind.BS:
                p = -p
        return CouplingTerm(kind, j, k, s, p)

    def sort_key(self):
        return (self.kind.value, self.site_j, self.site_k, self.strength, self.phase)


@dataclass(frozen=True)
class QbsModel:
    """A validated-on-demand quadratic bosonic model.

    Instances are immutable; share freely across threads.
    """

    n_modes: int
    terms: tuple
    boundary: Boundary = Boundary.OBC
    unit_cell: int = 1

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def has_damping(self):
        return any(t.kind is CouplingKind.DAMPING for t in self.terms)

    def damping_rates(self):
        """Per-mode damping rates as a list of floats."""
        rates = [0.0] * self.n_modes
        for t in self.terms:
            if t.kind is CouplingKind.DAMPING:
                rates[t.site_j] += t.strength
        return rates

    def validate(self):
        return validate(self)

    def require_valid(self):
        violations = validate(self)
        if violations:
            raise ValidationError(
                "invalid model: " + "; ".join(violations), violations
            )
        return self

    def with_terms(self, terms):
        return QbsModel(self.n_modes, tuple(terms), self.boundary, self.unit_cell)

    def sorted_terms(self):
        return tuple(sorted(self.terms, key=CouplingTerm.sort_key))


def _is_finite(x):
    return isinstance(x, (int, float)) and math.isfinite(x)


def validate(model):
    """Return a list of violation messages (empty list = valid).

    Never mutates or raises; purely a reporting operation.
    """
    out = []
    if not isinstance(model.n_modes, int) or model.n_modes < 1:
        out.append(f"n_modes must be a positive integer, got {model.n_modes!r}")
        return out
    n = model.n_modes
    if not isinstance(model.unit_cell, int) or model.unit_cell < 1:
        out.append(f"unit_cell must be a positive integer, got {model.unit_cell!r}")
    elif model.boundary is Boundary.PBC and n % model.unit_cell != 0:
        out.append(
            f"unit_cell {model.unit_cell} does not divide n_modes {n} under pbc"
        )
    seen = set()
    for t in model.terms:
        label = f"{t.kind.value}({t.site_j},{t.site_k})"
        if not (0 <= t.site_j < n and 0 <= t.site_k < n):
            out.append(f"{label}: site index out of range 0..{n - 1}")
            continue
        if not _is_finite(t.strength):
            out.append(f"{label}: strength must be finite, got {t.strength!r}")
        if not _is_finite(t.phase):
            out.append(f"{label}: phase must be finite, got {t.phase!r}")
        if t.kind in _ONE_SITE:
            if t.site_j != t.site_k:
                out.append(f"{label}: {t.kind.value} requires site_j == site_k")
            if t.kind is not CouplingKind.SMS and t.phase != 0.0:
                out.append(f"{label}: {t.kind.value} is self-conjugate, phase must be 0")
            if t.kind is CouplingKind.DAMPING and _is_finite(t.strength) and t.strength < 0:
                out.append(f"{label}: damping rate must be >= 0")
        else:
            if t.site_j == t.site_k:
                out.append(f"{label}: {t.kind.value} requires distinct sites")
            elif t.site_j > t.site_k:
                out.append(f"{label}: two-site terms must be stored with site_j < site_k")
        key = (t.kind, frozenset((t.site_j, t.site_k)))
        if key in seen:
            out.append(f"{label}: duplicate term")
        seen.add(key)
    return out


def shift_terms(model, by):
    """Shift all site indices by ``by`` modulo ``n_modes`` (canonical form)."""
    n = model.n_modes
    return tuple(
        CouplingTerm.make(
            t.kind, (t.site_j + by) % n, (t.site_k + by) % n, t.strength, t.phase
        )
        for t in model.terms
    )


def is_translation_covariant(model):
    """True when shifting every site by one unit cell maps the term list to itself."""
    if model.boundary is not Boundary.PBC:
        return False
    shifted = sorted(shift_terms(model, model.unit_cell), key=CouplingTerm.sort_key)
    return tuple(shifted) == model.sorted_terms()


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

PRESET_NAMES = (
    "two-mode-bkc",
    "bkc",
    "squeezed-ssh",
    "two-mode-squeeze-detuned",
    "sms-bkc",
)


def _canon_preset_name(name):
    import re

    text = re.sub(r"(?<=[a-z0-9])(?=[A-Z])", "-", str(name).strip())
    return text.lower().replace("_", "-").replace(" ", "-")


def _take(params, spec_name, defaults, required):
    """Check a parameter record: all required present, everything finite, no extras."""
    params = dict(params)
    out = {}
    for key in required:
        if key not in params:
            raise ValidationError(f"preset {spec_name}: missing parameter {key!r}")
    for key, default in defaults.items():
        raw = params.pop(key, default)
        if isinstance(raw, str):
            out[key] = raw
            continue
        val = float(raw)
        if not math.isfinite(val):
            raise ValidationError(f"preset {spec_name}: parameter {key!r} is not finite")
        out[key] = val
    if params:
        raise ValidationError(
            f"preset {spec_name}: unknown parameter(s) {sorted(params)}"
        )
    return out


def _chain_bonds(n, boundary):
    bonds = [(j, j + 1) for j in range(n - 1)]
    if boundary is Boundary.PBC:
        bonds.append((n - 1, 0))
    return bonds


def build_preset(name, **params):
    """Construct one of the named model presets.

    Presets (parameters in parentheses; angles in radians):

    ``two-mode-bkc`` (J, kappa, phi_J=0, phi_kappa=0, delta=0, gamma=0)
        Two modes coupled by a beamsplitter term ``J e^{i phi_J} a_1^dag a_2``
        and a squeeze term ``kappa e^{i phi_kappa} a_1^dag a_2^dag``, with
        optional common detuning ``delta`` and damping ``gamma``.
    ``bkc`` (n, J, kappa, phi_J=0, phi_kappa=0, gamma=0, boundary="obc")
        The nearest-neighbour chain built from the same bond as above.
    ``squeezed-ssh`` (cells, t1, t2, g1=0, g2=0, boundary="pbc")
        Two-site unit cell: intracell hopping/squeezing (t1, g1) and
        intercell hopping/squeezing (t2, g2), all phases 0.
    ``two-mode-squeeze-detuned`` (delta, kappa, gamma=0)
        Detuned pair-creation model: ONSITE ``delta`` on both modes and one
        TMS term of strength ``kappa`` at phase pi/2 (the ``i*kappa`` coupling).
    ``sms-bkc`` (n, g, J, eta, boundary="obc")
        Chain with beamsplitter strength ``g``, two-mode squeezing ``J`` and
        on-site squeezing written as ``eta (a^dag)^2 / 2``; the stored SMS
        strength is ``eta/2`` so that it multiplies ``(a^dag)^2`` directly.

    Zero-strength terms are omitted from the term list.
    """
    cname = _canon_preset_name(name)
    mk = CouplingTerm.make
    if cname == "two-mode-bkc":
        p = _take(
            params, cname,
            {"J": None, "kappa": None, "phi_J": 0.0, "phi_kappa": 0.0,
             "delta": 0.0, "gamma": 0.0},
            required=("J", "kappa"),
        )
        terms = []
        if p["J"] != 0.0:
            terms.append(mk("bs", 0, 1, p["J"], p["phi_J"]))
        if p["kappa"] != 0.0:
            terms.append(mk("tms", 0, 1, p["kappa"], p["phi_kappa"]))
        for j in range(2):
            if p["delta"] != 0.0:
                terms.append(mk("onsite", j, j, p["delta"]))
            if p["gamma"] != 0.0:
                terms.append(mk("damping", j, j, p["gamma"]))
        return QbsModel(2, tuple(terms)).require_valid()

    if cname == "bkc":
        p = _take(
            params, cname,
            {"n": None, "J": None, "kappa": None, "phi_J": 0.0,
             "phi_kappa": 0.0, "gamma": 0.0, "boundary": "obc"},
            required=("n", "J", "kappa"),
        )
        n = int(p["n"])
        boundary = Boundary(p["boundary"])
        n_min = 3 if boundary is Boundary.PBC else 2
        if n < n_min:
            raise ValidationError(f"preset bkc: n must be >= {n_min} for {boundary.value}")
        terms = []
        for (j, k) in _chain_bonds(n, boundary):
            if p["J"] != 0.0:
                terms.append(mk("bs", j, k, p["J"], p["phi_J"]))
            if p["kappa"] != 0.0:
                terms.append(mk("tms", j, k, p["kappa"], p["phi_kappa"]))
        if p["gamma"] != 0.0:
            terms.extend(mk("damping", j, j, p["gamma"]) for j in range(n))
        return QbsModel(n, tuple(terms), boundary, unit_cell=1).require_valid()

    if cname == "squeezed-ssh":
        p = _take(
            params, cname,
            {"cells": None, "t1": None, "t2": None, "g1": 0.0, "g2": 0.0,
             "boundary": "pbc"},
            required=("cells", "t1", "t2"),
        )
        cells = int(p["cells"])
        boundary = Boundary(p["boundary"])
        if cells < (2 if boundary is Boundary.PBC else 1):
            raise ValidationError("preset squeezed-ssh: too few cells for the boundary")
        n = 2 * cells
        terms = []
        for c in range(cells):
            a, b = 2 * c, 2 * c + 1
            if p["t1"] != 0.0:
                terms.append(mk("bs", a, b, p["t1"]))
            if p["g1"] != 0.0:
                terms.append(mk("tms", a, b, p["g1"]))
            nxt = 2 * c + 2
            if nxt >= n:
                if boundary is not Boundary.PBC:
                    continue
                nxt -= n
            if p["t2"] != 0.0:
                terms.append(mk("bs", b, nxt, p["t2"]))
            if p["g2"] != 0.0:
                terms.append(mk("tms", b, nxt, p["g2"]))
        return QbsModel(n, tuple(terms), boundary, unit_cell=2).require_valid()

    if cname == "two-mode-squeeze-detuned":
        p = _take(
            params, cname,
            {"delta": None, "kappa": None, "gamma": 0.0},
            required=("delta", "kappa"),
        )
        terms = []
        for j in range(2):
            if p["delta"] != 0.0:
                terms.append(mk("onsite", j, j, p["delta"]))
        if p["kappa"] != 0.0:
            terms.append(mk("tms", 0, 1, p["kappa"], math.pi / 2))
        if p["gamma"] != 0.0:
            terms.extend(mk("damping", j, j, p["gamma"]) for j in range(2))
        return QbsModel(2, tuple(terms)).require_valid()

    if cname == "sms-bkc":
        p = _take(
            params, cname,
            {"n": 2.0, "g": None, "J": None, "eta": None, "boundary": "obc"},
            required=("g", "J", "eta"),
        )
        n = int(p["n"])
        boundary = Boundary(p["boundary"])
        n_min = 3 if boundary is Boundary.PBC else 1
        if n < n_min:
            raise ValidationError(f"preset sms-bkc: n must be >= {n_min} for {boundary.value}")
        terms = []
        for (j, k) in (_chain_bonds(n, boundary) if n > 1 else []):
            if p["g"] != 0.0:
                terms.append(mk("bs", j, k, p["g"]))
            if p["J"] != 0.0:
                terms.append(mk("tms", j, k, p["J"]))
        if p["eta"] != 0.0:
            # stored strength multiplies (a^dag)^2 directly; the 1/2 of the
            # conventional eta/2 writing is folded in here
            terms.extend(mk("sms", j, j, p["eta"] / 2.0) for j in range(n))
        return QbsModel(n, tuple(terms), boundary, unit_cell=1).require_valid()

    raise ValidationError(
        f"unknown preset {name!r}; known presets: {', '.join(PRESET_NAMES)}"
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

_MODEL_KEYS = ("n_modes", "boundary", "unit_cell", "terms")
_TERM_KEYS = ("kind", "j", "k", "strength", "phase")


def model_to_dict(model):
    return {
        "n_modes": model.n_modes,
        "boundary": model.boundary.value,
        "unit_cell": model.unit_cell,
        "terms": [
            {
                "kind": t.kind.value,
                "j": t.site_j,
                "k": t.site_k,
                "strength": t.strength,
                "phase": t.phase,
            }
            for t in model.terms
        ],
    }


def model_from_dict(doc):
    """Build and validate a model from a parsed document.

    Raises ValidationError on any schema problem; messages carry the field locus.
    """
    if not isinstance(doc, dict):
        raise ValidationError("model document must be a mapping at the top level")
    unknown = set(doc) - set(_MODEL_KEYS)
    if unknown:
        raise ValidationError(f"unknown top-level key(s): {sorted(unknown)}")
    missing = set(_MODEL_KEYS) - set(doc)
    if missing:
        raise ValidationError(f"missing top-level key(s): {sorted(missing)}")
    if not isinstance(doc["n_modes"], int) or isinstance(doc["n_modes"], bool):
        raise ValidationError("n_modes: expected an integer")
    if doc["n_modes"] < 1:
        raise ValidationError(f"n_modes: must be >= 1, got {doc['n_modes']}")
    try:
        boundary = Boundary(doc["boundary"])
    except ValueError:
        raise ValidationError(
            f"boundary: expected 'obc' or 'pbc', got {doc['boundary']!r}"
        ) from None
    if not isinstance(doc["unit_cell"], int) or isinstance(doc["unit_cell"], bool):
        raise ValidationError("unit_cell: expected an integer")
    if not isinstance(doc["terms"], list):
        raise ValidationError("terms: expected a list")
    terms = []
    for i, entry in enumerate(doc["terms"]):
        locus = f"terms[{i}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{locus}: expected a mapping")
        unknown = set(entry) - set(_TERM_KEYS)
        if unknown:
            raise ValidationError(f"{locus}: unknown key(s) {sorted(unknown)}")
        missing = set(_TERM_KEYS) - set(entry)
        if missing:
            raise ValidationError(f"{locus}: missing key(s) {sorted(missing)}")
        try:
            kind = CouplingKind(entry["kind"])
        except ValueError:
            raise ValidationError(f"{locus}.kind: unknown kind {entry['kind']!r}") from None
        for key in ("j", "k"):
            if not isinstance(entry[key], int) or isinstance(entry[key], bool):
                raise ValidationError(f"{locus}.{key}: expected an integer")
        for key in ("strength", "phase"):
            if not isinstance(entry[key], (int, float)) or isinstance(entry[key], bool):
                raise ValidationError(f"{locus}.{key}: expected a number")
        terms.append(
            CouplingTerm(kind, entry["j"], entry["k"],
                         float(entry["strength"]), float(entry["phase"]))
        )
    model = QbsModel(doc["n_modes"], tuple(terms), boundary, doc["unit_cell"])
    return model.require_valid()


def save_model(model):
    """Serialize a model to its JSON document (load/save round-trips exactly)."""
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def load_model(text):
    """Parse, schema-check, and validate a model document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"model document is not valid JSON: {exc.msg} "
            f"(line {exc.lineno}, column {exc.colno})"
        ) from exc
    return model_from_dict(doc)
