"""Shared helpers: seeded random model generators for property tests."""

import numpy as np
import pytest

from qbsim.model import Boundary, CouplingTerm, QbsModel


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_model(rng, n_max=24, with_damping=False, strength_scale=1.0):
    """A random valid model: arbitrary couplings, no duplicate pairs."""
    n = int(rng.integers(2, n_max + 1))
    kinds2 = ["bs", "tms"]
    kinds1 = ["sms", "onsite"]
    terms = []
    used = set()
    n_terms = int(rng.integers(1, max(2, 2 * n)))
    for _ in range(n_terms):
        if rng.random() < 0.6:
            kind = kinds2[int(rng.integers(2))]
            j, k = rng.choice(n, size=2, replace=False)
        else:
            kind = kinds1[int(rng.integers(2))]
            j = k = int(rng.integers(n))
        key = (kind, frozenset((int(j), int(k))))
        if key in used:
            continue
        used.add(key)
        strength = float(rng.uniform(0.1, strength_scale))
        phase = 0.0 if kind == "onsite" else float(rng.uniform(-np.pi, np.pi))
        terms.append(CouplingTerm.make(kind, int(j), int(k), strength, phase))
    if with_damping:
        for j in range(n):
            if rng.random() < 0.5:
                terms.append(CouplingTerm.make("damping", j, j, float(rng.uniform(0.05, 0.5))))
    return QbsModel(n, tuple(terms)).require_valid()


def random_ring_model(rng, max_cells=12, max_cell_size=2, strength_scale=1.0):
    """A random translation-covariant pbc model (for momentum-space tests)."""
    n_cell = int(rng.integers(1, max_cell_size + 1))
    n_cells = int(rng.integers(3, max_cells + 1))
    n = n_cell * n_cells
    # couplings defined on cell 0, tiled over the ring
    protos = []
    used = set()
    for _ in range(int(rng.integers(1, 4))):
        kind = ["bs", "tms", "sms", "onsite"][int(rng.integers(4))]
        if kind in ("sms", "onsite"):
            a = b = int(rng.integers(n_cell))
        else:
            a = int(rng.integers(n_cell))
            b = a
            while b == a:
                b = int(rng.integers(2 * n_cell))   # allows next-cell targets
        key = (kind, a, b)
        if key in used:
            continue
        used.add(key)
        strength = float(rng.uniform(0.1, strength_scale))
        phase = 0.0 if kind == "onsite" else float(rng.uniform(-np.pi, np.pi))
        protos.append((kind, a, b, strength, phase))
    terms = {}
    for c in range(n_cells):
        for kind, a, b, s, p in protos:
            j = c * n_cell + a
            k = (c * n_cell + b) % n
            t = CouplingTerm.make(kind, j, k, s, p)
            terms[(t.kind, frozenset((t.site_j, t.site_k)))] = t
    model = QbsModel(n, tuple(terms.values()), Boundary.PBC, n_cell)
    if model.validate():
        return random_ring_model(rng, max_cells, max_cell_size, strength_scale)
    return model
