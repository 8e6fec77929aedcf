"""Dynamical evolution matrices for quadratic bosonic models.

Conventions fixed here and used everywhere else:

* Particle-hole (doubled) basis: ``Psi = (a_1..a_N, a_1^dag..a_N^dag)^T``
  with the equation of motion ``i dPsi/dt = M Psi`` (hbar = 1).  ``M`` is
  generated by applying the bosonic commutation rules to every stored term
  plus its implied conjugate, never by transcribing block formulas.
* Quadrature basis: interleaved ``q = (x_1, p_1, ..., x_N, p_N)^T`` with
  ``x = (a + a^dag)/sqrt(2)``, ``p = -i(a - a^dag)/sqrt(2)`` and the real
  drift form ``dq/dt = K q``, i.e. ``K = Lambda (-i M) Lambda^dag``.
* Momentum space (pbc, translation-covariant models): cell momentum
  ``q_n = 2 pi n / n_cells`` and ``M(q) = sum_d M_d e^{i q d}`` where
  ``M_d`` is the real-space generator block coupling cell ``c`` to cell
  ``c + d`` in the per-cell doubled basis ``(a_{c,1..m}, a_{c,1..m}^dag)``.

Without damping, ``M`` obeys particle-hole symmetry ``C M C^{-1} = -M``
with ``C = (sigma_x otimes I) K`` (K = complex conjugation), and the
quadrature drift ``K`` is real; damping keeps ``K`` real but breaks the
particle-hole relation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError
from .model import Boundary, CouplingKind, QbsModel, is_translation_covariant

__all__ = [
    "Basis",
    "DynMatrix",
    "BlochMatrix",
    "build_real_space",
    "build_bloch",
    "to_quadrature",
    "from_quadrature",
    "rotate_gauge",
    "quadrature_transform",
    "symplectic_form",
    "sample_momenta",
    "strip_wrap_terms",
]


class Basis(str, enum.Enum):
    PARTICLE_HOLE = "particle-hole"
    QUADRATURE = "quadrature"


@dataclass(frozen=True)
class DynMatrix:
    """A 2N x 2N dynamical matrix together with its basis bookkeeping."""

    data: np.ndarray
    basis: Basis
    boundary: Boundary
    has_damping: bool
    n_modes: int

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] != 2 * self.n_modes:
            raise ValidationError(
                f"dynamical matrix must be 2N x 2N with N={self.n_modes}, got {d.shape}"
            )
        object.__setattr__(self, "data", d)


def _bloch_phases(qs, d):
    """``exp(i q d)`` with exact values at the quarter-turn points.

    ``cos``/``sin`` of float multiples of pi carry ~1e-16 residue, which
    would lift exact gap closures at the high-symmetry momenta to the 1e-8
    scale after a square root; snapping components this close to 0 or +-1
    stays within the evaluator's own rounding budget.
    """
    phases = np.exp(1j * np.asarray(qs, dtype=float) * d)
    for part in (phases.real, phases.imag):
        part[np.abs(part) < 4e-16] = 0.0
        part[np.abs(part - 1.0) < 4e-16] = 1.0
        part[np.abs(part + 1.0) < 4e-16] = -1.0
    return phases


@dataclass(frozen=True)
class BlochMatrix:
    """Lazy momentum-space evaluator ``q -> M(q)`` (2*n_cell square, 2pi-periodic)."""

    blocks: dict          # cell displacement d -> 2*n_cell x 2*n_cell block
    n_cell: int
    n_cells: int
    has_damping: bool

    def __call__(self, q):
        return self.stack(np.array([float(q)]))[0]

    def stack(self, qs):
        """Evaluate on an array of momenta at once; shape (len(qs), 2m, 2m)."""
        qs = np.atleast_1d(np.asarray(qs, dtype=float))
        out = np.zeros((qs.size, 2 * self.n_cell, 2 * self.n_cell), dtype=complex)
        for d, block in self.blocks.items():
            out += _bloch_phases(qs, d)[:, None, None] * block[None, :, :]
        return out


def build_real_space(model: QbsModel) -> DynMatrix:
    """Assemble the real-space dynamical matrix in the particle-hole basis.

    Every entry follows from ``i da_j/dt = [a_j, H]`` using
    ``[a_j, a_k^dag a_l] = delta_jk a_l``,
    ``[a_j, a_k^dag a_l^dag] = delta_jk a_l^dag + delta_jl a_k^dag`` and
    ``[a_j, (a_k^dag)^2] = 2 delta_jk a_k^dag`` applied to each stored term
    and its implied conjugate.  A DAMPING term of rate ``g`` contributes
    ``-i g/2`` to both diagonal entries of its mode.
    """
    model.require_valid()
    n = model.n_modes
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    for t in model.terms:
        j, k = t.site_j, t.site_k
        c = t.strength * np.exp(1j * t.phase)
        if t.kind is CouplingKind.BS:
            m[j, k] += c
            m[k, j] += np.conj(c)
            m[n + j, n + k] += -np.conj(c)
            m[n + k, n + j] += -c
        elif t.kind is CouplingKind.TMS:
            m[j, n + k] += c
            m[k, n + j] += c
            m[n + j, k] += -np.conj(c)
            m[n + k, j] += -np.conj(c)
        elif t.kind is CouplingKind.SMS:
            m[j, n + j] += 2.0 * c
            m[n + j, j] += -2.0 * np.conj(c)
        elif t.kind is CouplingKind.ONSITE:
            m[j, j] += t.strength
            m[n + j, n + j] += -t.strength
        elif t.kind is CouplingKind.DAMPING:
            m[j, j] += -0.5j * t.strength
            m[n + j, n + j] += -0.5j * t.strength
    return DynMatrix(m, Basis.PARTICLE_HOLE, model.boundary, model.has_damping, n)


def _site_slot(site, block, n_cell):
    """Map (absolute site, annihilation/creation block) to (cell, per-cell index)."""
    cell, orb = divmod(site, n_cell)
    return cell, orb + block * n_cell


def build_bloch(model: QbsModel) -> BlochMatrix:
    """Momentum-space dynamical matrix of a translation-covariant pbc model.

    The real-space generator is folded into hopping blocks by cell
    displacement (minimal image); covariance is verified by checking that
    every cell contributes the identical block.
    """
    model.require_valid()
    if model.boundary is not Boundary.PBC:
        raise ValidationError("momentum-space matrix requires pbc boundary")
    if not is_translation_covariant(model):
        raise ValidationError(
            "model is not translation-covariant with its declared unit cell"
        )
    n = model.n_modes
    n_cell = model.unit_cell
    n_cells = n // n_cell
    real = build_real_space(model).data

    half = n_cells // 2
    blocks: dict[int, np.ndarray] = {}

    def add(cell_r, slot_r, cell_c, slot_c, value):
        d = (cell_c - cell_r) % n_cells
        if d > half or (d == half and n_cells % 2 == 0 and d != 0):
            # fold to the negative minimal image; exact half-ring displacements
            # are excluded by the duplicate-term rule for covariant models
            d -= n_cells
        blocks.setdefault(d, np.zeros((2 * n_cell, 2 * n_cell), dtype=complex))
        blocks[d][slot_r, slot_c] += value

    rows, cols = np.nonzero(real)
    for r, c in zip(rows, cols):
        site_r, block_r = (r, 0) if r < n else (r - n, 1)
        site_c, block_c = (c, 0) if c < n else (c - n, 1)
        cell_r, slot_r = _site_slot(site_r, block_r, n_cell)
        cell_c, slot_c = _site_slot(site_c, block_c, n_cell)
        add(cell_r, slot_r, cell_c, slot_c, real[r, c] / n_cells)

    bloch = BlochMatrix(blocks, n_cell, n_cells, model.has_damping)
    # covariance cross-check: refolding the Bloch blocks must reproduce the
    # real-space matrix entry for entry
    rebuilt = np.zeros_like(real)
    for d, block in bloch.blocks.items():
        for cell in range(n_cells):
            tgt = (cell + d) % n_cells
            for slot_r in range(2 * n_cell):
                for slot_c in range(2 * n_cell):
                    v = block[slot_r, slot_c]
                    if v == 0:
                        continue
                    orb_r, blk_r = slot_r % n_cell, slot_r // n_cell
                    orb_c, blk_c = slot_c % n_cell, slot_c // n_cell
                    r = cell * n_cell + orb_r + blk_r * n
                    c = tgt * n_cell + orb_c + blk_c * n
                    rebuilt[r, c] += v
    scale = max(1.0, np.abs(real).max())
    if np.abs(rebuilt - real).max() > 1e-12 * scale:
        raise ValidationError(
            "model couplings are not compatible with the declared unit cell"
        )
    return bloch


def sample_momenta(model: QbsModel):
    """Momenta ``2 pi n / n_cells`` at which the Bloch spectrum equals the pbc one."""
    n_cells = model.n_modes // model.unit_cell
    return 2.0 * np.pi * np.arange(n_cells) / n_cells


@lru_cache(maxsize=64)
def quadrature_transform(n_modes: int) -> np.ndarray:
    """Unitary map Lambda with ``q = Lambda Psi`` (interleaved quadratures)."""
    lam = np.zeros((2 * n_modes, 2 * n_modes), dtype=complex)
    r = 1.0 / math.sqrt(2.0)
    for j in range(n_modes):
        lam[2 * j, j] = r
        lam[2 * j, n_modes + j] = r
        lam[2 * j + 1, j] = -1j * r
        lam[2 * j + 1, n_modes + j] = 1j * r
    lam.setflags(write=False)
    return lam


@lru_cache(maxsize=64)
def symplectic_form(n_modes: int) -> np.ndarray:
    """Canonical form Omega with ``[q_a, q_b] = i Omega_ab`` (interleaved)."""
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for j in range(n_modes):
        omega[2 * j, 2 * j + 1] = 1.0
        omega[2 * j + 1, 2 * j] = -1.0
    omega.setflags(write=False)
    return omega


def to_quadrature(m: DynMatrix, imag_tol: float = 1e-10) -> DynMatrix:
    """Convert a particle-hole matrix to the real quadrature drift ``K``.

    ``K = Lambda (-i M) Lambda^dag`` so that ``dq/dt = K q``.  The result is
    real for every matrix generated from a valid model; a residual imaginary
    part above ``imag_tol`` (relative) signals a corrupted input.
    """
    if m.basis is not Basis.PARTICLE_HOLE:
        raise ValidationError("to_quadrature expects a particle-hole basis matrix")
    lam = quadrature_transform(m.n_modes)
    k = lam @ (-1j * m.data) @ lam.conj().T
    scale = max(1.0, np.abs(k).max())
    if np.abs(k.imag).max() > imag_tol * scale:
        raise ValidationError(
            "quadrature drift has a non-negligible imaginary part; "
            "input is not a valid particle-hole dynamical matrix"
        )
    k = k.real.copy()
    # rounding dust from the basis change creates spurious couplings that
    # poison graph-based conditioning downstream; exact zeros are restored
    k[np.abs(k) < 1e-14 * scale] = 0.0
    return DynMatrix(k, Basis.QUADRATURE, m.boundary, m.has_damping, m.n_modes)


def from_quadrature(m: DynMatrix) -> DynMatrix:
    """Inverse of :func:`to_quadrature`: ``M = Lambda^dag (i K) Lambda``."""
    if m.basis is not Basis.QUADRATURE:
        raise ValidationError("from_quadrature expects a quadrature basis matrix")
    lam = quadrature_transform(m.n_modes)
    ph = lam.conj().T @ (1j * m.data) @ lam
    return DynMatrix(ph, Basis.PARTICLE_HOLE, m.boundary, m.has_damping, m.n_modes)


def gauge_rotation(angles) -> np.ndarray:
    """Block-diagonal quadrature rotation ``R = oplus_j R(phi_j)``.

    ``R(phi) = [[cos phi, sin phi], [-sin phi, cos phi]]`` acting on the
    interleaved ``(x_j, p_j)`` pair of each mode.
    """
    angles = np.asarray(angles, dtype=float)
    n = angles.size
    r = np.zeros((2 * n, 2 * n))
    for j, phi in enumerate(angles):
        cs, sn = math.cos(phi), math.sin(phi)
        r[2 * j, 2 * j] = cs
        r[2 * j, 2 * j + 1] = sn
        r[2 * j + 1, 2 * j] = -sn
        r[2 * j + 1, 2 * j + 1] = cs
    return r


def rotate_gauge(m: DynMatrix, angles) -> DynMatrix:
    """Apply the per-mode quadrature rotation by congruence, ``R K R^T``.

    The rotation blocks are orthogonal so the congruence is also a
    similarity: eigenvalues are untouched.  Rotating by 0 is the identity
    and rotations compose by adding angles.
    """
    if m.basis is not Basis.QUADRATURE:
        raise ValidationError("rotate_gauge expects a quadrature basis matrix")
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (m.n_modes,):
        raise ValidationError(
            f"expected {m.n_modes} gauge angles, got shape {angles.shape}"
        )
    r = gauge_rotation(angles)
    return DynMatrix(r @ m.data @ r.T, m.basis, m.boundary, m.has_damping, m.n_modes)


def strip_wrap_terms(model: QbsModel) -> QbsModel:
    """Open-boundary companion of a pbc model (wrap-around couplings removed).

    A two-site coupling wraps when its minimal-image cell displacement
    differs from the raw displacement ``cell(k) - cell(j)``.
    """
    if model.boundary is not Boundary.PBC:
        return model
    n_cells = model.n_modes // model.unit_cell
    half = n_cells // 2
    kept = []
    for t in model.terms:
        cell_j = t.site_j // model.unit_cell
        cell_k = t.site_k // model.unit_cell
        d = cell_k - cell_j
        wraps = abs(d) > half or (abs(d) == half and n_cells % 2 == 0 and d != 0)
        if not wraps:
            kept.append(t)
    return QbsModel(model.n_modes, tuple(kept), Boundary.OBC, model.unit_cell)
