"""Conditioning helpers for strongly non-normal dynamical matrices.

Open chains with unequal left/right effective hopping are exponentially
ill-conditioned eigenproblems: the similarity that symmetrizes them grows
like (b/c)^(j/2) along the chain, and LAPACK's built-in balancing never
finds it (interior row and column norms are already equal, so its
fixed-point criterion is satisfied by doing nothing).  ``balance_scaling``
minimizes ``||D^-1 A D||_F`` over diagonal ``D`` directly: the objective is
convex in the log-scales, a spanning-tree walk of the coupling graph gives
the bulk-exact starting point, and L-BFGS polishes the ends.
"""

from __future__ import annotations

from collections import deque

import numpy as np
from scipy.optimize import minimize

__all__ = ["balance_scaling", "balanced_eig"]


def balance_scaling(a, drop_tol=1e-12, l_cap=300.0):
    """Diagonal scales ``d`` (as a vector) minimizing ``||D^-1 A D||_F``.

    Entries below ``drop_tol`` (relative) are treated as structural zeros so
    that rounding dust cannot steer the scaling.  Log-scales are capped at
    ``l_cap`` to keep ``d`` representable.
    """
    a = np.asarray(a)
    n = a.shape[0]
    scale = np.abs(a).max()
    if scale == 0.0 or n == 0:
        return np.ones(n)
    w = np.abs(a / scale).astype(float) ** 2
    np.fill_diagonal(w, 0.0)
    w[w < drop_tol**2] = 0.0
    if not (w > 0).any():
        return np.ones(n)

    # spanning-tree start: along each two-way edge the pairwise-symmetrizing
    # increment is 0.25*log(w_ji/w_ij); exact in the bulk of banded chains
    l0 = np.zeros(n)
    both = (w > 0) & (w.T > 0)
    seen = np.zeros(n, bool)
    for root in range(n):
        if seen[root]:
            continue
        seen[root] = True
        queue = deque([root])
        comp = [root]
        while queue:
            i = queue.popleft()
            for j in np.nonzero(both[i])[0]:
                if not seen[j]:
                    seen[j] = True
                    l0[j] = l0[i] + 0.25 * np.log(w[j, i] / w[i, j])
                    comp.append(j)
                    queue.append(j)
        l0[comp] -= np.mean(l0[comp])

    rows, cols = np.nonzero(w > 0)
    lw = np.log(w[rows, cols])

    def fg(l):
        e = np.exp(np.clip(lw + 2.0 * (l[cols] - l[rows]), -745.0, 700.0))
        g = np.zeros(n)
        np.add.at(g, cols, 2.0 * e)
        np.add.at(g, rows, -2.0 * e)
        return e.sum(), g

    res = minimize(
        fg, l0, jac=True, method="L-BFGS-B",
        options={"maxiter": 1000, "ftol": 1e-16, "gtol": 1e-12},
    )
    l = res.x if res.fun <= fg(l0)[0] else l0
    l = l - l.mean()
    return np.exp(np.clip(l, -l_cap, l_cap))


def balanced_eig(a, left=False, return_frame=False):
    """Eigen-decomposition through the Frobenius-balancing similarity.

    Returns ``(w, vr)`` or ``(w, vl, vr)``; eigenvectors are those of the
    original matrix (unit 2-norm columns).  Left vectors satisfy
    ``vl[:, k].conj().T @ a = w[k] * vl[:, k].conj().T``.

    With ``return_frame=True`` the balanced matrix and its (unit-norm)
    eigenvectors are appended: non-normality diagnostics are only
    trustworthy in that frame, where exponentially conditioned chains
    become near-normal while true defectiveness survives any similarity.
    """
    a = np.asarray(a)
    d = balance_scaling(a)
    ab = (a / d[:, None]) * d[None, :]
    if left:
        import scipy.linalg as sla

        w, vl, vb = sla.eig(ab, left=True, right=True)
        vl = vl / d[:, None]
        vl = vl / np.linalg.norm(vl, axis=0, keepdims=True)
    else:
        w, vb = np.linalg.eig(ab)
    vr = vb * d[:, None]
    vr = vr / np.linalg.norm(vr, axis=0, keepdims=True)
    out = (w, vl, vr) if left else (w, vr)
    if return_frame:
        vb = vb / np.linalg.norm(vb, axis=0, keepdims=True)
        out = out + (ab, vb)
    return out
