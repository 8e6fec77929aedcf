"""Point-gap topology: boundary-sensitive spectra, winding numbers, skin modes.

Under periodic boundaries the chain spectrum traces a closed ellipse in the
complex plane; under open boundaries it collapses onto a real segment
strictly inside it.  The spectral loops carry windings +-1 around interior
reference energies.  The squeezed two-band chain shows a point-gap window
g2 in (0.5, 2.5) t1 where the bands merge into double-cover rings with
unit winding, closing and reopening exactly at the window edges.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import qbsim as q
from qbsim.model import CouplingTerm, QbsModel


def imag_chain(n, t, delta, boundary="obc", mu=0.0):
    model = q.build_preset("bkc", n=n, J=t / 2, kappa=delta / 2,
                           phi_J=-np.pi / 2, phi_kappa=np.pi / 2,
                           boundary=boundary)
    if mu:
        terms = list(model.terms)
        terms += [CouplingTerm.make("onsite", j, j, mu) for j in range(n)]
        model = QbsModel(n, tuple(terms), model.boundary, model.unit_cell)
    return model


# --- open versus periodic spectra -----------------------------------------
spectra = q.obc_pbc_spectra(imag_chain(100, 1.0, 0.7, boundary="pbc"), n_grid=512)
print(f"obc spectrum: max|Im| = {spectra.max_imag_obc:.2e}, real extent "
      f"{np.abs(spectra.obc.real).max():.4f} (band edge sqrt(0.51) = "
      f"{np.sqrt(0.51):.4f})")
print(f"pbc loop encloses the obc segment: {spectra.pbc_encloses_obc}")

fig, ax = plt.subplots(figsize=(4.6, 3.6))
ax.plot(spectra.pbc.real, spectra.pbc.imag, ".", ms=2, label="pbc")
ax.plot(spectra.obc.real, spectra.obc.imag, ".", ms=4, label="obc")
ax.set_xlabel("Re E")
ax.set_ylabel("Im E")
ax.legend()
fig.tight_layout()
fig.savefig("demo_obc_pbc_spectra.png", dpi=150)
print("wrote demo_obc_pbc_spectra.png")

bloch = q.build_bloch(imag_chain(40, 1.0, 0.7, boundary="pbc"))
loops = q.band_windings(bloch, 0.3j, n_grid=1024)
print("band loops around E = 0.3i:",
      [(l.traversals, l.winding) for l in loops],
      "(the doubled determinant winding cancels:",
      q.winding_number(bloch, 0.3j).winding, ")")

# --- squeezed two-band chain: winding window -------------------------------
g2s = np.linspace(0.0, 3.0, 121)
tops = []
for g2 in g2s:
    model = q.build_preset("squeezed-ssh", cells=4, t1=1.0, t2=1.5, g1=0.0, g2=g2)
    try:
        loops = q.band_windings(q.build_bloch(model), 0.0, n_grid=512)
        tops.append(max(abs(l.winding) for l in loops))
    except q.GapClosedError:
        tops.append(np.nan)   # exactly on a critical point

fig, ax = plt.subplots(figsize=(5.2, 3.0))
ax.plot(g2s, tops, ".-", ms=3)
ax.set_xlabel(r"$g_2/t_1$")
ax.set_ylabel("band winding at E = 0")
ax.set_yticks([0, 1])
fig.tight_layout()
fig.savefig("demo_ssh_winding_window.png", dpi=150)
print("wrote demo_ssh_winding_window.png (unit winding inside (0.5, 2.5))")

# --- skin-mode profiles -----------------------------------------------------
fig, axes = plt.subplots(1, 3, figsize=(10, 3.0), sharey=True)
for ax, mu in zip(axes, (0.0, 0.01, 0.1)):
    tr = q.bogoliubov_diagonalize(q.build_real_space(imag_chain(50, 1.0, 0.7, mu=mu)))
    metrics = q.skin_metrics(tr, 0.1)
    for k in range(0, 50, 6):
        ax.semilogy(metrics.profiles[k], lw=0.8)
    ax.set_title(f"$\\mu = {mu}$, mean edge weight "
                 f"{metrics.mean_edge_weight:.2f}")
    ax.set_xlabel("site")
axes[0].set_ylabel(r"$|u_j|^2 + |v_j|^2$")
fig.tight_layout()
fig.savefig("demo_skin_profiles.png", dpi=150)
print("wrote demo_skin_profiles.png")
print("note: the unperturbed chain is itself maximally skin-localized; the "
      "on-site perturbation hybridizes left- and right-movers, making single "
      "modes two-sided while lowering the total edge mass")
