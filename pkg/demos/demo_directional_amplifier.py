"""Quadrature-selective directional amplification in a 13-site chain.

Purely imaginary nearest-neighbour couplings decouple the x and p sectors
into chains with opposite chirality: an x excitation injected at the
middle waveguide is amplified toward the right and suppressed toward the
left, and the p quadrature does the exact opposite.  Reflection stays
below one across the whole band.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import qbsim as q

omegas = np.linspace(-3.0, 3.0, 201)
x_scan = q.chain_scattering_scan(13, 1.0, 0.5, theta=0.0, omegas=omegas)
p_scan = q.chain_scattering_scan(13, 1.0, 0.5, theta=np.pi / 2, omegas=omegas)

fig, axes = plt.subplots(1, 2, figsize=(9, 3.4), sharey=True)
for ax, scan, label in ((axes[0], x_scan, "x input"), (axes[1], p_scan, "p input")):
    ax.semilogy(scan.omegas, scan.gain_right, label=r"$|S_{R \leftarrow M}|^2$")
    ax.semilogy(scan.omegas, scan.gain_left, label=r"$|S_{L \leftarrow M}|^2$")
    ax.semilogy(scan.omegas, scan.reflection, "k", lw=0.8,
                label=r"$|S_{M \leftarrow M}|^2$")
    ax.axhline(1.0, color="gray", lw=0.6)
    ax.set_xlabel(r"$\omega/t$")
    ax.set_title(label)
    ax.legend(fontsize=8)
axes[0].set_ylabel("scattering probability")
fig.tight_layout()
fig.savefig("demo_directional_amplifier.png", dpi=150)
print("wrote demo_directional_amplifier.png")

c = len(omegas) // 2
print(f"x input at band center: gain right = {x_scan.gain_right[c]:.1f}, "
      f"gain left = {x_scan.gain_left[c]:.2e}")
print(f"p input at band center: gain right = {p_scan.gain_right[c]:.2e}, "
      f"gain left = {p_scan.gain_left[c]:.1f}")
print(f"max reflection over the band: {x_scan.reflection.max():.6f} (bounded by 1)")

# without squeezing the chain is reciprocal
flat = q.chain_scattering_scan(13, 1.0, 0.0, theta=0.0, omegas=omegas)
print(f"Delta = 0: max |gain_right - gain_left| = "
      f"{np.abs(flat.gain_right - flat.gain_left).max():.2e}")
