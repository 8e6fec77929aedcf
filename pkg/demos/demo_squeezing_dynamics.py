"""Squeezing and entanglement dynamics across the exceptional point.

The detuned pair-creation model has eigenvalues +-sqrt(delta^2 - kappa^2):
its squeezing factor S = |A| + |B| oscillates with peak
sqrt((delta+kappa)/(delta-kappa)) below the exceptional coupling, grows
like exp(sqrt(kappa^2 - delta^2) t) above it, and crosses over through
algebraic growth sqrt(1 + delta^2 t^2) + kappa t exactly at it.  On-site
squeezing splits that single transition into two, opening a region where
growth and oscillation superpose.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import qbsim as q

# --- three regimes of the squeezing factor ---------------------------------
times = np.linspace(0.0, 30.0, 1501)
fig, ax = plt.subplots(figsize=(5.6, 3.6))
for ratio, color in ((0.95, "C0"), (1.0, "k"), (1.05, "C3")):
    trace = q.squeezing_factor((1.0, ratio), times)
    ax.semilogy(times, trace.values, color=color,
                label=rf"$\kappa/\delta = {ratio}$ ({trace.regime})")
    if trace.rate is not None:
        print(f"kappa/delta = {ratio}: fitted growth rate {trace.rate:.4f} "
              f"(sqrt(kappa^2 - delta^2) = {np.sqrt(ratio**2 - 1):.4f})")
    if trace.s_max is not None:
        print(f"kappa/delta = {ratio}: peak S = {trace.s_max:.4f} "
              f"(closed form {np.sqrt((1 + ratio) / (1 - ratio)):.4f}), "
              f"period {trace.period:.3f}")
ax.set_xlabel("t")
ax.set_ylabel("S(t)")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig("demo_squeezing_regimes.png", dpi=150)
print("wrote demo_squeezing_regimes.png")

# --- entanglement follows the same regime structure -------------------------
fig, ax = plt.subplots(figsize=(5.6, 3.6))
vac = q.GaussianState.vacuum(2)
for ratio, t_max in ((0.8, 26.0), (1.2, 9.0)):
    model = q.build_preset("two-mode-squeeze-detuned", delta=1.0, kappa=ratio)
    drift = q.to_quadrature(q.build_real_space(model))
    ts = np.linspace(0.0, t_max, 260)
    ent = [q.logarithmic_negativity(q.evolve_state(vac, q.propagate(drift, t)), [0])
           for t in ts]
    ax.plot(ts, ent, label=rf"$\kappa/\delta = {ratio}$")
ax.set_xlabel("t")
ax.set_ylabel(r"$E_N$ (mode 1 | mode 2)")
ax.legend()
fig.tight_layout()
fig.savefig("demo_entanglement_dynamics.png", dpi=150)
print("wrote demo_entanglement_dynamics.png")

# --- regime map with on-site squeezing --------------------------------------
etas = np.linspace(0.0, 0.8, 9)
gs = np.linspace(0.1, 2.5, 25)
points = q.regime_map(etas, gs, tms_strength=1.0)
codes = {"exponential": 0, "mixed": 1, "oscillatory": 2}
grid = np.array([codes[p.dynamics] for p in points]).reshape(len(etas), len(gs))

fig, ax = plt.subplots(figsize=(5.6, 3.4))
im = ax.pcolormesh(gs, etas, grid, cmap="viridis", shading="nearest")
ax.plot(1.0 + etas, etas, "w--", lw=1)
ax.plot(np.abs(1.0 - etas), etas, "w--", lw=1)
ax.set_xlabel("beamsplitter strength g")
ax.set_ylabel(r"on-site squeezing $\eta$")
cbar = fig.colorbar(im, ticks=[0, 1, 2])
cbar.ax.set_yticklabels(["exponential", "mixed", "oscillatory"])
fig.tight_layout()
fig.savefig("demo_regime_map.png", dpi=150)
print("wrote demo_regime_map.png (dashed: split exceptional lines g = J +- eta)")
agree = sum(p.agree for p in points)
print(f"spectral label and fitted dynamics agree on {agree}/{len(points)} "
      "grid points; disagreements sit on the exceptional lines or in deep "
      "mixed cells whose oscillation period exceeds the horizon that keeps "
      "the covariance within double-precision conditioning")
