"""Eigenvalue branches and exceptional points of squeezing-coupled pairs.

A Hermitian Hamiltonian with a two-mode squeezing term evolves, in the
doubled (a, a^dag) representation, under a non-Hermitian matrix.  Sweeping
the squeezing strength kappa through the beamsplitter strength J drives
every eigenvalue pair from purely real to purely imaginary through a single
defective coalescence point at |kappa| = |J| whose order grows with the
chain length.
"""

import warnings

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import qbsim as q

kappas = np.linspace(0.0, 2.0, 401)

fig, axes = plt.subplots(1, 2, figsize=(9, 3.4), sharex=True)
for ax, n in zip(axes, (2, 7)):
    values = []
    for kappa in kappas:
        if n == 2:
            model = q.build_preset("two-mode-bkc", J=1.0, kappa=kappa)
        else:
            model = q.build_preset("bkc", n=n, J=1.0, kappa=kappa)
        values.append(np.linalg.eigvals(q.build_real_space(model).data))
    values = np.array(values)
    ax.plot(kappas, values.real, ".", color="C0", ms=1.5, label="Re")
    ax.plot(kappas, values.imag, ".", color="C3", ms=1.5, label="Im")
    ax.axvline(1.0, color="k", lw=0.6, ls=":")
    ax.set_xlabel(r"$\kappa/J$")
    ax.set_title(f"N = {n}")
axes[0].set_ylabel(r"eigenvalues of $M$")
fig.tight_layout()
fig.savefig("demo_spectrum_branches.png", dpi=150)
print("wrote demo_spectrum_branches.png")

# the detector brackets the coalescence and reports its order (2N in the
# doubled space: the +- pairs merge simultaneously)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    for n in (2, 7, 13):
        if n == 2:
            sweep = lambda k: q.build_preset("two-mode-bkc", J=1.0, kappa=k)
        else:
            sweep = lambda k, n=n: q.build_preset("bkc", n=n, J=1.0, kappa=k)
        found = q.detect_ep(sweep, np.linspace(0.5, 1.5, 101))
        for c in found:
            print(
                f"N={n:2d}: exceptional point at kappa/J = {c.value:g}, "
                f"order {c.order}, eigenvector Gram condition {c.defectiveness:.1e}"
            )

# phases of the couplings never move the eigenvalues
for phi in (0.0, 0.9, 2.2):
    model = q.build_preset("two-mode-bkc", J=1.0, kappa=0.6, phi_J=phi, phi_kappa=-phi)
    ev = np.sort(np.linalg.eigvals(q.build_real_space(model).data).real)
    print(f"phi = {phi:3.1f}: eigenvalues {np.round(ev, 6)}")
