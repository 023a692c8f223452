"""Closed-form MSE bounds and the optimal number of estimated channels.

Plots the known-support MSE upper bound against the support size s for
several path loss exponents, marks the exact integer optimum, and compares
it with the asymptotic formula (alpha-2)(Np-1)/alpha.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import cransim as cs

N_PILOTS = 81
DENSITY = 1.0

fig, ax = plt.subplots(figsize=(7, 4.5))
for alpha in (3.0, 4.0, 5.0, 6.0):
    moment = cs.fading_moment(cs.FadingModel.rayleigh(), alpha)
    grid = cs.admissible_support_sizes(alpha, N_PILOTS)
    bounds = [
        cs.mse_upper_bound(cs.Scenario(alpha, DENSITY, moment, 0.0, N_PILOTS, s), "average")
        for s in grid
    ]
    sc = cs.Scenario(alpha, DENSITY, moment, 0.0, N_PILOTS)
    s_star, best = cs.best_support_size(sc, "average")
    asym = cs.best_support_size_asymptotic(alpha, N_PILOTS)
    print(f"alpha={alpha}: s*={s_star} (asymptotic {asym:.1f}), bound {best:.3e}")
    line, = ax.semilogy(list(grid), bounds, label=f"alpha = {alpha:g}")
    ax.plot([s_star], [best], "o", color=line.get_color())

ax.set_xlabel("number of estimated channels s")
ax.set_ylabel("average-MSE upper bound")
ax.set_title(f"Noiseless bound vs s (Np = {N_PILOTS}, Rayleigh)")
ax.legend()
fig.tight_layout()
fig.savefig("demos/output/bounds_vs_s.png", dpi=120)
print("wrote demos/output/bounds_vs_s.png")

# With noise the optimum stops growing with alpha and turns back down.
print("\noptimal s with noise_var = 0.1:")
for alpha in (2.5, 3.0, 4.0, 5.0, 6.0):
    moment = cs.fading_moment(cs.FadingModel.rayleigh(), alpha)
    sc = cs.Scenario(alpha, DENSITY, moment, 0.1, N_PILOTS)
    print(f"  alpha={alpha}: s* = {cs.best_support_size(sc, 'average')[0]}")
