"""Anatomy of one constructed wave: branches, jumps, and the balance curve.

Left: the balance curve with its two increasing branches and the jump
levels of the wave. Right: one period of the profile with the refractory
loading B, which stays continuous across both jumps.
"""
import numpy as np
import matplotlib.pyplot as plt

from ripplewave import Constant, ModelParams, PiecewiseLinearStep
from ripplewave import admissible_branches, construct_admissible_wave, wave_bounds

model = ModelParams(PiecewiseLinearStep(1.0, 2.0, 0.2), Constant(1.0))
curves = model.curves
wave = construct_admissible_wave(model, target_mass=1.0)
print("r =", wave.r, " period =", wave.period, " mass =", wave.mass)
print("value range:", wave_bounds(model))
for xi, left, right in wave.jump_points:
    print(f"jump at xi={xi:.4f}: {left:.4f} -> {right:.4f} "
          f"(balance {float(curves.balance(left)):.6f} both sides)")

rho = np.linspace(0.05, 2.0, 600)
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
ax1.plot(rho, curves.balance(rho), lw=1)
for br in admissible_branches(model):
    seg = np.linspace(max(br.lo, 1e-6), br.hi, 100)
    ax1.plot(seg, curves.balance(seg), lw=2.5, alpha=0.7)
for _, left, right in wave.jump_points:
    level = float(curves.balance(left))
    ax1.plot([left, right], [level, level], "k.--", lw=0.8)
ax1.set_xlabel("density")
ax1.set_ylabel("balance  rho / lambda(rho)")

ax2.plot(wave.xi, wave.P, lw=1.2, label="P")
ax2.plot(wave.xi, wave.B, lw=1.2, label="B (continuous)")
ax2.set_xlabel("wave coordinate")
ax2.legend()
fig.tight_layout()
fig.savefig("jump_anatomy.png", dpi=150)
print("wrote jump_anatomy.png")
