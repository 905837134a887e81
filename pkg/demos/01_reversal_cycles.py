"""Sweep the reversal rate through the oscillation window.

Below the first threshold the well-mixed state is attracting; past it the
direction imbalance d settles on a limit cycle, and for very fast aging the
cycle gives way to a locked anisotropic pair.
"""
import numpy as np
import matplotlib.pyplot as plt

from ripplewave import Constant, ModelParams, OdeState, SigmoidExp
from ripplewave import hopf_thresholds, integrate_ode

model = ModelParams(SigmoidExp(2.5, 8.0, 10.0), Constant(1.0))
th = hopf_thresholds(model)
print(f"thresholds: {th.gamma_star:.4f} {th.gamma_hat:.4f} {th.gamma_star2:.4f}")

gammas = np.linspace(1.0, 17.0, 49)
env_lo, env_hi = [], []
for gamma in gammas:
    m = ModelParams(SigmoidExp(2.5, 8.0, 10.0), Constant(float(gamma)))
    traj = integrate_ode(OdeState(0.05, 0.0, 0.0), m, 80.0, dt=4e-3,
                         store_every=12)
    env_lo.append(traj.tail_min_d)
    env_hi.append(traj.tail_max_d)

plt.figure(figsize=(7, 4))
plt.fill_between(gammas, env_lo, env_hi, alpha=0.3, label="attractor envelope")
plt.plot(gammas, env_hi, "C0.-", lw=1)
plt.plot(gammas, env_lo, "C0.-", lw=1)
for g, ls in [(th.gamma_star, "--"), (th.gamma_hat, ":"), (th.gamma_star2, "--")]:
    plt.axvline(g, color="k", ls=ls, lw=0.8)
plt.xlabel("aging rate")
plt.ylabel("direction imbalance d (long-time envelope)")
plt.legend()
plt.tight_layout()
plt.savefig("reversal_cycles.png", dpi=150)
print("wrote reversal_cycles.png")

# one trajectory from inside the window, to see the spiral onto the cycle
m = ModelParams(SigmoidExp(2.5, 8.0, 10.0), Constant(2.5))
traj = integrate_ode(OdeState(0.05, 0.0, 0.0), m, 60.0, dt=2e-3,
                     store_every=10)
plt.figure(figsize=(5, 4))
plt.plot(traj.states[:, 1], traj.states[:, 0], lw=0.6)
plt.xlabel("refractory mass u1")
plt.ylabel("d")
plt.tight_layout()
plt.savefig("reversal_cycle_phase.png", dpi=150)
print("wrote reversal_cycle_phase.png")
