"""Growth rates of spatial perturbations about the well-mixed state.

The quartic coefficient criterion and the directly computed spectrum must
agree about which wavenumbers grow; for the onset model they mark the
same band of unstable modes.
"""
import numpy as np
import matplotlib.pyplot as plt

from ripplewave import Constant, ModelParams, SigmoidExp, find_steady_states
from ripplewave import isotropic_transport_stability, rh_coefficients, spectrum_at_k

model = ModelParams(SigmoidExp(2.5, 8.0, 10.0), Constant(1.5))
iso = next(s for s in find_steady_states(model) if s.kind == "isotropic")
verdict = isotropic_transport_stability(model)
print("verdict:", verdict.verdict)
print("conditions:", verdict.isotropic_conditions)

ns = np.arange(1, 33)
growth = []
rh_ok = []
for n in ns:
    k = 2 * np.pi * n
    point = spectrum_at_k(model, iso, k)
    growth.append(point.max_real)
    rh_ok.append(rh_coefficients(model, k).passed is not False)
growth = np.array(growth)

plt.figure(figsize=(7, 4))
plt.plot(ns, growth, "o-", ms=4, label="max Re eigenvalue")
plt.axhline(0.0, color="k", lw=0.8)
bad = ~np.array(rh_ok)
plt.plot(ns[bad], growth[bad], "rx", ms=8, label="criterion: unstable")
plt.xlabel("mode number n  (k = 2 pi n)")
plt.ylabel("growth rate")
plt.legend()
plt.tight_layout()
plt.savefig("stability_map.png", dpi=150)
print("wrote stability_map.png")
print(f"growth plateau ~ {growth[-8:].mean():.3f}")
