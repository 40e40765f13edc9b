"""ac susceptibility and spin-lattice relaxation fits on generated data."""
# %%
import numpy as np

from spinclock import relaxation as rx

rng = np.random.default_rng(0)
truth = rx.ColeColeParams(chi_T=1.2, chi_S=0.15, tau=3e-4, beta=0.97)
w = 2 * np.pi * np.geomspace(1, 1e5, 30)
re, im = rx.cole_cole_eval(truth, w)
fit = rx.cole_cole_fit(w, re + 0.002 * rng.standard_normal(w.size), im + 0.002 * rng.standard_normal(w.size))
print("Cole-Cole:", fit.params, "stderr", np.round(fit.stderr, 6))

# %%
T = np.linspace(2, 8, 10)
model = rx.T1Model(A_dir=20.0, A_raman=600.0)
t1 = rx.t1_fit(T, rx.t1_eval(model, T))
print(f"A_dir = {t1.model.A_dir:.2f} s^-1 K^-1, A_Raman = {t1.model.A_raman:.2f} s^-1 K^-4")
print(f"T1(2 K) = {rx.t1_eval(model, 2.0) * 1e6:.0f} us")

# %% Rabi frequency of the clock transition for a 1 mT drive.
f, omega = rx.rabi_frequency(2.2, 1e-3, 1)
print(f"Rabi: {f:.3e} Hz, pi pulse {0.5 / f * 1e9:.1f} ns")
