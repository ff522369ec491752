"""Sideband signal and recovered phonon distribution from readout-sim output."""
import sys
import pandas as pd
import matplotlib.pyplot as plt

folder = sys.argv[1] if len(sys.argv) > 1 else "."
sig = pd.read_csv(f"{folder}/sideband.csv")
dist = pd.read_csv(f"{folder}/readout.csv")
fig, (a, b) = plt.subplots(1, 2, figsize=(9, 3.5))
a.plot(sig["t_us"], sig["pe_noisy"], ".", ms=2, color="0.6")
a.plot(sig["t_us"], sig["pe"], lw=1)
a.set_xlabel(r"$\Delta t$ ($\mu$s)")
a.set_ylabel(r"$P_e$")
w = 0.28
b.bar(dist["n"] - w, dist["p_truth"], w, label="truth")
b.bar(dist["n"], dist["p_recovered"], w, label="recovered")
b.bar(dist["n"] + w, dist["p_recovered_noisy"], w, label="recovered, noisy")
b.set_yscale("log")
b.set_xlabel("n")
b.legend()
fig.tight_layout()
fig.savefig(f"{folder}/readout.png", dpi=150)
