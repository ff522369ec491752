"""Mode 1 and 2 occupations against drive frequency from sweep.csv."""
import sys
import pandas as pd
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "sweep.csv"
df = pd.read_csv(path)
x = df["omega_d_over_omega1"]
fig, axes = plt.subplots(2, 1, sharex=True, figsize=(6, 5))
for ax, l in zip(axes, (1, 2)):
    ax.plot(x, df[f"n{l}_ion"], label="ion chain")
    ax.plot(x, df[f"n{l}_moore"], "--", label="moving mirror")
    ax.set_ylabel(rf"$\langle n_{l} \rangle$")
axes[0].legend()
axes[1].set_xlabel(r"$\omega_D / \omega_1$")
fig.tight_layout()
fig.savefig(path.replace(".csv", ".png"), dpi=150)
