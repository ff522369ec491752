"""Mode 1 occupation over time from timeseries.csv."""
import sys
import pandas as pd
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "timeseries.csv"
df = pd.read_csv(path)
x = df["drive_periods"]
fig, ax = plt.subplots(figsize=(6, 3.5))
ax.plot(x, df["n1_ion"], label="ion chain, sine drive")
ax.plot(x, df["n1_ion_optimized"], label="ion chain, optimized drive")
ax.plot(x, df["n1_moore"], "--", label="moving mirror")
ax.plot(x, df["n1_analytic"], ":", label=r"$\sinh^2$ law")
ax.set_xlabel("drive periods")
ax.set_ylabel(r"$\langle n_1 \rangle$")
ax.legend()
fig.tight_layout()
fig.savefig(path.replace(".csv", ".png"), dpi=150)
