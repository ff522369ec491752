"""Bar plot of chi_i / k-bar from chi.csv (or chain.csv)."""
import sys
import pandas as pd
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "chi.csv"
df = pd.read_csv(path)
fig, ax = plt.subplots(figsize=(6, 3.5))
ax.bar(df["ion_index"], df["chi_over_kbar"], color="0.3")
ax.axhline(0.0, color="k", lw=0.5)
ax.set_xlabel("ion number")
ax.set_ylabel(r"$\chi_i / \bar k$")
fig.tight_layout()
fig.savefig(path.replace(".csv", ".png"), dpi=150)
