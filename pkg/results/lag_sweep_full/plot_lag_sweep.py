"""Plot lag_sweep output. Generated by lmsr-market; edit freely."""
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

HERE = __file__.rsplit("/", 1)[0] if "/" in __file__ else "."

df = pd.read_csv(f"{HERE}/lag_sweep.csv")
fig, ax = plt.subplots(figsize=(7, 4.5))
for nu, grp in df.groupby("nu"):
    grp = grp.sort_values("alpha")
    line = ax.errorbar(grp["alpha"], grp["mean_ratio"], yerr=grp["ci_halfwidth"], fmt="o", capsize=3,
                       label=f"nu = {nu}")
    head = grp.head(5)
    if len(head) >= 2:
        slope, icpt = np.polyfit(head["alpha"], head["mean_ratio"], 1)
        xs = np.linspace(grp["alpha"].min(), grp["alpha"].max(), 50)
        ax.plot(xs, slope * xs + icpt, "--", color=line[0].get_color(), lw=0.8)
ax.set_xlabel("alpha (input gain)")
ax.set_ylabel("phase ratio (price / information)")
ax.legend()
fig.tight_layout()
fig.savefig(f"{HERE}/plot_lag_sweep.png", dpi=150)
