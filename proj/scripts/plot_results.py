"""Plot CLI outputs.

    python scripts/plot_results.py runs/fig2/sweep_users.csv sweep.png
    python scripts/plot_results.py runs/fig3/summary.json aoii.png
"""

import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def plot_sweep(csv_path, ax):
    rows = pd.read_csv(csv_path, comment="#")
    for (theta, snr, mode), group in rows.groupby(["theta", "snr_db", "mode"]):
        label = f"{mode.upper()} theta={theta:.3f} {snr:g} dB"
        ax.step(group["I"], group["num_scheduled"], where="mid", label=label)
    ax.set_xlabel("I (bits/s/Hz)")
    ax.set_ylabel("scheduled users")


def plot_summary(json_path, ax):
    cells = pd.DataFrame(json.loads(Path(json_path).read_text())["cells"])
    for (snr, mode), group in cells.groupby(["snr_db", "mode"]):
        ax.plot(group["I"], group["mean_aoii"], marker="o", label=f"{mode.upper()} {snr:g} dB")
    ax.set_xlabel("I (bits/s/Hz)")
    ax.set_ylabel("mean AoII")


def main():
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    source, target = sys.argv[1:]
    fig, ax = plt.subplots(figsize=(6, 4))
    if source.endswith(".csv"):
        plot_sweep(source, ax)
    else:
        plot_summary(source, ax)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(target, dpi=150)


if __name__ == "__main__":
    main()
