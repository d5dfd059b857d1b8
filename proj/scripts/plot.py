"""Plots from the CSVs written by scripts/reproduce.sh. Usage: plot.py RUNS_DIR"""
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def savefig(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    print("wrote", path)


def diagnostics(run, dest):
    df = pd.read_csv(run / "diagnostics.csv")
    fig, ax = plt.subplots(1, 3, figsize=(12, 3.5))
    ax[0].plot(df.t, df.energy)
    ax[0].set(xlabel="t", ylabel="energy")
    ax[1].plot(df.t, (df.mass - df.mass[0]).abs())
    ax[1].set(xlabel="t", ylabel="|mass drift|", yscale="symlog")
    ax[2].plot(df.t, df.max_abs_phi)
    ax[2].set(xlabel="t", ylabel="max |phi|")
    savefig(fig, dest)


def taylor(run, dest):
    df = pd.read_csv(run / "taylor.csv")
    eps = df.epsilon_or_seed
    rem = (df.lhs - df.rhs).abs()
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.loglog(eps, rem, "o-", label="|G(U+eU) - G(U) - e<g,dU>|")
    ax.loglog(eps, rem.iloc[0] * (eps / eps.iloc[0]) ** 2, "k--", label="slope 2")
    ax.set(xlabel="epsilon")
    ax.legend(fontsize=8)
    savefig(fig, dest)


def optimizer(run, dest):
    df = pd.read_csv(run / "optimize_log.csv")
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.semilogy(df["iter"], df.cost, label="cost")
    ax.semilogy(df["iter"], df.kkt_residual, label="KKT residual")
    ax.set(xlabel="iteration")
    ax.legend()
    savefig(fig, dest)


def convergence(run, dest, x, ys):
    df = pd.read_csv(run / "convergence.csv")
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    for y in ys:
        ax.loglog(df[x], df[y], "o-", label=y)
    ax.set(xlabel=x)
    ax.legend()
    savefig(fig, dest)


def main():
    runs = Path(sys.argv[1] if len(sys.argv) > 1 else "runs")
    plots = runs / "plots"
    plots.mkdir(parents=True, exist_ok=True)
    for name in ("simulate", "simulate_do"):
        if (runs / name / "diagnostics.csv").exists():
            diagnostics(runs / name, plots / f"{name}.png")
    if (runs / "taylor" / "taylor.csv").exists():
        taylor(runs / "taylor", plots / "taylor.png")
    for name in ("optimize_kkt", "optimize_inverse_crime"):
        if (runs / name / "optimize_log.csv").exists():
            optimizer(runs / name, plots / f"{name}.png")
    if (runs / "conv_brinkman" / "convergence.csv").exists():
        convergence(runs / "conv_brinkman", plots / "conv_brinkman.png", "h", ["error_l2", "error_max"])
    if (runs / "conv_time" / "convergence.csv").exists():
        convergence(runs / "conv_time", plots / "conv_time.png", "dt", ["difference_l2"])


if __name__ == "__main__":
    main()
