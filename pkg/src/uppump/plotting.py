"""Quick-look PNG figures written next to the CSV output.

Only used with ``--figures``; the CSV files remain the primary output.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams.update({"figure.figsize": (6.0, 3.6), "axes.linewidth": 0.6,
                     "font.size": 9, "savefig.dpi": 150})


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_bath(bath, out_dir) -> Path:
    fig, ax = plt.subplots()
    ax.plot(bath.grid, bath.density, lw=1.0, label=r"$S(\omega)$")
    ax.set_xlabel(r"$\omega$ (cm$^{-1}$)")
    ax.set_ylabel(r"$S(\omega)$")
    ax2 = ax.twinx()
    ax2.plot(bath.grid, bath.occupation(), lw=1.0, color="C1", label=r"$|\alpha|^2$")
    ax2.set_ylabel(r"$|\alpha(\omega)|^2$")
    ax.set_title(f"bath, integral of S = {bath.total_modes():.3g}")
    return _save(fig, Path(out_dir) / "bath.png")


def plot_rates(result, out_dir) -> list[Path]:
    table = result.table
    fig, (a, b) = plt.subplots(1, 2, figsize=(8.0, 3.4))
    a.plot(table[:, 0], table[:, 1], lw=1.0)
    a.set_xlabel(r"$\Omega$ (cm$^{-1}$)")
    a.set_ylabel(r"$E(0)$ (cm$^{-1}$)")
    b.plot(table[:, 0], table[:, 2], lw=1.0, label=r"$\gamma$")
    b.plot(table[:, 0], table[:, 3], lw=1.0, ls="--", label=r"$\tilde\gamma$")
    b.set_xlabel(r"$\Omega$ (cm$^{-1}$)")
    b.set_ylabel("rate (cm$^{-1}$)")
    b.legend(frameon=False)
    paths = [_save(fig, Path(out_dir) / "rates.png")]
    if result.drives:
        fig, ax = plt.subplots()
        for k, series in sorted(result.drives.items()):
            ax.plot(series[:, 0], series[:, 1], lw=0.8, label=f"$E_{k + 1}$")
        ax.set_xlabel(r"$t$ (cm)")
        ax.set_ylabel(r"$E_k(t)$ (cm$^{-1}$)")
        ax.legend(frameon=False)
        paths.append(_save(fig, Path(out_dir) / "drives.png"))
    return paths


def plot_observables(rows, header, out_dir) -> Path:
    pops = [i for i, name in enumerate(header) if name.startswith("n")]
    fig, ax = plt.subplots()
    for i in pops:
        ax.plot(rows[:, 0], rows[:, i], lw=1.0, label=header[i])
    ax.set_xlabel(r"$\tau = \Omega_1 t$")
    ax.set_ylabel(r"$\langle n_k \rangle$")
    ax.set_yscale("symlog", linthresh=1e-2)
    ax.legend(frameon=False, ncol=len(pops))
    return _save(fig, Path(out_dir) / "observables.png")
