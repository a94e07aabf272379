"""Figures for the CLI report paths.  Uses the non-interactive Agg backend and
writes PNG files next to the CSV output.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "figure.dpi": 150,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return path


def profile_figure(profile, path) -> Path:
    """w(r) on linear and log axes, with the tail law overlaid."""
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7, 2.8))
        r = profile.r_nodes
        ax1.plot(r, profile.w_values, label="w")
        ax1.plot(r, profile.dw_values, label="w'")
        ax1.set_xlabel("r")
        ax1.legend()
        ax2.semilogy(r, profile.w_values, label="w")
        rt = r[r > 2]
        ax2.semilogy(rt, profile.tail(rt), "--", label=r"$C r^{-1/2} e^{-r}$")
        ax2.axvline(profile.r_match, color="0.6", lw=0.8)
        ax2.set_xlabel("r")
        ax2.legend()
        return _save(fig, path)


def density_figure(state, path, title: str = "") -> Path:
    """|u|² and arg u of a ground state."""
    g = state.grid
    ext = [-g.L, g.L, -g.L, g.L]
    u = state.field.values
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7, 3.2))
        im = ax1.imshow(np.abs(u) ** 2, origin="lower", extent=ext, cmap="viridis")
        fig.colorbar(im, ax=ax1, shrink=0.8)
        ax1.set_title(r"$|u|^2$")
        im = ax2.imshow(np.angle(u), origin="lower", extent=ext, cmap="twilight",
                        vmin=-np.pi, vmax=np.pi)
        fig.colorbar(im, ax=ax2, shrink=0.8)
        ax2.set_title(r"arg $u$")
        for ax in (ax1, ax2):
            ax.set_xlabel("$x_1$")
            ax.set_ylabel("$x_2$")
        if title:
            fig.suptitle(title)
        return _save(fig, path)


def scaling_figure(report, a_star, path) -> Path:
    """ε_a against a* − a with the fitted power law, and the two ratios that tend to 1."""
    gaps = a_star - report.column("a")
    eps = report.column("epsilon")
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7, 2.8))
        ax1.loglog(gaps, eps, "o", label=r"$\varepsilon_a$")
        ax1.loglog(gaps, report.column("alpha"), "s", mfc="none", label=r"$\alpha_a$")
        fit = np.exp(report.intercept) * gaps**report.slope
        ax1.loglog(gaps, fit, "-", color="0.4", label=f"slope {report.slope:.3f}")
        ax1.set_xlabel(r"$a^* - a$")
        ax1.legend()
        a_rel = report.column("a") / a_star
        ax2.plot(a_rel, report.column("eps_over_alpha"), "o-", label=r"$\varepsilon_a/\alpha_a$")
        ax2.plot(a_rel, -report.column("mu_eps2"), "s-", label=r"$-\mu_a\varepsilon_a^2$")
        ax2.axhline(1.0, color="0.6", lw=0.8)
        ax2.set_xlabel(r"$a/a^*$")
        ax2.legend()
        return _save(fig, path)


def aligned_figure(report, path) -> Path:
    """Real and imaginary parts of the aligned profiles along x₂ = 0."""
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7, 2.8))
        for ap in report.aligned:
            g = ap.grid
            mid = g.N // 2
            lab = f"a = {ap.a:.4g}"
            ax1.plot(g.x, ap.real_part[mid], label=lab)
            ax2.plot(g.x, ap.imag_part[mid] / ap.alpha**2, label=lab)
        ax1.set_xlim(-6, 6)
        ax2.set_xlim(-6, 6)
        ax1.set_xlabel("$x_1$")
        ax2.set_xlabel("$x_1$")
        ax1.set_title(r"Re $v_a$")
        ax2.set_title(r"Im $v_a / \alpha_a^2$")
        ax1.legend()
        return _save(fig, path)


def spectrum_figure(report, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.5, 2.8))
        ax.plot(np.arange(len(report.eigenvalues)), report.eigenvalues, "o")
        ax.axhline(0.0, color="0.6", lw=0.8)
        ax.set_xlabel("index")
        ax.set_ylabel("eigenvalue")
        ax.set_title(f"operator {report.tag}")
        return _save(fig, path)


def sweep_figures(result, profile, out_dir) -> list:
    out = Path(out_dir)
    paths = [profile_figure(profile, out / "profile.png")]
    for k, s in enumerate(result.states):
        paths.append(density_figure(s, out / f"density_{k:02d}.png", f"a/a* = {s.a / result.a_star:.4f}"))
    if result.report is not None:
        paths.append(scaling_figure(result.report, result.a_star, out / "scaling.png"))
        paths.append(aligned_figure(result.report, out / "aligned.png"))
    return paths
