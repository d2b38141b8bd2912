"""Static figures for sweep tables."""

from matplotlib.figure import Figure

AXIS_LABELS = {
    "snr_db": "Transmit SNR (dB)",
    "K": "Number of IRSs $K$",
    "N_uniform": "Elements per IRS $N_k$",
    "kappa_rd_uniform": r"Rician factor $\kappa_k^{(r,d)}$",
    "theta_single": r"Phase shift $\theta_{k,n}$ (rad)",
}

SERIES = (
    ("p_o", "analytical", dict(ls="-", marker="")),
    ("p_o_star", "optimal", dict(ls="-", marker="o", ms=3)),
    ("p_tilde", "asymptotic", dict(ls="--", marker="")),
)


def plot_sweep(columns, rows, path, title=None):
    """Probability columns of a sweep on a log axis, Monte Carlo with 3-sigma bars."""
    axis = columns[0]
    x = [r[axis] for r in rows]
    fig = Figure(figsize=(4.5, 3.4), dpi=150)
    ax = fig.subplots()
    for col, label, style in SERIES:
        if col in columns:
            ax.plot(x, [r[col] for r in rows], label=label, lw=1.2, **style)
    if "mc_p_hat" in columns:
        ax.errorbar(x, [r["mc_p_hat"] for r in rows],
                    yerr=[3 * r["mc_std_err"] for r in rows],
                    fmt="s", ms=3, mfc="none", capsize=2, label="Monte Carlo")
    ax.set_yscale("log")
    ax.set_xlabel(AXIS_LABELS.get(axis, axis))
    ax.set_ylabel("Outage probability")
    ax.grid(True, which="both", alpha=0.3, ls="--")
    ax.legend(fontsize=7)
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path)
    return path
