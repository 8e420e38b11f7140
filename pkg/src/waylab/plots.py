"""Figure rendering for the CLI's --plot flag.

Imported lazily so matplotlib stays optional at runtime; the Agg backend
keeps everything headless.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

__all__ = ["sweep_figure", "bound_figure"]


def sweep_figure(rows, path):
    """Best error and spread variance against the budget, saved as PNG."""
    budgets = [r.budget for r in rows]
    errors = [r.min_error for r in rows]
    variances = [r.spread_variance for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(budgets, errors, "o-", color="tab:blue", label="min error")
    ax.set_xlabel("spread budget")
    ax.set_ylabel("min error", color="tab:blue")
    ax.tick_params(axis="y", labelcolor="tab:blue")
    twin = ax.twinx()
    twin.plot(budgets, variances, "s--", color="tab:orange", label="spread variance")
    twin.set_ylabel("spread variance", color="tab:orange")
    twin.tick_params(axis="y", labelcolor="tab:orange")
    ax.set_xticks(budgets)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def bound_figure(reports, path):
    """Noise second moment against its Robertson lower bound, saved as PNG."""
    rhs = [r.bound_rhs for r in reports]
    eps = [r.epsilon_sq for r in reports]
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(rhs, eps, s=18, color="tab:blue", zorder=3)
    top = max(max(rhs, default=0.0), max(eps, default=0.0), 1e-12)
    ax.plot([0, top], [0, top], "k--", linewidth=1, label="bound")
    ax.set_xlabel("bound rhs")
    ax.set_ylabel("epsilon squared")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
