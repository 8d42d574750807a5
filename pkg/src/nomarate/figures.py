"""Plot-ready data tables behind each published figure.

Analytical figures (3, 4, 5, 9, 10) are evaluated directly; stochastic
ones (2b, 6, 7, 8) honour ``runs``, ``seed`` and ``deployment`` of the
supplied :class:`ExperimentConfig`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize_scalar

from .geometry import FIXTURE_RULES, fixture_link
from .experiments import BENCHMARK, CSIFREE, SCHEMES, ExperimentConfig, run_sweep
from .pair_allocation import (
    EQUAL_RATE,
    MAX_SUM_RATE,
    equal_rate_gamma,
    fairness_kappa,
    oma_rates,
    sum_rate_beta_star,
    sum_rate_gamma_tilde,
    xi_relative_error,
)
from .rate_control import f_of_n, phi_exact
from .threshold import cdf_curve, threshold_cdf_montecarlo

FIGURE_IDS = ("2a", "2b", "3a", "3b", "4", "5a", "5b", "6", "7a", "7b", "8a", "8b", "9", "10")
MU_CURVES = (0.0, 0.05, 0.1, 0.2, 0.5, 1.0)
MU_AXIS = tuple(round(0.1 * k, 1) for k in range(11))
ALPHA_AXIS = (3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0)
EPSILON_CURVES = (1e-1, 1e-2)
DENSITIES = (0.5e-4, 1e-4, 2e-4)


@dataclass
class Table:
    """Labelled columns plus a one-line description for the header."""

    name: str
    columns: tuple[str, ...]
    rows: list[tuple]
    description: str = ""

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def where(self, **match) -> "Table":
        idx = {self.columns.index(k): v for k, v in match.items()}
        rows = [r for r in self.rows if all(r[i] == v for i, v in idx.items())]
        return Table(self.name, self.columns, rows, self.description)

    def write_csv(self, stream) -> None:
        if self.description:
            stream.write(f"# {self.description}\n")
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in row])


def _optimum_ratio(objective, total: float) -> tuple[float, float]:
    """Ratio ``q = phi1/phi2 in (0, 1]`` maximising ``objective(phi1, phi2)`` at fixed sum."""

    def value(q):
        return float(objective(q * total / (1.0 + q), total / (1.0 + q)))

    res = minimize_scalar(lambda q: -value(q), bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-9})
    q, best = float(res.x), -float(res.fun)
    if value(1.0) >= best:
        q, best = 1.0, value(1.0)
    return q, best


def _ratio_table(name, objective_of_mu, description, sums=None) -> Table:
    sums = np.round(np.linspace(0.05, 5.0, 100), 10) if sums is None else sums
    rows = []
    for mu in MU_CURVES:
        objective = objective_of_mu(mu)
        for s in sums:
            q, best = _optimum_ratio(objective, float(s))
            rows.append((mu, float(s), q, best))
    return Table(name, ("mu", "phi_sum", "ratio", "objective"), rows, description)


def figure_2a() -> Table:
    eps_grid = np.logspace(-3, -0.3, 28)
    rows = []
    for rule in FIXTURE_RULES:
        for eps in eps_grid:
            link = fixture_link(rule, 100, float(eps))
            # the linear estimate written out, so large eps is tabulated without warnings
            rows.append((rule, float(eps), phi_exact(link).value, float(eps) * link.power_ratio))
    return Table(
        "2a",
        ("deployment", "epsilon", "phi_exact", "phi_approx"),
        rows,
        "single-user SIR threshold versus outage target; exact root and linear estimate eps*upsilon, r_i=30 m, 100 interferers",
    )


def figure_2b(config: ExperimentConfig, epsilon: float = 1e-2) -> Table:
    theta_db = np.arange(-40.0, 10.0 + 1e-9, 2.0)
    theta = 10.0 ** (theta_db / 10.0)
    inv = cdf_curve(theta, epsilon, method="inversion")
    closed = cdf_curve(theta, epsilon, method="closed-form")
    mc = threshold_cdf_montecarlo(theta, epsilon, deployment=config.deployment, runs=config.runs, seed=config.seed)
    rows = list(zip(theta_db, inv.F, closed.F, mc.F, mc.error))
    return Table(
        "2b",
        ("theta_dB", "F_analytic", "F_closed", "F_mc", "ci"),
        rows,
        f"OMA threshold CDF at eps={epsilon!r}: Laplace inversion of 1/(s 1F1), closed form 1-sinc(d) z^d, "
        f"Monte Carlo over {config.runs} deployments with 95% half-width",
    )


def figure_3a() -> Table:
    return _ratio_table(
        "3a",
        lambda mu: lambda p1, p2: equal_rate_gamma(p1, p2, mu),
        "equal-rate: ratio phi1/phi2 maximising the common threshold at fixed phi1+phi2",
    )


def figure_3b() -> Table:
    rows = []
    phi2 = 0.6
    for phi1 in (0.4, 0.5):
        oma = oma_rates(phi1, phi2, EQUAL_RATE)[0]
        for mu in np.linspace(0.0, 1.0, 101):
            noma = math.log2(1.0 + equal_rate_gamma(phi1, phi2, float(mu)))
            rows.append((phi1, phi2, float(mu), noma, oma))
    return Table(
        "3b",
        ("phi1", "phi2", "mu", "rate_noma", "rate_oma"),
        rows,
        "equal-rate per-user rate log2(1+gamma) for NOMA against 0.5*log2(1+min phi) for OMA",
    )


def figure_4() -> Table:
    return _ratio_table(
        "4",
        lambda mu: lambda p1, p2: sum_rate_gamma_tilde(p1, p2, mu, 0.5),
        "max-sum-rate at beta=1/2: ratio phi1/phi2 maximising (1+gamma1)(1+gamma2) at fixed phi1+phi2",
    )


def _sum_rate_rows(phi1, phi2):
    rows = []
    for mu in np.linspace(0.0, 1.0, 101):
        mu = float(mu)
        beta = float(sum_rate_beta_star(phi1, phi2, mu))
        noma = math.log2(sum_rate_gamma_tilde(phi1, phi2, mu, beta))
        oma = sum(oma_rates(phi1, phi2, MAX_SUM_RATE))
        k_noma = float(fairness_kappa(phi1, phi2, mu, "noma", require_optimal=False))
        k_oma = float(fairness_kappa(phi1, phi2, mu, "oma"))
        rows.append((phi1, phi2, mu, beta, noma, oma, k_noma, k_oma))
    return rows


def figure_5a() -> Table:
    rows = [r[:6] for phi2 in (0.2, 0.6) for r in _sum_rate_rows(0.1, phi2)]
    return Table(
        "5a",
        ("phi1", "phi2", "mu", "beta", "rate_noma", "rate_oma"),
        rows,
        "max-sum-rate: NOMA log2 of (1+gamma1)(1+gamma2) at the optimal beta against OMA 0.5*log2((1+phi1)(1+phi2))",
    )


def figure_5b() -> Table:
    rows = [r[:3] + r[6:] for phi2 in (0.2, 0.6) for r in _sum_rate_rows(0.1, phi2)]
    return Table(
        "5b",
        ("phi1", "phi2", "mu", "kappa_noma", "kappa_oma"),
        rows,
        "fairness coefficient gamma1/gamma2: NOMA at beta=1/2 against OMA phi1/phi2",
    )


def _sweep_table(name, results, description) -> Table:
    rows = [
        (eps, p.scheme, p.objective, p.density, p.alpha, p.mu, p.mean, p.half_width, p.runs, p.skipped)
        for eps, res in results
        for p in res.points
    ]
    columns = ("epsilon", "scheme", "objective", "density", "alpha", "mu", "mean", "half_width", "runs", "skipped")
    return Table(name, columns, rows, description)


def figure_6(config: ExperimentConfig) -> Table:
    cfg = replace(
        config, epsilon=(1e-2, 1e-2), mu_grid=(0.1,), alpha_grid=(4.0,), density_grid=DENSITIES, schemes=CSIFREE
    )
    return _sweep_table(
        "6",
        [(1e-2, run_sweep(cfg))],
        f"CSI-free average rate versus BS density, eps=0.01, alpha=4, mu=0.1, {config.runs} runs, 95% half-width",
    )


def _epsilon_sweeps(config, objective, **grids):
    """One sweep per outage target; benchmarks do not depend on it and run once."""
    results = []
    for i, eps in enumerate(EPSILON_CURVES):
        schemes = SCHEMES if i == 0 else CSIFREE
        cfg = replace(config, epsilon=(eps, eps), objectives=(objective,), schemes=schemes, density_grid=(1e-4,), **grids)
        results.append((eps, run_sweep(cfg)))
    return results


def _figure_7_8(name, config, objective, axis):
    grids = {"alpha_grid": ALPHA_AXIS, "mu_grid": (0.1,)} if axis == "alpha" else {"alpha_grid": (4.0,), "mu_grid": MU_AXIS}
    label = "equal-rate" if objective == EQUAL_RATE else "max-sum-rate"
    return _sweep_table(
        name,
        _epsilon_sweeps(config, objective, **grids),
        f"{label} average rate versus {axis} for CSI-free schemes at eps in {{0.1, 0.01}} and full-CSI "
        f"benchmarks (benchmark rows carry the first eps), {config.runs} runs, 95% half-width",
    )


def figure_9() -> Table:
    eps_grid = np.logspace(-3, -0.05, 30)
    rows = []
    for n in (1, 2, 5, 10, 100, math.inf):
        for eps in eps_grid:
            eps = float(eps)
            rows.append((n, eps, f_of_n(n, eps), eps / (1.0 - eps), -math.log1p(-eps)))
    return Table(
        "9",
        ("n", "epsilon", "f", "f_one", "f_limit"),
        rows,
        "surrogate factor f(n,eps)=n((1-eps)^(-1/n)-1) with its n=1 value eps/(1-eps) and limit -ln(1-eps)",
    )


def figure_10() -> Table:
    gamma1 = [10.0 ** (k / 10.0) for k in range(-30, 11)]
    rows = [
        (g2, g1, float(xi_relative_error(g1, g2)))
        for g2 in (1e-2, 1e-1, 1.0)
        for g1 in gamma1
    ]
    return Table(
        "10",
        ("gamma2", "gamma1", "xi_percent"),
        rows,
        "relative error in percent of the arithmetic-mean bound on (1+gamma1)(1+gamma2)",
    )


def reproduce_figure(fig_id: str, config: ExperimentConfig | None = None) -> Table:
    """Data table for figure ``fig_id``; ``config`` feeds runs, seed and deployment."""
    fig_id = str(fig_id).lower()
    if fig_id not in FIGURE_IDS:
        raise KeyError(f"unknown figure id {fig_id!r}; expected one of {', '.join(FIGURE_IDS)}")
    config = config or ExperimentConfig()
    builders = {
        "2a": figure_2a,
        "2b": lambda: figure_2b(config),
        "3a": figure_3a,
        "3b": figure_3b,
        "4": figure_4,
        "5a": figure_5a,
        "5b": figure_5b,
        "6": lambda: figure_6(config),
        "7a": lambda: _figure_7_8("7a", config, EQUAL_RATE, "alpha"),
        "7b": lambda: _figure_7_8("7b", config, EQUAL_RATE, "mu"),
        "8a": lambda: _figure_7_8("8a", config, MAX_SUM_RATE, "alpha"),
        "8b": lambda: _figure_7_8("8b", config, MAX_SUM_RATE, "mu"),
        "9": figure_9,
        "10": figure_10,
    }
    return builders[fig_id]()


__all__ = ["FIGURE_IDS", "Table", "reproduce_figure", "BENCHMARK"]
