"""Batch command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical
failure (including a failed reliability audit).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import DEFAULT_MU, ConfigError, RunConfig
from .experiments import reliability_audit, run_sweep
from .figures import FIGURE_IDS, reproduce_figure
from .geometry import CoCellSamplingError
from .pair_allocation import InfeasibleAllocationError, allocate, allocate_phi
from .rate_control import LinkSpec
from .threshold import cdf_curve

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
COMMANDS = ("allocate", "cdf", "sweep", "figure", "audit")
MANIFEST = "manifest.ini"

log = logging.getLogger("nomarate")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI file with one section per module")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: out)")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--runs", type=int, help="override the Monte-Carlo run count")
    common.add_argument("--quiet", action="store_true", help="only print errors")

    parser = _Parser(prog="nomarate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("allocate", parents=[common], help="allocate power and rates for one UE pair")
    p.add_argument("--phi", type=float, nargs=2, metavar=("PHI_A", "PHI_B"), help="single-user thresholds")
    p.add_argument("--mu", type=float, help=f"SIC imperfection factor (default {DEFAULT_MU})")
    p.add_argument("--objective", choices=("equal-rate", "max-sum-rate"))

    sub.add_parser("cdf", parents=[common], help="threshold CDF on a theta grid")
    sub.add_parser("sweep", parents=[common], help="Monte-Carlo average rates over the configured grids")
    p = sub.add_parser("figure", parents=[common], help="data table behind one figure")
    p.add_argument("figure_id", nargs="?", metavar="ID", help=f"one of {', '.join(FIGURE_IDS)}")
    p.add_argument("--figure", dest="figure_flag", metavar="ID")
    sub.add_parser("audit", parents=[common], help="empirical outage check of allocated thresholds")
    return parser


def load_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    if args.config is None:
        cfg.mu_defaulted = True
    updates = {"command": args.command}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.runs is not None:
        if args.runs < 1:
            raise ConfigError("--runs must be at least 1")
        updates["runs"] = args.runs
    if args.command == "allocate":
        if args.mu is not None:
            updates["mu"] = args.mu
        if args.phi is not None:
            updates["phi_a"], updates["phi_b"] = args.phi
        if args.objective is not None:
            updates["objective"] = args.objective
    if args.command == "figure":
        fig = args.figure_flag or args.figure_id or cfg.figure
        if fig is None:
            raise ConfigError("figure needs an id")
        if str(fig).lower() not in FIGURE_IDS:
            raise ConfigError(f"unknown figure id {fig!r}; expected one of {', '.join(FIGURE_IDS)}")
        updates["figure"] = str(fig).lower()
    mu_defaulted = cfg.mu_defaulted and "mu" not in updates
    cfg = replace(cfg, **updates)
    cfg.mu_defaulted = mu_defaulted and cfg.mu is None
    return cfg


def _say(args, text=""):
    if not args.quiet:
        print(text)


def _prepare_out(out: Path) -> Path:
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise UsageError(f"output directory {out} is not writable")
    return out


def _write(out: Path, name: str, writer) -> Path:
    path = out / name
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer(fh)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc
    return path


def _finish(args, cfg: RunConfig, out: Path, files) -> None:
    files = list(files) + [_write(out, MANIFEST, lambda fh: fh.write(cfg.to_ini()))]
    for path in files:
        _say(args, f"wrote {path}")


def cmd_allocate(args, cfg: RunConfig) -> int:
    if cfg.mu_defaulted:
        _notice(args, f"mu not given; using the default {DEFAULT_MU}")
    mu = cfg.mu_value
    if cfg.phi_a is not None and cfg.phi_b is not None:
        res = allocate_phi(cfg.phi_a, cfg.phi_b, mu, cfg.p_total, cfg.objective)
    elif cfg.r_a is not None and cfg.r_b is not None and cfg.interferers_a and cfg.interferers_b:
        links = [
            LinkSpec(r, np.array(d), e, cfg.alpha)
            for r, d, e in ((cfg.r_a, cfg.interferers_a, cfg.epsilon[0]), (cfg.r_b, cfg.interferers_b, cfg.epsilon[1]))
        ]
        res = allocate(links[0], links[1], mu, cfg.p_total, cfg.objective, cfg.phi_method)
    else:
        raise ConfigError("allocate needs phi_a and phi_b, or r_a/interferers_a and r_b/interferers_b")
    first, second = res.order
    lines = [
        f"objective         {res.objective}",
        f"mu                {res.mu!r}",
        f"decoding order    {first} first, then {second}" + (" (tie)" if res.tie else ""),
        f"phi1, phi2        {res.phi1!r}, {res.phi2!r}",
        f"beta              {res.beta!r}" + ("  (all power to the first user)" if res.beta == 1.0 else ""),
        f"P1, P2            {res.p1!r}, {res.p2!r}",
        f"gamma1, gamma2    {res.gamma1!r}, {res.gamma2!r}",
        f"R1, R2 [bps/Hz]   {res.rate1!r}, {res.rate2!r}",
        f"OMA R1, R2        {res.oma_rate1!r}, {res.oma_rate2!r}",
        f"NOMA better (threshold rule)  {'yes' if res.gate_noma_better else 'no'}",
        f"NOMA better (direct rates)    {'yes' if res.direct_noma_better else 'no'}",
    ]
    print("\n".join(lines))
    return EXIT_OK


def _notice(args, text):
    if not args.quiet:
        print(f"notice: {text}", file=sys.stderr)


def cmd_cdf(args, cfg: RunConfig) -> int:
    out = _prepare_out(args.out)
    start, stop, step = cfg.theta_db
    theta_db = start + step * np.arange(int(round((stop - start) / step)) + 1)
    curve = cdf_curve(10.0 ** (theta_db / 10.0), cfg.epsilon[0], cfg.alpha, method=cfg.method, inverter=cfg.inverter)
    comment = (
        f"OMA threshold CDF P(gamma <= theta), eps={cfg.epsilon[0]!r}, alpha={cfg.alpha!r}; "
        + ("Laplace inversion of 1/(s 1F1(-d;1-d;-s))" if cfg.method == "inversion" else "closed form 1-sinc(d) z^d")
    )
    path = _write(out, "cdf.csv", lambda fh: curve.write_csv(fh, comment))
    _finish(args, cfg, out, [path])
    return EXIT_OK


def cmd_sweep(args, cfg: RunConfig) -> int:
    out = _prepare_out(args.out)
    result = run_sweep(cfg.experiment())
    comment = (
        "average rates: CSI-free E[log2(1+gamma)] / E[log2 of (1+gamma1)(1+gamma2)] and full-CSI benchmarks, "
        "OMA with equal halves, 95% normal half-widths"
    )
    path = _write(out, "sweep.csv", lambda fh: result.write_csv(fh, comment))
    if result.flagged:
        _notice(args, "more than 1% of realizations were skipped; see the 'skipped' column")
    _finish(args, cfg, out, [path])
    return EXIT_OK


def cmd_figure(args, cfg: RunConfig) -> int:
    out = _prepare_out(args.out)
    table = reproduce_figure(cfg.figure, cfg.experiment())
    path = _write(out, f"figure_{cfg.figure}.csv", table.write_csv)
    _finish(args, cfg, out, [path])
    return EXIT_OK


def cmd_audit(args, cfg: RunConfig) -> int:
    out = _prepare_out(args.out)
    records = reliability_audit(
        epsilons=cfg.audit_epsilons,
        realizations=cfg.audit_realizations,
        draws=cfg.audit_draws,
        deployment=cfg.deployment(),
        alpha=cfg.alpha,
        mu=cfg.mu_value,
        objective=cfg.objective,
        phi_method="exact",
        seed=cfg.seed,
    )

    def write(fh):
        fh.write("# empirical outage over Rayleigh fading at thresholds allocated from the exact single-user root\n")
        fh.write("realization,epsilon,rank,gamma,outage,sigma,deviation_sigma,passed\n")
        for r in records:
            fh.write(f"{r.realization},{r.epsilon!r},{r.rank},{r.gamma!r},{r.outage!r},{r.sigma!r},{r.deviation!r},{r.passed}\n")

    path = _write(out, "audit.csv", write)
    ok = True
    for eps in cfg.audit_epsilons:
        group = [r for r in records if r.epsilon == eps]
        passed = all(r.passed for r in group)
        ok &= passed
        worst = max(abs(r.deviation) for r in group)
        print(f"eps={eps!r}: {'PASS' if passed else 'FAIL'} ({len(group)} links, worst |dev| = {worst:.2f} sigma)")
    _finish(args, cfg, out, [path])
    return EXIT_OK if ok else EXIT_NUMERIC


HANDLERS = {"allocate": cmd_allocate, "cdf": cmd_cdf, "sweep": cmd_sweep, "figure": cmd_figure, "audit": cmd_audit}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args)
        return HANDLERS[args.command](args, cfg)
    except (ArithmeticError, CoCellSamplingError, InfeasibleAllocationError) as exc:
        print(f"nomarate: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, UsageError, KeyError, ValueError) as exc:
        print(f"nomarate: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
