"""Command-line experiment runner.

    rfrr --config experiment.toml [--out PATH] [--format csv|json]
         [--threads N] [--seed U64] [--quiet] [--no-timestamp]

Exit status: 0 success, 2 invalid configuration, 3 numerical failure at one
or more grid points (all rows are still written, with a ``status`` column).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig, load
from .diagnostics import theorem1_diagnostics
from .empirical import EmpiricalSpectrumError, empirical_diagonalize, load_matrix, standardize_columns
from .equivalents import OutOfRegimeError, deterministic_risk
from .fixed_point import FixedPointError
from .rates import ScalingConfig, rate_exponents
from .simulator import mc_risk_feature_map, mc_risk_gaussian, stream
from .spectrum import SpectrumError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
LAMBDA_PROXY = 1e-10

BASE_COLUMNS = [
    "n", "p", "lambda", "sigma2", "nu1", "nu2", "upsilon", "chi", "bias", "variance",
    "risk", "mc_risk", "mc_stderr", "rel_err", "gamma_b", "gamma_v", "gamma", "region",
    "status", "seed",
]
RATE_COLUMNS = ["alpha", "r", "ell", "q", "valid"]
CROSSOVER_COLUMNS = ["ell_star", "q_star", "q_hat", "gamma_star", "q0"]
DIAG_COLUMNS = [
    "m", "rho_p", "rho_tilde_np", "gamma_lambda", "gamma_plus", "rho_gamma_plus",
    "err_rate", "ratio1", "ratio2", "eta_star",
]
EXTRA_COLUMNS = {
    "rates": RATE_COLUMNS + CROSSOVER_COLUMNS,
    "phase": RATE_COLUMNS,
    "diag": DIAG_COLUMNS,
}
NUMERIC_FAILURES = (
    FixedPointError, OutOfRegimeError, EmpiricalSpectrumError, SpectrumError,
    ArithmeticError, np.linalg.LinAlgError, ValueError,
)

log = logging.getLogger("rfrr")


def columns(mode):
    return BASE_COLUMNS + EXTRA_COLUMNS.get(mode, [])


def _finite_status(row, status="ok"):
    for v in row.values():
        if isinstance(v, float) and not math.isfinite(v):
            return "nonfinite"
    return status


def _equiv_cells(n, p, lam, cfg, spectrum):
    cells = {}
    status = "ok"
    if lam == 0:
        warnings.warn(f"lambda = 0 replaced by {LAMBDA_PROXY} for the deterministic equivalent")
        lam, status = LAMBDA_PROXY, "ok:lambda_proxy"
    eq = deterministic_risk(n, p, lam, cfg.sigma2, spectrum, cfg.solver)
    cells.update(nu1=eq.nu1, nu2=eq.nu2, upsilon=eq.upsilon, chi=eq.chi,
                 bias=eq.bias, variance=eq.variance, risk=eq.risk)
    return cells, status


def _mc_cells(n, p, lam, cfg, seed, threads, maps):
    if cfg.feature_map is not None:
        fm, target = maps
        est = mc_risk_feature_map(fm, target, n, p, cfg.d, lam, cfg.sigma2, cfg.n_test,
                                  cfg.replicates, seed, threads)
    else:
        est = mc_risk_gaussian(n, p, lam, cfg.sigma2, cfg.spectrum, cfg.replicates, seed, threads)
    return {"mc_risk": est.mean_risk, "mc_stderr": est.std_err}


def _rate_cells(cfg, q, ell):
    # closed-form exponents are attached when the spectrum is a power law and
    # the grid is expressed through (ell, q)
    sp = cfg.raw.get("spectrum", {})
    if q is None or ell is None or "alpha" not in sp or "r" not in sp:
        return {}
    rep = rate_exponents(ScalingConfig(float(sp["alpha"]), float(sp["r"]), ell, q, cfg.sigma2))
    return {"gamma_b": float(rep.gamma_b), "gamma_v": float(rep.gamma_v),
            "gamma": float(rep.gamma), "region": rep.region}


def _point_row(mode, n, p, lam, q, ell, cfg: ExperimentConfig, seed, threads, spectrum, maps):
    row = {"n": n, "p": p, "lambda": lam, "sigma2": cfg.sigma2, "seed": seed}
    try:
        status = "ok"
        row.update(_rate_cells(cfg, q, ell))
        if mode in ("equiv", "sweep", "empirical"):
            cells, status = _equiv_cells(n, p, lam, cfg, spectrum)
            row.update(cells)
        if mode in ("simulate", "sweep"):
            row.update(_mc_cells(n, p, lam, cfg, seed, threads, maps))
        if mode == "sweep":
            row["rel_err"] = abs(row["mc_risk"] - row["risk"]) / row["risk"]
        if mode == "diag":
            rep = theorem1_diagnostics(n, p, lam, cfg.sigma2, spectrum, cfg.eta_star, cfg.solver)
            row.update(nu1=rep.nu1, nu2=rep.nu2, m=rep.m, rho_p=rep.rho_p,
                       rho_tilde_np=rep.rho_tilde_np, gamma_lambda=rep.gamma_lambda,
                       gamma_plus=rep.gamma_plus, rho_gamma_plus=rep.rho_gamma_plus,
                       err_rate=rep.err_rate, ratio1=rep.ratio1, ratio2=rep.ratio2,
                       eta_star=rep.eta_star)
        row["status"] = _finite_status(row, status)
    except NUMERIC_FAILURES as exc:
        row["status"] = f"error: {type(exc).__name__}: {exc}"
    return row


def _rate_rows(cfg: ExperimentConfig, seed):
    rows = []
    for alpha in cfg.alpha:
        for r in cfg.r:
            for ell in cfg.ell:
                for q in cfg.q:
                    row = {"alpha": alpha, "r": r, "ell": ell, "q": q,
                           "sigma2": cfg.sigma2, "seed": seed}
                    try:
                        rep = rate_exponents(ScalingConfig(alpha, r, ell, q, cfg.sigma2))
                        row.update(gamma_b=float(rep.gamma_b), gamma_v=float(rep.gamma_v),
                                   gamma=float(rep.gamma), region=rep.region, valid=rep.valid)
                        if cfg.mode == "rates":
                            c = rep.crossovers
                            row.update(ell_star=float(c.ell_star), q_star=float(c.q_star),
                                       q_hat=float(c.q_hat), gamma_star=float(c.gamma_star),
                                       q0=float(c.q0))
                        row["status"] = _finite_status(row)
                    except ValueError as exc:
                        row["status"] = f"error: {exc}"
                    rows.append(row)
    return rows


def _empirical_spectrum(cfg: ExperimentConfig, seed, fm, target):
    e = cfg.empirical
    base = e.get("_base", Path("."))
    standardize = bool(e.get("standardize", False))

    def path(key):
        v = Path(e[key])
        return v if v.is_absolute() else base / v

    try:
        if "X" in e:
            X = load_matrix(path("X"), standardize)
            y = load_matrix(path("y")).ravel()
            if standardize:
                y = standardize_columns(y[:, None]).ravel()
            if "W" in e:
                W = load_matrix(path("W"))
            else:
                W = fm.sample_weights(int(e["P"]), X.shape[1], stream(seed, 2))
        else:
            N, P, d = int(e["N"]), int(e["P"]), int(e.get("d", cfg.d or 0))
            if d < 1:
                raise ConfigError("empirical: data dimension 'd' is required")
            rng = stream(seed, 2)
            X = fm.sample_data(N, d, rng)
            W = fm.sample_weights(P, d, rng)
            y = target(X)
    except KeyError as exc:
        raise ConfigError(f"empirical: missing field {exc.args[0]!r}") from None
    except OSError as exc:
        raise ConfigError(f"empirical: {exc}") from None
    est = empirical_diagonalize(X, y, W, fm, keep_vectors=False)
    spectrum = est.to_spectrum()
    if "export" in e:
        spectrum.to_csv(path("export"))
    return spectrum


def run(cfg: ExperimentConfig, seed=None, threads=None):
    """Evaluate every grid point; return ``(rows, exit_code)`` in grid order."""
    seed = cfg.seed if seed is None else seed
    if threads is None:
        env = os.environ.get("RFRR_THREADS")
        threads = max(1, int(env)) if env else 1
    if cfg.mode in ("rates", "phase"):
        rows = _rate_rows(cfg, seed)
    else:
        maps = cfg.resolve_maps(seed) if cfg.feature_map is not None else None
        spectrum = cfg.spectrum
        if cfg.mode == "empirical":
            spectrum = _empirical_spectrum(cfg, seed, *maps)
        points = list(cfg.labelled_points())
        if cfg.mode in ("simulate", "sweep"):
            # replicates are the parallel unit here; points run in order
            rows = [_point_row(cfg.mode, *pt, cfg, seed, threads, spectrum, maps) for pt in points]
        else:
            def job(pt):
                return _point_row(cfg.mode, *pt, cfg, seed, 1, spectrum, maps)

            with ThreadPoolExecutor(max_workers=threads) as pool:
                rows = list(pool.map(job, points))
    failed = [r for r in rows if r["status"].startswith("error")]
    for r in failed:
        where = ", ".join(f"{k}={r[k]}" for k in ("n", "p", "lambda", "alpha", "r", "ell", "q") if k in r)
        log.error("grid point %s failed: %s", where, r["status"])
    return rows, EXIT_NUMERIC if failed else EXIT_OK


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(rows, mode, fmt="csv", timestamp=None):
    cols = columns(mode)
    if fmt == "json":
        doc = {"mode": mode, "version": __version__, "columns": cols,
               "rows": [{c: r.get(c) for c in cols} for r in rows]}
        if timestamp:
            doc = {"generated": timestamp, **doc}
        return json.dumps(doc, indent=1, allow_nan=True) + "\n"
    buf = io.StringIO()
    if timestamp:
        buf.write(f"# generated {timestamp} by rfrr {__version__}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in cols])
    return buf.getvalue()


def build_parser():
    ap = argparse.ArgumentParser(prog="rfrr", description="Random-feature ridge regression experiments.")
    ap.add_argument("--config", required=True, help="TOML experiment file")
    ap.add_argument("--out", help="output file (default: config [output].path, else stdout)")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--threads", type=int, help="worker threads (default: $RFRR_THREADS or 1)")
    ap.add_argument("--seed", type=int, help="override the config seed")
    ap.add_argument("--quiet", action="store_true")
    ap.add_argument("--no-timestamp", action="store_true")
    ap.add_argument("--version", action="version", version=f"rfrr {__version__}")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("rfrr: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.ERROR if args.quiet else logging.INFO)
    log.propagate = False
    try:
        with warnings.catch_warnings():
            if args.quiet:
                warnings.simplefilter("ignore")
            return _main(args)
    finally:
        log.removeHandler(handler)


def _main(args):
    try:
        cfg = load(args.config)
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        fmt = args.format or cfg.out_format
        if fmt not in ("csv", "json"):
            raise ConfigError(f"output.format must be csv or json, got {fmt!r}")
        log.info("mode=%s", cfg.mode)
        rows, code = run(cfg, args.seed, args.threads)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except NUMERIC_FAILURES as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    stamp = None if args.no_timestamp else datetime.now(timezone.utc).isoformat(timespec="seconds")
    text = render(rows, cfg.mode, fmt, stamp)
    out = args.out or cfg.out_path
    if out:
        Path(out).write_text(text)
        log.info("wrote %d rows to %s", len(rows), out)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
