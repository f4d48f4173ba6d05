"""Experiment configuration: TOML files with ``schema_version = 1``.

Grid values are a scalar, a list, or a string ``"logspace(a, b, k)"``
(``10**linspace(a, b, k)``) / ``"linspace(a, b, k)"``.
"""
from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .features import FeatureMapSpec, TargetSpec, spike_with_overlap
from .fixed_point import SolverSettings
from .simulator import TARGET_STREAM, stream
from .spectrum import Spectrum, SpectrumError, explicit_spectrum, power_law_spectrum

SCHEMA_VERSION = 1
MODES = ("equiv", "simulate", "rates", "phase", "diag", "empirical", "sweep")
_SPACE = re.compile(r"^\s*(logspace|linspace)\s*\(([^)]*)\)\s*$")


class ConfigError(ValueError):
    pass


def parse_grid(value, name, integer=False):
    if isinstance(value, str):
        m = _SPACE.match(value)
        if not m:
            raise ConfigError(f"{name}: cannot parse grid {value!r}")
        try:
            a, b, k = (float(x) for x in m.group(2).split(","))
        except ValueError:
            raise ConfigError(f"{name}: {m.group(1)} needs three numbers") from None
        if k < 1 or k != int(k):
            raise ConfigError(f"{name}: point count must be a positive integer")
        fn = np.logspace if m.group(1) == "logspace" else np.linspace
        values = list(fn(a, b, int(k)))
    elif isinstance(value, (int, float)) and not isinstance(value, bool):
        values = [value]
    elif isinstance(value, list):
        values = value
    else:
        raise ConfigError(f"{name}: expected number, list or space string")
    if not values:
        raise ConfigError(f"{name}: grid is empty")
    try:
        values = [float(v) for v in values]
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: grid values must be numeric") from None
    if integer:
        out = [int(round(v)) for v in values]
        if min(out) < 1:
            raise ConfigError(f"{name}: values must be >= 1")
        return out
    return values


@dataclass
class ExperimentConfig:
    mode: str
    spectrum: Spectrum | None = None
    n: list = field(default_factory=list)
    p: list | None = None
    q: list | None = None
    lam: list | None = None
    ell: list | None = None
    sigma2: float = 0.0
    replicates: int = 20
    seed: int = 0
    out_path: str | None = None
    out_format: str = "csv"
    solver: SolverSettings = field(default_factory=SolverSettings)
    alpha: list = field(default_factory=list)
    r: list = field(default_factory=list)
    feature_map: FeatureMapSpec | None = None
    target: TargetSpec | None = None
    d: int | None = None
    n_test: int | None = None
    spike_overlap: float | None = None
    empirical: dict = field(default_factory=dict)
    eta_star: float = 0.25
    raw: dict = field(default_factory=dict)

    def resolve_maps(self, seed):
        """Feature map and teacher with random pieces fixed for ``seed``."""
        target = self.target
        if self.d is not None:
            target = target.resolve(self.d, stream(seed, TARGET_STREAM))
        fm = self.feature_map
        if self.spike_overlap is not None:
            fm = replace(fm, spike=spike_with_overlap(target.beta, self.spike_overlap))
        return fm, target

    def points(self):
        """(n, p, lam) triples in deterministic grid order."""
        for n, p, lam, _, _ in self.labelled_points():
            yield n, p, lam

    def labelled_points(self):
        """(n, p, lam, q, ell) with q / ell set to None when given directly."""
        for n in self.n:
            ps = [(p, None) for p in self.p] if self.p is not None else [
                (max(1, int(round(n**q))), q) for q in self.q]
            lams = [(lam, None) for lam in self.lam] if self.lam is not None else [
                (float(n) ** -(ell - 1), ell) for ell in self.ell]
            for p, q in ps:
                for lam, ell in lams:
                    yield n, p, lam, q, ell


def _spectrum(tbl, base):
    kinds = [k for k in ("path", "eigs", "alpha") if k in tbl]
    kind = tbl.get("kind")
    if kind is None:
        if len(kinds) != 1:
            raise ConfigError("spectrum: give exactly one of path, eigs/target, or alpha/r")
        kind = {"path": "csv", "eigs": "explicit", "alpha": "power_law"}[kinds[0]]
    try:
        if kind == "power_law":
            return power_law_spectrum(float(tbl["alpha"]), float(tbl["r"]), int(tbl.get("trunc", 10_000)))
        if kind == "explicit":
            return explicit_spectrum(tbl["eigs"], tbl["target"])
        if kind == "csv":
            path = Path(tbl["path"])
            return Spectrum.from_csv(path if path.is_absolute() else base / path)
    except KeyError as exc:
        raise ConfigError(f"spectrum: missing field {exc.args[0]!r}") from None
    except (SpectrumError, OSError) as exc:
        raise ConfigError(f"spectrum: {exc}") from None
    raise ConfigError(f"spectrum: unknown kind {kind!r}")


def _feature_map(tbl):
    kw = {k: v for k, v in tbl.items() if k not in ("overlap", "d")}
    if "overlap" in tbl and "spike" not in kw:
        # placeholder so the remaining fields validate now; the real spike
        # depends on the resolved teacher direction
        kw["spike"] = [1.0]
    try:
        return FeatureMapSpec(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"feature_map: {exc}") from None


def from_dict(raw: dict, base=Path(".")) -> ExperimentConfig:
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
    mode = raw.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    cfg = ExperimentConfig(mode=mode, raw=raw)
    cfg.sigma2 = float(raw.get("sigma2", 0.0))
    if cfg.sigma2 < 0:
        raise ConfigError("sigma2 must be >= 0")
    cfg.replicates = int(raw.get("replicates", 20))
    if cfg.replicates < 1:
        raise ConfigError("replicates must be >= 1")
    cfg.seed = int(raw.get("seed", 0))
    out = raw.get("output", {})
    cfg.out_path = out.get("path")
    cfg.out_format = out.get("format", "csv")
    try:
        cfg.solver = SolverSettings(**raw.get("solver", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"solver: {exc}") from None

    if mode in ("rates", "phase"):
        rt = raw.get("rates", {})
        sp = raw.get("spectrum", {})
        cfg.alpha = parse_grid(rt.get("alpha", sp.get("alpha")), "alpha") if ("alpha" in rt or "alpha" in sp) else []
        cfg.r = parse_grid(rt.get("r", sp.get("r")), "r") if ("r" in rt or "r" in sp) else []
        if not cfg.alpha or not cfg.r:
            raise ConfigError("rates: alpha and r are required")
        grid = raw.get("grid", {})
        if "ell" not in grid or "q" not in grid:
            raise ConfigError("grid: ell and q are required for rates/phase")
        cfg.ell = parse_grid(grid["ell"], "ell")
        cfg.q = parse_grid(grid["q"], "q")
        return cfg

    grid = raw.get("grid", {})
    # feature-map simulations and empirical runs do not need an explicit spectrum
    needs_spectrum = mode in ("equiv", "sweep", "diag") or (
        mode == "simulate" and "feature_map" not in raw)
    if "spectrum" in raw:
        cfg.spectrum = _spectrum(raw["spectrum"], base)
    elif needs_spectrum:
        raise ConfigError("spectrum table is required")
    if "n" not in grid:
        raise ConfigError("grid: field 'n' is required")
    cfg.n = parse_grid(grid["n"], "n", integer=True)
    if ("p" in grid) == ("q" in grid):
        raise ConfigError("grid: give exactly one of 'p' or 'q'")
    if "p" in grid:
        cfg.p = parse_grid(grid["p"], "p", integer=True)
    else:
        cfg.q = parse_grid(grid["q"], "q")
    if ("lambda" in grid) == ("ell" in grid):
        raise ConfigError("grid: give exactly one of 'lambda' or 'ell'")
    if "lambda" in grid:
        cfg.lam = parse_grid(grid["lambda"], "lambda")
    else:
        cfg.ell = parse_grid(grid["ell"], "ell")

    if "feature_map" in raw:
        cfg.feature_map = _feature_map(raw["feature_map"])
        tt = raw.get("target", {})
        try:
            cfg.target = TargetSpec(**tt)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"target: {exc}") from None
        if "overlap" in raw["feature_map"]:
            if "spike" in raw["feature_map"]:
                raise ConfigError("feature_map: give either spike or overlap, not both")
            cfg.spike_overlap = float(raw["feature_map"]["overlap"])
        cfg.d = int(raw.get("d", raw["feature_map"].get("d", 0)) or 0) or None
        if cfg.mode in ("simulate", "sweep") and cfg.d is None:
            raise ConfigError("feature-map simulation needs the data dimension 'd'")
        cfg.n_test = raw.get("n_test")
    if mode == "empirical":
        cfg.empirical = dict(raw.get("empirical", {}))
        if cfg.feature_map is None:
            raise ConfigError("empirical mode needs a [feature_map] table")
        cfg.empirical["_base"] = base
    cfg.eta_star = float(raw.get("diag", {}).get("eta_star", 0.25))
    return cfg


def load(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from None
    return from_dict(raw, path.parent)
