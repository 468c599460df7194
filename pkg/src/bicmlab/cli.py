"""Command-line front end producing self-describing CSV tables.

Every output starts with ``#`` comment lines that record the full effective
configuration as ``key = value`` pairs, so ``bicmlab --config out.csv``
recomputes the same table.  Configuration files use the same ``key = value``
syntax (with or without the leading ``#``); command-line flags override file
values, which override the defaults.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import re
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import __version__
from .channel import ChannelModel
from .constellation import Labeling, by_name, load_constellation
from .exponents import GallagerFamily, GallagerFunction, cutoff_rates
from .measures import LN2, bicm_capacity, cm_capacity, gmi, pseudo_gmi_extrinsic_tx
from .metrics import DecodingMetric, ExtrinsicModel
from .numerics import BACKENDS, DEFAULT_NODES, DEFAULT_SAMPLES, EngineConfig
from .simulate import RandomCodeExperiment, run as run_experiment

__all__ = ["RunSpec", "ConfigError", "load_config", "dump_config", "run_spec", "render_csv", "main"]

COMMANDS = ("capacity", "gmi", "exponent", "cutoff", "validate")
SEED_ENV = "BICMLAB_SEED"
METRIC_ALIASES = {
    "matched": "matched",
    "sum": "bicm_sum",
    "bicm_sum": "bicm_sum",
    "maxlog": "bicm_maxlog",
    "bicm_maxlog": "bicm_maxlog",
    "ext-tx": "extrinsic_tx",
    "extrinsic_tx": "extrinsic_tx",
    "ext-hyp": "extrinsic_hyp",
    "extrinsic_hyp": "extrinsic_hyp",
}
_DEFAULT_METRICS = {"validate": ("matched",)}
_FAMILY_RE = re.compile(r"^(sum|maxlog|ext-tx|ext-hyp)(?:-(coupled)|-s([0-9.eE+-]+))?$")


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


def _floats(text: str) -> tuple:
    try:
        vals = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from None
    return vals


def parse_rates(text: str) -> tuple:
    """``start:step:stop`` (stop included) or a comma list, in bits."""
    text = text.strip()
    if not text:
        return ()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"rate range must be start:step:stop, got {text!r}")
        try:
            a, h, b = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"bad rate range {text!r}") from None
        if not h > 0:
            raise ConfigError("rate step must be positive")
        n = round((b - a) / h)
        if n < 0 or abs(a + n * h - b) > 1e-9 * max(1.0, abs(b)):
            raise ConfigError(f"rate range {text!r} does not land on its stop value")
        vals = tuple(a + k * h for k in range(n + 1))
    else:
        vals = _floats(text)
    return tuple(round(v, 10) for v in vals)


def _names(text: str) -> tuple:
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}") from None


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}") from None


@dataclass(frozen=True)
class RunSpec:
    """Effective configuration of one CLI run."""

    command: str
    constellation: str = "qam16"
    labeling: str = "brgc"
    channel: str = "awgn"
    snr_db: tuple = (5.0,)
    metrics: tuple = ("sum", "maxlog")
    families: tuple = ("cm", "ind", "sum", "maxlog")
    rates: tuple = ()
    extrinsic: str = "none"
    backend: str = "monte_carlo"
    samples: int = DEFAULT_SAMPLES
    nodes: int = DEFAULT_NODES
    seed: int = 0
    N: int = 4
    rate: float = 0.5
    trials: int = 10_000
    out: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}, got {self.command!r}")
        if self.channel not in ("awgn", "rayleigh"):
            raise ConfigError(f"unknown channel {self.channel!r}")
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown backend {self.backend!r}")
        if not self.snr_db or not all(math.isfinite(v) for v in self.snr_db):
            raise ConfigError("snr_db must be a nonempty list of finite values")
        if any(b <= a for a, b in zip(self.rates, self.rates[1:])):
            raise ConfigError("rate grid must be strictly increasing")
        if not self.metrics or not self.families:
            raise ConfigError("at least one metric and one family are required")
        if self.command == "exponent" and not self.rates:
            raise ConfigError("exponent needs a rate grid (--rates)")

    def engine(self) -> EngineConfig:
        return EngineConfig(self.backend, self.samples, self.nodes, self.seed)


_PARSE = {
    "command": str.strip,
    "constellation": str.strip,
    "labeling": str.strip,
    "channel": str.strip,
    "snr_db": _floats,
    "metrics": _names,
    "families": _names,
    "rates": parse_rates,
    "extrinsic": str.strip,
    "backend": str.strip,
    "samples": _int,
    "nodes": _int,
    "seed": _int,
    "N": _int,
    "rate": _float,
    "trials": _int,
    "out": str.strip,
}


def _format(value) -> str:
    if isinstance(value, tuple):
        return ",".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(spec: RunSpec) -> list[str]:
    """``key = value`` lines for every field except the output path."""
    return [f"{f.name} = {_format(getattr(spec, f.name))}".rstrip() for f in fields(spec) if f.name != "out"]


def _read_pairs(path) -> dict:
    pairs = {}
    seen_version = False
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        comment = line.startswith("#")
        if comment:
            line = line[1:].strip()
            if line.startswith("bicmlab "):
                seen_version = True
        if not line:
            continue
        if "=" not in line:
            if comment:
                continue
            if seen_version:
                break  # start of a CSV table
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (t.strip() for t in line.split("=", 1))
        if key not in _PARSE:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in pairs:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            pairs[key] = _PARSE[key](value)
        except ConfigError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return pairs


def _build(values: dict) -> RunSpec:
    values = dict(values)
    if "command" not in values:
        raise ConfigError("no command given")
    if "metrics" not in values and values["command"] in _DEFAULT_METRICS:
        values["metrics"] = _DEFAULT_METRICS[values["command"]]
    if "seed" not in values and os.environ.get(SEED_ENV):
        values["seed"] = _int(os.environ[SEED_ENV])
    return RunSpec(**values)


def load_config(path, overrides: dict | None = None) -> RunSpec:
    """Read a ``key = value`` file; ``overrides`` take precedence.

    Lines may carry a leading ``#``, so the header of a CSV written by this
    tool is itself a valid configuration.  Errors name the offending line.
    """
    values = _read_pairs(path)
    values.update(overrides or {})
    return _build(values)


# resolution of names into library objects


def resolve_constellation(spec: RunSpec):
    name = spec.constellation
    if Path(name).is_file():
        c, l, _ = load_constellation(name)
        if spec.labeling not in ("file", "brgc"):
            raise ConfigError("a constellation file carries its own labeling")
        return c, l
    try:
        c, gray = by_name(name)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if spec.labeling == "brgc":
        return c, gray
    if spec.labeling == "natural":
        return c, Labeling(range(c.M), name="natural")
    raise ConfigError(f"unknown labeling {spec.labeling!r}")


def resolve_extrinsic(text: str) -> ExtrinsicModel:
    if text in ("none", "perfect"):
        return ExtrinsicModel(text)
    if text.startswith("gaussian:"):
        raw = text.split(":", 1)[1]
        try:
            sig = tuple(float(t) for t in raw.split("/"))
        except ValueError:
            raise ConfigError(f"bad extrinsic sigma in {text!r}") from None
        return ExtrinsicModel("gaussian_llr", sig[0] if len(sig) == 1 else sig)
    raise ConfigError(f"unknown extrinsic model {text!r}; use none, perfect or gaussian:<sigma>")


def resolve_metric(name: str, c, l, extrinsic: str) -> DecodingMetric:
    kind = METRIC_ALIASES.get(name)
    if kind is None:
        raise ConfigError(f"unknown metric {name!r}; choose from {sorted(set(METRIC_ALIASES))}")
    ext = resolve_extrinsic(extrinsic) if kind.startswith("extrinsic") else None
    return DecodingMetric(kind, c, l, ext)


def resolve_family(name: str, extrinsic: str) -> GallagerFamily:
    if name in ("cm", "ind"):
        return GallagerFamily(name, name=name)
    match = _FAMILY_RE.match(name)
    if not match:
        raise ConfigError(f"unknown family {name!r}")
    base, coupled, s = match.groups()
    kind = METRIC_ALIASES[base]
    if coupled:
        mode, s_val = "coupled", None
    elif s is not None:
        mode, s_val = "fixed", _float(s)
    else:
        mode, s_val = "optimize", None
    if kind.startswith("extrinsic"):
        return GallagerFamily("extrinsic", kind, mode, s_val, resolve_extrinsic(extrinsic), name=name)
    return GallagerFamily("bicm", kind, mode, s_val, name=name)


# commands


def _channels(spec):
    return [(snr, ChannelModel.from_db(spec.channel, snr)) for snr in spec.snr_db]


def _measure_rows(spec, c, l):
    eng = spec.engine()
    rows = []
    base = [spec.constellation, spec.labeling, spec.channel]
    for snr, ch in _channels(spec):
        if spec.command == "capacity":
            results = [("cm", "matched", cm_capacity(ch, c, eng)), ("bicm", "sum", bicm_capacity(ch, c, l, eng))]
        else:
            results = []
            for name in spec.metrics:
                metric = resolve_metric(name, c, l, spec.extrinsic)
                if metric.kind == "extrinsic_tx":
                    res = pseudo_gmi_extrinsic_tx(metric.extrinsic, ch, c, l, eng)
                    results.append(("pseudo_gmi", name, res))
                else:
                    results.append(("gmi", name, gmi(metric, ch, eng)))
        for measure, metric, res in results:
            s_opt = math.nan if res.s_opt is None else res.s_opt
            rows.append([measure, metric, *base, snr, res.value, res.std_error, s_opt, res.converged])
    cols = ["measure", "metric", "constellation", "labeling", "channel", "snr_db", "value_bits", "std_error", "s_opt", "converged"]
    return cols, rows


def _exponent_rows(spec, c, l):
    eng = spec.engine()
    families = [resolve_family(f, spec.extrinsic) for f in spec.families]
    rows = []
    for snr, ch in _channels(spec):
        for fam in families:
            g = GallagerFunction(fam, ch, c, l, eng)
            for R in spec.rates:
                p = g.exponent(R)
                rows.append(
                    [fam.name, spec.constellation, spec.labeling, spec.channel, snr, R, p.Er, p.rho_opt, p.s_opt, p.std_error, p.converged]
                )
    cols = ["family", "constellation", "labeling", "channel", "snr_db", "R_bits", "Er_nats", "rho_opt", "s_opt", "std_error", "converged"]
    return cols, rows


def _cutoff_rows(spec, c, l):
    eng = spec.engine()
    kinds = []
    for name in spec.metrics:
        kind = METRIC_ALIASES.get(name)
        if kind not in ("bicm_sum", "bicm_maxlog"):
            raise ConfigError(f"cutoff rates take the sum or maxlog metric, got {name!r}")
        kinds.append((name, kind))
    rows = []
    base = [spec.constellation, spec.labeling, spec.channel]
    for snr, ch in _channels(spec):
        r0 = cutoff_rates(ch, c, l, eng, metrics=tuple(k for _, k in kinds))
        entries = [("R0_cm", "matched", r0.R0_cm, math.nan)]
        entries += [("R0_q", name, r0.R0_q[kind], r0.s_opt[kind]) for name, kind in kinds]
        entries += [("R0_ind", "ind", r0.R0_ind, math.nan), ("R0_av", "av", r0.R0_av, math.nan)]
        for quantity, metric, est, s in entries:
            rows.append([quantity, metric, *base, snr, est.mean, est.mean / LN2, est.std_error, s])
    cols = ["quantity", "metric", "constellation", "labeling", "channel", "snr_db", "value_nats", "value_bits", "std_error", "s_opt"]
    return cols, rows


def _validate_rows(spec, c, l):
    eng = spec.engine()
    rows = []
    for snr, ch in _channels(spec):
        for name in spec.metrics:
            metric = resolve_metric(name, c, l, spec.extrinsic)
            exp = RandomCodeExperiment(spec.N, spec.rate, spec.trials, metric, seed=spec.seed)
            r = run_experiment(exp, ch, eng)
            rows.append(
                [spec.N, spec.rate, name, r.trials, r.pe_hat, r.ci_halfwidth, r.bound, r.rho_opt, r.s_opt,
                 r.errors, spec.constellation, spec.labeling, spec.channel, snr]
            )
    cols = ["N", "R_bits", "metric", "trials", "Pe_hat", "ci_halfwidth", "bound", "rho_opt", "s_opt",
            "errors", "constellation", "labeling", "channel", "snr_db"]
    return cols, rows


_COMMANDS = {
    "capacity": _measure_rows,
    "gmi": _measure_rows,
    "exponent": _exponent_rows,
    "cutoff": _cutoff_rows,
    "validate": _validate_rows,
}


def run_spec(spec: RunSpec):
    """Execute ``spec``; returns ``(columns, rows)``."""
    c, l = resolve_constellation(spec)
    # fail on any bad name before spending time on computation
    resolve_extrinsic(spec.extrinsic)
    for name in spec.metrics:
        resolve_metric(name, c, l, spec.extrinsic)
    for name in spec.families:
        resolve_family(name, spec.extrinsic)
    return _COMMANDS[spec.command](spec, c, l)


def render_csv(spec: RunSpec, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# bicmlab {__version__}\n")
    for line in dump_config(spec):
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_format(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bicmlab",
        description="Capacities, GMI, error exponents and cutoff rates for coded modulation and BICM.",
    )
    p.add_argument("command", nargs="?", choices=COMMANDS, help="what to compute (may come from --config)")
    p.add_argument("--config", help="key = value file (a CSV written by this tool also works)")
    p.add_argument("--constellation", help="bpsk, qpsk, pskN, qamN or a '<bits> <re> <im>' file")
    p.add_argument("--labeling", help="brgc (default), natural or file")
    p.add_argument("--channel", help="awgn or rayleigh")
    p.add_argument("--snr-db", dest="snr_db", help="SNR in dB; a comma list sweeps")
    p.add_argument("--metrics", help="comma list of matched, sum, maxlog, ext-tx, ext-hyp")
    p.add_argument("--families", help="comma list of cm, ind, sum, maxlog, <metric>-coupled, <metric>-s<value>, ext-tx, ext-hyp")
    p.add_argument("--rates", help="rates in bits: start:step:stop (inclusive) or a comma list")
    p.add_argument("--extrinsic", help="none, perfect or gaussian:<sigma>")
    p.add_argument("--backend", help="monte_carlo or gauss_hermite")
    p.add_argument("--samples", help=f"Monte Carlo samples (default {DEFAULT_SAMPLES})")
    p.add_argument("--nodes", help=f"Gauss-Hermite nodes per axis (default {DEFAULT_NODES})")
    p.add_argument("--seed", help=f"64-bit seed (default from ${SEED_ENV}, else 0)")
    p.add_argument("--N", dest="N", help="block length for validate")
    p.add_argument("--rate", help="rate in bits for validate")
    p.add_argument("--trials", help="trials for validate")
    p.add_argument("--out", help="output CSV path (default stdout)")
    return p


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        overrides = {}
        for key, value in vars(args).items():
            if key in ("config",) or value is None:
                continue
            overrides[key] = _PARSE[key](value)
        spec = load_config(args.config, overrides) if args.config else _build(overrides)
        columns, rows = run_spec(spec)
    except ValueError as exc:
        parser.exit(2, f"bicmlab: error: {exc}\n")
    text = render_csv(spec, columns, rows)
    if spec.out:
        Path(spec.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0
