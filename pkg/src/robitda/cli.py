"""Command line interface: ``robitda run``, ``robitda verify`` and ``robitda plot``."""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .chains import ChainConfig, ChainError, run_chain
from .diagnostics import ConstantSeriesError, autocorrelation, mcse_batch_means, running_mean
from .io import RunManifest, dataset_fingerprint, ingest_csv
from .linalg import Prior, SingularPriorError, build_gprior
from .models import ModelKind
from .special import DomainError
from .svg import Series, style_for, write_chart
from .verify import SuiteConfig, TraceInstanceSpec, run_suite


class ConfigError(ValueError):
    """Invalid command line configuration; the message names the offending flag."""

    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


def _fmt(v) -> str:
    return f"{float(v):.17g}"


def _split(text: str) -> list[str]:
    return [s.strip() for s in str(text).split(",") if s.strip()]


def _floats(text, flag) -> list[float]:
    try:
        return [float(s) for s in _split(text)]
    except ValueError:
        raise ConfigError(flag, f"expected comma separated numbers, got {text!r}") from None


def _load_vector(path, flag):
    try:
        return np.atleast_1d(np.loadtxt(path, delimiter=None if not str(path).endswith(".csv") else ",", dtype=float))
    except (OSError, ValueError) as exc:
        raise ConfigError(flag, str(exc)) from None


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _dump_json(path: Path, obj):
    path.write_text(json.dumps(_json_safe(obj), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- run


def _build_models(args) -> list[ModelKind]:
    models = []
    for name in _split(args.model):
        if name == "probit":
            models.append(ModelKind.probit())
        elif name == "robit":
            nus = _floats(args.nu, "--nu")
            if not nus:
                raise ConfigError("--nu", "robit needs at least one degrees-of-freedom value")
            for nu in nus:
                try:
                    models.append(ModelKind.robit(nu, allow_low_nu=args.allow_low_nu))
                except DomainError as exc:
                    raise ConfigError("--nu", str(exc)) from None
        else:
            raise ConfigError("--model", f"unknown model {name!r}; choose robit or probit")
    if not models:
        raise ConfigError("--model", "no model given")
    return models


def _build_prior(args, dataset) -> tuple[Prior, dict]:
    if args.prior == "identity":
        return Prior.identity(dataset.p), {"kind": "identity"}
    if args.prior == "gprior":
        if not args.g > 0:
            raise ConfigError("--g", f"must be positive, got {args.g}")
        prior = build_gprior(dataset.X, args.g)  # SingularPriorError handled by caller
        return prior, {"kind": "gprior", "g": args.g, "sigma_a": prior.sigma_a.tolist()}
    if args.prior_mean is None or args.prior_precision is None:
        flag = "--prior-mean" if args.prior_mean is None else "--prior-precision"
        raise ConfigError(flag, "required with --prior file")
    mean = _load_vector(args.prior_mean, "--prior-mean")
    prec = _load_vector(args.prior_precision, "--prior-precision")
    p = dataset.p
    if mean.shape != (p,):
        raise ConfigError("--prior-mean", f"expected {p} values, got {mean.size}")
    if prec.size != p * p:
        raise ConfigError("--prior-precision", f"expected a {p}x{p} matrix, got {prec.size} values")
    try:
        prior = Prior(mean, prec.reshape(p, p), label="file")
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise ConfigError("--prior-precision", str(exc)) from None
    return prior, {"kind": "file", "beta_a": mean.tolist(), "sigma_a": prior.sigma_a.tolist()}


def chain_label(model: ModelKind, chain: str, prior: Prior) -> str:
    nu = f"{model.nu:g}" if model.is_robit else ""
    parts = [model.name, nu, chain, prior.label]
    return "-".join(p for p in parts if p)


def _validate_run(args):
    if args.iters < 1:
        raise ConfigError("--iters", "must be at least 1")
    if args.burnin is not None and args.burnin < 0:
        raise ConfigError("--burnin", "must be nonnegative")
    if args.thin < 1:
        raise ConfigError("--thin", "must be at least 1")
    if args.iters // args.thin <= args.max_lag:
        raise ConfigError("--max-lag", f"needs more than {args.max_lag} kept draws per chain")
    for c in _split(args.chain):
        if c not in ("da", "sandwich"):
            raise ConfigError("--chain", f"unknown chain kind {c!r}; choose da or sandwich")


def _write_samples(path: Path, sample, manifest_hash: str, label: str):
    p = sample.draws.shape[1]
    with path.open("w", newline="") as fh:
        fh.write(f"# manifest {manifest_hash} chain {label}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration"] + [f"beta_{j + 1}" for j in range(p)] + ["lik", "lpd"])
        for it, row, lik, lpd in zip(sample.iteration, sample.draws, sample.lik, sample.lpd):
            w.writerow([int(it)] + [_fmt(v) for v in row] + [_fmt(lik), _fmt(lpd)])


def _write_table(path: Path, manifest_hash: str, index_name: str, index, columns: dict):
    with path.open("w", newline="") as fh:
        fh.write(f"# manifest {manifest_hash}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([index_name] + list(columns))
        cols = list(columns.values())
        for k, ix in enumerate(index):
            w.writerow([int(ix)] + [_fmt(c[k]) for c in cols])


def _traced(sample, mode: str, coords: list[int]) -> dict:
    if mode == "likpd":
        return {"lik": sample.lik, "lpd": sample.lpd}
    return {f"beta_{j}": sample.draws[:, j - 1] for j in coords}


def cmd_run(args) -> int:
    _validate_run(args)
    try:
        dataset = ingest_csv(args.data, intercept=args.intercept, response=args.response,
                             columns=int(args.columns) if args.columns and args.columns.isdigit()
                             else (_split(args.columns) if args.columns else None))
    except FileNotFoundError:
        raise ConfigError("--data", f"no such file {args.data}") from None
    models = _build_models(args)
    prior, prior_spec = _build_prior(args, dataset)
    coords = [int(c) for c in _split(args.coords)] if args.coords else list(range(1, dataset.p + 1))
    if any(not 1 <= c <= dataset.p for c in coords):
        raise ConfigError("--coords", f"coordinates must lie in 1..{dataset.p}")
    init = tuple(_floats(args.init, "--init")) if args.init else None
    if init is not None and len(init) != dataset.p:
        raise ConfigError("--init", f"expected {dataset.p} values, got {len(init)}")

    configs, labels = [], []
    for model in models:
        for chain in _split(args.chain):
            configs.append(ChainConfig(model, chain, args.iters, args.burnin, args.thin, args.seed,
                                       stream=len(configs), init_beta=init))
            labels.append(chain_label(model, chain, prior))
    manifest = RunManifest(
        chains=[{
            "label": lab, "model": c.model.name, "nu": c.model.nu, "chain": c.chain,
            "iterations": c.iterations, "burn_in": c.effective_burn_in, "thin": c.thin,
            "seed": c.seed, "stream": c.stream, "init_beta": list(c.init_beta) if c.init_beta else None,
        } for lab, c in zip(labels, configs)],
        prior=prior_spec,
        dataset=dataset_fingerprint(dataset),
        options={"max_lag": args.max_lag, "trace": args.trace, "coords": coords,
                 "intercept": args.intercept, "response": args.response},
        version=__version__,
        timestamps={"started": _dt.datetime.now(_dt.timezone.utc).isoformat()},
    )
    h = manifest.hash
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    acf_cols, rm_cols, scalar_cols, summary = {}, {}, {}, {}
    rm_index = None
    for label, cfg in zip(labels, configs):
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            sample = run_chain(cfg, dataset, prior)
        _write_samples(out / f"samples_{label}.csv", sample, h, label)
        scalar_cols[f"{label}:lik"] = sample.lik
        scalar_cols[f"{label}:lpd"] = sample.lpd
        rm_index = sample.iteration
        stats = {}
        for name, series in _traced(sample, args.trace, coords).items():
            col = f"{label}:{name}"
            try:
                acf = autocorrelation(series, args.max_lag).values
            except ConstantSeriesError:
                acf = np.full(args.max_lag + 1, np.nan)
            acf_cols[col] = acf
            rm_cols[col] = running_mean(series).values
        for j in range(dataset.p):
            x = sample.draws[:, j]
            try:
                lag1 = float(autocorrelation(x, 1).values[1])
            except ConstantSeriesError:
                lag1 = None
            stats[f"beta_{j + 1}"] = {"mean": float(np.mean(x)), "mcse": _mcse(x), "acf_lag1": lag1}
        for name in ("lik", "lpd"):
            x = getattr(sample, name)
            stats[name] = {"mean": float(np.mean(x)), "mcse": _mcse(x)}
        summary[label] = {"coordinates": stats, "draws": len(sample), "wall_time": sample.wall_time,
                          "degenerate_h_steps": sample.degenerate}

    _write_table(out / "acf.csv", h, "lag", np.arange(args.max_lag + 1), acf_cols)
    _write_table(out / "runmean.csv", h, "iteration", rm_index, rm_cols)
    _write_table(out / "trace_scalars.csv", h, "iteration", rm_index, scalar_cols)
    _dump_json(out / "summary.json", {"manifest_hash": h, "columns": list(dataset.columns), "chains": summary})
    manifest.timestamps["finished"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    (out / "manifest.json").write_text(manifest.to_json() + "\n")
    plot_outputs(out)
    print(f"wrote {len(labels)} chains to {out} (manifest {h[:12]})")
    return 0


def _mcse(x) -> float | None:
    try:
        return mcse_batch_means(x)
    except ValueError:
        return None


# ---------------------------------------------------------------- plot


def _read_table(path: Path):
    with path.open(newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    return header, body, _manifest_hash(path)


def _manifest_hash(path: Path) -> str:
    with path.open() as fh:
        first = fh.readline()
    return first.split()[2] if first.startswith("# manifest") else ""


def plot_outputs(out) -> list[Path]:
    """Write ``figures/acf_*.svg`` and ``figures/runmean_*.svg`` from the CSV tables in ``out``."""
    out = Path(out)
    written = []
    for stem, xlabel, ylabel in (("acf", "lag", "autocorrelation"), ("runmean", "iteration", "running mean")):
        header, body, h = _read_table(out / f"{stem}.csv")
        groups: dict[str, list[Series]] = {}
        for k, col in enumerate(header[1:], start=1):
            label, _, quantity = col.rpartition(":")
            color, dashed = style_for(label)
            groups.setdefault(quantity, []).append(Series(label, body[:, 0], body[:, k], color, dashed))
        for quantity, series in groups.items():
            written.append(write_chart(out / "figures" / f"{stem}_{quantity}.svg", series,
                                       title=f"{ylabel}: {quantity}", xlabel=xlabel, ylabel=ylabel,
                                       note=f"manifest {h}"))
    return written


def cmd_plot(args) -> int:
    for p in plot_outputs(args.out):
        print(p)
    return 0


# ---------------------------------------------------------------- verify


def cmd_verify(args) -> int:
    specs = tuple(TraceInstanceSpec.parse(s) for s in args.trace_instance) or (TraceInstanceSpec(),)
    cfg = SuiteConfig(
        omega_instances=args.omega_instances,
        theta_samples=args.theta_samples,
        grid_points=args.grid_points,
        trace_instances=specs,
        seeds=args.seeds,
        outer_nodes=args.outer_nodes,
        outer_nodes_2d=args.outer_nodes_2d,
        inner_draws=args.inner_draws,
        seed=args.seed,
        falsify=args.falsify,
    )
    if cfg.seeds < 1:
        raise ConfigError("--seeds", "must be at least 1")
    report = run_suite(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _dump_json(out / "verification_report.json", report.to_dict())
    for c in report.checks + report.traces:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}")
    return 0 if report.passed else 1


# ---------------------------------------------------------------- entry


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="robitda", description="Robit/probit DA and sandwich samplers.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run chains and write samples, diagnostics and figures")
    r.add_argument("--data", required=True, help="CSV with a header row")
    r.add_argument("--response", default="y")
    r.add_argument("--intercept", action=argparse.BooleanOptionalAction, default=True)
    r.add_argument("--columns", help="first K predictors, or comma separated column names")
    r.add_argument("--model", default="robit", help="comma list of robit, probit")
    r.add_argument("--nu", default="3", help="comma list of robit degrees of freedom")
    r.add_argument("--allow-low-nu", action="store_true", help="permit robit with nu <= 2")
    r.add_argument("--chain", default="da,sandwich", help="comma list of da, sandwich")
    r.add_argument("--prior", choices=("identity", "gprior", "file"), default="identity")
    r.add_argument("--g", type=float, default=1000.0)
    r.add_argument("--prior-mean", help="file with the prior mean (p numbers)")
    r.add_argument("--prior-precision", help="file with the p x p prior precision")
    r.add_argument("--iters", type=int, default=1000)
    r.add_argument("--burnin", type=int, default=None, help="default: 2 x iters")
    r.add_argument("--thin", type=int, default=1)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--init", help="comma separated starting beta")
    r.add_argument("--max-lag", type=int, default=50)
    r.add_argument("--trace", choices=("coords", "likpd"), default="coords")
    r.add_argument("--coords", help="1-based coordinates to trace (default: all)")
    r.add_argument("--out", default="out")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="run the bound/identity suite and trace estimates")
    v.add_argument("--falsify", choices=("mills",), help="inject a falsified bound (negative control)")
    v.add_argument("--trace-instance", action="append", default=[], help="e.g. n=2,p=1,nu=3 (repeatable)")
    v.add_argument("--seeds", type=int, default=2)
    v.add_argument("--omega-instances", type=int, default=100)
    v.add_argument("--theta-samples", type=int, default=1000)
    v.add_argument("--grid-points", type=int, default=500)
    v.add_argument("--outer-nodes", type=int, default=128)
    v.add_argument("--outer-nodes-2d", type=int, default=32, help="nodes per axis when p = 2")
    v.add_argument("--inner-draws", type=int, default=1000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", default="out")
    v.set_defaults(func=cmd_verify)

    pl = sub.add_parser("plot", help="regenerate SVG figures from the CSV outputs")
    pl.add_argument("--out", default="out")
    pl.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"robitda: error: {exc}", file=sys.stderr)
        return 2
    except SingularPriorError as exc:
        print(f"robitda: error: --prior gprior: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"robitda: error: {exc}", file=sys.stderr)
        return 2
    except ChainError as exc:
        print(f"robitda: chain error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
