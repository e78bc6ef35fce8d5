"""Command-line front end.

Subcommands: eval, compare, sup, inf, regularize, verify. Generators are
given as JSON descriptors, as the shorthand power:2 / log / exp:1.5, or as
a path to a JSON descriptor file or an exported grid CSV. Runs are
deterministic for a fixed seed and configuration; the QAM_SEED environment
variable overrides the seed.

Exit status: 0 success, 1 failed certificate or method disagreement,
2 bad input or domain error.
"""

from __future__ import annotations

import csv
import functools
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import click
import numpy as np

from .compare import (
    compare_all,
    compare_convexity,
    compare_empirical,
    compare_ratio,
)
from .errors import CertificateError, DomainError, QamError
from .generator import (
    Generator,
    GridSampled,
    generator_from_descriptor,
)
from .grid import DEFAULT_GRID_N, GridFunction, Interval, is_pow2_plus_1
from .lattice_c1 import envelope_generator_c1
from .lattice_smooth import EnvelopeResult, Kind, envelope_generator_c2
from .generator import normalized_distance
from .mean import VectorSampler, qa_mean
from .oracle import run_verification_suite
from .regularize import regularize


@dataclass(frozen=True)
class Tolerances:
    tol_inv: float = 1e-12
    tol_eq: float = 1e-9
    tol_cmp: float = 1e-10
    eps_mono: float = 1e-9
    refine_tol: float = 1e-10

    def __post_init__(self):
        for name in ("tol_inv", "tol_eq", "tol_cmp", "eps_mono", "refine_tol"):
            if getattr(self, name) <= 0.0:
                raise DomainError(f"tolerance {name} must be positive")


@dataclass(frozen=True)
class RunConfig:
    interval: Interval
    grid_n: int = DEFAULT_GRID_N
    seed: int = 42
    tolerances: Tolerances = field(default_factory=Tolerances)
    output_path: str = "."

    def __post_init__(self):
        if self.grid_n < 33 or not is_pow2_plus_1(self.grid_n):
            raise DomainError(
                f"grid_n must be 2^k + 1 and at least 33, got {self.grid_n}"
            )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def parse_interval(text: str) -> Interval:
    try:
        lo, hi = (float(t) for t in text.split(","))
    except ValueError as exc:
        raise DomainError(f"interval must be 'lo,hi', got '{text}'") from exc
    return Interval(lo, hi)


def parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",") if t.strip() != ""])
    except ValueError as exc:
        raise DomainError(f"vector must be comma-separated reals, got '{text}'") from exc


def parse_generator_arg(text: str, interval: Interval) -> Generator:
    """Shorthand, inline JSON, or a path to a descriptor JSON / grid CSV."""
    text = text.strip()
    path = Path(text)
    if path.suffix in (".json", ".csv") and path.exists():
        if path.suffix == ".csv":
            return read_generator_csv(path)
        return generator_from_descriptor(json.loads(path.read_text()), interval)
    if text.startswith("{"):
        return generator_from_descriptor(json.loads(text), interval)
    name, _, arg = text.partition(":")
    if name == "log" and not arg:
        return generator_from_descriptor({"family": "log"}, interval)
    if name in ("power", "exp") and arg:
        return generator_from_descriptor({"family": name, "p": float(arg)}, interval)
    raise DomainError(
        f"cannot parse generator '{text}' (expected shorthand, JSON, or a file path)"
    )


def read_family_file(path: str, interval: Interval) -> list:
    obj = json.loads(Path(path).read_text())
    descs = obj["generators"] if isinstance(obj, dict) else obj
    if not isinstance(descs, list) or not descs:
        raise DomainError("family file must hold a nonempty list of descriptors")
    return [generator_from_descriptor(d, interval) for d in descs]


def write_generator_csv(path, gen: GridSampled):
    xs = gen.grid.xs()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if gen.derivatives is not None:
            w.writerow(["x", "value", "derivative"])
            for x, v, d in zip(xs, gen.grid.values, gen.derivatives):
                w.writerow([_fmt(x), _fmt(v), _fmt(d)])
        else:
            w.writerow(["x", "value"])
            for x, v in zip(xs, gen.grid.values):
                w.writerow([_fmt(x), _fmt(v)])


def read_generator_csv(path) -> GridSampled:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]
    if not data or header[:2] != ["x", "value"]:
        raise DomainError(f"{path}: expected columns x,value[,derivative]")
    xs = np.array([float(r[0]) for r in data])
    vals = np.array([float(r[1]) for r in data])
    steps = np.diff(xs)
    if np.ptp(steps) > 1e-9 * abs(steps[0]):
        raise DomainError(f"{path}: grid CSV must use uniform abscissae")
    derivs = None
    if len(header) > 2 and header[2] == "derivative":
        derivs = np.array([float(r[2]) for r in data])
    return GridSampled(GridFunction(Interval(xs[0], xs[-1]), vals), derivs)


def _echo_json(obj: dict):
    click.echo(json.dumps(obj, sort_keys=True, indent=2))


def _resolve_seed(flag_seed) -> int:
    env = os.environ.get("QAM_SEED")
    if env is not None:
        return int(env)
    return 42 if flag_seed is None else int(flag_seed)


@click.group()
@click.option("--interval", "-I", "interval_text", default="1,10", show_default=True,
              help="Working interval as lo,hi.")
@click.option("--grid-n", default=DEFAULT_GRID_N, show_default=True,
              help="Grid nodes (must be 2^k + 1, >= 33).")
@click.option("--seed", default=None, type=int,
              help="Sampler seed (QAM_SEED env var takes precedence).")
@click.option("--out", "out_dir", default=".", show_default=True,
              help="Directory for CSV/JSON artifacts.")
@click.pass_context
def main(ctx, interval_text, grid_n, seed, out_dir):
    """Quasi-arithmetic means: evaluate, compare, bound, regularize, verify."""
    try:
        config = RunConfig(
            interval=parse_interval(interval_text),
            grid_n=grid_n,
            seed=_resolve_seed(seed),
            output_path=out_dir,
        )
    except QamError as exc:
        raise click.exceptions.Exit(2) from _fail(exc)
    ctx.obj = config


def _fail(exc: Exception):
    click.echo(f"error: {exc}", err=True)
    return exc


def _guard(fn):
    """Map package errors onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (CertificateError,) as exc:
            _fail(exc)
            raise click.exceptions.Exit(1)
        except (QamError, OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
            _fail(exc)
            raise click.exceptions.Exit(2)

    return wrapper


@main.command("eval")
@click.option("--gen", "gen_text", required=True, help="Generator descriptor.")
@click.option("--vec", "vec_text", required=True, help="Comma-separated reals.")
@click.pass_obj
@_guard
def cmd_eval(config: RunConfig, gen_text, vec_text):
    """Print the quasi-arithmetic mean of a vector."""
    g = parse_generator_arg(gen_text, config.interval)
    v = parse_vector(vec_text)
    click.echo(_fmt(qa_mean(g, v)))


@main.command("compare")
@click.option("--f", "f_text", required=True)
@click.option("--g", "g_text", required=True)
@click.option("--method", type=click.Choice(["ratio", "convexity", "empirical", "all"]),
              default="all", show_default=True)
@click.pass_obj
@_guard
def cmd_compare(config: RunConfig, f_text, g_text, method):
    """Decide the dominance relation between two generators' means."""
    f = parse_generator_arg(f_text, config.interval)
    g = parse_generator_arg(g_text, config.interval)
    sampler = VectorSampler(seed=config.seed)
    if method == "ratio":
        _echo_json(compare_ratio(f, g, n=config.grid_n).to_json_dict())
    elif method == "convexity":
        _echo_json(compare_convexity(f, g, n=config.grid_n).to_json_dict())
    elif method == "empirical":
        _echo_json(compare_empirical(f, g, sampler).to_json_dict())
    else:
        merged, results = compare_all(f, g, sampler, n=config.grid_n)
        _echo_json(
            {
                "relation": merged.relation.value,
                "merged": merged.to_json_dict(),
                "methods": {m.value: v.to_json_dict() for m, v in results.items()},
            }
        )


def _write_envelope_artifacts(config: RunConfig, result: EnvelopeResult,
                              tag: str, pathway: str) -> dict:
    outdir = Path(config.output_path)
    outdir.mkdir(parents=True, exist_ok=True)
    gen = result.generator
    xs = gen.grid.xs()
    csv_path = outdir / f"{tag}_{pathway}.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        if pathway == "c2":
            w.writerow(["x", "G", "u", "u_prime"])
            ratio = result.envelope.ratio.values
            for x, gv, u, up in zip(xs, ratio, gen.grid.values, gen.derivatives):
                w.writerow([_fmt(x), _fmt(gv), _fmt(u), _fmt(up)])
        else:
            w.writerow(["x", "s", "u"])
            s = result.envelope.log_derivative.values
            for x, sv, u in zip(xs, s, gen.grid.values):
                w.writerow([_fmt(x), _fmt(sv), _fmt(u)])
    gen_path = outdir / f"{tag}_{pathway}_generator.csv"
    write_generator_csv(gen_path, gen)
    certs = [c.to_json_dict() for c in result.dominance_certificates]
    json_path = outdir / f"{tag}_{pathway}_certificates.json"
    json_path.write_text(json.dumps(certs, sort_keys=True, indent=2))
    return {
        "csv": str(csv_path),
        "generator_csv": str(gen_path),
        "certificates": str(json_path),
        "dominance_ok": result.certificates_ok(),
    }


def _run_envelope(config: RunConfig, family_path: str, pathway: str, kind: Kind):
    family = read_family_file(family_path, config.interval)
    tag = kind.value
    summary = {"kind": kind.value, "pathway": pathway}
    ok = True
    res_c2 = res_c1 = None
    if pathway in ("c2", "both"):
        res_c2 = envelope_generator_c2(family, kind, n=config.grid_n)
        summary["c2"] = _write_envelope_artifacts(config, res_c2, tag, "c2")
        ok = ok and summary["c2"]["dominance_ok"]
    if pathway in ("c1", "both"):
        res_c1 = envelope_generator_c1(family, kind, n=config.grid_n)
        summary["c1"] = _write_envelope_artifacts(config, res_c1, tag, "c1")
        ok = ok and summary["c1"]["dominance_ok"]
    if pathway == "both":
        cross = normalized_distance(res_c2.generator, res_c1.generator)
        summary["cross_pathway_distance"] = cross
        ok = ok and cross <= 1e-5
    _echo_json(summary)
    if not ok:
        raise click.exceptions.Exit(1)


@main.command("sup")
@click.option("--family", "family_path", required=True, type=click.Path(exists=True))
@click.option("--pathway", type=click.Choice(["c2", "c1", "both"]), default="both",
              show_default=True)
@click.pass_obj
@_guard
def cmd_sup(config: RunConfig, family_path, pathway):
    """Least upper bound generator of a family of means."""
    _run_envelope(config, family_path, pathway, Kind.SUP)


@main.command("inf")
@click.option("--family", "family_path", required=True, type=click.Path(exists=True))
@click.option("--pathway", type=click.Choice(["c2", "c1", "both"]), default="both",
              show_default=True)
@click.pass_obj
@_guard
def cmd_inf(config: RunConfig, family_path, pathway):
    """Greatest lower bound generator of a family of means."""
    _run_envelope(config, family_path, pathway, Kind.INF)


@main.command("regularize")
@click.option("--gen", "gen_text", required=True)
@click.option("--direction", type=click.Choice(["upper", "lower", "both"]),
              default="upper", show_default=True)
@click.pass_obj
@_guard
def cmd_regularize(config: RunConfig, gen_text, direction):
    """Project a kinked generator onto its smooth stand-in."""
    g = parse_generator_arg(gen_text, config.interval)
    m, trace = regularize(g, direction)
    outdir = Path(config.output_path)
    outdir.mkdir(parents=True, exist_ok=True)
    xs = config.interval.grid(config.grid_n)
    csv_path = outdir / "regularized.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "value", "derivative"])
        vals = np.asarray(m.value(xs))
        ders = np.asarray(m.derivative(xs))
        for x, v, d in zip(xs, vals, ders):
            w.writerow([_fmt(x), _fmt(v), _fmt(d)])
    trace_obj = {
        "anchor": trace.anchor,
        "steps": len(trace.iterates) - 1,
        "kinks_remaining": list(trace.kinks_remaining),
        "pal91_distances": list(trace.pal91_distances),
        "result": m.descriptor(),
    }
    trace_path = outdir / "regularize_trace.json"
    trace_path.write_text(json.dumps(trace_obj, sort_keys=True, indent=2))
    _echo_json({"csv": str(csv_path), "trace": str(trace_path),
                "steps": trace_obj["steps"]})


@main.command("verify")
@click.option("--suite", type=click.Choice(["all"]), default="all", show_default=True)
@click.pass_obj
@_guard
def cmd_verify(config: RunConfig, suite):
    """Run the verification battery; nonzero exit on any failed check."""
    report = run_verification_suite(
        interval=config.interval, grid_n=config.grid_n, seed=config.seed
    )
    _echo_json(report.to_json_dict())
    if not report.passed:
        raise click.exceptions.Exit(1)


if __name__ == "__main__":
    main()
