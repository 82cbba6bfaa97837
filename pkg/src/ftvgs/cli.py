"""Command-line entry point.

Exit codes: 0 success, 1 runtime or I/O failure (message names the path),
2 invalid usage or parameters.
"""

from __future__ import annotations

import logging
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import io
from .bounds import (
    BoundParamError,
    mc_coherence_transfer,
    mc_rank_preservation,
    summary_from_params,
    theorem_min_samples,
)
from .analysis import thin_svd_summary
from .lssp import LsspConfig, SolverError, lssp_reconstruct
from .sampling import MODES, SamplingError, subset_random_sample
from .signal import TopologyError, build_incidence
from .spectral import make_bases
from .svt import svt_baseline
from .synth import SynthSpec, ZeroReferenceError, nrmse, run_sweep, synthetic_instance

SEED_ENV = "FTVGS_SEED"
STRUCTURAL_FLAG = "structural-missing detected"

log = logging.getLogger("ftvgs")


class _Run:
    """Collects provenance for one command and writes the manifest."""

    def __init__(self, command: str, flags: dict):
        self.command = command
        self.flags = flags
        self.inputs: list[Path] = []
        self.outputs: list[Path] = []
        self.seeds: list[int] = []
        self.start = time.perf_counter()

    def finish(self, primary):
        io.write_manifest(primary, self.command, self.flags, self.seeds, self.inputs,
                          self.outputs, time.perf_counter() - self.start)


def _fail(message: str):
    raise click.ClickException(message)


def _read_matrix(path, skip_header=False) -> np.ndarray:
    try:
        return io.read_matrix_csv(path, skip_header=skip_header)
    except FileNotFoundError:
        _fail(f"{path}: file not found")
    except OSError as exc:
        _fail(f"{path}: {exc.strerror or exc}")
    except io.FormatError as exc:
        _fail(str(exc))


def _read_json(path) -> dict:
    try:
        return io.read_json(path)
    except FileNotFoundError:
        _fail(f"{path}: file not found")
    except OSError as exc:
        _fail(f"{path}: {exc.strerror or exc}")
    except io.FormatError as exc:
        _fail(str(exc))


def _write(path, writer, *args):
    try:
        writer(path, *args)
    except OSError as exc:
        _fail(f"{path}: cannot write ({exc.strerror or exc})")


def _load_bases(graph_path, n: int, t: int):
    try:
        edges = io.read_edges_csv(graph_path)
    except FileNotFoundError:
        _fail(f"{graph_path}: file not found")
    except io.FormatError as exc:
        _fail(str(exc))
    try:
        topology = build_incidence(n, edges)
    except TopologyError as exc:
        _fail(f"{graph_path}: {exc}")
    return make_bases(topology, t)


def _load_config(path) -> LsspConfig:
    if path is None:
        return LsspConfig()
    data = _read_json(path)
    try:
        return LsspConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise click.UsageError(f"{path}: invalid config ({exc})")


def _parse_floats(text: str, name: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {text!r}", param_hint=name)
    if not values:
        raise click.BadParameter("empty list", param_hint=name)
    return values


def _parse_seeds(text: str) -> list[int]:
    """'3' -> [3]; '0,4,7' -> [0, 4, 7]; '0-9' -> [0, ..., 9]."""
    seeds = []
    try:
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            if "-" in part[1:]:
                lo, hi = part.split("-", 1)
                seeds.extend(range(int(lo), int(hi) + 1))
            else:
                seeds.append(int(part))
    except ValueError:
        raise click.BadParameter(f"cannot parse seeds {text!r}", param_hint="--seeds")
    if not seeds:
        raise click.BadParameter("no seeds given", param_hint="--seeds")
    return seeds


def _sibling(out: Path, suffix: str) -> Path:
    stem = out.name[:-4] if out.name.endswith(".csv") else out.name
    return out.with_name(f"{stem}.{suffix}")


seed_option = click.option("--seed", type=int, default=None, envvar=SEED_ENV, show_envvar=True,
                           help="RNG seed (falls back to $FTVGS_SEED, then 0).")


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log solver progress to stderr.")
def cli(verbose):
    """Subset random sampling and reconstruction of time-vertex graph signals."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@click.option("--n", "n", type=int, default=128, show_default=True)
@click.option("--t", "t", type=int, default=128, show_default=True)
@click.option("--num-nonzero-rows", type=int, default=100, show_default=True)
@click.option("--bandwidth-min", type=int, default=28, show_default=True)
@click.option("--bandwidth-max", type=int, default=88, show_default=True)
@click.option("--row-selection", type=click.Choice(["lowest", "random"]), default="lowest",
              show_default=True)
@seed_option
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Signal CSV; the spectrum and graph go to <out>.fj.csv / <out>.edges.csv.")
def synth(n, t, num_nonzero_rows, bandwidth_min, bandwidth_max, row_selection, seed, out):
    """Generate a synthetic band-limited signal on a random connected graph."""
    seed = 0 if seed is None else seed
    run = _Run("synth", dict(n=n, t=t, num_nonzero_rows=num_nonzero_rows,
                             bandwidth_min=bandwidth_min, bandwidth_max=bandwidth_max,
                             row_selection=row_selection, seed=seed, out=out))
    run.seeds = [seed]
    try:
        spec = SynthSpec(n=n, t=t, num_nonzero_rows=num_nonzero_rows,
                         bandwidth_min=bandwidth_min, bandwidth_max=bandwidth_max,
                         seed=seed, row_selection=row_selection)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    inst = synthetic_instance(spec)
    out = Path(out)
    fj_path, edges_path = _sibling(out, "fj.csv"), _sibling(out, "edges.csv")
    _write(out, io.write_matrix_csv, inst.signal.data)
    _write(fj_path, io.write_matrix_csv, inst.f_j)
    _write(edges_path, io.write_edges_csv, inst.topology.edges)
    run.outputs = [out, fj_path, edges_path]
    run.finish(out)
    click.echo(f"wrote {out} ({n}x{t}), {fj_path}, {edges_path}")


@cli.command()
@click.option("--input", "input_path", required=True, help="Signal matrix CSV.")
@click.option("--skip-header", is_flag=True, help="Ignore the first line of the CSV.")
@click.option("--alpha-rc", type=float, required=True)
@click.option("--alpha-sub", type=float, required=True)
@seed_option
@click.option("--mode", type=click.Choice(MODES), default="without", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def sample(input_path, skip_header, alpha_rc, alpha_sub, seed, mode, out):
    """Draw a subset random sample (rows, columns, then entries)."""
    seed = 0 if seed is None else seed
    run = _Run("sample", dict(input=input_path, skip_header=skip_header, alpha_rc=alpha_rc,
                              alpha_sub=alpha_sub, seed=seed, mode=mode, out=out))
    run.seeds = [seed]
    x = _read_matrix(input_path, skip_header)
    try:
        samples = subset_random_sample(x, alpha_rc, alpha_sub, seed=seed, mode=mode)
    except SamplingError as exc:
        raise click.UsageError(str(exc))
    _write(out, io.write_sample_set, samples)
    run.inputs, run.outputs = [Path(input_path)], [Path(out)]
    run.finish(out)
    click.echo(f"|I|={samples.rows.size} |J|={samples.cols.size} |S|={samples.size} "
               f"alpha_total={samples.alpha_total:.4f}")


@cli.command()
@click.option("--samples", "samples_path", required=True, help="SampleSet JSON.")
@click.option("--graph", "graph_path", default=None, help="Edge list CSV (required for lssp).")
@click.option("--method", type=click.Choice(["lssp", "svt"]), default="lssp", show_default=True)
@click.option("--config", "config_path", default=None, help="LSSP config JSON.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--diagnostics", "diag_path", default=None, help="Per-iteration CSV.")
@click.option("--truth", "truth_path", default=None, help="Ground-truth CSV; prints NRMSE.")
def reconstruct(samples_path, graph_path, method, config_path, out, diag_path, truth_path):
    """Reconstruct the full signal from a SampleSet."""
    run = _Run("reconstruct", dict(samples=samples_path, graph=graph_path, method=method,
                                   config=config_path, out=out, diagnostics=diag_path,
                                   truth=truth_path))
    if method == "lssp" and graph_path is None:
        raise click.UsageError("--graph is required for --method lssp")
    config = _load_config(config_path) if method == "lssp" else None
    try:
        samples = io.sample_set_from_dict(_read_json(samples_path), source=samples_path)
    except io.FormatError as exc:
        _fail(str(exc))
    if samples.seed is not None:
        run.seeds = [samples.seed]
    run.inputs = [Path(p) for p in (samples_path, graph_path, config_path, truth_path) if p]

    flags = []
    history = []
    try:
        if method == "lssp":
            bases = _load_bases(graph_path, samples.n, samples.t)
            result = lssp_reconstruct(samples, bases, config)
            estimate = result.signal.data
            history = result.history
            flags.append(f"outer_iterations={result.outer_iterations} converged={result.converged}")
        else:
            result = svt_baseline(samples)
            estimate = result.signal.data
            flags.append(f"svt iterations={result.iterations} converged={result.converged} "
                         f"tau={result.tau!r} step={result.step!r}")
            if result.structural_missing:
                flags.append(STRUCTURAL_FLAG)
    except SolverError as exc:
        _fail(f"solver failed on {samples_path}: {exc}")
    except ValueError as exc:
        _fail(f"{samples_path}: {exc}")

    _write(out, io.write_matrix_csv, estimate)
    run.outputs = [Path(out)]
    if diag_path:
        _write(diag_path, io.write_diagnostics_csv, history, flags)
        run.outputs.append(Path(diag_path))
    if STRUCTURAL_FLAG in flags:
        click.echo(STRUCTURAL_FLAG)
    if truth_path:
        truth = _read_matrix(truth_path)
        try:
            click.echo(f"nrmse={nrmse(truth, estimate)!r}")
        except (ValueError, ZeroReferenceError) as exc:
            _fail(f"{truth_path}: {exc}")
    run.finish(out)


@cli.command()
@click.option("--input", "input_path", default=None, help="Signal CSV to measure rank/kappa/mu.")
@click.option("--skip-header", is_flag=True)
@click.option("--params", default=None, help="'rank,kappa,mu1,mu2' instead of --input.")
@click.option("--n-rows", type=int, default=None, help="N (with --params).")
@click.option("--n-cols", type=int, default=None, help="T (with --params).")
@click.option("--delta", type=float, default=0.1, show_default=True)
@click.option("--epsilon", type=float, default=0.5, show_default=True)
@click.option("--eta", type=float, default=0.5, show_default=True)
@click.option("--beta", type=float, default=1.21, show_default=True)
@click.option("--size-i", type=int, default=None, help="|I| (default N).")
@click.option("--size-j", type=int, default=None, help="|J| (default T).")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Report JSON (stdout when omitted).")
def bounds(input_path, skip_header, params, n_rows, n_cols, delta, epsilon, eta, beta,
           size_i, size_j, out):
    """Evaluate the row/column, coherence and sample-count bounds."""
    run = _Run("bounds", dict(input=input_path, params=params, n_rows=n_rows, n_cols=n_cols,
                              delta=delta, epsilon=epsilon, eta=eta, beta=beta,
                              size_i=size_i, size_j=size_j, out=out))
    if (input_path is None) == (params is None):
        raise click.UsageError("give exactly one of --input or --params")
    if params is not None:
        values = _parse_floats(params, "--params")
        if len(values) != 4:
            raise click.BadParameter("expected rank,kappa,mu1,mu2", param_hint="--params")
        rank, kappa, mu1, mu2 = values
        if rank != int(rank) or rank < 1 or kappa < 1:
            raise click.BadParameter("rank must be a positive integer and kappa >= 1",
                                     param_hint="--params")
        if n_rows is None or n_cols is None:
            raise click.UsageError("--params needs --n-rows and --n-cols")
        svd = summary_from_params(int(rank), kappa, mu1, mu2)
        n, t = n_rows, n_cols
    else:
        x = _read_matrix(input_path, skip_header)
        run.inputs = [Path(input_path)]
        svd = thin_svd_summary(x)
        if svd.rank == 0:
            _fail(f"{input_path}: matrix is identically zero")
        n, t = x.shape
    size_i = n if size_i is None else size_i
    size_j = t if size_j is None else size_j
    try:
        report = theorem_min_samples(svd, n, size_i, size_j, beta, eta, delta, epsilon,
                                     n_cols_total=t)
    except BoundParamError as exc:
        raise click.UsageError(str(exc))
    _emit_json(report.to_dict(), out, run)


def _emit_json(payload: dict, out, run: _Run):
    if out is None:
        import json
        click.echo(json.dumps({k: io._json_value(v) for k, v in payload.items()}, indent=2))
        return
    _write(out, io.write_json, payload)
    run.outputs = [Path(out)]
    run.finish(out)


@cli.command()
@click.option("--input", "input_path", required=True)
@click.option("--skip-header", is_flag=True)
@click.option("--size-i", type=int, required=True)
@click.option("--size-j", type=int, default=None,
              help="Also run the submatrix coherence check with this |J|.")
@click.option("--trials", type=int, default=200, show_default=True)
@click.option("--eta", type=float, default=0.5, show_default=True)
@seed_option
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def verify(input_path, skip_header, size_i, size_j, trials, eta, seed, out):
    """Monte-Carlo check of rank preservation (and optionally coherence transfer)."""
    seed = 0 if seed is None else seed
    run = _Run("verify", dict(input=input_path, size_i=size_i, size_j=size_j, trials=trials,
                              eta=eta, seed=seed, out=out))
    run.seeds = [seed]
    x = _read_matrix(input_path, skip_header)
    run.inputs = [Path(input_path)]
    try:
        payload = {"size_i": size_i, "trials": trials, "seed": seed,
                   "rank": thin_svd_summary(x).rank,
                   "rank_preservation": mc_rank_preservation(x, size_i, trials, seed)}
        if size_j is not None:
            res = mc_coherence_transfer(x, size_i, size_j, trials, seed, eta)
            payload.update(size_j=size_j, eta=eta, max_u_norm=res.max_u_norm,
                           max_v_norm=res.max_v_norm, u_bound=res.u_bound, v_bound=res.v_bound,
                           fraction_within=res.fraction_within, trials_used=res.trials_used,
                           excluded=res.excluded)
    except BoundParamError as exc:
        raise click.UsageError(str(exc))
    _emit_json(payload, out, run)


@cli.command()
@click.option("--input", "input_path", required=True, help="Ground-truth signal CSV.")
@click.option("--skip-header", is_flag=True)
@click.option("--graph", "graph_path", default=None, help="Edge list CSV (required for lssp).")
@click.option("--ratios", default="0.6,0.7,0.8,0.9", show_default=True,
              help="alpha_rc = alpha_sub values.")
@click.option("--seeds", default="0-9", show_default=True, envvar=SEED_ENV,
              help="'0-9', '1,5,7' or a single seed.")
@click.option("--methods", default="lssp,svt", show_default=True)
@click.option("--config", "config_path", default=None)
@click.option("--mode", type=click.Choice(MODES), default="without", show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def sweep(input_path, skip_header, graph_path, ratios, seeds, methods, config_path, mode, jobs,
          out):
    """Mean NRMSE per method and sampling ratio over several seeds."""
    run = _Run("sweep", dict(input=input_path, graph=graph_path, ratios=ratios, seeds=seeds,
                             methods=methods, config=config_path, mode=mode, jobs=jobs, out=out))
    ratio_list = _parse_floats(ratios, "--ratios")
    if any(not 0 < r <= 1 for r in ratio_list):
        raise click.BadParameter("ratios must lie in (0, 1]", param_hint="--ratios")
    seed_list = _parse_seeds(seeds)
    method_list = [m.strip() for m in methods.split(",") if m.strip()]
    unknown = sorted(set(method_list) - {"lssp", "svt"})
    if unknown or not method_list:
        raise click.BadParameter(f"unknown methods {unknown}", param_hint="--methods")
    if jobs < 1:
        raise click.BadParameter("must be >= 1", param_hint="--jobs")
    if "lssp" in method_list and graph_path is None:
        raise click.UsageError("--graph is required when sweeping lssp")
    config = _load_config(config_path)
    x = _read_matrix(input_path, skip_header)
    bases = _load_bases(graph_path, *x.shape) if graph_path else make_bases(None, x.shape[1])
    rows = run_sweep(x, ratio_list, bases, seed_list, method_list, config, jobs=jobs, mode=mode)
    _write(out, io.write_sweep_csv, rows)
    run.seeds = seed_list
    run.inputs = [Path(p) for p in (input_path, graph_path, config_path) if p]
    run.outputs = [Path(out)]
    run.finish(out)
    failures = sum(r.failures for r in rows)
    click.echo(f"wrote {out} ({len(rows)} rows, {failures} failed cells)")


def main(argv=None):
    return cli.main(args=argv, prog_name="ftvgs")


if __name__ == "__main__":
    sys.exit(main())
