"""
twirlkit CLI

Verbs:
- twirl run / twirl exact: state-level recursive and exact twirling
- superop build / error / search-c: superoperator realisations and distances
- integrate: U(d) trace-polynomial integrals
- bench FIGURE: figure-reproduction presets (CSV + metadata JSON)
- report RUN_ID: print a run stored with bench --db
"""
from __future__ import annotations

import functools
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import typer

try:  # typer>=0.26 vendors click and raises its own exception classes
    from typer import _click as click
except ImportError:
    import click
from rich.console import Console
from rich.table import Table

from . import __version__
from .config import get_settings
from .errors import InvalidParameterError, TwirlError
from .experiments.convergence import ExperimentConfig, evolve_state, fit_decay_rate, run_convergence
from .experiments.presets import preset_ids, reproduce
from .experiments.registry import load_run, save_run
from .integrate import DEFAULT_ITERS, averaged_moment_operator, trace_integral
from .io import (
    load_matrix_list,
    load_state,
    metadata_path,
    read_matrix_file,
    save_state,
    save_superop,
    write_curve_csv,
    write_json,
    write_metadata,
)
from .linalg import hs_norm_sq
from .logging import setup_logging
from .sampling import RngHandle, UnitarySource
from .sources import parse_source
from .states import QuditRegister
from .superop.operators import (
    avg_twirl_superop,
    exact_twirl_superop,
    recursive_twirl_superop,
    superop_error,
)
from .twirl.basis import build_basis, exact_twirl
from .twirl.plan import TwirlPlan
from .twirl.schedules import search_two_qubit_c

log = logging.getLogger(__name__)

app = typer.Typer(add_completion=False, help="Recursive twirling of multi-qudit states and superoperators.")
console = Console()

twirl_app = typer.Typer(help="State-level twirling.")
superop_app = typer.Typer(help="Superoperator realisations and errors.")
app.add_typer(twirl_app, name="twirl")
app.add_typer(superop_app, name="superop")


def _emit_error(payload: dict) -> None:
    typer.echo(json.dumps(payload), err=True)


def _handled(fn):
    """Turn TwirlError into a JSON line on stderr and its exit code."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except TwirlError as e:
            log.debug("command failed", exc_info=True)
            _emit_error(e.to_dict())
            raise typer.Exit(code=e.code)

    return wrapper


def _threads(threads: Optional[int]) -> int:
    if threads is None:
        return get_settings().threads
    if threads < 1:
        raise InvalidParameterError(f"--threads must be >= 1, got {threads}")
    return threads


@app.callback()
def _setup() -> None:
    s = get_settings()
    setup_logging(s.log_level)


@twirl_app.command("run")
@_handled
def twirl_run(
    n: int = typer.Option(..., "--n", help="Number of qudits N."),
    d: int = typer.Option(..., "--d", help="Local dimension d."),
    iterations: int = typer.Option(..., "--iterations", help="Iterations M."),
    source: str = typer.Option("haar", "--source", help="haar | biased:... | cycle:FILE | ising:... | schedule:..."),
    seed: int = typer.Option(0, "--seed"),
    input_path: Optional[Path] = typer.Option(None, "--input", help="Initial state JSON; Hilbert-Schmidt random if omitted."),
    k: int = typer.Option(2, "--k", help="Branches per iteration K."),
    variant: str = typer.Option("werner", "--variant", help="werner|isotropic"),
    scheme: str = typer.Option("recursive", "--scheme", help="recursive|average|conjugation"),
    out: Optional[Path] = typer.Option(None, "--out", help="Output state JSON."),
    curve: Optional[Path] = typer.Option(None, "--curve", help="Also write the error curve CSV here."),
    trajectories: int = typer.Option(1, "--trajectories", help="Trajectories for --curve."),
    threads: Optional[int] = typer.Option(None, "--threads"),
):
    """Evolve one trajectory of a twirl and write the final state."""
    s = get_settings()
    reg = QuditRegister(n, d)
    rho0 = load_state(input_path, reg) if input_path is not None else None
    cfg = ExperimentConfig(
        register=reg,
        source=parse_source(source, d),
        M_max=iterations,
        scheme=scheme,
        K=k,
        variant=variant,
        trajectories=trajectories,
        seed=seed,
        initial_state=rho0,
        threads=_threads(threads),
    )
    rho, final, target = evolve_state(cfg)
    err = hs_norm_sq(final.matrix - target.matrix)

    out = s.resolve_output(out, "twirl_run.json")
    save_state(out, final)
    params = cfg.describe()
    params["input"] = str(input_path) if input_path else None
    meta = {"command": "twirl run", "config": params, "version": __version__, "sq_error_to_exact": err}

    if curve is not None:
        result = run_convergence(cfg)
        write_curve_csv(curve, result.frame)
        write_metadata(metadata_path(curve), result.metadata)
        meta["curve"] = str(curve)
    write_metadata(metadata_path(out), meta)

    table = Table(title="twirl run")
    table.add_column("Metric")
    table.add_column("Value")
    table.add_row("Register", f"N={n}, d={d}")
    table.add_row("Scheme", f"{scheme} (K={k}, M={iterations})")
    table.add_row("Source", source)
    table.add_row("||rho_M - P rho||^2", f"{err:.6e}")
    table.add_row("Output", str(out))
    console.print(table)


@twirl_app.command("exact")
@_handled
def twirl_exact(
    input_path: Path = typer.Option(..., "--input", help="State JSON."),
    n: int = typer.Option(..., "--n"),
    d: int = typer.Option(..., "--d"),
    variant: str = typer.Option("werner", "--variant", help="werner|isotropic"),
    out: Optional[Path] = typer.Option(None, "--out"),
):
    """Exact Werner (or isotropic) projection of a state."""
    s = get_settings()
    reg = QuditRegister(n, d)
    rho = load_state(input_path, reg)
    basis = build_basis(reg, variant)
    projected = exact_twirl(rho, basis)
    out = s.resolve_output(out, "twirl_exact.json")
    save_state(out, projected)
    write_metadata(
        metadata_path(out),
        {
            "command": "twirl exact",
            "config": {"n_qudits": n, "local_dim": d, "variant": variant, "input": str(input_path), "N_R": basis.count},
            "version": __version__,
        },
    )
    console.print(f"[green]Exact {variant} twirl written[/green]: {out} (N_R={basis.count})")


@superop_app.command("build")
@_handled
def superop_build(
    n: int = typer.Option(..., "--n"),
    d: int = typer.Option(..., "--d"),
    kind: str = typer.Option("exact", "--kind", help="exact|average|recursive"),
    iterations: int = typer.Option(1, "--iterations", help="M for average/recursive."),
    source: str = typer.Option("haar", "--source"),
    seed: int = typer.Option(0, "--seed"),
    k: int = typer.Option(2, "--k"),
    variant: str = typer.Option("werner", "--variant"),
    out: Optional[Path] = typer.Option(None, "--out"),
):
    """Build S_P or one realisation of S_{P_M} / S_{Q_M}."""
    s = get_settings()
    reg = QuditRegister(n, d)
    basis = build_basis(reg, variant)
    ref = exact_twirl_superop(reg, basis)
    rng = RngHandle(seed, 0)
    params = {"n_qudits": n, "local_dim": d, "kind": kind, "variant": variant, "N_R": basis.count}
    if kind == "exact":
        built = ref
    elif kind == "average":
        src = parse_source(source, d)
        built = avg_twirl_superop(iterations, src, reg, rng, variant)
        params.update(iterations=iterations, source=src.describe(), seed=seed)
    elif kind == "recursive":
        src = parse_source(source, d)
        built = recursive_twirl_superop(TwirlPlan(reg, iterations, src, k, variant), rng)
        params.update(iterations=iterations, K=k, source=src.describe(), seed=seed)
    else:
        raise InvalidParameterError(f"--kind must be exact|average|recursive, got {kind!r}")

    err = superop_error(built, ref)
    out = s.resolve_output(out, f"superop_{kind}.json")
    save_superop(out, built.matrix, reg)
    write_metadata(
        metadata_path(out),
        {"command": "superop build", "config": params, "version": __version__, "sq_error_to_exact": err},
    )
    console.print(f"[green]Superoperator written[/green]: {out}  ||S - S_P||^2 = {err:.6e}")


@superop_app.command("error")
@_handled
def superop_error_cmd(
    a: Path = typer.Argument(..., help="Superoperator JSON."),
    b: Optional[Path] = typer.Argument(None, help="Reference superoperator JSON; exact S_P if omitted."),
    variant: str = typer.Option("werner", "--variant", help="Variant of the exact reference."),
):
    """Print ||A - B||^2 as JSON."""
    fa = read_matrix_file(a)
    if b is not None:
        ref = read_matrix_file(b).to_array()
    else:
        if fa.kind != "superoperator":
            raise InvalidParameterError(f"{a} has no (N, d) annotation; pass the reference explicitly")
        reg = QuditRegister(fa.n_qudits, fa.local_dim)
        ref = exact_twirl_superop(reg, build_basis(reg, variant)).matrix
    typer.echo(json.dumps({"error": superop_error(fa.to_array(), ref)}))


@superop_app.command("search-c")
@_handled
def superop_search_c(
    step: float = typer.Option(1e-3, "--step", help="Grid step over c in [0, pi/2]."),
    iterations: int = typer.Option(50, "--iterations"),
):
    """Grid-search the two-qubit rotation angle c."""
    c, err = search_two_qubit_c(step, iterations)
    typer.echo(json.dumps({"c": c, "error": err, "iterations": iterations, "step": step}))


@app.command()
@_handled
def integrate(
    m: int = typer.Option(..., "--m", help="Number of U factors."),
    n: int = typer.Option(..., "--n", help="Number of U^dagger factors."),
    dim: int = typer.Option(..., "--dim", help="d of U(d)."),
    iters: int = typer.Option(DEFAULT_ITERS, "--iters"),
    a: Optional[Path] = typer.Option(None, "--a", help="Matrix-list JSON with the m A matrices."),
    b: Optional[Path] = typer.Option(None, "--b", help="Matrix-list JSON with the n B matrices."),
    seed: int = typer.Option(0, "--seed"),
    runs: int = typer.Option(1, "--runs", help="Average over this many independent runs."),
    special: bool = typer.Option(False, "--special", help="Experimental: SU(d) samples."),
    out: Optional[Path] = typer.Option(None, "--out"),
    threads: Optional[int] = typer.Option(None, "--threads"),
):
    """Estimate int prod Tr(A_k U) prod Tr(B_l U^dagger) dU."""
    s = get_settings()
    a_list: List = load_matrix_list(a) if a is not None else []
    b_list: List = load_matrix_list(b) if b is not None else []
    source = UnitarySource.haar(special=special)
    mop = averaged_moment_operator(m, n, dim, iters, source, RngHandle(seed, 0), runs, _threads(threads))
    value = trace_integral(a_list, b_list, mop)
    out = s.resolve_output(out, "integrate.json")
    write_json(
        out,
        {
            "value": [value.real, value.imag],
            "convergence": list(mop.convergence),
            "provenance": {
                "m": m,
                "n": n,
                "dim": dim,
                "iters": iters,
                "runs": runs,
                "seed": seed,
                "source": source.describe(),
                "a": str(a) if a else None,
                "b": str(b) if b else None,
                "version": __version__,
            },
        },
    )
    console.print(f"[green]I = {value.real:.10g}{value.imag:+.3e}j[/green] written to {out}")


@app.command()
@_handled
def bench(
    figure: str = typer.Argument(..., help="fig2 | fig3a | fig3b | fig4a | fig4b"),
    seed: int = typer.Option(0, "--seed"),
    out: Optional[Path] = typer.Option(None, "--out", help="Output CSV."),
    trajectories: Optional[int] = typer.Option(None, "--trajectories", help="Override the preset's trajectory count."),
    iterations: Optional[int] = typer.Option(None, "--iterations", help="Override the preset's M_max."),
    threads: Optional[int] = typer.Option(None, "--threads"),
    db: Optional[str] = typer.Option(None, "--db", help="SQLAlchemy URL of a run registry."),
    run_id: Optional[str] = typer.Option(None, "--run-id", help="Registry key (default FIGURE-sSEED)."),
):
    """Reproduce a figure preset."""
    if figure not in preset_ids():
        raise InvalidParameterError(f"unknown figure {figure!r}; choose from {', '.join(preset_ids())}")
    s = get_settings()
    out = s.resolve_output(out, f"{figure}.csv")
    res = reproduce(figure, out, seed, trajectories, _threads(threads), iterations)
    if db:
        save_run(db, run_id or f"{figure}-s{seed}", res.curve, figure, res.fit)
    console.print(f"[green]{figure}[/green]: {res.csv_path} + {res.metadata_path}")
    if res.fit is not None:
        console.print(f"fitted decay {res.fit[0]:.4f} bits/iteration (R^2 = {res.fit[1]:.4f})")
    console.print(res.curve.diagnostics.summary())


@app.command()
@_handled
def report(
    run_id: str = typer.Argument(..., help="Run id stored with bench --db."),
    db: str = typer.Option(..., "--db", help="SQLAlchemy URL of the run registry."),
):
    """Print a stored run."""
    record, curve = load_run(db, run_id)
    table = Table(title=f"Run {run_id} ({record.preset or 'custom'})")
    table.add_column("M", justify="right")
    table.add_column("mean sq error")
    table.add_column("std error")
    table.add_column("theory")
    for it, mean, se, th in zip(curve.iterations, curve.means, curve.std_errors, curve.theory):
        table.add_row(str(it), f"{mean:.6e}", f"{se:.2e}", "" if np.isnan(th) else f"{th:.6e}")
    console.print(table)
    if record.fit_rate is not None:
        console.print(f"fitted decay {record.fit_rate:.4f} bits/iteration (R^2 = {record.fit_goodness:.4f})")
    else:
        try:
            rate, goodness = fit_decay_rate(curve)
            console.print(f"fitted decay {rate:.4f} bits/iteration over all points (R^2 = {goodness:.4f})")
        except InvalidParameterError:
            pass


def main() -> None:
    try:
        rc = app(standalone_mode=False)
    except click.exceptions.UsageError as e:
        _emit_error({"error": "usage", "code": 2, "message": e.format_message()})
        sys.exit(2)
    except click.exceptions.Abort:
        sys.exit(1)
    except TwirlError as e:
        _emit_error(e.to_dict())
        sys.exit(e.code)
    sys.exit(rc if isinstance(rc, int) else 0)


if __name__ == "__main__":
    main()
