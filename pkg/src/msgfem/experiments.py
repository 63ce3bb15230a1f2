"""Experiment harness: end-to-end solve, error decay, iteration table, spectra, fill-in timing."""

from __future__ import annotations

import csv
import json
import math
import platform
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import scipy

from . import __version__
from .coefficients import (
    ChannelGeometry,
    CoefficientField,
    channel_field,
    constant_field,
    load_field,
    skyscraper_field,
)
from .config import RunConfig, dumps_config
from .decomposition import Decomposition, build_decomposition, build_partition_of_unity, single_subdomain
from .fem import FineProblem, Mesh, build_fine_problem, build_mesh, write_vector_csv
from .gfem import (
    build_coarse_space,
    build_particular,
    coarse_solve,
    relative_energy_error,
    write_error_csv,
)
from .local import (
    EigenOptions,
    compute_particulars,
    compute_spectra,
    eigensolve,
    large_mode_count,
    write_spectrum_csv,
)
from .precond import build_preconditioner, format_count, gmres, richardson, write_iteration_csv

TIMING_HEADER = ("m", "ell", "variant", "mean_seconds", "repeats", "nnz_per_row", "saddle_size")


@dataclass
class BenchRecord:
    """Result of one experiment; ``values`` holds the measured quantities."""

    experiment: str
    config: dict[str, Any]
    values: dict[str, Any] = field(default_factory=dict)
    files: list[str] = field(default_factory=list)
    seconds: float = 0.0
    repeats: int = 1

    def to_json(self) -> dict[str, Any]:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "values": _jsonable(self.values),
            "files": self.files,
            "seconds": self.seconds,
            "repeats": self.repeats,
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_manifest(record: BenchRecord, out: Path) -> Path:
    manifest = {
        "package": "msgfem",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        **record.to_json(),
    }
    path = out / f"manifest_{record.experiment}.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    (out / f"config_{record.experiment}.toml").write_text(dumps_config(RunConfig(**record.config)))
    return path


# ----------------------------------------------------------------------------
# Problem setup
# ----------------------------------------------------------------------------


def make_mesh(config: RunConfig) -> Mesh:
    return build_mesh(config.dim, config.cells)


def make_coefficient(config: RunConfig, mesh: Mesh, contrast_exponent: float | None = None) -> CoefficientField:
    kind = config.coefficient
    if kind == "constant":
        return constant_field(mesh, 1.0)
    if kind == "skyscraper":
        return skyscraper_field(mesh, config.seed, config.block_size, config.contrast, config.fill_fraction)
    if kind == "channel":
        j = math.log10(config.contrast) if contrast_exponent is None else contrast_exponent
        geometry = ChannelGeometry.default((config.subdomains,) * 2)
        return channel_field(mesh, j, geometry)
    if kind == "file":
        if not config.coefficient_file:
            raise ValueError("coefficient = 'file' needs coefficient_file")
        return load_field(mesh, config.coefficient_file)
    raise ValueError(f"unknown coefficient kind {kind!r}")


@dataclass
class Setup:
    problem: FineProblem
    decomposition: Decomposition
    pu: Any
    particular: np.ndarray


def make_setup(config: RunConfig, coefficient: CoefficientField | None = None, ell: int | None = None) -> Setup:
    mesh = make_mesh(config)
    coeff = coefficient or make_coefficient(config, mesh)
    problem = build_fine_problem(mesh, coeff, f=config.source, g=config.boundary_value)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        dec = build_decomposition(mesh, config.subdomains, config.overlap, config.ell if ell is None else ell)
    pu = build_partition_of_unity(dec)
    parts = compute_particulars(problem, dec, jobs=config.jobs)
    up = build_particular(problem, dec, pu, parts)
    return Setup(problem, dec, pu, up)


def eigen_options(config: RunConfig) -> EigenOptions:
    return EigenOptions(tol=config.eig_tol, block_size=config.eig_block, seed=0)


def spectra_for(setup: Setup, config: RunConfig, variant: str, count: int):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return compute_spectra(
            setup.problem, setup.decomposition, setup.pu, count, variant, eigen_options(config), config.jobs
        )


# ----------------------------------------------------------------------------
# Experiments
# ----------------------------------------------------------------------------


def _outdir(config: RunConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_solve(config: RunConfig) -> BenchRecord:
    """Assemble, build the coarse space, solve; write solution, errors and a report."""
    t0 = time.perf_counter()
    out = _outdir(config)
    setup = make_setup(config)
    problem = setup.problem
    reference = problem.solve()
    values: dict[str, Any] = {}
    rows = []
    files = []
    for variant in config.variants:
        spectra = spectra_for(setup, config, variant, config.n + 1)
        coarse = build_coarse_space(problem, setup.decomposition, setup.pu, spectra, config.n)
        gfem = coarse_solve(problem, coarse, setup.particular)
        err_gfem = relative_energy_error(problem, gfem.solution, reference)
        entry: dict[str, Any] = {"coarse_dim": coarse.dim, "err_gfem": err_gfem}
        solution = gfem.solution
        if config.solver != "direct":
            B = build_preconditioner(problem, setup.decomposition, setup.pu, coarse, jobs=config.jobs)
            u0 = setup.particular if config.initial_guess == "particular" else None
            driver = richardson if config.solver == "richardson" else gmres
            report = driver(problem, B, tol=config.tol, maxit=config.maxit, u0=u0)
            solution = report.solution
            entry.update(
                iterations=format_count(report.iterations),
                converged=report.converged,
                err_iterative=relative_energy_error(problem, solution, reference),
                residuals=report.relative_residuals,
            )
        path = out / f"solution_{variant}.csv"
        write_vector_csv(path, solution)
        files.append(path.name)
        values[variant] = entry
        rows.append(
            {"variant": variant, "n": config.n, "ell": config.ell, "coarse_dim": coarse.dim, "err": err_gfem}
        )
    write_error_csv(out / "errors.csv", rows)
    files.append("errors.csv")
    record = BenchRecord("solve", config.to_dict(), values, files, time.perf_counter() - t0)
    (out / "report.json").write_text(json.dumps(_jsonable(values), indent=2, sort_keys=True) + "\n")
    files.append("report.json")
    write_manifest(record, out)
    return record


def log_linear_fit(ns, errs) -> tuple[float, float]:
    """Least-squares slope of ``log(err)`` against ``n`` and its R^2."""
    x = np.asarray(ns, dtype=float)
    y = np.log(np.asarray(errs, dtype=float))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), r2


def first_n_below(ns, errs, level: float) -> int | None:
    for n, e in zip(ns, errs):
        if e <= level:
            return int(n)
    return None


def run_decay_experiment(config: RunConfig, sweep: str = "both") -> BenchRecord:
    """Error against ``n`` (fixed ``ell``) and against ``ell`` (fixed ``n``)."""
    t0 = time.perf_counter()
    out = _outdir(config)
    values: dict[str, Any] = {}
    files = []
    if sweep in ("n", "both"):
        setup = make_setup(config)
        reference = setup.problem.solve()
        rows = []
        nmax = max(config.n_values)
        for variant in config.variants:
            spectra = spectra_for(setup, config, variant, nmax + 1)
            errs = []
            for n in config.n_values:
                coarse = build_coarse_space(setup.problem, setup.decomposition, setup.pu, spectra, n)
                err = relative_energy_error(
                    setup.problem, coarse_solve(setup.problem, coarse, setup.particular).solution, reference
                )
                errs.append(err)
                rows.append({"variant": variant, "n": n, "ell": config.ell, "coarse_dim": coarse.dim, "err": err})
            values[f"n_sweep_{variant}"] = {"n": list(config.n_values), "err": errs}
        write_error_csv(out / "decay_n.csv", rows)
        files.append("decay_n.csv")
    if sweep in ("ell", "both"):
        rows = []
        coeff = make_coefficient(config, make_mesh(config))
        for variant in config.variants:
            errs = []
            for ell in config.ell_values:
                setup = make_setup(config, coeff, ell=ell)
                spectra = spectra_for(setup, config, variant, config.n + 1)
                coarse = build_coarse_space(setup.problem, setup.decomposition, setup.pu, spectra, config.n)
                err = relative_energy_error(
                    setup.problem, coarse_solve(setup.problem, coarse, setup.particular).solution
                )
                errs.append(err)
                rows.append({"variant": variant, "n": config.n, "ell": ell, "coarse_dim": coarse.dim, "err": err})
            values[f"ell_sweep_{variant}"] = {"ell": list(config.ell_values), "err": errs}
        write_error_csv(out / "decay_ell.csv", rows)
        files.append("decay_ell.csv")
    record = BenchRecord("decay", config.to_dict(), values, files, time.perf_counter() - t0)
    write_manifest(record, out)
    return record


def run_iteration_table(config: RunConfig, solvers: tuple[str, ...] = ("richardson",)) -> BenchRecord:
    """Iteration counts for contrasts ``10**j`` and ``n`` in ``n_values``."""
    t0 = time.perf_counter()
    out = _outdir(config)
    mesh = make_mesh(config)
    contrasts = [10.0**j for j in config.contrast_exponents]
    tables = {(v, s): np.zeros((len(contrasts), len(config.n_values))) for v in config.variants for s in solvers}
    for row, j in enumerate(config.contrast_exponents):
        coeff = make_coefficient(config, mesh, contrast_exponent=j)
        setup = make_setup(config, coeff)
        for variant in config.variants:
            spectra = spectra_for(setup, config, variant, max(config.n_values) + 1)
            for col, n in enumerate(config.n_values):
                coarse = build_coarse_space(setup.problem, setup.decomposition, setup.pu, spectra, n)
                B = build_preconditioner(setup.problem, setup.decomposition, setup.pu, coarse, jobs=config.jobs)
                u0 = setup.particular if config.initial_guess == "particular" else None
                for s in solvers:
                    driver = richardson if s == "richardson" else gmres
                    rep = driver(setup.problem, B, tol=config.tol, maxit=config.maxit, u0=u0)
                    tables[variant, s][row, col] = rep.iterations
    files = []
    values = {}
    for (variant, s), table in tables.items():
        name = f"iterations_{variant}_{s}.csv"
        write_iteration_csv(out / name, contrasts, config.n_values, table)
        files.append(name)
        values[f"{variant}_{s}"] = [[format_count(v) for v in r] for r in table]
    values["contrasts"] = contrasts
    values["n"] = list(config.n_values)
    record = BenchRecord("iteration_table", config.to_dict(), values, files, time.perf_counter() - t0)
    record.values["tables"] = {f"{k[0]}_{k[1]}": v for k, v in tables.items()}
    write_manifest(record, out)
    return record


def run_spectrum(config: RunConfig) -> BenchRecord:
    """Reciprocal eigenvalues on selected subdomains and gap-counted large modes."""
    t0 = time.perf_counter()
    out = _outdir(config)
    setup = make_setup(config)
    values: dict[str, Any] = {}
    results = []
    opts = eigen_options(config)
    for variant in config.variants:
        for i in config.spectrum_subdomains:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                res = eigensolve(setup.problem, setup.decomposition, setup.pu, i, config.spectrum_count, variant, opts)
            results.append(res)
            values[f"{variant}_{i}"] = {
                "eigenvalues": res.eigenvalues,
                "large_count": large_mode_count(res.eigenvalues),
            }
    write_spectrum_csv(out / "spectrum.csv", results)
    record = BenchRecord("spectrum", config.to_dict(), values, ["spectrum.csv"], time.perf_counter() - t0)
    write_manifest(record, out)
    return record


def timing_setup(m: int, ell: int, overlap: int = 1):
    """3D cube of ``m`` cells with its overlap and oversampling layers, padded off the boundary."""
    pad = overlap + ell + 1
    mesh = build_mesh(3, m + 2 * pad)
    problem = build_fine_problem(mesh, constant_field(mesh))
    dec = single_subdomain(mesh, [pad] * 3, [pad + m] * 3, overlap, ell)
    return problem, dec


def run_timing_fillin(config: RunConfig) -> BenchRecord:
    """Mean eigensolve time and saddle-point factor fill per ``(m, ell, variant)``.

    The timed region is the local eigenproblem (harmonic space, factorization
    and Lanczos iteration); the ring's harmonic extension into the interior
    is timed separately since it is not part of the eigenproblem.
    """
    t0 = time.perf_counter()
    out = _outdir(config)
    repeats = max(3, config.repeats)
    rows = []
    values: dict[str, Any] = {}
    for m in config.timing_m:
        for ell in config.timing_ell:
            problem, dec = timing_setup(m, ell)
            sub = dec[0]
            dofs = 2 * sub.star_nodes.size
            if dofs > config.max_dofs:
                warnings.warn(f"skipping m={m}, ell={ell}: about {dofs} saddle unknowns exceeds max_dofs", stacklevel=2)
                continue
            for variant in config.variants:
                opts = EigenOptions(tol=config.eig_tol, block_size=config.eig_block, extend=False)
                times = []
                for _ in range(repeats):
                    t = time.perf_counter()
                    res = eigensolve(problem, dec, None, 0, config.timing_eigenpairs, variant, opts)
                    times.append(time.perf_counter() - t)
                key = f"{m}_{ell}_{variant}"
                values[key] = {
                    "mean_seconds": float(np.mean(times)),
                    "nnz_per_row": res.factor_nnz_per_row,
                    "saddle_size": res.saddle_size,
                    "eigenvalues": res.eigenvalues,
                }
                rows.append(
                    [m, ell, variant, f"{np.mean(times):.6g}", repeats, f"{res.factor_nnz_per_row:.6g}", res.saddle_size]
                )
    with open(out / "timing_fillin.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TIMING_HEADER)
        w.writerows(rows)
    record = BenchRecord(
        "timing_fillin", config.to_dict(), values, ["timing_fillin.csv"], time.perf_counter() - t0, repeats
    )
    write_manifest(record, out)
    return record


__all__ = [
    "BenchRecord",
    "TIMING_HEADER",
    "first_n_below",
    "log_linear_fit",
    "make_coefficient",
    "make_setup",
    "run_decay_experiment",
    "run_iteration_table",
    "run_solve",
    "run_spectrum",
    "run_timing_fillin",
    "timing_setup",
    "write_manifest",
]
