"""Configuration-driven batch runs: ``interface-scattering run --config FILE``.

Exit status: 0 on success, 1 for invalid configuration, 2 for numerical
failure, 3 when the acceptance experiment reports a failed criterion.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Callable, Mapping

import click
import numpy as np

from .acceptance import CRITERIA, loglog_slope, report_line, run_criteria
from .eigen import pde_residual, psi_minus_theta
from .evolve import (
    SpectralData,
    build_wave_operator,
    gaussian_packet,
    propagate_free,
    propagate_theta,
    remainder_norm,
)
from .jost import jost_csv_rows, jost_pair, jost_wronskian, jost_wronskian_w0
from .krein import determinant_field, eigenvalue_track, interface_residuals, spectral_scan
from .numerics import ConfigurationError, NumericalError, make_grid, make_kgrid
from .potential import build_potential

log = logging.getLogger("interface_scattering")

EXPERIMENTS = ("jost", "spectrum", "eigenfun", "waveop", "propagate", "sweep", "acceptance")
EXIT_CONFIG, EXIT_NUMERICAL, EXIT_ACCEPTANCE = 1, 2, 3


def parse_complex(value: Any, label: str) -> complex:
    """A number, or ``[re, im]``."""
    if isinstance(value, bool):
        raise ConfigurationError(f"{label} must be a number or [re, im]")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(value[0], value[1])
    raise ConfigurationError(f"{label} must be a number or [re, im], got {value!r}")


def parse_theta(value: Any, label: str = "theta") -> tuple[complex, complex]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigurationError(f"{label} must be a pair")
    return parse_complex(value[0], f"{label}[0]"), parse_complex(value[1], f"{label}[1]")


def _block(cfg: Mapping, name: str) -> Mapping:
    block = cfg.get(name)
    if not isinstance(block, Mapping):
        raise ConfigurationError(f"experiment '{cfg['experiment']}' needs a '{name}' block")
    return block


def _grid(cfg: Mapping):
    g = _block(cfg, "grid")
    try:
        return make_grid(g["x_min"], g["a"], g["b"], g["x_max"], g["counts"])
    except (KeyError, TypeError) as exc:
        raise ConfigurationError("grid block needs x_min, a, b, x_max and counts") from exc


def _potential(cfg: Mapping, grid):
    return build_potential(_block(cfg, "potential"), grid)


def _kgrid(cfg: Mapping):
    s = cfg.get("spectral", {})
    if not isinstance(s, Mapping):
        raise ConfigurationError("spectral block must be an object")
    return make_kgrid(s.get("k_min", 0.05), s.get("k_max", 8.0), s.get("n_k", 1024))


def _reals(value: Any, label: str) -> list[float]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigurationError(f"{label} must be a non-empty list")
    try:
        out = [float(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{label} must contain real numbers") from exc
    if not all(np.isfinite(out)):
        raise ConfigurationError(f"{label} must be finite")
    return out


def _thetas(cfg: Mapping) -> list[tuple[complex, complex]]:
    if "theta" in cfg:
        return [parse_theta(cfg["theta"])]
    if "thetas" in cfg:
        return [parse_theta(t, "thetas[]") for t in cfg["thetas"]]
    return [(0j, 0j)]


def _tolerances(cfg: Mapping) -> dict[str, float]:
    tol = {"scan_threshold": 1e-3}
    user = cfg.get("tolerances", {})
    if not isinstance(user, Mapping):
        raise ConfigurationError("tolerances must be an object")
    for key, value in user.items():
        if key not in tol:
            raise ConfigurationError(f"unknown tolerance '{key}'")
        v = float(value)
        if not v > 0:
            raise ConfigurationError(f"tolerance '{key}' must be positive")
        tol[key] = v
    return tol


def _c(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


class Writer:
    """Collects CSV and JSON artefacts with deterministic number formatting."""

    def __init__(self, out: Path) -> None:
        self.out = out
        self.files: list[str] = []
        out.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, header: list[str], rows) -> None:
        path = self.out / name
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                            for v in row])
        self.files.append(name)

    def json(self, name: str, payload) -> None:
        (self.out / name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        self.files.append(name)


def run_jost(cfg: Mapping, w: Writer, jobs: int) -> int:
    V = _potential(cfg, _grid(cfg))
    block = cfg.get("jost", {})
    zetas = [parse_complex(z, "jost.zeta[]") for z in block.get("zeta", [0.5, 1.0, 2.0, [1.0, 1.0]])]
    ks = _reals(block.get("k", list(np.linspace(0.2, 5.0, 20))), "jost.k")
    sol_rows, w_rows = [], []
    for zeta in zetas:
        plus, minus = jost_pair(zeta, V)
        wz = jost_wronskian(zeta, V, (plus, minus))
        w_rows.append((*_c(zeta), *_c(wz)))
        for side, sol in (("right", plus), ("left", minus)):
            sol_rows.extend((*_c(zeta), side, *r) for r in jost_csv_rows(sol))
    id_rows = []
    for k in ks:
        pair = jost_pair(k, V)
        a2 = abs(jost_wronskian(k, V, pair)) ** 2
        b2 = abs(jost_wronskian_w0(k, V, pair)) ** 2
        id_rows.append((k, a2, b2, abs(a2 - b2 - 4 * k * k) / (4 * k * k)))
    w.csv("jost_solutions.csv", ["zeta_re", "zeta_im", "side", "x", "chi_re", "chi_im",
                                 "dchi_re", "dchi_im"], sol_rows)
    w.csv("jost_function.csv", ["zeta_re", "zeta_im", "w_re", "w_im"], w_rows)
    w.csv("wronskian_identity.csv", ["k", "abs_w_sq", "abs_w0_sq", "rel_error"], id_rows)
    worst = max(r[3] for r in id_rows)
    w.json("wronskian_report.json", {"max_rel_error": worst, "count": len(id_rows)})
    click.echo(f"modulus identity: max relative error {worst:.2e} over {len(id_rows)} momenta")
    return 0


def run_spectrum(cfg: Mapping, w: Writer, jobs: int) -> int:
    V = _potential(cfg, _grid(cfg))
    block = cfg.get("spectrum", {})
    region = _reals(block.get("region", [-5.0, -0.1, -1.0, 1.0]), "spectrum.region")
    resolution = [int(v) for v in block.get("resolution", [25, 9])]
    if len(region) != 4 or len(resolution) != 2:
        raise ConfigurationError("spectrum.region needs 4 numbers and resolution 2 counts")
    threshold = _tolerances(cfg)["scan_threshold"]
    starts = _reals(block.get("track_from", []), "spectrum.track_from")
    field = determinant_field(region, resolution, V)
    theta_cols = ["theta1_re", "theta1_im", "theta2_re", "theta2_im"]
    rows, heat, tracks = [], [], []
    for th in _thetas(cfg):
        for z in spectral_scan(region, resolution, th, V, threshold=threshold, field=field):
            rows.append((*_c(th[0]), *_c(th[1]), *_c(z)))
        # regularized determinant divided by w; nan where w vanishes
        with np.errstate(divide="ignore", invalid="ignore"):
            det = np.abs(field.regularized(th) / field.w)
        heat.extend((*_c(th[0]), *_c(th[1]), *_c(z), float(d))
                    for z, d in zip(field.z.ravel(), det.ravel()))
        for e0 in starts:
            z = eigenvalue_track(e0, th, V)
            tracks.append({"theta": [_c(th[0]), _c(th[1])], "E0": e0, "eigenvalue": _c(z)})
    w.csv("spectrum.csv", theta_cols + ["z_re", "z_im"], rows)
    w.csv("spectrum_field.csv", theta_cols + ["z_re", "z_im", "abs_det"], heat)
    w.json("spectrum_tracks.json", tracks)
    click.echo(f"spectral scan: {len(rows)} candidate(s), {len(tracks)} track point(s)")
    return 0


def run_eigenfun(cfg: Mapping, w: Writer, jobs: int) -> int:
    V = _potential(cfg, _grid(cfg))
    ks = _reals(cfg.get("eigenfun", {}).get("k", [-2.0, -1.0, 1.0, 2.0]), "eigenfun.k")
    rows, prof = [], []
    for k in ks:
        pair = jost_pair(abs(k), V)
        for th in _thetas(cfg):
            st = psi_minus_theta(k, th, V, pair)
            res = interface_residuals(st.function, th)
            iface = max(v for key, v in res.items() if not key.startswith("literal"))
            rows.append((k, *_c(th[0]), *_c(th[1]), *_c(st.R), *_c(st.T),
                         abs(st.R) ** 2 + abs(st.T) ** 2, iface, res["literal_derivative_a"],
                         pde_residual(st.function, V, k * k)))
            prof.extend((k, *_c(th[0]), *_c(th[1]), float(x), *_c(u))
                        for x, u in zip(V.grid.nodes, st.function.flat()))
    w.csv("eigenfunctions.csv",
          ["k", "theta1_re", "theta1_im", "theta2_re", "theta2_im", "R_re", "R_im", "T_re",
           "T_im", "flux", "interface_residual", "literal_condition_residual", "pde_residual"],
          rows)
    w.csv("eigenfunction_profiles.csv",
          ["k", "theta1_re", "theta1_im", "theta2_re", "theta2_im", "x", "psi_re", "psi_im"], prof)
    click.echo(f"eigenfunctions: {len(rows)} states")
    return 0


def _spectral(cfg: Mapping, jobs: int) -> SpectralData:
    return SpectralData(_potential(cfg, _grid(cfg)), _kgrid(cfg), jobs=jobs)


def _op_rows(data: SpectralData, thetas, jobs: int):
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        return list(pool.map(lambda th: build_wave_operator(th, data), thetas))


def run_waveop(cfg: Mapping, w: Writer, jobs: int) -> int:
    data = _spectral(cfg, jobs)
    ops = _op_rows(data, _thetas(cfg), jobs)
    rows = [(*_c(op.theta[0]), *_c(op.theta[1]), op.deviation, op.solve_residual,
             "" if op.neumann_gap is None else op.neumann_gap) for op in ops]
    w.csv("waveop.csv", ["theta1_re", "theta1_im", "theta2_re", "theta2_im", "deviation",
                         "solve_residual", "neumann_gap"], rows)
    click.echo(f"wave operators: {len(rows)} built")
    return 0


def _times(cfg: Mapping, default) -> list[float]:
    return _reals(cfg.get("times", default), "times")


def run_propagate(cfg: Mapping, w: Writer, jobs: int) -> int:
    data = _spectral(cfg, jobs)
    theta = _thetas(cfg)[0]
    op = build_wave_operator(theta, data)
    pk = cfg.get("packet", {"center": -6.0, "momentum": 1.0, "width": 2.0})
    phi = gaussian_packet(data.grid, float(pk["center"]), float(pk["momentum"]), float(pk["width"]))
    times = _times(cfg, [0.0, 1.0, 5.0, 20.0, 100.0])

    def one(t):
        free = propagate_free(phi, t, data)
        pert = propagate_theta(phi, t, op, data)
        return (t, remainder_norm(t, op), free.norm(), pert.norm(), (pert.flat() - free.flat()))

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        out = list(pool.map(one, times))
    w.csv("propagate.csv", ["t", "remainder_norm", "free_packet_norm", "theta_packet_norm"],
          [r[:4] for r in out])
    x = data.grid.nodes
    w.csv("propagate_profiles.csv", ["t", "x", "difference_re", "difference_im"],
          [(r[0], float(xi), *_c(d)) for r in out for xi, d in zip(x, r[4])])
    click.echo(f"propagation: {len(times)} times, max remainder {max(r[1] for r in out):.3e}")
    return 0


def run_sweep(cfg: Mapping, w: Writer, jobs: int) -> int:
    data = _spectral(cfg, jobs)
    block = cfg.get("sweep", {})
    values = _reals(block.get("values", [1e-1, 1e-2, 1e-3, 1e-4]), "sweep.values")
    if any(v <= 0 for v in values) or len(values) < 2:
        raise ConfigurationError("sweep.values needs at least two positive magnitudes")
    slots = block.get("slots", ["theta1", "theta2", "both"])
    t_fixed = float(block.get("t", 10.0))
    rows, fit = [], {}
    for slot in slots:
        if slot not in ("theta1", "theta2", "both"):
            raise ConfigurationError(f"unknown sweep slot {slot!r}")
        thetas = [(v if slot != "theta2" else 0.0, v if slot != "theta1" else 0.0)
                  for v in values]
        ops = _op_rows(data, thetas, jobs)
        devs = [op.deviation for op in ops]
        rems = [remainder_norm(t_fixed, op) for op in ops]
        rows.extend((slot, v, d, r) for v, d, r in zip(values, devs, rems))
        fit[slot] = {"deviation_exponent": loglog_slope(values, devs),
                     "remainder_exponent": loglog_slope(values, rems)}
    w.csv("sweep.csv", ["slot", "theta_abs", "deviation", f"remainder_t{t_fixed:g}"], rows)
    w.json("sweep_fit.json", {"t": t_fixed, "fits": fit})
    for slot, f in fit.items():
        click.echo(f"{slot}: exponent {f['deviation_exponent']:.3f} (W - I), "
                   f"{f['remainder_exponent']:.3f} (remainder)")
    return 0


def run_acceptance(cfg: Mapping, w: Writer, jobs: int) -> int:
    selected = cfg.get("acceptance", {}).get("criteria")
    results = run_criteria(selected, jobs=jobs)
    for r in results:
        click.echo(report_line(r))
    w.csv("acceptance.csv", ["criterion", "title", "passed", "seconds", "summary"],
          [(r.number, r.title, int(r.passed), round(r.seconds, 3), r.summary) for r in results])
    w.json("acceptance_details.json",
           {str(r.number): json.loads(json.dumps(r.details, default=_jsonable)) for r in results})
    return 0 if all(r.passed for r in results) else EXIT_ACCEPTANCE


def _jsonable(obj):
    if isinstance(obj, complex):
        return _c(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return str(obj)


RUNNERS: dict[str, Callable[[Mapping, Writer, int], int]] = {
    "jost": run_jost,
    "spectrum": run_spectrum,
    "eigenfun": run_eigenfun,
    "waveop": run_waveop,
    "propagate": run_propagate,
    "sweep": run_sweep,
    "acceptance": run_acceptance,
}


def load_config(path: Path, experiment: str | None) -> tuple[dict, str]:
    try:
        raw = path.read_bytes()
        cfg = json.loads(raw)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigurationError("config must be a JSON object")
    if experiment is not None:
        cfg["experiment"] = experiment
    if cfg.get("experiment") not in EXPERIMENTS:
        raise ConfigurationError(f"experiment must be one of {EXPERIMENTS}")
    _tolerances(cfg)
    digest = hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()
    return cfg, digest


def _package_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def execute(config: Path, experiment: str | None, out: Path | None, jobs: int) -> int:
    cfg, digest = load_config(config, experiment)
    out_dir = Path(out if out is not None else cfg.get("output", "runs")) / cfg["experiment"]
    if jobs < 1:
        raise ConfigurationError("--jobs must be at least 1")
    writer = Writer(out_dir)
    log.info("running %s into %s with %d job(s)", cfg["experiment"], out_dir, jobs)
    status = RUNNERS[cfg["experiment"]](cfg, writer, jobs)
    files = {name: hashlib.sha256((out_dir / name).read_bytes()).hexdigest()
             for name in writer.files}
    manifest = {
        "experiment": cfg["experiment"],
        "config_sha256": digest,
        "config": cfg,
        "files": files,
        "status": status,
        "package_version": _package_version(),
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n")
    click.echo(f"wrote {len(files)} file(s) and manifest.json to {out_dir}")
    return status


@click.group()
@click.option("--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose: bool) -> None:
    """Scattering for 1D Schroedinger operators with interface conditions."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--config", "config", required=True, type=click.Path(path_type=Path),
              help="JSON run configuration.")
@click.option("--experiment", type=click.Choice(EXPERIMENTS), default=None,
              help="Override the experiment named in the config.")
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Output directory (default: the config's 'output' or ./runs).")
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker threads.")
def run(config: Path, experiment: str | None, out: Path | None, jobs: int) -> None:
    """Run one experiment and write CSV tables plus a manifest."""
    try:
        status = execute(config, experiment, out, jobs)
    except ConfigurationError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except NumericalError as exc:
        click.echo(f"numerical error: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    sys.exit(status)


@main.command("criteria")
def list_criteria() -> None:
    """List the acceptance checks."""
    for n, fn in CRITERIA.items():
        click.echo(f"{n:2d}  {fn.__name__}: {(fn.__doc__ or '').strip().splitlines()[0]}")
