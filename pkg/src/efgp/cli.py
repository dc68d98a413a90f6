"""Batch front-end: JSON experiment configs in, CSV/JSON reports out.

One positional argument names the config document.  Exit status contract:
0 success, 1 any error (parse, validation, or numerical), 2 when a
bound-check run found the eigenvalue-sum inequality violated, so CI can
treat a genuine bound violation differently from a tooling failure.

Every CSV starts with a comment line carrying the toolkit version and the
config hash; report.json embeds the same fields.  Given identical configs,
all CSV and diagnostics outputs are byte-identical across runs (fixed
accumulation order, deterministic seeds); report.json additionally carries
wall-clock timings.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, _kernels, analysis, spectral
from .errors import (
    EfgpError,
    ParseError,
    PipelineError,
    ValidationError,
)
from .operators import FAMILIES, OperatorSpec, Potential, build_jacobi, envelope_constant, make_potential
from .prufer import SpectralParam, evolve_trajectory

COMMANDS = ("spectrum", "prufer", "bound-check", "lemma-sums", "construct")


@dataclass
class ExperimentConfig:
    command: str
    output_dir: str = "out"
    potential: Optional[Potential] = None
    phi: Optional[float] = None
    n: Optional[int] = None
    window: Optional[tuple] = None
    x_values: tuple = ()
    checkpoints: Optional[tuple] = None
    tol: float = 1e-10
    distinct_tol: float = 1e-8
    certified_only: bool = True
    C: Optional[float] = None
    envelope_range: Optional[tuple] = None
    stabilization_threshold: float = analysis.STABILIZATION_THRESHOLD
    x: Optional[float] = None
    c: Optional[float] = None
    raw: dict = field(default_factory=dict)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _need(obj: dict, key: str, path: str):
    if key not in obj:
        raise ValidationError(f"{path}{key}", "required field is missing")
    return obj[key]


def _reject_unknown(obj: dict, allowed, path: str):
    for key in obj:
        if key not in allowed:
            raise ValidationError(f"{path}{key}", "unknown field")


def _as_phase(v, fieldname: str) -> float:
    if not _is_num(v):
        raise ValidationError(fieldname, "must be a number")
    if not 0.0 < float(v) < math.pi:
        raise ValidationError(fieldname, "must lie in the open interval (0, pi)")
    return float(v)


def _parse_potential(obj, path: str = "potential") -> Potential:
    if not isinstance(obj, dict):
        raise ValidationError(path, "must be an object")
    allowed = {"family", "c", "omega", "delta", "seed", "values",
               "values_file", "n0"}
    _reject_unknown(obj, allowed, path + ".")
    family = _need(obj, "family", path + ".")
    if not isinstance(family, str) or family.lower().replace("-", "_") not in FAMILIES:
        raise ValidationError(f"{path}.family",
                              f"must be one of {', '.join(FAMILIES)}")
    kwargs = {}
    for key in ("c", "omega", "delta"):
        if key in obj:
            if not _is_num(obj[key]):
                raise ValidationError(f"{path}.{key}", "must be a number")
            kwargs[key] = float(obj[key])
    if "seed" in obj:
        if not _is_int(obj["seed"]):
            raise ValidationError(f"{path}.seed", "must be an integer")
        kwargs["seed"] = obj["seed"]
    if "n0" in obj:
        if not _is_int(obj["n0"]) or obj["n0"] < 1:
            raise ValidationError(f"{path}.n0", "must be a positive integer")
        kwargs["n0"] = obj["n0"]
    values = None
    if "values" in obj and "values_file" in obj:
        raise ValidationError(f"{path}.values", "give values or values_file, not both")
    if "values" in obj:
        if (not isinstance(obj["values"], list)
                or not all(_is_num(v) for v in obj["values"])):
            raise ValidationError(f"{path}.values", "must be a list of numbers")
        values = obj["values"]
    if "values_file" in obj:
        try:
            text = Path(obj["values_file"]).read_text(encoding="utf-8")
        except OSError as exc:
            raise ValidationError(f"{path}.values_file", f"unreadable: {exc}")
        values = []
        for i, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise ValidationError(f"{path}.values_file",
                                      f"line {i} is not a number: {line!r}")
    try:
        return make_potential(family, values=values, **kwargs)
    except EfgpError as exc:
        raise ValidationError(path, str(exc))


def parse_config(text: str) -> ExperimentConfig:
    """Validate a JSON experiment document into an ExperimentConfig.

    Strict mode: unknown fields anywhere are rejected with their path.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"config is not well-formed JSON: {exc}")
    if not isinstance(obj, dict):
        raise ParseError("config must be a JSON object")

    command = _need(obj, "command", "")
    if command not in COMMANDS:
        raise ValidationError("command", f"must be one of {', '.join(COMMANDS)}")

    common = {"command", "output_dir"}
    per_command = {
        "spectrum": common | {"potential", "phi", "N", "window", "tol",
                              "checkpoints", "distinct_tol"},
        "prufer": common | {"potential", "phi", "N", "x_values"},
        "bound-check": common | {"potential", "phi", "N", "x_values", "window",
                                 "checkpoints", "tol", "distinct_tol",
                                 "certified_only", "C", "envelope_range"},
        "lemma-sums": common | {"potential", "phi", "N", "x_values",
                                "stabilization_threshold"},
        "construct": common | {"x", "c", "N", "checkpoints"},
    }
    _reject_unknown(obj, per_command[command], "")

    cfg = ExperimentConfig(command=command, raw=obj)
    if "output_dir" in obj:
        if not isinstance(obj["output_dir"], str):
            raise ValidationError("output_dir", "must be a string")
        cfg.output_dir = obj["output_dir"]

    n = _need(obj, "N", "")
    if not _is_int(n) or n < 2:
        raise ValidationError("N", "must be an integer >= 2")
    cfg.n = n

    if command != "construct":
        cfg.potential = _parse_potential(_need(obj, "potential", ""))
        cfg.phi = _as_phase(_need(obj, "phi", ""), "phi")

    if "window" in obj or command == "spectrum":
        w = _need(obj, "window", "")
        if (not isinstance(w, list) or len(w) != 2
                or not all(_is_num(v) for v in w) or not w[0] < w[1]):
            raise ValidationError("window", "must be [lo, hi] with lo < hi")
        cfg.window = (float(w[0]), float(w[1]))

    if "x_values" in obj or command in ("prufer", "lemma-sums"):
        xs = _need(obj, "x_values", "")
        if not isinstance(xs, list) or not xs:
            raise ValidationError("x_values", "must be a nonempty list")
        cfg.x_values = tuple(
            _as_phase(v, f"x_values[{i}]") for i, v in enumerate(xs))

    if command == "bound-check" and cfg.window is None and not cfg.x_values:
        raise ValidationError("x_values", "bound-check needs x_values or window")

    if "checkpoints" in obj:
        cps = obj["checkpoints"]
        if (not isinstance(cps, list) or not cps
                or not all(_is_int(v) for v in cps)):
            raise ValidationError("checkpoints", "must be a list of integers")
        if any(v < 2 or v > cfg.n for v in cps):
            raise ValidationError("checkpoints", f"entries must lie in [2, {cfg.n}]")
        if sorted(cps) != cps:
            raise ValidationError("checkpoints", "must be increasing")
        cfg.checkpoints = tuple(cps)

    for key, attr, cond, msg in (
            ("tol", "tol", lambda v: v > 0, "must be positive"),
            ("distinct_tol", "distinct_tol", lambda v: v > 0, "must be positive"),
            ("C", "C", lambda v: v >= 0, "must be >= 0"),
            ("stabilization_threshold", "stabilization_threshold",
             lambda v: v > 0, "must be positive")):
        if key in obj:
            if not _is_num(obj[key]) or not cond(obj[key]):
                raise ValidationError(key, msg)
            setattr(cfg, attr, float(obj[key]))

    if "certified_only" in obj:
        if not isinstance(obj["certified_only"], bool):
            raise ValidationError("certified_only", "must be a boolean")
        cfg.certified_only = obj["certified_only"]

    if "envelope_range" in obj:
        er = obj["envelope_range"]
        if (not isinstance(er, list) or len(er) != 2
                or not all(_is_int(v) for v in er) or not 1 <= er[0] <= er[1]):
            raise ValidationError("envelope_range",
                                  "must be [lo, hi] integers with 1 <= lo <= hi")
        cfg.envelope_range = (er[0], er[1])

    if command == "construct":
        cfg.x = _as_phase(_need(obj, "x", ""), "x")
        cv = _need(obj, "c", "")
        if not _is_num(cv):
            raise ValidationError("c", "must be a number")
        cfg.c = float(cv)

    return cfg


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _write_csv(path: Path, columns, rows, stamp: str):
    lines = [f"# {stamp}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def _record_dict(rec: spectral.EigenvalueRecord) -> dict:
    return {
        "E": rec.E,
        "weight": rec.weight,
        "x": rec.x,
        "certificate_N": rec.certificate.n_star,
        "certificate_RNsq": rec.certificate.rn_sq,
        "certificate_passed": rec.certificate.passed,
        "decay_exponent": rec.decay_exponent,
        "r1": rec.r1,
    }


_SPECTRUM_COLS = ("E", "weight", "x", "certificate_N", "certificate_RNsq",
                  "certificate_passed", "decay_exponent")


def _record_row(rec: spectral.EigenvalueRecord) -> tuple:
    return (rec.E, rec.weight,
            rec.x if rec.x is not None else float("nan"),
            rec.certificate.n_star, rec.certificate.rn_sq,
            rec.certificate.passed,
            rec.decay_exponent if rec.decay_exponent is not None else float("nan"))


def _map_ordered(fn, items, threads: int):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(v) for v in items]


class _Stages:
    """Per-stage wall-clock bookkeeping; rewraps errors with the stage name."""

    def __init__(self):
        self.timings = {}

    def run(self, name, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        except EfgpError as exc:
            raise PipelineError(name, exc) from exc
        finally:
            self.timings[name] = time.perf_counter() - t0


def _classify_record(spec, E, checkpoints):
    if -2.0 < E < 2.0:
        return spectral.classify_point_spectrum(spec, E, checkpoints)
    return spectral.EigenvalueRecord(
        E=float(E), x=None, weight=analysis.theorem_weight(E),
        certificate=spectral.Certificate(n_star=0, rn_sq=float("nan"),
                                         passed=False))


def _window_eigenvalues(jac, cfg):
    return spectral.eigenvalues_in_window(jac, cfg.window, cfg.tol)


# --------------------------------------------------------------------------
# command pipelines
# --------------------------------------------------------------------------

def run(cfg: ExperimentConfig, threads: int = 1, quiet: bool = True) -> dict:
    """Execute a validated config; writes outputs and returns the report.

    The report carries "exit_code": 0, or 2 when a bound-check found the
    inequality violated.
    """
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    # the hash identifies the experiment, not where it lands on disk
    hashed = {k: v for k, v in cfg.raw.items() if k != "output_dir"}
    cfg_hash = hashlib.sha256(
        json.dumps(hashed, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()[:16]
    stamp = f"efgp {__version__} config={cfg_hash}"
    stages = _Stages()
    exit_code = 0

    def note(msg):
        if not quiet:
            print(msg)

    payload: dict = {}

    if cfg.command == "spectrum":
        spec = OperatorSpec(cfg.potential, cfg.phi, cfg.n)
        jac = stages.run("build_jacobi", build_jacobi, spec)
        eigs = stages.run("bisection", _window_eigenvalues, jac, cfg)
        note(f"spectrum: {eigs.size} eigenvalues in window")
        records = stages.run(
            "classify", _map_ordered,
            lambda E: _classify_record(spec, E, cfg.checkpoints), list(eigs),
            threads)
        eset = spectral.make_eigenvalue_set(records, cfg.distinct_tol)
        _write_csv(out_dir / "spectrum.csv", _SPECTRUM_COLS,
                   [_record_row(r) for r in eset.records], stamp)
        payload = {"count": len(eset.records),
                   "records": [_record_dict(r) for r in eset.records]}

    elif cfg.command == "prufer":
        spec = OperatorSpec(cfg.potential, cfg.phi, cfg.n)

        def one(jx):
            j, xval = jx
            traj = evolve_trajectory(spec, SpectralParam.from_x(xval))
            u = traj.u_values()
            rows = zip(range(1, traj.n + 1), u[1:].tolist(),
                       traj.R[1:].tolist(), traj.theta[1:].tolist(),
                       traj.theta_bar[1:].tolist(), traj.ln_R[1:].tolist())
            _write_csv(out_dir / f"trajectory_{j}.csv",
                       ("n", "u", "R", "theta", "theta_bar", "ln_R"),
                       rows, stamp)
            return {"x": xval, "E": traj.param.E, "r1": traj.r1,
                    "ln_R_final": float(traj.ln_R[-1]),
                    "theta_final": float(traj.theta[-1]),
                    "file": f"trajectory_{j}.csv"}

        summaries = stages.run(
            "trajectories", _map_ordered, one,
            list(enumerate(cfg.x_values, 1)), threads)
        payload = {"trajectories": summaries}

    elif cfg.command == "bound-check":
        spec = OperatorSpec(cfg.potential, cfg.phi, cfg.n)
        energies = [2.0 * math.cos(xv) for xv in cfg.x_values]
        if cfg.window is not None:
            jac = stages.run("build_jacobi", build_jacobi, spec)
            eigs = stages.run("bisection", _window_eigenvalues, jac, cfg)
            energies.extend(float(v) for v in eigs)
        records = stages.run(
            "classify", _map_ordered,
            lambda E: _classify_record(spec, E, cfg.checkpoints),
            energies, threads)
        eset = spectral.make_eigenvalue_set(records, cfg.distinct_tol)
        if cfg.C is not None:
            c_used = cfg.C
        else:
            lo, hi = cfg.envelope_range or (1, cfg.n)
            c_used = stages.run("envelope", envelope_constant,
                                cfg.potential, lo, hi)
        report = stages.run("check_theorem", analysis.check_theorem,
                            eset, c_used, cfg.certified_only)
        _write_csv(out_dir / "spectrum.csv", _SPECTRUM_COLS,
                   [_record_row(r) for r in eset.records], stamp)
        payload = report.to_json_dict(
            records=[_record_dict(r) for r in eset.records])
        if not report.satisfied:
            exit_code = 2
        note(f"bound-check: lhs={report.lhs:.6g} rhs={report.rhs:.6g} "
             f"satisfied={report.satisfied}")

    elif cfg.command == "lemma-sums":
        spec = OperatorSpec(cfg.potential, cfg.phi, cfg.n)
        trajs = stages.run(
            "trajectories", _map_ordered,
            lambda xv: evolve_trajectory(spec, SpectralParam.from_x(xv)),
            list(cfg.x_values), threads)
        diag = stages.run("diagnostics", analysis.prufer_sum_diagnostics,
                          trajs, cfg.n)
        payload = diag.to_json_dict()
        payload["x_values"] = list(cfg.x_values)
        payload["stabilization_threshold"] = cfg.stabilization_threshold
        _write_json(out_dir / "diagnostics.json",
                    {"version": __version__, "config_hash": cfg_hash,
                     **payload})

    elif cfg.command == "construct":
        res = stages.run("construct", spectral.resonance_construct,
                         cfg.x, cfg.c, cfg.n)
        spec = OperatorSpec(res.potential, res.phi, cfg.n)
        record = stages.run("classify", spectral.classify_point_spectrum,
                            spec, res.E, cfg.checkpoints)
        c_used = stages.run("envelope", envelope_constant,
                            res.potential, 1, cfg.n)
        eset = spectral.make_eigenvalue_set([record])
        bound = stages.run("check_theorem", analysis.check_theorem,
                           eset, c_used, True)
        payload = {
            "x": cfg.x, "c": cfg.c, "E": res.E, "phi": res.phi,
            "delta": res.delta,
            "predicted_exponent": res.predicted_exponent,
            "fitted_exponent": res.fitted_exponent,
            "potential": {"family": res.potential.family,
                          "c": res.potential.amplitude,
                          "omega": res.potential.omega,
                          "delta": res.potential.delta},
            "record": _record_dict(record),
            "bound": bound.to_json_dict(),
        }
        note(f"construct: fitted exponent {res.fitted_exponent:.4f} "
             f"(predicted {res.predicted_exponent:.4f})")

    report = {
        "version": __version__,
        "backend": _kernels.backend(),
        "command": cfg.command,
        "config": cfg.raw,
        "config_hash": cfg_hash,
        "timings": stages.timings,
        "payload": payload,
        "exit_code": exit_code,
    }
    _write_json(out_dir / "report.json", report)
    return report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="efgp",
        description="Prufer/EFGP toolkit for half-line discrete Schrodinger "
                    "operators with Coulomb-decay potentials")
    parser.add_argument("config", help="path to a JSON experiment config")
    parser.add_argument("--output-dir", help="override the config's output_dir")
    parser.add_argument("--threads", type=int, default=1,
                        help="parallel workers for independent spectral parameters")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress progress output")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = parse_config(text)
        if args.output_dir:
            cfg.output_dir = args.output_dir
        report = run(cfg, threads=max(1, args.threads), quiet=args.quiet)
    except EfgpError as exc:
        print(f"error in {args.config}: {exc}", file=sys.stderr)
        return 1
    if not args.quiet:
        print(f"report written to {Path(cfg.output_dir) / 'report.json'}")
    return report["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
