"""Command-line front end: ``vdfap <command> [flags]``.

Commands: pdf, cf, moments, entropy, sample, bounds, sweep, validate, mi.
Tables go to ``--out`` (written atomically) or to stdout. Failures print
``{"code", "message", "context"}`` JSON on stderr and exit with 2 (invalid
parameters), 3 (numerical domain) or 4 (I/O).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import capacity as cap
from . import distribution as dist
from .errors import DomainError, ParameterError, VdfapError
from .sampling import sample_exact, write_batch
from .suite import SUITES, run_suite
from .validation import SimulationConfig, estimate_mi_vdfap_input, simulate_first_arrival

COMMANDS = ("pdf", "cf", "moments", "entropy", "sample", "bounds", "sweep", "validate", "mi")
EXIT_PARAM, EXIT_DOMAIN, EXIT_IO = 2, 3, 4
LN2 = math.log(2.0)


@dataclass
class RunManifest:
    command: str
    params: dict = field(default_factory=dict)
    output_path: str | None = None
    format: str = "csv"
    units: str = "nats"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ParameterError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ParameterError(f"unknown format {self.format!r}")
        if self.units not in ("nats", "bits"):
            raise ParameterError(f"unknown units {self.units!r}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))


def _floats(text: str, name: str) -> list[float]:
    try:
        vals = [float(v) for v in str(text).split(",")]
    except ValueError:
        raise ParameterError(f"--{name}: expected comma-separated numbers, got {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise ParameterError(f"--{name}: values must be finite")
    return vals


def parse_grid(text: str, name: str) -> list[float]:
    """``lo:hi:steps`` (linear) or ``lo:hi:stepslog`` / ``lo:hi:steps:log``."""
    parts = str(text).split(":")
    log_space = False
    if len(parts) == 4 and parts[3] == "log":
        parts, log_space = parts[:3], True
    elif len(parts) == 3 and parts[2].endswith("log"):
        parts[2], log_space = parts[2][:-3], True
    if len(parts) != 3:
        raise ParameterError(f"--{name}: expected lo:hi:steps[log], got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ParameterError(f"--{name}: cannot parse {text!r}") from None
    if steps < 1 or not (math.isfinite(lo) and math.isfinite(hi)):
        raise ParameterError(f"--{name}: need finite bounds and steps >= 1")
    if steps == 1:
        return [lo]
    if log_space:
        if lo * hi <= 0:
            raise ParameterError(f"--{name}: log grid endpoints must share a sign")
        return [float(v) for v in np.geomspace(lo, hi, steps)]
    return [float(v) for v in np.linspace(lo, hi, steps)]


def _fmt(v) -> str:
    return f"{float(v):.17g}"


def _table(header: list[str], rows: list[list], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n"
    lines = [",".join(header)] + [",".join(_fmt(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def _vdfap(params: dict) -> dist.VdfapParams:
    return dist.VdfapParams(int(params.get("dim", 2)), params["u"], params["lambda"])


def _need(params: dict, *keys):
    missing = [k for k in keys if params.get(k) is None]
    if missing:
        raise ParameterError("missing required flag(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _unit_scale(units: str) -> float:
    return 1.0 if units == "nats" else 1.0 / LN2


def _build(m: RunManifest):
    """Validate every flag against its owning type; return a zero-arg job."""
    prm = m.params
    cmd = m.command
    scale = _unit_scale(m.units)
    ent = "nats" if m.units == "nats" else "bits"

    if cmd in ("pdf", "cf", "moments", "entropy", "sample"):
        _need(prm, "u", "lambda")
        p = _vdfap(prm)

    if cmd == "pdf":
        _need(prm, "x")
        x = _floats(prm["x"], "x")
        if len(x) != p.d:
            raise ParameterError(f"--x needs {p.d} coordinates")
        return lambda: _table([f"x{i + 1}" for i in range(p.d)] + ["pdf"], [x + [dist.vdfap_pdf(p, x)]], m.format)

    if cmd == "cf":
        _need(prm, "omega")
        w = _floats(prm["omega"], "omega")
        if prm.get("dim") is None:
            p = dist.VdfapParams(len(w), prm["u"], prm["lambda"])
        if len(w) != p.d:
            raise ParameterError(f"--omega needs {p.d} components")
        return lambda: _table([f"w{i + 1}" for i in range(p.d)] + ["cf"], [w + [dist.vdfap_cf(p, w)]], m.format)

    if cmd == "moments":
        def job():
            mu, cov = dist.mean(p), dist.covariance(p)
            if m.format == "json":
                return json.dumps({"mean": mu.tolist(), "covariance": cov.tolist()}, indent=2) + "\n"
            hdr = ["i", "mean"] + [f"cov_{j + 1}" for j in range(p.d)]
            return _table(hdr, [[i + 1, mu[i], *cov[i]] for i in range(p.d)], "csv")

        return job

    if cmd == "entropy":
        return lambda: _table(["dim", "u", "lambda", f"entropy_{ent}"], [[p.d, p.u, p.lam, dist.differential_entropy(p) * scale]], m.format)

    if cmd == "sample":
        _need(prm, "n")
        if m.output_path is None:
            raise ParameterError("sample requires --out")
        n, seed = int(prm["n"]), int(prm.get("seed") or 0)
        if n < 1 or seed < 0:
            raise ParameterError("--n must be >= 1 and --seed >= 0")
        if prm.get("dt") is not None:
            cfg = SimulationConfig(p.d, p.u, 1.0, p.lam, float(prm["dt"]), seed=seed)
            return lambda: simulate_first_arrival(cfg, n)
        return lambda: sample_exact(p, seed, n)

    if cmd in ("bounds", "sweep"):
        _need(prm, "sigma")
        c = cap.CovarianceConstraint.from_entries(_floats(prm["sigma"], "sigma"))
        if cmd == "bounds":
            _need(prm, "u", "lambda")
            dim = int(prm.get("dim") or 2)
            u, lam = float(prm["u"]), float(prm["lambda"])
            cap._validate(u, lam, c, dim)
            u_grid, l_grid = [u], [lam]
        else:
            _need(prm, "grid_u", "grid_lambda")
            u_grid = parse_grid(prm["grid_u"], "grid-u")
            l_grid = parse_grid(prm["grid_lambda"], "grid-lambda")
            for u in u_grid:
                cap._validate(u, 1.0, c, 2)
            for lam in l_grid:
                cap._validate(-1.0, lam, c, 2)

        def job():
            rows = cap.bounds_sweep(u_grid, l_grid, c)
            if m.format == "csv":
                return cap.format_bounds_csv(rows, m.units)
            hdr = ["u", "lambda", "sigma_min", f"lower_{ent}", f"upper_{ent}"]
            return _table(hdr, [[r.u, r.lam, r.sigma_min, r.lower * scale, r.upper * scale] for r in rows], "json")

        return job

    if cmd == "validate":
        suite = prm.get("suite") or "all"
        if suite != "all" and suite not in SUITES:
            raise ParameterError(f"unknown suite {suite!r}; choose from all, {', '.join(SUITES)}")
        n, seed = int(prm.get("n") or 100_000), int(prm.get("seed") or 0)
        if n < 1000 or seed < 0:
            raise ParameterError("validate needs --n >= 1000 and --seed >= 0")
        return lambda: json.dumps(run_suite(suite, n, seed), indent=2) + "\n"

    if cmd == "mi":
        _need(prm, "u", "lambda", "lambda_in")
        dist.VdfapParams(2, prm["u"], prm["lambda"])
        dist.VdfapParams(2, prm["u"], prm["lambda_in"])
        n, k, seed = int(prm.get("n") or 100_000), int(prm.get("k") or 4), int(prm.get("seed") or 0)
        if n < 100 or not 1 <= k < n or seed < 0:
            raise ParameterError("mi needs --n >= 100, 1 <= --k < n, --seed >= 0")

        def job():
            est = estimate_mi_vdfap_input(prm["u"], prm["lambda"], prm["lambda_in"], n, k, seed)
            target = cap.h0(abs(prm["u"]) * (prm["lambda"] + prm["lambda_in"])) - cap.h0(abs(prm["u"]) * prm["lambda"])
            hdr = [f"mi_{ent}", f"std_error_{ent}", f"closed_form_{ent}", "n", "k"]
            return _table(hdr, [[est.value * scale, est.std_error * scale, target * scale, n, k]], m.format)

        return job
    raise ParameterError(f"unknown command {cmd!r}")


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _write_sample(batch, path: Path) -> list[Path]:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.stem}.tmp{path.suffix}")
    try:
        csv_tmp, json_tmp = write_batch(batch, tmp)
        os.replace(csv_tmp, path)
        os.replace(json_tmp, path.with_suffix(".json"))
    except BaseException:
        tmp.unlink(missing_ok=True)
        tmp.with_suffix(".json").unlink(missing_ok=True)
        raise
    return [path, path.with_suffix(".json")]


def _error(code: int, exc: BaseException, manifest: RunManifest | None) -> int:
    context = {"command": manifest.command, "params": manifest.params} if manifest else {}
    payload = {"code": code, "message": str(exc), "context": context}
    print(json.dumps(payload, default=str), file=sys.stderr)
    return code


def run(manifest: RunManifest) -> int:
    """Execute a manifest; returns the process exit status."""
    try:
        job = _build(manifest)
        result = job()
        if manifest.command == "sample":
            files = _write_sample(result, Path(manifest.output_path))
            extra = f", discarded {result.metadata['discarded']}" if "discarded" in result.metadata else ""
            print(f"sample: wrote {result.count} x {result.dim} positions to {files[0]} (+ {files[1].name}{extra})")
        elif manifest.output_path:
            out = Path(manifest.output_path)
            _atomic_write(out, result)
            print(f"{manifest.command}: wrote {out}")
        else:
            sys.stdout.write(result)
        if manifest.command == "validate":
            failed = [r["test"] for r in json.loads(result) if not r["pass"]]
            if failed:
                return _error(EXIT_DOMAIN, DomainError("failed checks: " + ", ".join(failed)), manifest)
        return 0
    except (ParameterError, KeyError, TypeError) as exc:
        return _error(EXIT_PARAM, exc, manifest)
    except (DomainError, VdfapError, ArithmeticError) as exc:
        return _error(EXIT_DOMAIN, exc, manifest)
    except OSError as exc:
        return _error(EXIT_IO, exc, manifest)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParameterError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vdfap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--u", type=float)
        sp.add_argument("--lambda", dest="lambda_", type=float)
        sp.add_argument("--dim", type=int)
        sp.add_argument("--sigma", help="row-major a,b,c,d")
        sp.add_argument("--omega", help="comma-separated frequency vector")
        sp.add_argument("--x", help="comma-separated position (pdf)")
        sp.add_argument("--n", type=int)
        sp.add_argument("--k", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--dt", type=float)
        sp.add_argument("--lambda-in", dest="lambda_in", type=float)
        sp.add_argument("--grid-u")
        sp.add_argument("--grid-lambda")
        sp.add_argument("--suite", default="all")
        sp.add_argument("--units", choices=("nats", "bits"), default="nats")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--out")
    return parser


def manifest_from_args(argv=None) -> RunManifest:
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    out, fmt, units = ns.pop("out"), ns.pop("format"), ns.pop("units")
    ns["lambda"] = ns.pop("lambda_")
    params = {k: v for k, v in ns.items() if v is not None}
    if command != "validate":
        params.pop("suite", None)
    return RunManifest(command, params, out, fmt, units)


def main(argv=None) -> int:
    try:
        manifest = manifest_from_args(argv)
    except ParameterError as exc:
        return _error(EXIT_PARAM, exc, None)
    return run(manifest)


if __name__ == "__main__":
    sys.exit(main())
