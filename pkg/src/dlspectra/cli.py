"""Command-line front end.

Exit statuses::

    0  success
    2  usage error (bad flags, invalid shape or grid)
    3  numerical failure (solver did not converge, residual check failed)
    4  acceptance verification failed
    5  I/O error

Failures also print one JSON error record on stderr.  Relative ``--out``
paths are placed under ``$DLSPECTRA_OUTDIR`` when that variable is set.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__, operators
from .analysis import spectrum_csv, trace_report
from .eigenfunctions import NODAL_CSV_FIELDS, nodal_csv, nodal_report, real_pairs
from .explorer import LEDGER_FIELDS, CurveFamily, EllipsoidFamily, row_to_record, sweep, write_summary
from .geometry import Curve2D, GeometryError, parse_config, shape_from_config
from .spectral import eigenpairs

log = logging.getLogger("dlspectra")

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_VERIFY, EXIT_IO = 0, 2, 3, 4, 5
OUTDIR_ENV = "DLSPECTRA_OUTDIR"

DEFAULTS = {"n": "256", "grid": "32x64", "eps": "0.1", "p": "2", "format": "", "count": "8"}
SHAPE_KEYS = ("shape", "R", "radius", "c", "a", "b", "coeffs", "modes")


class UsageError(Exception):
    pass


class SolverError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    values: dict  # merged config-file and flag values, all strings

    def get(self, key: str, default=None):
        return self.values.get(key, DEFAULTS.get(key, default))

    @property
    def n(self) -> int:
        return _int(self.get("n"), "n")

    @property
    def grid(self) -> tuple[int, int]:
        text = self.get("grid")
        try:
            nt, nph = (int(v) for v in text.lower().split("x"))
        except ValueError:
            raise UsageError(f"grid must look like 32x64, got {text!r}") from None
        return nt, nph

    @property
    def eps(self) -> float:
        return _float(self.get("eps"), "eps")

    @property
    def p(self) -> float:
        return _float(self.get("p"), "p")


def _int(text, name):
    try:
        return int(text)
    except (TypeError, ValueError):
        raise UsageError(f"{name} must be an integer, got {text!r}") from None


def _float(text, name):
    try:
        return float(text)
    except (TypeError, ValueError):
        raise UsageError(f"{name} must be a number, got {text!r}") from None


def _floats(text, name):
    return tuple(_float(v, name) for v in str(text).split(",") if v.strip())


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    shape = argparse.ArgumentParser(add_help=False)
    g = shape.add_argument_group("shape")
    g.add_argument("--shape", choices=["circle", "ellipse", "fourier", "sphere", "ellipsoid"])
    g.add_argument("--radius", help="circle or sphere radius")
    g.add_argument("--R", dest="R", help="ellipse parameter R (or radius)")
    g.add_argument("--c", dest="c", help="ellipse focal parameter, or third ellipsoid axis")
    g.add_argument("--a", dest="a", help="first ellipsoid axis")
    g.add_argument("--b", dest="b", help="second ellipsoid axis")
    g.add_argument("--coeffs", help="fourier coefficients re,im,re,im,...")
    g.add_argument("--modes", help="fourier modes k1,k2,... (default 1,2,...)")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override it")
    common.add_argument("--out", help="output file (stdout when omitted)")
    common.add_argument("--format", choices=["csv", "json"], help="output format (default from --out suffix)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="dlspectra", description="Double layer operator spectra.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[shape, common], help="eigenvalues and singular values")
    p.add_argument("--n", help="2D node count (default 256)")
    p.add_argument("--grid", help="3D grid n_theta x n_phi (default 32x64)")

    p = sub.add_parser("trace", parents=[shape, common], help="tr K, tr K*K and the defect (2D)")
    p.add_argument("--n", help="node count (default 256)")

    p = sub.add_parser("nodal", parents=[shape, common], help="zero counts of eigenfunctions (2D)")
    p.add_argument("--n", help="node count (default 256)")
    p.add_argument("--eps", help="strip width for complex zeros (default 0.1)")
    p.add_argument("--count", help="number of eigenpairs (default 8)")

    p = sub.add_parser("sweep", parents=[common], help="ellipsoid or ellipse family sweep")
    p.add_argument("--family", choices=["ellipsoid", "ellipse"])
    p.add_argument("--bs", help="ellipsoid b values, comma separated")
    p.add_argument("--cs", help="ellipsoid c values, or the ellipse focal parameter")
    p.add_argument("--Rs", dest="Rs", help="ellipse R values, comma separated")
    p.add_argument("--grid", help="3D grid (default 32x64)")
    p.add_argument("--n", help="2D node count (default 256)")
    p.add_argument("--p", help="Schatten exponent p, sums alpha^(2p) (default 2)")
    p.add_argument("--ledger", help="resumable CSV ledger (default: --out)")
    p.add_argument("--summary", help="JSON summary path")
    p.add_argument("--workers", help="parallel worker processes (default 1)")

    p = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    p.add_argument("--quick", action="store_true", help="N=32 / coarse grids, tolerances x10")
    p.add_argument("--only", help="criterion numbers, comma separated")
    return parser


def make_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        try:
            values.update(parse_config(Path(args.config).read_text()))
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        except GeometryError as exc:
            raise UsageError(f"{args.config}: {exc}") from None
    for key, val in vars(args).items():
        if key in ("command", "config", "verbose") or val is None or val is False:
            continue
        values[key] = str(val) if not isinstance(val, bool) else "1"
    return RunConfig(args.command, values)


def shape_of(cfg: RunConfig):
    fields = {k: cfg.values[k] for k in SHAPE_KEYS if k in cfg.values}
    if "shape" not in fields:
        raise UsageError("no shape given (use --shape or shape= in the config)")
    try:
        return shape_from_config(fields)
    except GeometryError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------
# output


def resolve_out(path: str | None) -> Path | None:
    if not path:
        return None
    p = Path(path)
    base = os.environ.get(OUTDIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def out_format(cfg: RunConfig, default: str) -> str:
    fmt = cfg.get("format")
    if fmt:
        return fmt
    out = cfg.get("out")
    if out and Path(out).suffix.lower() in (".csv", ".json"):
        return Path(out).suffix.lower()[1:]
    return default


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(cfg: RunConfig, text: str) -> None:
    path = resolve_out(cfg.get("out"))
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        write_atomic(path, text if text.endswith("\n") else text + "\n")
        log.info("wrote %s", path)


# ---------------------------------------------------------------------------
# commands


def _check(spec) -> None:
    if not spec.converged:
        raise SolverError(f"{spec.shape_id}: eigensolver failed or residual {spec.residual_max:.2e} too large")


def _require_curve(shape, command: str) -> Curve2D:
    if not isinstance(shape, Curve2D):
        raise UsageError(f"{command} needs a plane curve, got {shape.shape_id}")
    return shape


def cmd_spectrum(cfg: RunConfig) -> int:
    shape = shape_of(cfg)
    try:
        if isinstance(shape, Curve2D):
            log.info("shape %s, N=%d", shape.shape_id, cfg.n)
            op = operators.assemble_dlp_2d(shape, cfg.n)
        else:
            log.info("shape %s, grid %dx%d", shape.shape_id, *cfg.grid)
            op = operators.assemble_dlp_3d(shape, *cfg.grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    spec = eigenpairs(op)
    _check(spec)
    emit(cfg, spectrum_csv(spec) if out_format(cfg, "json") == "csv" else spec.to_json())
    return EXIT_OK


def cmd_trace(cfg: RunConfig) -> int:
    curve = _require_curve(shape_of(cfg), "trace")
    if cfg.n < 16 or cfg.n % 2:
        raise UsageError(f"node count must be even and >= 16, got {cfg.n}")
    log.info("shape %s, N=%d", curve.shape_id, cfg.n)
    r = trace_report(curve, cfg.n)
    fmt = out_format(cfg, "text")
    if fmt == "json":
        text = json.dumps(r.to_dict())
    elif fmt == "csv":
        d = r.to_dict()
        text = ",".join(d) + "\n" + ",".join(repr(v) if isinstance(v, float) else str(v) for v in d.values())
    else:
        text = (f"shape {r.shape_id}  N={r.n}\n"
                f"trace_K = {r.trace_K:.15g}\n"
                f"tr(K*K) = {r.trace_KstarK_quadrature:.15g} (quadrature)\n"
                f"tr(K*K) = {r.trace_KstarK_svd:.15g} (sum of alpha^2)\n"
                f"defect = {r.defect:.3e}")
    emit(cfg, text)
    return EXIT_OK


def cmd_nodal(cfg: RunConfig) -> int:
    curve = _require_curve(shape_of(cfg), "nodal")
    try:
        op = operators.assemble_dlp_2d(curve, cfg.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    spec = eigenpairs(op)
    _check(spec)
    pairs = real_pairs(spec, curve, count=_int(cfg.get("count"), "count"), threshold=1e-8)
    log.info("shape %s, N=%d, %d eigenpairs, eps=%g", curve.shape_id, cfg.n, len(pairs), cfg.eps)
    reports = [nodal_report(p, cfg.eps) for p in pairs]
    if out_format(cfg, "csv") == "json":
        text = json.dumps([dict(zip(NODAL_CSV_FIELDS, (r.shape_id, r.n, r.value, r.real_zeros,
                                                        r.annulus_zeros, r.ratio, r.eps))) for r in reports])
    else:
        text = nodal_csv(reports)
    emit(cfg, text)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    fam_kind = cfg.get("family", "ellipsoid")
    if fam_kind == "ellipsoid":
        kw = {}
        if "bs" in cfg.values:
            kw["bs"] = _floats(cfg.values["bs"], "bs")
        if "cs" in cfg.values:
            kw["cs"] = _floats(cfg.values["cs"], "cs")
        nt, nph = cfg.grid
        family = EllipsoidFamily(n_theta=nt, n_phi=nph, **kw)
        label = f"ellipsoid family {len(family.points())} shapes, grid {nt}x{nph}"
    elif fam_kind == "ellipse":
        rs = _floats(cfg.get("Rs", "0.25,0.5,1,2"), "Rs")
        c = _float(cfg.get("cs", "2"), "cs")
        family = CurveFamily("ellipse", tuple({"c": c, "R": r} for r in rs), cfg.n)
        label = f"ellipse family R={list(rs)}, N={cfg.n}"
    else:
        raise UsageError(f"unknown family {fam_kind!r}")
    if not cfg.p > 1:
        raise UsageError(f"p must exceed 1, got {cfg.p}")
    log.info("%s, p=%g", label, cfg.p)
    ledger = resolve_out(cfg.get("ledger") or cfg.get("out"))
    result = sweep(family, p=cfg.p, ledger=ledger, workers=_int(cfg.get("workers", "1"), "workers"))
    summary_path = resolve_out(cfg.get("summary"))
    if summary_path:
        write_summary(result.summary, summary_path)
    if ledger is None:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=LEDGER_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in result.rows:
            w.writerow(row_to_record(row))
        sys.stdout.write(buf.getvalue())
    if not summary_path:
        sys.stderr.write(json.dumps(result.summary, sort_keys=True) + "\n")
    if result.summary["failed"]:
        raise SolverError(f"{len(result.summary['failed'])} sweep points failed")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    from .acceptance import verify_suite

    only = None
    if "only" in cfg.values:
        only = {_int(v, "only") for v in cfg.values["only"].split(",") if v.strip()}
    quick = cfg.values.get("quick") == "1"
    lines = []

    def echo(line):
        lines.append(line)
        print(line, flush=True)

    results = verify_suite(quick=quick, only=only, echo=echo)
    passed = sum(r.passed for r in results)
    summary = f"{passed}/{len(results)} criteria passed" + (" (quick mode)" if quick else "")
    print(summary)
    if cfg.get("out"):
        emit(cfg, "\n".join(lines + [summary]))
    return EXIT_OK if passed == len(results) else EXIT_VERIFY


COMMANDS = {"spectrum": cmd_spectrum, "trace": cmd_trace, "nodal": cmd_nodal,
            "sweep": cmd_sweep, "verify": cmd_verify}


def _fail(status: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"status": status, "error": kind, "message": message}) + "\n")
    return status


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    log.info("dlspectra %s, numpy %s, scipy %s", __version__, np.__version__, scipy.__version__)
    t0 = time.perf_counter()
    try:
        cfg = make_config(args)
        status = COMMANDS[args.command](cfg)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", str(exc))
    except SolverError as exc:
        return _fail(EXIT_SOLVER, "solver", str(exc))
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        return _fail(EXIT_SOLVER, "solver", str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, "io", str(exc))
    finally:
        log.info("wall time %.2fs", time.perf_counter() - t0)
    return status


if __name__ == "__main__":
    sys.exit(main())
