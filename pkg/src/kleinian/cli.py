"""Command line front end.

Exit codes: 0 success, 1 a verification gate or a numerical step failed
(a gate report is still written), 2 invalid or unsupported input.  Complex numbers are written as [re, im] pairs and
matrices row by row, with columns indexing cycles.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

from .algebra import HYPERELLIPTIC, CurveError, CurveSpec, Poly
from .jacobian import (CurvePoint, Divisor, SpecialDivisorError, abel_point, check_divisor, divisor_polynomials,
                       jacobi_polynomials, K_characteristic, coefficient_mismatch, wp_all)
from .periods import PeriodGateError, compute_periods
from .quad import TOL
from .sheets import contour_samples, real_branch_residual
from .theta import (Characteristic, ThetaParams, bolza_branch_points, sato_weight, theta_char,
                    vanishing_profile)

SCHEMA_VERSION = 1
THREADS_ENV = "KLEINIAN_THREADS"


class InputError(ValueError):
    pass


# -- parsing ----------------------------------------------------------------------

def parse_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise InputError(f"complex pair must have two entries: {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", "").replace("i", "j"))
        except ValueError as exc:
            raise InputError(f"not a complex number: {v!r}") from exc
    return complex(v)


def _coeffs(v) -> list[complex]:
    if not isinstance(v, list):
        raise InputError("coefficients must be a list, lowest degree first")
    return [parse_complex(c) for c in v]


def curve_from_dict(d: dict) -> CurveSpec:
    """Coefficient form {family, P, Q, T} or branch-point form {family, branch_points, Q}."""
    family = str(d.get("family", "")).lower()
    if family.startswith("hyper"):
        if "branch_points" in d:
            q = _coeffs(d["Q"]) if "Q" in d else None
            return CurveSpec.from_branch_points(_coeffs(d["branch_points"]), q)
        return CurveSpec.hyperelliptic(Poly(_coeffs(d["P"])), Poly(_coeffs(d.get("Q", [0]))))
    if family.startswith("trig"):
        T = Poly(_coeffs(d["T"])) if "T" in d else None
        return CurveSpec.trigonal(Poly(_coeffs(d["P"])), Poly(_coeffs(d.get("Q", [0]))), T)
    raise InputError(f"unknown curve family {d.get('family')!r}")


def parse_inline(text: str) -> dict:
    """Compact form, e.g. ``hyperelliptic; e=-2,0,1j,3,5`` or ``trigonal; P=9,16,7,3,1; Q=11,5,4``."""
    parts = [p.strip() for p in text.split(";") if p.strip()]
    if not parts:
        raise InputError("empty inline curve")
    d: dict = {"family": parts[0]}
    keys = {"e": "branch_points", "P": "P", "Q": "Q", "T": "T"}
    for p in parts[1:]:
        if "=" not in p:
            raise InputError(f"expected key=values in {p!r}")
        k, v = (s.strip() for s in p.split("=", 1))
        if k not in keys:
            raise InputError(f"unknown key {k!r}")
        d[keys[k]] = [s for s in v.split(",") if s.strip()]
    return d


def load_curve(path: str | None = None, inline: str | None = None) -> CurveSpec:
    if (path is None) == (inline is None):
        raise InputError("give exactly one of --curve and --inline")
    try:
        d = parse_inline(inline) if inline is not None else json.loads(Path(path).read_text())
        curve = curve_from_dict(d)
        curve.validate()
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"malformed curve input: {exc}") from exc
    return curve


def load_divisor(path: str) -> Divisor:
    try:
        d = json.loads(Path(path).read_text())
        pts = []
        for p in d["points"]:
            pts.append(CurvePoint(parse_complex(p["x"]), parse_complex(p["y"]), p.get("sheet"), p.get("anchor")))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"malformed divisor input: {exc}") from exc
    return Divisor(tuple(pts))


# -- serialization ----------------------------------------------------------------

def to_jsonable(v):
    if isinstance(v, dict):
        return {str(k): to_jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [to_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return to_jsonable(v.tolist())
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def dump(report: dict) -> str:
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n"


@dataclass
class JobConfig:
    command: str
    curve: CurveSpec
    tol: float = TOL
    out: Path | None = None

    def __post_init__(self):
        if not (1e-14 <= self.tol <= 1e-4):
            raise InputError("tolerance must lie in [1e-14, 1e-4]")


def _emit(cfg: JobConfig, name: str, report: dict) -> None:
    report = {"schema_version": SCHEMA_VERSION, "command": cfg.command, **report}
    text = dump(report)
    if cfg.out is None:
        click.echo(text, nl=False)
        return
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / name).write_text(text)


def _key(index) -> str:
    return ",".join(str(i) for i in index)


# -- pipelines ------------------------------------------------------------------------

def period_report(ps) -> dict:
    return {"periods": ps.to_dict(), "atlas": ps.atlas.summary(), "columns": "cycles"}


def _abel_images(d: Divisor, ps, tol: float) -> np.ndarray:
    threads = max(1, int(os.environ.get(THREADS_ENV, "1")))
    if threads == 1 or d.degree < 2:
        images = [abel_point(p, ps, tol).u for p in d.points]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            images = [r.u for r in pool.map(lambda p: abel_point(p, ps, tol), d.points)]
    total = np.zeros(ps.genus, dtype=complex)
    for u in images:  # fixed order keeps the output reproducible
        total = total + u
    return total


def wp_report(d: Divisor, ps, K: Characteristic, tol: float) -> dict:
    check_divisor(d, ps.atlas.curve)
    u = _abel_images(d, ps, tol)
    vals = wp_all(u, ps, K)
    report = {"u": u, "weights": list(vals.weights), "K": [list(K.eps_prime), list(K.eps)],
              "wp2": {_key(k): v for k, v in sorted(vals.two.items())},
              "wp3": {_key(k): v for k, v in sorted(vals.three.items())}}
    if d.degree == ps.genus:
        J = jacobi_polynomials(u, ps, K)
        D = divisor_polynomials(d, ps.atlas.curve)
        report["jacobi_from_wp"] = [{_key(m): c for m, c in sorted(p.items())} for p in J]
        report["jacobi_from_divisor"] = [{_key(m): c for m, c in sorted(p.items())} for p in D]
        report["round_trip_residual"] = max(coefficient_mismatch(J[0], D[0]), coefficient_mismatch(J[1], D[1]))
    return report


def verify_report(curve: CurveSpec, tol: float) -> tuple[dict, bool]:
    ps = compute_periods(curve, tol=tol, gates=False)
    diag = ps.diagnostics
    checks: dict[str, dict] = {}

    def add(name, value, limit, ok=None):
        passed = bool(value < limit) if ok is None else bool(ok)
        checks[name] = {"value": value, "limit": limit, "pass": passed}

    add("tau_symmetry", diag["tau_asymmetry"], 1e-9)
    add("closure", max(diag["closure"].values()), 1e-9)
    if "legendre_residual" in diag:
        add("legendre", diag["legendre_residual"], 1e-9)
    if curve.kind == HYPERELLIPTIC and curve.genus in (2, 4) and curve.s is not None:
        est = np.array(bolza_branch_points(ps))
        add("bolza", float(np.max(np.abs(est - ps.atlas.e))), 1e-8)
    if curve.s is not None:
        try:
            K = K_characteristic(ps)
            w = sato_weight(curve)
            prof = vanishing_profile(ps, K, w)
            low = max((v for k, v in prof.items() if k < w), default=0.0)
            checks["theta_K_vanishing"] = {"K": [list(K.eps_prime), list(K.eps)], "weight": w,
                                           "below_weight": low, "at_weight": prof.get(w, 0.0),
                                           "pass": bool(low < 1e-6 and prof.get(w, 0.0) > 1e-3)}
        except ValueError as exc:
            checks["theta_K_vanishing"] = {"error": str(exc), "pass": False}
    if curve.kind == HYPERELLIPTIC and np.max(np.abs(ps.atlas.e.imag)) == 0:
        add("real_branch_formula", real_branch_residual(ps.atlas), 1e-9)
        cross = max(float(np.max(np.abs(ps.omega.imag))), float(np.max(np.abs(ps.omega_p.real))))
        add("real_periods", cross, 1e-9)
    ok = all(c["pass"] for c in checks.values())
    return {"checks": checks, "pass": ok}, ok


def contours_report(curve: CurveSpec, window, resolution: int) -> dict:
    from .sheets import RadicalSolutions

    kinds = ["Gamma"] + (["UpsilonPlus"] if curve.kind != HYPERELLIPTIC else [])
    sol = RadicalSolutions(curve)
    out = {}
    for which in kinds:
        pieces = []
        for ln in contour_samples(curve, which, window, resolution):
            pieces.extend(labelled_runs(sol, ln))
        out[which] = [{"permutation": perm, "points": pts} for perm, pts in pieces]
    return {"window": list(window), "resolution": resolution, "contours": out}


def contours_csv(report: dict) -> str:
    """One row per vertex: contour kind, polyline index, vertex index, x, y, permutation."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["contour", "polyline", "vertex", "x", "y", "permutation"])
    for which in sorted(report["contours"]):
        for k, piece in enumerate(report["contours"][which]):
            for j, (x, y) in enumerate(np.asarray(piece["points"])):
                w.writerow([which, k, j, repr(float(x)), repr(float(y)), piece["permutation"]])
    return buf.getvalue()


def crossing_permutation(sol, a, z, b) -> str:
    """Label map for crossing the polyline a-z-b at z, e.g. '1>2 2>1 3>3'.

    Label k on the right of the direction of travel becomes the listed label on the left.
    """
    t = complex(b[0] - a[0], b[1] - a[1])
    if t == 0:
        return ""
    z = complex(*z)
    n = 1j * t / abs(t)
    step = 0.25 * abs(t)  # about half a grid cell, so the samples clear the contour
    y0 = sol.values(np.array([z - n * step]))[0]
    y1 = sol.values(np.array([z + n * step]))[0]
    return " ".join(f"{i + 1}>{int(np.argmin(np.abs(y1 - y))) + 1}" for i, y in enumerate(y0))


def labelled_runs(sol, line: np.ndarray) -> list[tuple[str, np.ndarray]]:
    """Split a polyline where the crossing permutation changes (it does where another contour meets it)."""
    if len(line) < 3:
        return []
    perms = [crossing_permutation(sol, line[k - 1], line[k], line[k + 1]) for k in range(1, len(line) - 1)]
    perms = [perms[0]] + perms + [perms[-1]]
    runs, start = [], 0
    for k in range(1, len(line) + 1):
        if k == len(line) or perms[k] != perms[start]:
            if k - start >= 2:
                runs.append((perms[start], line[start:k]))
            start = k
    return runs


# -- click commands ----------------------------------------------------------------------

def _common(f):
    f = click.option("--curve", "curve_path", type=click.Path(exists=True, dir_okay=False), help="curve JSON file")(f)
    f = click.option("--inline", "inline", type=str, help="compact curve text")(f)
    f = click.option("--tol", type=float, default=TOL, show_default=True, help="quadrature tolerance")(f)
    f = click.option("--out", type=click.Path(file_okay=False), default=None, help="output directory")(f)
    return f


def _config(command, curve_path, inline, tol, out) -> JobConfig:
    return JobConfig(command, load_curve(curve_path, inline), tol, Path(out) if out else None)


def _fail_input(exc: Exception):
    click.echo(dump({"error": type(exc).__name__, "message": str(exc)}), err=True, nl=False)
    sys.exit(2)


class _Group(click.Group):
    """Turns library errors escaping a command into structured stderr JSON."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (click.exceptions.Exit, click.exceptions.Abort, click.ClickException):
            raise  # --help, ctrl-c and usage errors keep click's handling
        except SpecialDivisorError as exc:
            click.echo(dump({"error": "special_divisor", "message": str(exc)}), err=True, nl=False)
            sys.exit(2)
        except (ValueError, NotImplementedError) as exc:  # curve, plan or input the pipeline cannot take
            _fail_input(exc)
        except RuntimeError as exc:  # numerical failure on valid input
            click.echo(dump({"error": type(exc).__name__, "message": str(exc)}), err=True, nl=False)
            sys.exit(1)


@click.group(cls=_Group)
def main():
    """Periods, theta functions and wp-functions of plane curves."""


@main.command()
@_common
def validate(curve_path, inline, tol, out):
    """Check a curve and print its basic data."""
    try:
        cfg = _config("validate", curve_path, inline, tol, out)
    except (InputError, CurveError, ValueError) as exc:
        _fail_input(exc)
    c = cfg.curve
    roots = c.validate().roots
    _emit(cfg, "validate.json", {"curve": c.to_dict(), "genus": c.genus, "gaps": c.gaps,
                                 "discriminant_roots": sorted(roots, key=lambda z: (z.real, z.imag))})


@main.command()
@_common
def periods(curve_path, inline, tol, out):
    """Period matrices, tau, kappa and residual diagnostics."""
    try:
        cfg = _config("periods", curve_path, inline, tol, out)
    except (InputError, CurveError, ValueError) as exc:
        _fail_input(exc)
    try:
        ps = compute_periods(cfg.curve, tol=cfg.tol)
        _emit(cfg, "periods.json", {**period_report(ps), "gates_passed": True})
    except PeriodGateError as exc:
        ps = compute_periods(cfg.curve, tol=cfg.tol, gates=False)
        _emit(cfg, "periods.json", {**period_report(ps), "gates_passed": False, "gate_error": str(exc)})
        sys.exit(1)


@main.command()
@_common
@click.option("--char", "char", type=str, default=None, help="characteristic 'e1 ... ; e1 ...' (default [K])")
@click.option("--v", "v", type=str, default=None, help="comma separated argument (default 0)")
def theta(curve_path, inline, tol, out, char, v):
    """Theta function with characteristic at v, for the curve's tau."""
    try:
        cfg = _config("theta", curve_path, inline, tol, out)
        ps = compute_periods(cfg.curve, tol=cfg.tol)
        g = ps.genus
        vec = np.zeros(g, dtype=complex) if v is None else np.array([parse_complex(s) for s in v.split(",")])
        if len(vec) != g:
            raise InputError(f"argument needs {g} components")
        if char is None:
            c = K_characteristic(ps)
        else:
            top, bottom = (list(map(float, r.split())) for r in char.split(";"))
            c = Characteristic.from_rows(top, bottom)
    except (InputError, CurveError, ValueError) as exc:
        _fail_input(exc)
    val = theta_char(c, vec, ThetaParams(ps.tau))
    _emit(cfg, "theta.json", {"characteristic": [list(c.eps_prime), list(c.eps)], "v": vec, "value": val})


@main.command()
@_common
@click.option("--divisor", "divisor", type=click.Path(exists=True, dir_okay=False), required=True)
def abel(curve_path, inline, tol, out, divisor):
    """Abel image of a divisor."""
    try:
        cfg = _config("abel", curve_path, inline, tol, out)
        d = load_divisor(divisor)
        ps = compute_periods(cfg.curve, tol=cfg.tol)
        u = _abel_images(d, ps, cfg.tol)
    except (InputError, CurveError, ValueError) as exc:
        _fail_input(exc)
    _emit(cfg, "abel.json", {"u": u, "weights": list(cfg.curve.gaps)})


@main.command(name="wp")
@_common
@click.option("--divisor", "divisor", type=click.Path(exists=True, dir_okay=False), required=True)
def wp_cmd(curve_path, inline, tol, out, divisor):
    """wp-functions at the Abel image of a divisor, with the Jacobi inversion check."""
    try:
        cfg = _config("wp", curve_path, inline, tol, out)
        d = load_divisor(divisor)
        ps = compute_periods(cfg.curve, tol=cfg.tol)
        report = wp_report(d, ps, K_characteristic(ps), cfg.tol)
    except SpecialDivisorError as exc:
        click.echo(dump({"error": "special_divisor", "message": str(exc)}), err=True, nl=False)
        sys.exit(2)
    except (InputError, CurveError, ValueError) as exc:
        _fail_input(exc)
    _emit(cfg, "wp.json", report)
    if report.get("round_trip_residual", 0.0) > 1e-6:
        sys.exit(1)


@main.command()
@_common
def verify(curve_path, inline, tol, out):
    """Legendre relation, closures, Bolza formulas, theta[K] vanishing, real-branch formula."""
    try:
        cfg = _config("verify", curve_path, inline, tol, out)
    except (InputError, CurveError, ValueError) as exc:
        _fail_input(exc)
    report, ok = verify_report(cfg.curve, cfg.tol)
    _emit(cfg, "verify.json", report)
    if not ok:
        sys.exit(1)


@main.command()
@_common
@click.option("--window", type=str, required=True, help="xmin,xmax,ymin,ymax")
@click.option("--resolution", type=int, default=400, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
def contours(curve_path, inline, tol, out, window, resolution, fmt):
    """Polylines of the contours where the radicals jump, for external plotting."""
    try:
        cfg = _config("contours", curve_path, inline, tol, out)
        win = [float(s) for s in window.split(",")]
        if len(win) != 4:
            raise InputError("window needs four numbers")
        if resolution < 2:
            raise InputError("resolution must be at least 2")
    except (InputError, CurveError, ValueError) as exc:
        _fail_input(exc)
    report = contours_report(cfg.curve, win, resolution)
    if fmt == "json":
        _emit(cfg, "contours.json", report)
    elif cfg.out is None:
        click.echo(contours_csv(report), nl=False)
    else:
        cfg.out.mkdir(parents=True, exist_ok=True)
        (cfg.out / "contours.csv").write_text(contours_csv(report))


if __name__ == "__main__":
    main()
