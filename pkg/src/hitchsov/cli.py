"""Command-line front end.

Reads a system description from JSON, drives the numerical pipelines, and
writes CSV/JSON/SVG artifacts plus a run manifest.  Complex numbers are
serialized as [re, im] pairs throughout.  Exit codes: 2 usage, 3 input
validation, 4 numerical failure (including strict-mode tolerance
violations).
"""

import functools
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from . import __version__
from .errors import (HitchsovError, ValidationError, DegreeError,
                     DuplicateBranchPoint)
from .curves import build_curve, period_matrix
from .spectral import resolve_type, coefficient_layout, SpectralPoint
from .separation import (PhaseConfiguration, solve_hamiltonians,
                         involution_check, gradient_scale)
from .flows import flow_fiber, flow_poisson, match_states
from .theta import riemann_constants, sigma_series, sigma_contour
from . import sl2
from . import parabolic as pb


# ----------------------------------------------------------------------
# serialization helpers
# ----------------------------------------------------------------------

def _cplx(v, path):
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 \
            and all(isinstance(u, (int, float)) for u in v):
        return complex(v[0], v[1])
    raise ValidationError(f"expected number or [re, im] pair", path)


def _cvec(v, path):
    if not isinstance(v, list):
        raise ValidationError("expected a list", path)
    return np.array([_cplx(u, f"{path}[{i}]") for i, u in enumerate(v)])


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


def _pairs(vec):
    return [_pair(z) for z in np.asarray(vec).ravel()]


def _fmt(x):
    return f"{float(x):.17e}"


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(str(exc), str(path))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON: {exc}", str(path))


def _field(data, name, path="$"):
    if not isinstance(data, dict) or name not in data:
        raise ValidationError("missing required field", f"{path}.{name}")
    return data[name]


def _write_json(path, obj):
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    Path(path).write_text(text)
    return str(path)


# ----------------------------------------------------------------------
# system description
# ----------------------------------------------------------------------

def _parse_curve(data):
    coeffs = _cvec(_field(_field(data, "curve"), "coeffs", "$.curve"),
                   "$.curve.coeffs")
    return build_curve(coeffs)


def _parse_layout(data, curve):
    lt = _field(data, "lie_type")
    spec = resolve_type(_field(lt, "family", "$.lie_type"),
                        int(_field(lt, "rank", "$.lie_type")))
    return coefficient_layout(spec, curve)


def _parse_points(data, layout, curve):
    pts = _field(data, "points")
    if not isinstance(pts, list):
        raise ValidationError("expected a list", "$.points")
    if len(pts) != layout.h:
        raise ValidationError(
            f"layout needs h={layout.h} points, got {len(pts)}", "$.points")
    points = []
    for i, p in enumerate(pts):
        path = f"$.points[{i}]"
        points.append(SpectralPoint(
            _cplx(_field(p, "x", path), f"{path}.x"),
            _cplx(_field(p, "y", path), f"{path}.y"),
            _cplx(_field(p, "lambda", path), f"{path}.lambda")))
    cfg = PhaseConfiguration(points)
    cfg.validate(curve, layout)
    return cfg


# ----------------------------------------------------------------------
# manifest + error handling
# ----------------------------------------------------------------------

def _manifest(outdir, input_file, seed, tolerance, timings, outputs):
    digest = None
    if input_file is not None:
        digest = hashlib.sha256(Path(input_file).read_bytes()).hexdigest()
    return _write_json(Path(outdir) / "manifest.json", {
        "input": str(input_file) if input_file else None,
        "input_sha256": digest,
        "version": __version__,
        "seed": seed,
        "tolerance": tolerance,
        "timings": {k: round(v, 6) for k, v in timings.items()},
        "outputs": sorted(str(o) for o in outputs),
    })


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValidationError, DegreeError, DuplicateBranchPoint) as exc:
            click.echo(f"validation error: {exc}", err=True)
            sys.exit(3)
        except HitchsovError as exc:
            click.echo(f"numerical failure: {type(exc).__name__}: {exc}",
                       err=True)
            sys.exit(4)
    return wrapper


def _strict_gate(strict, name, value, tol):
    click.echo(f"{name}: {value:.3e} (tolerance {tol:.1e})")
    if strict and not value < tol:
        click.echo(f"strict: {name} {value:.3e} exceeds {tol:.1e}", err=True)
        sys.exit(4)


def _common(fn):
    fn = click.option("--input", "input_file", required=True,
                      type=click.Path(exists=False))(fn)
    fn = click.option("--output", "outdir", default=".",
                      type=click.Path(file_okay=False))(fn)
    fn = click.option("--seed", default=0, type=int)(fn)
    fn = click.option("--strict", is_flag=True)(fn)
    fn = click.option("--tolerance", default=None, type=float)(fn)
    return fn


# ----------------------------------------------------------------------
# command tree
# ----------------------------------------------------------------------

@click.group()
@click.version_option(__version__)
def main():
    """Hitchin systems on hyperelliptic curves by separation of variables."""


@main.group()
def curve():
    """Base-curve queries."""


@curve.command("info")
@_common
@click.option("--periods", is_flag=True,
              help="also compute the period matrix (slower)")
@_guarded
def curve_info(input_file, outdir, seed, strict, tolerance, periods):
    """Genus, branch points, and optionally the period matrix."""
    t0 = time.perf_counter()
    data = _load_json(input_file)
    cv = _parse_curve(data)
    info = {
        "genus": cv.genus,
        "degree": cv.degree,
        "coeffs": _pairs(cv.coeffs),
        "branch_points": _pairs(np.sort_complex(cv.branch_points)),
        "min_separation": cv.min_separation,
        "exclusion_radius": cv.exclusion_radius,
    }
    if periods:
        td = period_matrix(cv)
        info["tau"] = [_pairs(row) for row in td.tau]
    Path(outdir).mkdir(parents=True, exist_ok=True)
    out = _write_json(Path(outdir) / "curve_info.json", info)
    _manifest(outdir, input_file, seed, tolerance,
              {"total": time.perf_counter() - t0}, [out])
    click.echo(f"genus {cv.genus}, {len(cv.branch_points)} finite branch "
               f"points, min separation {cv.min_separation:.6g}")


@main.group()
def ham():
    """Hamiltonian coefficients from separating points."""


@ham.command("solve")
@_common
@_guarded
def ham_solve(input_file, outdir, seed, strict, tolerance):
    """Solve the separating equations for the coefficient vector H."""
    t0 = time.perf_counter()
    data = _load_json(input_file)
    cv = _parse_curve(data)
    layout = _parse_layout(data, cv)
    cfg = _parse_points(data, layout, cv)
    hamv = solve_hamiltonians(layout, cv, cfg,
                              rng=np.random.default_rng(seed))
    Path(outdir).mkdir(parents=True, exist_ok=True)
    out = _write_json(Path(outdir) / "hamiltonians.json", {
        "family": layout.spec.family,
        "rank": layout.spec.rank,
        "h": layout.h,
        "hamiltonians": _pairs(hamv),
    })
    _manifest(outdir, input_file, seed, tolerance,
              {"total": time.perf_counter() - t0}, [out])
    click.echo(f"solved {layout.h} coefficients "
               f"({layout.spec.family} rank {layout.spec.rank})")


@ham.command("check")
@_common
@_guarded
def ham_check(input_file, outdir, seed, strict, tolerance):
    """Pairwise Poisson brackets of the coefficients, as a CSV matrix."""
    tol = 1e-7 if tolerance is None else tolerance
    t0 = time.perf_counter()
    data = _load_json(input_file)
    cv = _parse_curve(data)
    layout = _parse_layout(data, cv)
    cfg = _parse_points(data, layout, cv)
    hamv = solve_hamiltonians(layout, cv, cfg,
                              rng=np.random.default_rng(seed))
    br = involution_check(layout, cv, cfg, hamv)
    scale = gradient_scale(layout, cv, cfg, hamv)
    Path(outdir).mkdir(parents=True, exist_ok=True)
    csv_path = Path(outdir) / "bracket_check.csv"
    header = ",".join(f"H{k + 1}" for k in range(layout.h))
    rows = [",".join(_fmt(v) for v in row) for row in br]
    csv_path.write_text(header + "\n" + "\n".join(rows) + "\n")
    worst = float((br / scale).max())
    _manifest(outdir, input_file, seed, tolerance,
              {"total": time.perf_counter() - t0}, [str(csv_path)])
    _strict_gate(strict, "max normalized bracket", worst, tol)


@main.group()
def flow():
    """Trajectory integration."""


def _traj_csv(path, traj):
    lines = ["t,i,re_x,im_x,re_y,im_y,re_lambda,im_lambda"]
    for k, t in enumerate(traj.times):
        xs, ys, lams = traj.state_arrays(k)
        for i in range(len(xs)):
            lines.append(",".join(
                [f"{float(t):.12g}", str(i + 1)]
                + [_fmt(v) for v in (xs[i].real, xs[i].imag,
                                     ys[i].real, ys[i].imag,
                                     lams[i].real, lams[i].imag)]))
    Path(path).write_text("\n".join(lines) + "\n")
    return str(path)


_SVG_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
               "#8c564b", "#e377c2", "#17becf"]


def export_plot(trajectory, path):
    """SVG polylines of Re x_i(t) with a legend; deterministic layout."""
    times = np.asarray(trajectory.times, dtype=float)
    if len(times) == 0:
        raise ValidationError("empty trajectory")
    series = np.array([trajectory.state_arrays(k)[0].real
                       for k in range(len(times))])  # (n, h)
    width, height, margin = 640.0, 400.0, 50.0
    t_lo, t_hi = times.min(), max(times.max(), times.min() + 1e-12)
    v_lo, v_hi = series.min(), series.max()
    if v_hi - v_lo < 1e-12:
        v_lo, v_hi = v_lo - 1.0, v_hi + 1.0

    def sx(t):
        return margin + (t - t_lo) / (t_hi - t_lo) * (width - 2 * margin)

    def sy(v):
        return height - margin - (v - v_lo) / (v_hi - v_lo) \
            * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
        f'<line x1="{margin:.1f}" y1="{height - margin:.1f}" '
        f'x2="{width - margin:.1f}" y2="{height - margin:.1f}" '
        'stroke="black"/>',
        f'<line x1="{margin:.1f}" y1="{margin:.1f}" x2="{margin:.1f}" '
        f'y2="{height - margin:.1f}" stroke="black"/>',
    ]
    for i in range(series.shape[1]):
        color = _SVG_COLORS[i % len(_SVG_COLORS)]
        pts = " ".join(f"{sx(t):.4f},{sy(v):.4f}"
                       for t, v in zip(times, series[:, i]))
        parts.append(f'<polyline points="{pts}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        ly = margin + 16.0 * i
        parts.append(f'<line x1="{width - margin + 5:.1f}" y1="{ly:.1f}" '
                     f'x2="{width - margin + 25:.1f}" y2="{ly:.1f}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{width - margin + 28:.1f}" '
                     f'y="{ly + 4:.1f}" font-size="11" '
                     f'font-family="monospace">Re x{i + 1}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
    return str(path)


@flow.command("run")
@_common
@click.option("--t-end", default=1.0, type=float)
@click.option("--dt", default=1e-3, type=float)
@click.option("--scheme", default="rk4",
              type=click.Choice(["euler", "rk4"]))
@click.option("--direction", default=None,
              help="JSON vector of [re, im] pairs; overrides the input file")
@click.option("--route", default="fiber",
              type=click.Choice(["fiber", "poisson", "both"]))
@click.option("--plot", is_flag=True, help="emit an SVG of Re x_i(t)")
@_guarded
def flow_run(input_file, outdir, seed, strict, tolerance,
             t_end, dt, scheme, direction, route, plot):
    """Integrate the flow of a direction in coefficient space."""
    tol = 1e-6 if tolerance is None else tolerance
    t0 = time.perf_counter()
    data = _load_json(input_file)
    cv = _parse_curve(data)
    layout = _parse_layout(data, cv)
    cfg = _parse_points(data, layout, cv)
    hamv = solve_hamiltonians(layout, cv, cfg,
                              rng=np.random.default_rng(seed))
    if direction is not None:
        try:
            c = _cvec(json.loads(direction), "--direction")
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed JSON: {exc}", "--direction")
    else:
        flow_cfg = data.get("flow", {})
        c = _cvec(_field(flow_cfg, "direction", "$.flow"),
                  "$.flow.direction")
    if len(c) != layout.h:
        raise ValidationError(
            f"direction must have length h={layout.h}", "$.flow.direction")
    Path(outdir).mkdir(parents=True, exist_ok=True)
    outputs, timings = [], {}
    trajs = {}
    if route in ("fiber", "both"):
        tf = time.perf_counter()
        trajs["fiber"] = flow_fiber(layout, cv, hamv, cfg, c,
                                    t_end, dt, scheme)
        timings["fiber"] = time.perf_counter() - tf
        outputs.append(_traj_csv(Path(outdir) / "flow_fiber.csv",
                                 trajs["fiber"]))
    if route in ("poisson", "both"):
        tp = time.perf_counter()
        trajs["poisson"] = flow_poisson(layout, cv, cfg, c,
                                        t_end, dt, scheme)
        timings["poisson"] = time.perf_counter() - tp
        outputs.append(_traj_csv(Path(outdir) / "flow_poisson.csv",
                                 trajs["poisson"]))
    summary = None
    if route == "both":
        dist, _ = match_states(trajs["fiber"].states[-1],
                               trajs["poisson"].states[-1])
        summary = float(dist)
        outputs.append(_write_json(Path(outdir) / "flow_compare.json", {
            "t_end": t_end, "dt": dt, "scheme": scheme,
            "max_point_set_distance": summary,
        }))
    if plot:
        key = "fiber" if "fiber" in trajs else "poisson"
        outputs.append(export_plot(trajs[key],
                                   Path(outdir) / f"flow_{key}.svg"))
    timings["total"] = time.perf_counter() - t0
    _manifest(outdir, input_file, seed, tolerance, timings, outputs)
    if summary is not None:
        _strict_gate(strict, "two-route point-set distance", summary, tol)
    else:
        click.echo(f"integrated {route} route to t={t_end:g} "
                   f"({scheme}, dt={dt:g})")


@main.group()
def theta():
    """Theta-function utilities."""


@theta.command("sigma")
@_common
@_guarded
def theta_sigma(input_file, outdir, seed, strict, tolerance):
    """Power-sum symmetric function sigma_k from theta derivatives.

    Evaluates sigma_k at the given phi by the series route and the
    contour route and reports both with their difference.
    """
    tol = 1e-6 if tolerance is None else tolerance
    t0 = time.perf_counter()
    data = _load_json(input_file)
    cv = _parse_curve(data)
    k = int(_field(data, "k"))
    phi = _cvec(_field(data, "phi"), "$.phi")
    if len(phi) != cv.genus:
        raise ValidationError(f"phi must have length g={cv.genus}", "$.phi")
    if not 1 <= k <= cv.genus:
        raise ValidationError(f"k must be in 1..{cv.genus}", "$.k")
    const = float(data.get("const", 0.0))
    td = period_matrix(cv)
    riemann_constants(cv, td, rng=np.random.default_rng(seed))
    s_series = sigma_series(cv, td, phi, k, const)
    s_contour = sigma_contour(cv, td, phi, k, const)
    gap = abs(s_series - s_contour)
    Path(outdir).mkdir(parents=True, exist_ok=True)
    out = _write_json(Path(outdir) / "theta_sigma.json", {
        "k": k,
        "const": const,
        "tau": [_pairs(row) for row in td.tau],
        "riemann_constants": _pairs(td.riemann_constants),
        "sigma_series": _pair(s_series),
        "sigma_contour": _pair(s_contour),
        "route_gap": gap,
    })
    _manifest(outdir, input_file, seed, tolerance,
              {"total": time.perf_counter() - t0}, [out])
    _strict_gate(strict, "series/contour gap", gap, tol)


@main.group(name="sl2")
def sl2_group():
    """Genus-2 SL2 Lax system via the Klein correspondence."""


@sl2_group.command("demo")
@_common
@click.option("--t-end", default=0.2, type=float)
@click.option("--dt", default=1e-3, type=float)
@click.option("--level", "l", default=4, type=int,
              help="power l of tr L(zeta)^l generating the flow")
@_guarded
def sl2_demo(input_file, outdir, seed, strict, tolerance, t_end, dt, l):
    """Flow the Lax system and emit conserved-quantity drift CSV."""
    tol = 1e-6 if tolerance is None else tolerance
    t0 = time.perf_counter()
    data = _load_json(input_file)
    z6 = _cvec(_field(data, "z6"), "$.z6")
    if len(z6) != 6:
        raise ValidationError("z6 must list six points", "$.z6")
    qa = _cvec(_field(data, "q"), "$.q")
    pa = _cvec(_field(data, "p"), "$.p")
    if len(qa) != 3 or len(pa) != 3:
        raise ValidationError("q and p must have three components", "$")
    zeta = _cplx(data.get("zeta", 0.3), "$.zeta")
    pp0 = sl2.GeomPhasePoint(qa, pa, int(data.get("chart", 3)))
    states, report = sl2.lax_flow(pp0, z6, zeta, l, t_end, dt)
    h0 = sl2.gp_hamiltonians(pp0, z6)
    probe = 0.5 * zeta + 0.25j
    ev0 = np.sort_complex(np.linalg.eigvals(
        sl2.lax_pair(pp0, z6, zeta, probe, l)[0]))
    lines = ["t,ham_drift,eig_drift"]
    stride = max(1, len(states) // 200)
    for kk in range(0, len(states), stride):
        pp = states[kk]
        hd = float(np.abs(sl2.gp_hamiltonians(pp, z6) - h0).max())
        ev = np.sort_complex(np.linalg.eigvals(
            sl2.lax_pair(pp, z6, zeta, probe, l)[0]))
        ed = float(np.abs(ev - ev0).max())
        lines.append(f"{kk * dt:.12g},{_fmt(hd)},{_fmt(ed)}")
    Path(outdir).mkdir(parents=True, exist_ok=True)
    csv_path = Path(outdir) / "sl2_demo.csv"
    csv_path.write_text("\n".join(lines) + "\n")
    resid = float(sl2.lax_residual(pp0, z6, zeta, zeta + 0.21, l))
    out = _write_json(Path(outdir) / "sl2_report.json", {
        "level": l, "t_end": t_end, "dt": dt,
        "eigenvalue_drift": report["eigenvalue_drift"],
        "hamiltonian_drift": report["hamiltonian_drift"],
        "lax_residual": resid,
    })
    _manifest(outdir, input_file, seed, tolerance,
              {"total": time.perf_counter() - t0}, [str(csv_path), out])
    worst = max(report["eigenvalue_drift"], resid)
    _strict_gate(strict, "max(eigenvalue drift, Lax residual)", worst, tol)


@main.group(name="parabolic")
def parabolic_group():
    """Parabolic-type combinatorics."""


def _parse_ptype(data):
    pts = []
    for i, p in enumerate(_field(data, "points")):
        path = f"$.points[{i}]"
        part = _field(p, "partition", path)
        weights = p.get("weights", [])
        try:
            weights = [Fraction(w) if isinstance(w, str) else Fraction(w)
                       for w in weights]
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(str(exc), f"{path}.weights")
        pts.append(pb.MarkedPoint(tuple(part), tuple(weights)))
    return pb.ParabolicType(int(_field(data, "genus")),
                            int(_field(data, "rank")), pts)


@parabolic_group.command("dims")
@_common
@_guarded
def parabolic_dims(input_file, outdir, seed, strict, tolerance):
    """Dimensions of the parabolic Hitchin base."""
    t0 = time.perf_counter()
    data = _load_json(input_file)
    ptype = _parse_ptype(data)
    dims, total = pb.parabolic_base_dims(ptype)
    Path(outdir).mkdir(parents=True, exist_ok=True)
    out = _write_json(Path(outdir) / "parabolic_dims.json", {
        "genus": ptype.genus, "rank": ptype.rank,
        "dims": dims, "total": total,
    })
    _manifest(outdir, input_file, seed, tolerance,
              {"total": time.perf_counter() - t0}, [out])
    click.echo(f"dims {dims}, total {total}")


@parabolic_group.command("delta")
@_common
@_guarded
def parabolic_delta(input_file, outdir, seed, strict, tolerance):
    """The gcd invariant Delta_P of a parabolic type."""
    t0 = time.perf_counter()
    data = _load_json(input_file)
    ptype = _parse_ptype(data)
    value = pb.delta_p(ptype)
    pdeg = pb.parabolic_degree(data.get("deg_e", 0), ptype)
    Path(outdir).mkdir(parents=True, exist_ok=True)
    out = _write_json(Path(outdir) / "parabolic_delta.json", {
        "delta_p": value,
        "parabolic_degree": str(pdeg),
    })
    _manifest(outdir, input_file, seed, tolerance,
              {"total": time.perf_counter() - t0}, [out])
    click.echo(f"Delta_P = {value}, pdeg = {pdeg}")


@parabolic_group.command("local")
@_common
@_guarded
def parabolic_local(input_file, outdir, seed, strict, tolerance):
    """Newton-polygon analysis of a local characteristic polynomial."""
    t0 = time.perf_counter()
    data = _load_json(input_file)
    local = _field(data, "local")
    trunc = int(local.get("truncation", pb.DEFAULT_TRUNCATION))
    raw = _field(local, "coeffs", "$.local")
    try:
        coeff_lists = [[Fraction(c) for c in series]
                       for series in raw]
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ValidationError(str(exc), "$.local.coeffs")
    f = pb.LocalCharPoly.from_lists(coeff_lists, trunc)
    expected = local.get("expected_mu")
    report = pb.newton_eisenstein_check(
        f, tuple(expected) if expected else None)
    Path(outdir).mkdir(parents=True, exist_ok=True)
    payload = {
        "vertices": [list(v) for v in report["vertices"]],
        "orders": report["orders"],
        "factor_degrees": list(report["factor_degrees"]),
        "distinguished": report["distinguished"],
        "residuals": [str(r.as_expr()) for r in report["residuals"]],
    }
    if "matches_expected" in report:
        payload["matches_expected"] = report["matches_expected"]
    out = _write_json(Path(outdir) / "parabolic_local.json", payload)
    _manifest(outdir, input_file, seed, tolerance,
              {"total": time.perf_counter() - t0}, [out])
    click.echo(f"factor degrees {report['factor_degrees']}, "
               f"distinguished: {report['distinguished']}")


if __name__ == "__main__":
    main()
