"""Reproducible scenario runner.

Usage::

    nonscatter list
    nonscatter run <scenario> [default | CONFIG] [--config CONFIG] [--out DIR]
                   [--threads N] [--set key=value ...]

Configuration files are flat ``key = value`` text (``#`` starts a comment)
with dotted keys such as ``grid.n = 256``.  Every scenario has a typed
default for each key it understands; values are parsed with the type of
the default (lists are comma separated).  Unknown keys are an error.

Each run writes ``results.json`` (sorted keys, no timings) plus CSV fields
and SVG plots to the output directory.

Exit codes: 0 success, 2 configuration error, 3 scenario failure
(including an unknown scenario or a failed verdict), 4 solver
non-convergence.
"""

import argparse
import json
import logging
import math
import platform
import sys
from pathlib import Path

import numpy as np
import scipy
from threadpoolctl import threadpool_limits

from . import __version__
from .contrast import CutoffProfile, ConstructionError, glue_construction, interior_cutoff_potential, \
    quadrature_contrast, radial_cauchy_extension
from .freeboundary import dichotomy_diagnose, kn_cusp_example, support_extract
from .geometry import ConformalImage, CuspModel, Disk, Ellipse, square
from .grid import Grid2, ScalarField
from .incident import ConstantWave, EigenvalueProximityError, PlaneWave, RealHelmholtzExpansion, \
    eigen_orthogonality_check, herglotz_eval, herglotz_quadrature, interior_solution, runge_fit, \
    zero_ball_scan
from .plots import curves_svg, field_svg
from .qdomain import QuadratureFitError, fit_quadrature_measure, held_out_quadrature_residual
from .scatter import FAR_FIELD_TAG, DiscreteEigenvalueError, PenetrableDiskSeries, SolverNonConvergence, \
    corner_control, dirichlet_verify, disk_fraction, far_field, lippmann_schwinger_solve
from .specialfun import C2, HALF, HELMHOLTZ_KERNEL_TAG, NEWTON_KERNEL_TAG, bessel_j_all, bessel_y_all, \
    first_bessel_zero

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SCENARIO = 3
EXIT_NONCONVERGENCE = 4


class ConfigError(ValueError):
    """Malformed configuration text or a key/value the scenario does not accept."""


class ScenarioError(RuntimeError):
    """The scenario name is not registered."""


# -- configuration ------------------------------------------------------------------

def _parse_value(key, text, default):
    text = text.strip()
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, list):
            items = [t.strip() for t in text.strip("[]").split(",") if t.strip()]
            kind = type(default[0]) if default else float
            return [kind(t) for t in items]
        return text
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {text!r} as {type(default).__name__}") from exc


def parse_config_text(text, defaults):
    """Merge ``key = value`` lines into a copy of ``defaults``."""
    cfg = {k: (list(v) if isinstance(v, list) else v) for k, v in defaults.items()}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        cfg[key] = _apply(key, value, defaults)
    return cfg


def _apply(key, value, defaults):
    if key not in defaults:
        known = ", ".join(sorted(defaults))
        raise ConfigError(f"unknown key {key!r}; accepted keys: {known}")
    return _parse_value(key, value, defaults[key])


def resolve_config(scenario, path=None, overrides=()):
    """Defaults of ``scenario`` updated by the file at ``path`` and ``key=value`` overrides."""
    defaults = SCENARIOS[scenario].defaults
    text = ""
    if path not in (None, "default"):
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = parse_config_text(text, defaults)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, value = (s.strip() for s in item.split("=", 1))
        cfg[key] = _apply(key, value, defaults)
    return cfg


def format_config(cfg):
    """Config back to its text form (sorted keys)."""
    def fmt(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, list):
            return ", ".join(fmt(x) for x in v)
        return repr(v) if isinstance(v, float) else str(v)

    return "".join(f"{k} = {fmt(cfg[k])}\n" for k in sorted(cfg))


# -- registry -----------------------------------------------------------------------

class Scenario:
    def __init__(self, name, func, defaults, summary):
        self.name = name
        self.func = func
        self.defaults = defaults
        self.summary = summary


SCENARIOS = {}


def scenario(name, summary, **defaults):
    """Register ``func(cfg, out) -> (results, verdicts)``; dotted keys use ``__``."""
    defaults = {k.replace("__", "."): v for k, v in defaults.items()}

    def deco(func):
        SCENARIOS[name] = Scenario(name, func, defaults, summary)
        return func

    return deco


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    return obj


def execute(name, cfg, out):
    """Run a scenario with a resolved config; returns the results document."""
    if name not in SCENARIOS:
        raise ScenarioError(f"unknown scenario {name!r}; try 'list'")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    results, verdicts = SCENARIOS[name].func(cfg, out)
    doc = {
        "scenario": name,
        "config": cfg,
        "conventions": {
            "newton_kernel": NEWTON_KERNEL_TAG,
            "helmholtz_kernel": HELMHOLTZ_KERNEL_TAG,
            "far_field": FAR_FIELD_TAG,
        },
        "versions": {
            "nonscatter": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "results": results,
        "verdicts": verdicts,
        "passed": all(bool(v) for v in verdicts.values()),
        "artifacts": sorted(p.name for p in out.iterdir() if p.name != "results.json"),
    }
    doc = _jsonable(doc)
    with open(out / "results.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2, ensure_ascii=False)
        fh.write("\n")
    return doc


# -- shared pieces --------------------------------------------------------------------

class ScaledContrast:
    """``factor * q`` of a construction (control perturbation)."""

    def __init__(self, construction, factor):
        self.construction = construction
        self.factor = factor

    def q_averaged(self, grid):
        return self.factor * self.construction.q_averaged(grid)


def _profile(cfg):
    return CutoffProfile(cfg["collar"], cfg["psi.t0"], cfg["psi.t1"])


def _static_demo(domain, mu, cfg, out):
    """Quadrature contrast with ``u0 = 1``, verified by the box Dirichlet problem."""
    u0 = ConstantWave()
    g = quadrature_contrast(domain, mu, u0, cfg["collar"], n_boundary=cfg["potential.n_boundary"],
                            psi=_profile(cfg))
    grid = Grid2.centered(tuple(cfg["grid.center"]), cfg["grid.half_width"], cfg["grid.n"])
    band = cfg["eigen_band"] if cfg["eigen_band"] > 0 else None
    rep, Uq, U0 = dirichlet_verify(g, 0.0, u0, grid, eigen_band=band, domain=domain, return_fields=True)
    ctrl = dirichlet_verify(ScaledContrast(g, cfg["control.scale"]), 0.0, u0, grid, eigen_band=band)
    cf = g.contrast_field(grid)
    cf.to_csv(out / "h.csv")
    Uq.to_csv(out / "uq.csv", column="uq")
    field_svg(out / "h.svg", np.where(cf.h.mask, cf.h.values, np.nan), "h on D")
    field_svg(out / "uq_minus_u0.svg", Uq.values - U0.values, "U_q - U_0 (box solve)")

    # support of the assembled field (v inside, u0 outside) and of the box solve
    pts = grid.points()
    assembled = ScalarField(grid, g.total_field(pts), role="uq")
    base = ScalarField(grid, np.asarray(u0(pts), dtype=float), role="u0")
    sup = support_extract(assembled, base, domain=domain)
    sup.to_csv(out / "support.csv")
    sup_box = support_extract(Uq, U0, domain=domain)
    results = {
        "measure": mu.to_dict(),
        "held_out_moment_residual": held_out_quadrature_residual(domain, mu, 6),
        "mismatch": rep.mismatch,
        "dirichlet": rep.to_dict(),
        "control_scale": cfg["control.scale"],
        "control_mismatch": ctrl.mismatch,
        "control_ratio": ctrl.mismatch / rep.mismatch,
        "contrast": cf.metadata(),
        "v_min": g.v_min,
        "support_hausdorff_cells": sup.hausdorff_to(domain),
        "support_threshold": sup.tau,
        "box_support_hausdorff_cells": sup_box.hausdorff_to(domain),
    }
    verdicts = {
        "mismatch_below_threshold": rep.mismatch <= cfg["threshold.mismatch"],
        "control_raises_mismatch": ctrl.mismatch >= cfg["threshold.control"] * rep.mismatch,
        "contrast_certified": bool(cf.is_contrast and cf.certificate > 0),
    }
    return results, verdicts


_STATIC_COMMON = dict(
    potential__n_boundary=4096, control__scale=1.2, eigen_band=0.0,
)


# -- scenarios ------------------------------------------------------------------------

@scenario("verify-special", "Bessel/Hankel functions against scipy, Wronskian, first zeros",
          max_order=20, x_max=40.0, n_points=400, seed=0, wronskian_x_min=0.5)
def _verify_special(cfg, out):
    from scipy import special

    rng = np.random.default_rng(cfg["seed"])
    x = np.sort(np.concatenate([[0.0, cfg["x_max"]], rng.uniform(0.0, cfg["x_max"], cfg["n_points"])]))
    M = cfg["max_order"]
    J = bessel_j_all(M + 1, x)
    errs = [float(np.abs(J[m] - special.jv(m, x)).max()) for m in range(M + 1)]
    xw = x[x >= cfg["wronskian_x_min"]]
    Jw = bessel_j_all(M + 1, xw)
    Yw = bessel_y_all(M + 1, xw)
    exact = 2.0 / (np.pi * xw)
    wr = [float((np.abs(Jw[m + 1] * Yw[m] - Jw[m] * Yw[m + 1] - exact) / exact).max()) for m in range(M + 1)]
    c2, widths = first_bessel_zero(0, return_widths=True)
    c3 = first_bessel_zero(HALF)
    with open(out / "special.csv", "w") as fh:
        fh.write("order,max_abs_error_vs_scipy,max_rel_wronskian_error\n")
        for m in range(M + 1):
            fh.write(f"{m},{errs[m]:.6e},{wr[m]:.6e}\n")
    results = {
        "c2": c2, "c3": c3, "bisection_steps": len(widths) - 1,
        "max_abs_error_J": max(errs), "max_rel_wronskian_error": max(wr),
    }
    verdicts = {
        "J_within_1e-10": max(errs) <= 1e-10,
        "wronskian_within_1e-8": max(wr) <= 1e-8,
        "c2_within_1e-12": abs(c2 - 2.404825557695773) <= 1e-12,
        "c3_within_1e-12": abs(c3 - math.pi) <= 1e-12,
    }
    return results, verdicts


@scenario("demo-disk-static", "lam = 0 quadrature contrast on a disk, box Dirichlet verification",
          domain__radius=1.0, domain__center=[0.0, 0.0], grid__n=128, grid__half_width=1.5,
          grid__center=[0.0, 0.0], collar=0.8, psi__t0=0.0, psi__t1=0.6,
          threshold__mismatch=0.05, threshold__control=10.0, **_STATIC_COMMON)
def _demo_disk_static(cfg, out):
    disk = Disk(tuple(cfg["domain.center"]), cfg["domain.radius"])
    mu = fit_quadrature_measure(disk, disk.center, 0)
    return _static_demo(disk, mu, cfg, out)


@scenario("demo-cardioid", "lam = 0 quadrature contrast on the cardioid w + w^2/2",
          domain__a=0.5, measure__order=1, grid__n=128, grid__half_width=2.2,
          grid__center=[0.25, 0.0], collar=0.6, psi__t0=0.0, psi__t1=0.4,
          threshold__mismatch=0.1, threshold__control=5.0, **_STATIC_COMMON)
def _demo_cardioid(cfg, out):
    dom = ConformalImage(cfg["domain.a"])
    mu = fit_quadrature_measure(dom, (0.0, 0.0), cfg["measure.order"])
    return _static_demo(dom, mu, cfg, out)


def _far_field_ratio(q, lam, u0, grid, K):
    u, rep = lippmann_schwinger_solve(q, lam, u0, grid)
    ff = far_field(q, u, lam, K)
    return ff.max_abs / float(np.abs(u0(grid.points())).max()), ff, rep


@scenario("demo-disk-helmholtz", "lam > 0 radial-collar contrast on a disk, far field of the LS solve",
          lam=1.0, domain__radius=1.0, h0=1.0, collar=0.3, psi__t0=0.0, psi__t1=0.25,
          incident__a=[1.0, 0.1], incident__normalize_radius=0.85, ode__steps=400,
          grid__n=128, grid__half_width=1.2, far_field__K=256, control__c=0.5,
          threshold__ratio=1e-2, threshold__control=10.0, threshold__oracle=1e-2)
def _demo_disk_helmholtz(cfg, out):
    lam, R = cfg["lam"], cfg["domain.radius"]
    disk = Disk((0.0, 0.0), R)
    scale = 1.0 / float(bessel_j_all(0, np.array(lam * cfg["incident.normalize_radius"]))[0])
    a = np.asarray(cfg["incident.a"], dtype=float) * scale
    u0 = RealHelmholtzExpansion(lam, a, np.zeros_like(a))
    v0 = radial_cauchy_extension(R, lam, cfg["h0"], u0, cfg["collar"], steps=cfg["ode.steps"])
    g = glue_construction(disk, lam, u0, v0, _profile(cfg))
    grid = Grid2.centered((0.0, 0.0), cfg["grid.half_width"], cfg["grid.n"])
    K = cfg["far_field.K"]
    ratio, ff, rep = _far_field_ratio(g, lam, u0, grid, K)
    ff.to_csv(out / "far_field.csv")
    ff.to_svg(out / "far_field.svg")
    cf = g.contrast_field(grid)
    cf.to_csv(out / "h.csv")

    c = cfg["control.c"]
    qc = c * disk_fraction(grid, R)
    ratio_c, ffc, _ = _far_field_ratio(qc, lam, u0, grid, K)
    ffc.to_csv(out / "control_far_field.csv")

    # solver against the mode-matching series for a plane wave on the penetrable disk
    pw = PlaneWave(lam)
    u_pw, _ = lippmann_schwinger_solve(qc, lam, pw, grid)
    series = PenetrableDiskSeries(lam, c, R)
    exact = series.total_field(grid.points())
    field_err = float(np.abs(u_pw.values - exact).max() / np.abs(exact).max())
    ff_pw = far_field(qc, u_pw, lam, K)
    ff_exact = series.far_field(ff_pw.angles)
    ff_err = float(np.abs(ff_pw.values - ff_exact).max() / np.abs(ff_exact).max())
    results = {
        "far_field_ratio": ratio, "far_field_max": ff.max_abs,
        "solve": rep.to_dict(include_time=False),
        "control_c": c, "control_far_field_ratio": ratio_c,
        "control_over_construction": ratio_c / ratio if ratio > 0 else None,
        "oracle_field_relative_error": field_err, "oracle_far_field_relative_error": ff_err,
        "contrast": cf.metadata(), "collar_solution": v0.report(), "v_min": g.v_min,
        "incident": u0.to_dict(),
    }
    verdicts = {
        "far_field_ratio_below_threshold": ratio <= cfg["threshold.ratio"],
        "control_far_field_larger": ratio_c >= cfg["threshold.control"] * ratio,
        "solver_matches_series": max(field_err, ff_err) <= cfg["threshold.oracle"],
        "contrast_certified": bool(cf.is_contrast and cf.certificate > 0),
    }
    return results, verdicts


def _fitted_positive_wave(dom, lam, cfg, M):
    igrid = Grid2.centered((0.0, 0.0), cfg["interior.half_width"], cfg["interior.n"])
    v = interior_solution(dom, lam, igrid)
    wave, fit = runge_fit(v, lam, M, ridge=cfg["fit.ridge"], domain=dom,
                          boundary_weight=cfg["fit.boundary_weight"])
    return v, wave, fit


@scenario("demo-ellipse-cutoff", "interior-cutoff potential with a fitted positive wave on an ellipse",
          lam=1.0, domain__a=1.4, domain__b=0.9, interior__n=129, interior__half_width=1.5,
          fit__M=12, fit__ridge=0.0, fit__boundary_weight=10.0, collar=0.6, psi__t0=0.0,
          psi__t1=0.5, grid__n=128, grid__half_width=1.6, far_field__K=256, threshold__ratio=2e-2)
def _demo_ellipse_cutoff(cfg, out):
    lam = cfg["lam"]
    dom = Ellipse((0.0, 0.0), cfg["domain.a"], cfg["domain.b"])
    v, wave, fit = _fitted_positive_wave(dom, lam, cfg, cfg["fit.M"])
    g = interior_cutoff_potential(dom, lam, wave, _profile(cfg))
    grid = Grid2.centered((0.0, 0.0), cfg["grid.half_width"], cfg["grid.n"])
    ratio, ff, rep = _far_field_ratio(g, lam, wave, grid, cfg["far_field.K"])
    ff.to_csv(out / "far_field.csv")
    ff.to_svg(out / "far_field.svg")
    cf = g.contrast_field(grid)
    cf.to_csv(out / "h.csv")
    (out / "incident.json").write_text(wave.to_json() + "\n")
    results = {
        "far_field_ratio": ratio, "far_field_max": ff.max_abs, "solve": rep.to_dict(include_time=False),
        "fit": fit.to_dict(), "interior": v.meta["report"], "contrast": cf.metadata(), "v_min": g.v_min,
    }
    verdicts = {
        "far_field_ratio_below_threshold": ratio <= cfg["threshold.ratio"],
        "incident_positive_on_boundary": fit.positive_on_boundary,
    }
    return results, verdicts


@scenario("demo-corner", "penetrable square of constant contrast (control: it scatters)",
          lam=1.0, side=1.0, c=0.5, grid__n=128, far_field__K=256, margin=0.1,
          incident__direction=[1.0, 0.0])
def _demo_corner(cfg, out):
    wave = PlaneWave(cfg["lam"], tuple(cfg["incident.direction"]))
    ratio, ff, rep = corner_control(cfg["lam"], cfg["side"], cfg["c"], wave, n=cfg["grid.n"],
                                    K=cfg["far_field.K"], margin=cfg["margin"])
    ff.to_csv(out / "far_field.csv")
    ff.to_svg(out / "far_field.svg")
    results = {"far_field_ratio": ratio, "far_field_max": ff.max_abs,
               "solve": rep.to_dict(include_time=False)}
    verdicts = {"far_field_vanishes_iff_no_contrast": (ff.max_abs == 0.0) == (cfg["c"] == 0.0)}
    return results, verdicts


@scenario("fit-herglotz", "Runge fits of the interior solution by real Fourier-Bessel expansions",
          lam=1.0, domain__a=1.4, domain__b=0.9, interior__n=129, interior__half_width=1.5,
          fit__M=[2, 4, 8, 12], fit__ridge=0.0, fit__boundary_weight=10.0,
          herglotz__points=200, herglotz__nodes=4096, seed=0)
def _fit_herglotz(cfg, out):
    lam = cfg["lam"]
    dom = Ellipse((0.0, 0.0), cfg["domain.a"], cfg["domain.b"])
    igrid = Grid2.centered((0.0, 0.0), cfg["interior.half_width"], cfg["interior.n"])
    v = interior_solution(dom, lam, igrid)
    fits = []
    wave = None
    for M in cfg["fit.M"]:
        wave, rep = runge_fit(v, lam, M, ridge=cfg["fit.ridge"], domain=dom,
                              boundary_weight=cfg["fit.boundary_weight"])
        fits.append(rep.to_dict())
    with open(out / "fits.csv", "w") as fh:
        fh.write("M,residual,boundary_min\n")
        for f in fits:
            fh.write(f"{f['M_used']},{f['residual']:.12g},{f['boundary_min']:.12g}\n")
    (out / "incident.json").write_text(wave.to_json() + "\n")
    hc = wave.to_herglotz()
    rng = np.random.default_rng(cfg["seed"])
    P = rng.uniform(-2.0, 2.0, (cfg["herglotz.points"], 2))
    direct = wave(P)
    synth = herglotz_eval(hc, P)
    quad = herglotz_quadrature(hc, P, cfg["herglotz.nodes"])
    res = [f["residual"] for f in fits]
    results = {
        "fits": fits, "interior": v.meta["report"],
        "herglotz_synthesis_vs_quadrature": float(np.abs(synth - quad).max()),
        "herglotz_synthesis_vs_expansion": float(np.abs(synth - direct).max()),
        "herglotz_max_imag": float(np.abs(np.imag(synth)).max()),
    }
    verdicts = {
        "residual_non_increasing": all(b <= a * (1 + 1e-9) for a, b in zip(res, res[1:])),
        "positive_on_boundary": fits[-1]["positive_on_boundary"],
        "herglotz_quadrature_within_1e-8": results["herglotz_synthesis_vs_quadrature"] <= 1e-8,
    }
    return results, verdicts


@scenario("zero-ball", "sign-free balls of real Helmholtz solutions and boundary orthogonality at c2",
          lam=1.0, window=[-2.0, 2.0, -2.0, 2.0], centers_per_axis=4, radius_factors=[0.9, 1.05],
          random__count=50, random__M=10, orthogonality__count=10, orthogonality__M=6, seed=0,
          n_radial=48, n_angular=192)
def _zero_ball(cfg, out):
    lam = cfg["lam"]
    lo, hi = cfg["radius_factors"]
    r_lo, r_hi = lo * C2 / lam, hi * C2 / lam
    j0 = RealHelmholtzExpansion(lam, [1.0])
    kw = dict(n_radial=cfg["n_radial"], n_angular=cfg["n_angular"])
    origin = zero_ball_scan(j0, (0.0, 0.0, 0.0, 0.0), lam, [r_lo, r_hi], centers_per_axis=1, **kw)
    win = zero_ball_scan(j0, tuple(cfg["window"]), lam, [r_hi], cfg["centers_per_axis"], **kw)
    random_ok = []
    for k in range(cfg["random.count"]):
        w = RealHelmholtzExpansion.random(lam, cfg["random.M"], cfg["seed"] + k)
        rep = zero_ball_scan(w, tuple(cfg["window"]), lam, [r_hi], cfg["centers_per_axis"], **kw)
        random_ok.append(rep.sign_free_counts[0] == 0)

    disk = Disk((0.0, 0.0), 1.0)
    orth = []
    for k in range(cfg["orthogonality.count"]):
        w = RealHelmholtzExpansion.random(C2, cfg["orthogonality.M"], cfg["seed"] + 1000 + k)
        orth.append(eigen_orthogonality_check(disk, w).to_dict())
    with open(out / "orthogonality.csv", "w") as fh:
        fh.write("wave,integral,sign_changes\n")
        for k, o in enumerate(orth):
            fh.write(f"{k},{o['integral']:.6e},{o['sign_changes']}\n")
    results = {
        "c2": C2, "radius_sign_free": r_lo, "radius_sign_change": r_hi,
        "origin_scan": origin.to_dict(), "window_scan": win.to_dict(),
        "random_all_change_sign": random_ok, "orthogonality": orth,
    }
    verdicts = {
        "j0_sign_free_below_c2": origin.sign_free_counts[0] == 1,
        "j0_changes_sign_in_every_ball_above_c2": win.sign_free_counts[0] == 0,
        "random_waves_change_sign_above_c2": all(random_ok),
        "orthogonality_within_1e-8": max(abs(o["integral"]) for o in orth) <= 1e-8,
        "every_wave_changes_sign_on_boundary": all(o["sign_changes"] > 0 for o in orth),
    }
    return results, verdicts


@scenario("thickness", "thickness decay at cusp tips and at Lipschitz corners",
          gammas=[1.5, 2.0, 3.0], radii=[0.02, 0.01, 0.005, 0.0025], samples=10000,
          square__radii=[0.2, 0.1, 0.05, 0.025, 0.0125], tolerance=0.1, square__floor=0.5)
def _thickness(cfg, out):
    cusps = []
    for gam in cfg["gammas"]:
        rep = dichotomy_diagnose(CuspModel(gam), (0.0, 0.0), cfg["radii"], samples=cfg["samples"])
        cusps.append({"gamma": gam, "expected": gam - 1.0, **rep.to_dict()})
    sq = square()
    corners = []
    for name, pt in (("corner", (0.5, 0.5)), ("edge_midpoint", (0.5, 0.0))):
        rep = dichotomy_diagnose(sq, pt, cfg["square.radii"], samples=cfg["samples"])
        corners.append({"point_kind": name, **rep.to_dict()})
    with open(out / "thickness.csv", "w") as fh:
        fh.write("case,r,delta\n")
        for c in cusps:
            for r, d in zip(c["radii"], c["deltas"]):
                fh.write(f"cusp_gamma_{c['gamma']:g},{r:.6g},{d:.6g}\n")
        for c in corners:
            for r, d in zip(c["radii"], c["deltas"]):
                fh.write(f"square_{c['point_kind']},{r:.6g},{d:.6g}\n")
    curves = [(f"gamma {c['gamma']:g}", np.stack([np.log10(c["radii"]), np.log10(c["deltas"])], -1), col)
              for c, col in zip(cusps, ("#1f5fa8", "#a81f1f", "#1fa84a"))]
    curves_svg(out / "thickness.svg", curves, "log10 delta_r vs log10 r", equal=False)
    verdicts = {
        f"cusp_gamma_{c['gamma']:g}_exponent": abs(c["exponent"] - c["expected"]) <= cfg["tolerance"]
        for c in cusps
    }
    for c in corners:
        verdicts[f"square_{c['point_kind']}_thick"] = min(c["deltas"]) >= cfg["square.floor"]
    return {"cusps": cusps, "square": corners}, verdicts


@scenario("dichotomy", "regular-like versus thin verdicts at boundary points",
          radii=[0.2, 0.1, 0.05, 0.025], samples=10000, cusp__gamma=2.0)
def _dichotomy(cfg, out):
    cases = [
        ("disk", Disk(), (1.0, 0.0), "regular-like"),
        ("cusp", CuspModel(cfg["cusp.gamma"]), (0.0, 0.0), "thin"),
        ("square_corner", square(), (0.5, 0.5), "regular-like"),
        ("square_edge", square(), (0.5, 0.0), "regular-like"),
    ]
    reports, verdicts = {}, {}
    for name, dom, pt, expected in cases:
        rep = dichotomy_diagnose(dom, pt, cfg["radii"], samples=cfg["samples"])
        reports[name] = {"expected": expected, **rep.to_dict()}
        verdicts[f"{name}_{expected}"] = rep.verdict == expected
    with open(out / "dichotomy.csv", "w") as fh:
        fh.write("case,r,delta,verdict\n")
        for name, rep in reports.items():
            for r, d in zip(rep["radii"], rep["deltas"]):
                fh.write(f"{name},{r:.6g},{d:.6g},{rep['verdict']}\n")
    return reports, verdicts


@scenario("cusp-example", "image of a half disk under z^2 + i z^mu and its cusp exponent",
          mus=[3, 5, 7], samples=2000, radius=0.5, t_max=0.05, tolerance=0.1)
def _cusp_example(cfg, out):
    reports, verdicts = {}, {}
    curves = []
    for mu, col in zip(cfg["mus"], ("#1f5fa8", "#a81f1f", "#1fa84a", "#555555")):
        ex = kn_cusp_example(mu, samples=cfg["samples"], radius=cfg["radius"], t_max=cfg["t_max"])
        rep = ex.report()
        reports[f"mu_{mu}"] = rep
        verdicts[f"mu_{mu}_cusp_within_tolerance"] = rep["near_zero_relative_deviation"] <= cfg["tolerance"]
        verdicts[f"mu_{mu}_exponent_within_tolerance"] = (
            abs(rep["fitted_exponent"] - mu / 2) <= cfg["tolerance"] * mu / 2)
        verdicts[f"mu_{mu}_real_segment_exact"] = rep["real_segment_error"] <= 1e-12
        with open(out / f"boundary_mu_{mu}.csv", "w") as fh:
            fh.write("x,y\n")
            for x, y in ex.boundary:
                fh.write(f"{x:.12g},{y:.12g}\n")
        curves.append((f"mu = {mu}", np.vstack([ex.boundary, ex.boundary[:1]]), col))
    curves_svg(out / "boundaries.svg", curves, "f(upper half disk)")
    return reports, verdicts


# -- entry point -----------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="nonscatter", description="Non-scattering demo runner.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="print the available scenarios")
    r = sub.add_parser("run", help="run one scenario")
    r.add_argument("scenario")
    r.add_argument("config_pos", nargs="?", default=None, metavar="CONFIG",
                   help="config file, or 'default' for the built-in defaults")
    r.add_argument("--config", default=None, help="config file (flat key = value)")
    r.add_argument("--out", default=None, help="output directory (default: out/<scenario>)")
    r.add_argument("--threads", type=int, default=1, help="BLAS/LAPACK threads (default 1)")
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key (repeatable)")
    r.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "list":
        for name in sorted(SCENARIOS):
            print(f"{name:22s} {SCENARIOS[name].summary}")
        return EXIT_OK

    if args.scenario not in SCENARIOS:
        print(f"error: unknown scenario {args.scenario!r}; run 'nonscatter list'", file=sys.stderr)
        return EXIT_SCENARIO
    if args.config and args.config_pos not in (None, "default"):
        print("error: give the config either positionally or with --config", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = resolve_config(args.scenario, args.config or args.config_pos, args.set)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.print_config:
        sys.stdout.write(format_config(cfg))
        return EXIT_OK

    out = Path(args.out) if args.out else Path("out") / args.scenario
    try:
        with threadpool_limits(limits=args.threads):
            doc = execute(args.scenario, cfg, out)
    except SolverNonConvergence as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (ConstructionError, QuadratureFitError, EigenvalueProximityError, DiscreteEigenvalueError,
            ValueError) as exc:
        print(f"scenario failed: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    failed = [k for k, v in doc["verdicts"].items() if not v]
    for k in sorted(doc["verdicts"]):
        print(f"{'PASS' if doc['verdicts'][k] else 'FAIL'}  {k}")
    print(f"results: {out / 'results.json'}")
    return EXIT_SCENARIO if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
