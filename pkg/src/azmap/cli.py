"""Command-line experiment runner.

Each subcommand runs one experiment, writes its data tables (CSV), a
``report.json`` and, where it makes sense, SVG scatter plots into the output
directory, and exits with

    0  every asserted check passed
    1  at least one check failed
    2  bad command line or configuration
    3  the run itself crashed

Settings come from built-in defaults, then an optional flat ``key = value``
file (``--config``), then the command line.  ``AZMAP_OUTPUT_DIR`` sets the
default output directory.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .alpha import parse_alpha
from .core import CylState, MapParams, SignVariant, iterate
from .errors import AzMapError, UsageError
from .numerics import NumericPolicy

EXPERIMENTS = ("simulate", "return-map", "intervals", "renorm-check", "escape", "kesten", "figure1")

# (type, default) per setting; types are parsers from text
_INT = int


def _int_list(text):
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    return [int(float(v)) for v in str(text).replace(";", ",").split(",") if v.strip()]


def _float_expr(text):
    return float(parse_alpha(text).hi) if isinstance(text, str) and any(c.isalpha() or c == "/" for c in text) else float(text)


def _policy(text):
    return text if isinstance(text, NumericPolicy) else NumericPolicy.parse(str(text))


def _bool(text):
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_SETTINGS: dict[str, dict[str, tuple[Callable, Any, str]]] = {
    "simulate": {
        "alpha": (str, "1", "twist amplitude (decimal or expression such as 1/ln(2))"),
        "z": (_float_expr, -1.0, "exponent of the action"),
        "circle_len": (float, 2.0, "length of the base circle (1 or 2)"),
        "variant": (str, "pinball", "sign rule: pinball (gain on the lower half) or printed"),
        "angle": (float, 0.01, "initial angle"),
        "action": (float, 50.0, "initial action"),
        "steps": (_INT, 10**5, "number of map steps"),
        "decimation": (_INT, 1, "keep every k-th state"),
        "policy": (_policy, "double", "numeric policy: double, compensated, dd"),
    },
    "return-map": {
        "alpha": (str, "1/ln(2)", "twist amplitude"),
        "I": (_int_list, [101], "comma-separated actions"),
        "seeds": (_INT, 10**4, "random seeds per action"),
        "rng_seed": (_INT, 12345, "seed of the random generator"),
        "policy": (_policy, "compensated", "numeric policy"),
    },
    "intervals": {
        "alpha": (str, "1/ln(2)", "twist amplitude"),
        "I": (_int_list, [101, 501, 1001], "comma-separated actions"),
        "grid": (_INT, 10**5, "brute-force cells per fiber"),
        "policy": (_policy, "compensated", "numeric policy"),
    },
    "renorm-check": {
        "alpha": (str, "1/ln(2)", "twist amplitude; needs 1 < exp(1/alpha) < 3"),
        "I": (_int_list, [100, 200, 400, 800, 1600], "comma-separated actions"),
        "grid": (_INT, 2000, "rescaled-angle samples per fiber"),
        "formulas": (str, "derived", "rotation formulas for neutral returns: derived or printed"),
        "policy": (_policy, "compensated", "numeric policy"),
    },
    "escape": {
        "m": (_INT, 1, "alpha = 1/ln(2m)"),
        "N0": (_INT, 1000, "starting action"),
        "returns": (_INT, 10**4, "number of first returns"),
        "policy": (_policy, "dd", "numeric policy"),
        "ladder": (_bool, False, "escalate precision until every return gains"),
        "decimation": (_INT, 1, "keep every k-th return in the track"),
        "offset": (float, 0.0, "shift of the seed in the rescaled angle"),
    },
    "kesten": {
        "alpha": (str, "golden", "rotation: p/q (exact arithmetic), golden, or an alpha expression"),
        "x0": (str, "0.1", "initial position (p/q allowed)"),
        "y0": (_INT, 0, "initial counter"),
        "steps": (_INT, 10**6, "number of steps"),
        "decimation": (_INT, 100, "keep every k-th counter value"),
        "period_grid": (_INT, 100, "grid for the period-2 scan (0 to skip)"),
    },
    "figure1": {
        "alpha": (str, "1", "twist amplitude (not fixed by the figure; 1 by default)"),
        "angle": (float, 0.01, "initial angle"),
        "action": (float, 50.0, "initial action"),
        "steps": (_INT, 10**6, "number of map steps"),
        "decimation": (_INT, 100, "keep every k-th state"),
        "fiber_I": (_INT, 50, "action of the first-return fiber panel"),
        "fiber_grid": (_INT, 2000, "seeds on the fiber"),
        "policy": (_policy, "compensated", "numeric policy"),
    },
}


@dataclass
class ExperimentConfig:
    experiment: str
    settings: dict
    output_dir: Path

    def __getitem__(self, key):
        return self.settings[key]

    def echo(self) -> dict:
        out = {}
        for k, v in sorted(self.settings.items()):
            out[k] = v.name.lower() if isinstance(v, NumericPolicy) else v
        return {"experiment": self.experiment, "settings": out}


@dataclass
class RunReport:
    config: dict
    results: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    findings: dict = field(default_factory=dict)
    escalations: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    plots: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    version: str = __version__

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        return {
            "version": self.version,
            "config": self.config,
            "checks": self.checks,
            "verdict": "pass" if self.passed else "fail",
            "results": self.results,
            "findings": self.findings,
            "escalations": self.escalations,
            "tables": sorted(self.tables),
            "plots": sorted(self.plots),
        }


# ---------------------------------------------------------------------------
# configuration


def _read_config_file(path) -> dict:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key = value, got {raw!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="azmap", description="Experiments on alpha-z twist maps.")
    p.add_argument("--version", action="version", version=f"azmap {__version__}")
    sub = p.add_subparsers(dest="experiment", metavar="experiment")
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", default=None, help="flat key = value settings file")
        sp.add_argument("--out", default=None, help="output directory (default $AZMAP_OUTPUT_DIR or ./azmap-out)")
        for key, (_, default, helptext) in _SETTINGS[name].items():
            flag = "--" + key.replace("_", "-")
            sp.add_argument(flag, dest=key, default=None, help=f"{helptext} [default: {default}]")
    return p


def parse_config(argv=None, env=None) -> ExperimentConfig:
    """Layer defaults, an optional config file and flags into a validated config."""
    env = os.environ if env is None else env
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in EXPERIMENTS and not argv[0].startswith("-"):
        raise UsageError(f"missing or unknown experiment; choose one of: {', '.join(EXPERIMENTS)}")
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:
            raise
        raise UsageError("invalid command line; see --help") from None
    if ns.experiment is None:
        raise UsageError(f"missing experiment; choose one of: {', '.join(EXPERIMENTS)}")
    spec = _SETTINGS[ns.experiment]
    raw = {k: d for k, (_, d, _) in spec.items()}
    if ns.config:
        for k, v in _read_config_file(ns.config).items():
            if k == "experiment":
                if v != ns.experiment:
                    raise UsageError(f"config file is for experiment {v!r}, not {ns.experiment!r}")
                continue
            if k == "out":
                ns.out = ns.out or v
                continue
            if k not in spec:
                raise UsageError(f"unknown setting {k!r} for {ns.experiment}")
            raw[k] = v
    for k in spec:
        v = getattr(ns, k)
        if v is not None:
            raw[k] = v
    settings = {}
    for k, v in raw.items():
        conv = spec[k][0]
        try:
            settings[k] = conv(v)
        except (ValueError, TypeError) as exc:
            raise UsageError(f"invalid value for {k!r}: {v!r} ({exc})") from None
    out = Path(ns.out or env.get("AZMAP_OUTPUT_DIR") or "azmap-out")
    cfg = ExperimentConfig(ns.experiment, settings, out)
    validate(cfg)
    return cfg


def _check_alpha(text, key="alpha"):
    try:
        return parse_alpha(text)
    except ValueError as exc:
        raise UsageError(f"invalid value for {key!r}: {exc}") from None


def validate(cfg: ExperimentConfig) -> None:
    from .returnmap import i_min

    s = cfg.settings
    e = cfg.experiment

    def need(cond, key, why):
        if not cond:
            raise UsageError(f"invalid value for {key!r}: {why}")

    if "alpha" in s and e != "kesten":
        a = _check_alpha(s["alpha"])
        if e in ("return-map", "intervals", "renorm-check"):
            floor = i_min(a.hi)
            for I in s["I"]:
                need(I >= floor, "I", f"{I} is below the analysis floor {floor}")
            need(len(s["I"]) > 0, "I", "empty list")
        if e == "renorm-check":
            need(1 < a.mu < 3, "alpha", f"mu = exp(1/alpha) = {a.mu:.6g} is outside (1, 3)")
            need(s["formulas"] in ("derived", "printed"), "formulas", "use derived or printed")
    for key in ("steps", "returns", "seeds"):
        if key in s:
            need(s[key] >= 0, key, "must be non-negative")
    if "decimation" in s:
        need(s["decimation"] >= 1, "decimation", "must be at least 1")
    if e == "intervals":
        need(s["grid"] >= 1000, "grid", "must be at least 1000")
    if e == "renorm-check":
        need(s["grid"] >= 1, "grid", "must be positive")
    if e == "escape":
        need(s["m"] >= 1, "m", "must be a positive integer")
        need(s["N0"] >= 100, "N0", "must be at least 100")
    if e == "simulate":
        need(s["circle_len"] in (1.0, 2.0), "circle_len", "must be 1 or 2")
        need(s["variant"] in ("pinball", "printed"), "variant", "use pinball or printed")
    if e == "figure1":
        a = _check_alpha(s["alpha"])
        need(s["fiber_I"] >= i_min(a.hi), "fiber_I", "below the analysis floor")
    if e == "kesten":
        from .kesten import as_rational

        if as_rational(s["alpha"]) is None:
            try:
                v = _kesten_float(s["alpha"])
            except ValueError as exc:
                raise UsageError(f"invalid value for 'alpha': {exc}") from None
            need(v > 0, "alpha", "must be positive")
        need(s["period_grid"] == 0 or s["period_grid"] >= 2, "period_grid", "0 or at least 2")


def _kesten_float(text) -> float:
    # a few closed forms are handy for rotations; everything else goes through the alpha grammar
    t = str(text).replace(" ", "")
    if t == "golden":
        return (5**0.5 - 1) / 2
    return float(parse_alpha(t).hi)


# ---------------------------------------------------------------------------
# experiments


def _pinball(cfg, policy=None):
    return MapParams.pinball(cfg["alpha"], numeric_policy=policy if policy is not None else cfg["policy"])


def run_simulate(cfg: ExperimentConfig, rep: RunReport):
    s = cfg.settings
    variant = SignVariant.PINBALL_PROOFS if s["variant"] == "pinball" else SignVariant.AZ_HALF
    params = MapParams(s["alpha"], z=s["z"], circle_len=s["circle_len"], sign_variant=variant,
                       numeric_policy=s["policy"])
    tr = iterate(params, CylState(s["angle"], s["action"]), s["steps"], s["decimation"])
    idx = np.arange(len(tr)) * s["decimation"]
    rep.tables["trace"] = (["step", "angle", "action"], list(zip(idx.tolist(), tr.angles, tr.actions)))
    rep.results = {"step_count": tr.step_count, "recorded": len(tr), "action_min": tr.action_min,
                   "action_max": tr.action_max, "final_angle": tr.final.angle, "final_action": tr.final.action,
                   "singular_hits": len(tr.singular_hits)}
    d = tr.actions - s["action"]
    rep.checks["action_lattice"] = bool(np.all(d == np.round(d)))
    rep.checks["angle_range"] = bool(np.all((tr.angles >= 0) & (tr.angles < params.circle_len)))
    rep.checks["extrema_bound_states"] = bool(np.all((tr.actions >= tr.action_min) & (tr.actions <= tr.action_max)))


def run_return_map(cfg: ExperimentConfig, rep: RunReport):
    from .returnmap import first_return, first_return_batch

    s = cfg.settings
    params = _pinball(cfg)
    rng = np.random.default_rng(s["rng_seed"])
    rows = []
    viol = 0
    closure_ok = True
    delta_ok = True
    for I in s["I"]:
        w = params.alpha / (I - 1)
        phis = rng.uniform(0.0, w, s["seeds"])
        phis = phis[phis > 0]
        d, po, up, dn = first_return_batch(params, phis, I)
        bad = int(np.count_nonzero(np.abs(d) > 1))
        viol += bad
        closure_ok &= bool(np.all((po > 0) & (po < params.alpha / (I + d - 1))))
        # closed-form identities on a handful of full events
        for phi in phis[:16]:
            ev = first_return(params, CylState(float(phi), I))
            delta_ok &= abs(ev.delta1 + ev.delta2 - params.alpha / (I + ev.n + 1)) <= 1e-10 * params.alpha / I
            delta_ok &= ev.delta_I == ev.n - ev.n_prime
        rows.append((I, len(phis), int(np.count_nonzero(d == 1)), int(np.count_nonzero(d == 0)),
                     int(np.count_nonzero(d == -1)), bad))
    rep.tables["returns"] = (["I", "seeds", "plus", "zero", "minus", "violations"], rows)
    rep.results = {"violations": viol, "cells": len(rows)}
    rep.checks["bounded_increment"] = viol == 0
    rep.checks["closure"] = bool(closure_ok)
    rep.checks["defect_identities"] = bool(delta_ok)


def run_intervals(cfg: ExperimentConfig, rep: RunReport):
    from .returnmap import classify_fiber, fiber_analytics

    s = cfg.settings
    params = _pinball(cfg)
    mu = params.mu
    rows = []
    single = contained = endpoints = equal = leftmost = True
    flux = {}
    for I in s["I"]:
        r = classify_fiber(params, I, s["grid"])
        w = r.width
        errs = r.endpoint_errors()
        maxerr = max(abs(e) for pair in errs.values() for e in pair)
        gap = r.measure_gap_cells()
        bp, bm = r.bruteforce_i_plus or (math.nan,) * 2, r.bruteforce_i_minus or (math.nan,) * 2
        rows.append((I, params.alpha, mu, *r.i_plus, *r.i_minus, *bp, *bm, r.delta1_0, r.delta2_0,
                     r.delta1_00, r.delta2_00, r.plus_runs, r.minus_runs, len(r.i_zero_components),
                     gap, maxerr))
        single &= r.single_intervals
        contained &= r.i_plus[0] >= 0 and r.i_plus[1] <= w / mu
        contained &= r.i_minus[0] >= w * (1 - 1 / mu) and r.i_minus[1] <= w
        endpoints &= maxerr <= 2
        equal &= abs(gap) <= 2
        leftmost &= r.leftmost_class != -1
        nxt = fiber_analytics(params, I + 1)
        flux[str(I)] = {
            "plus_measure_cells": (r.i_plus[1] - r.i_plus[0]) / r.cell,
            "minus_measure_cells": (r.i_minus[1] - r.i_minus[0]) / r.cell,
            "minus_measure_next_level_cells": (nxt.i_minus[1] - nxt.i_minus[0]) / r.cell,
        }
    cols = ["I", "alpha", "mu", "iplus_lo", "iplus_hi", "iminus_lo", "iminus_hi", "bf_iplus_lo", "bf_iplus_hi",
            "bf_iminus_lo", "bf_iminus_hi", "delta1_0", "delta2_0", "delta1_00", "delta2_00", "plus_runs",
            "minus_runs", "zero_components", "measure_gap_cells", "max_endpoint_error_cells"]
    rep.tables["intervals"] = (cols, rows)
    rep.checks["single_intervals"] = bool(single)
    rep.checks["containment"] = bool(contained)
    rep.checks["endpoints_within_2_cells"] = bool(endpoints)
    rep.checks["equal_measure_within_2_cells"] = bool(equal)
    rep.checks["leftmost_not_minus"] = bool(leftmost)
    rep.findings["measures"] = flux


def run_renorm_check(cfg: ExperimentConfig, rep: RunReport):
    from .renorm import Case, renorm_error_scan

    s = cfg.settings
    params = _pinball(cfg)
    scan = renorm_error_scan(params, s["I"], s["grid"], s["formulas"])
    cases = [c.value for c in Case]
    rows = [(r.I, r.max_abs_error, r.I * r.max_abs_error, *(r.case_breakdown.get(c, math.nan) for c in cases),
             r.g_form_max_error) for r in scan.rows]
    rep.tables["renorm"] = (["I", "max_abs_error", "I_times_error", *[f"err_{c}" for c in cases], "g_form_error"], rows)
    slope = scan.slope
    rep.results = {"slope": slope, "mu": scan.mu, "formulas": s["formulas"]}
    rep.checks["slope_in_range"] = bool(-1.5 <= slope <= -0.5) if len(scan.rows) > 1 else True
    if s["formulas"] == "derived":
        other = renorm_error_scan(params, s["I"], s["grid"], "printed")
        rep.findings["printed_formulas_slope"] = other.slope
        rep.findings["printed_formulas_max_error"] = max(r.max_abs_error for r in other.rows)


def run_escape_exp(cfg: ExperimentConfig, rep: RunReport):
    from .escape import make_seed, run_escape, verify_escape

    s = cfg.settings
    seed = make_seed(s["m"], s["N0"])
    if s["offset"]:
        seed = seed.shifted(s["offset"])
    if s["ladder"]:
        g = verify_escape(seed, s["returns"], s["decimation"])
        rep.escalations = [{"policy": p.lower(), "monotone_prefix": n} for p, n in g.escalations]
    else:
        g = run_escape(seed, s["returns"], s["policy"], s["decimation"])
    rows = list(zip(g.track_index.tolist(), g.track_action, g.phi_tilde_track))
    rep.tables["escape"] = (["return_index", "action", "phi_tilde"], rows)
    lo, hi = g.phi_tilde_range
    rep.results = {
        "phi_tilde_0": seed.phi_tilde_0, "closed_form_seed": seed.closed_form, "returns_completed": g.returns_completed,
        "plus": g.plus_count, "zero": g.zero_count, "minus": g.minus_count,
        "longest_monotone_prefix": g.longest_monotone_prefix, "final_action": g.final_action,
        "phi_tilde_min": lo, "phi_tilde_max": hi, "policy": g.numeric_policy.name.lower(),
        "rounding_bound": g.rounding_bound, "precision_warning": g.precision_warning,
        "min_crossing_value": float(g.crossing_values.min()) if g.crossing_values.size else None,
    }
    rep.checks["monotone_growth"] = g.all_gains
    rep.checks["bookkeeping"] = g.final_action - seed.N0 == g.plus_count - g.minus_count
    rep.checks["crossing_certificate"] = g.certificate_ok
    if not s["offset"]:
        rep.checks["phi_tilde_track"] = bool(max(abs(lo - seed.phi_tilde_0), abs(hi - seed.phi_tilde_0)) <= 1e-2)


def run_kesten(cfg: ExperimentConfig, rep: RunReport):
    from fractions import Fraction

    from .kesten import as_rational, ek_orbit, period_scan_detail

    s = cfg.settings
    q = as_rational(s["alpha"])
    alpha = q if q is not None else _kesten_float(s["alpha"])
    x0 = Fraction(s["x0"]) if q is not None else float(Fraction(s["x0"]))
    ser = ek_orbit(alpha, x0, s["y0"], s["steps"], s["decimation"])
    idx = np.arange(len(ser.y_values)) * s["decimation"]
    rep.tables["kesten"] = (["step", "y"], list(zip(idx.tolist(), ser.y_values.tolist())))
    rep.results = {"alpha": ser.alpha, "exact": ser.exact, "steps": ser.steps, "y_min": ser.y_min,
                   "y_max": ser.y_max, "y_final": int(ser.y_values[-1]) if s["decimation"] == 1 or s["steps"] % s["decimation"] == 0 else None,
                   "zero_crossings": ser.zero_crossings}
    rep.checks["counter_lattice"] = bool(np.all((ser.y_values - s["y0"]) == np.round(ser.y_values - s["y0"])))
    rep.checks["range_bounded_by_steps"] = ser.y_range <= ser.steps
    if s["decimation"] == 1:
        rep.checks["unit_jumps"] = bool(np.all(np.abs(np.diff(ser.y_values)) == 1))
    if s["period_grid"]:
        ps = period_scan_detail(alpha, s["period_grid"], 2)
        rep.findings["period_two"] = {"all_period_two": ps.ok, "checked": ps.checked,
                                      "singular_skipped": ps.singular_skipped, "failures": len(ps.failures)}


def run_figure1(cfg: ExperimentConfig, rep: RunReport):
    from .returnmap import first_return_batch

    s = cfg.settings
    params = _pinball(cfg)
    tr = iterate(params, CylState(s["angle"], s["action"]), s["steps"], s["decimation"])
    idx = np.arange(len(tr)) * s["decimation"]
    rep.tables["figure1_trace"] = (["step", "angle", "action"], list(zip(idx.tolist(), tr.angles, tr.actions)))
    I = s["fiber_I"]
    w = params.alpha / (I - 1)
    t = (np.arange(s["fiber_grid"]) + 0.5) / s["fiber_grid"]
    d, po, _, _ = first_return_batch(params, t * w, I)
    t_out = (I + d - 1) * po / params.alpha
    rep.tables["figure1_fiber"] = (["phi_tilde", "phi_tilde_next", "delta_I"], list(zip(t, t_out, d.tolist())))
    rep.plots["figure1"] = ("figure1", tr.angles, tr.actions, t, t_out, d)
    rep.results = {"alpha": params.alpha, "alpha_note": "alpha is not fixed by the original figure; chosen here",
                   "step_count": tr.step_count, "recorded": len(tr),
                   "action_min": tr.action_min, "action_max": tr.action_max}
    rep.checks["completed"] = tr.step_count == s["steps"]
    rep.checks["fiber_bounded_increment"] = bool(np.all(np.abs(d) <= 1))


RUNNERS = {
    "simulate": run_simulate,
    "return-map": run_return_map,
    "intervals": run_intervals,
    "renorm-check": run_renorm_check,
    "escape": run_escape_exp,
    "kesten": run_kesten,
    "figure1": run_figure1,
}


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport(config=cfg.echo())
    t0 = time.perf_counter()
    RUNNERS[cfg.experiment](cfg, rep)
    rep.timings["run_seconds"] = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# outputs


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def table_bytes(columns, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue().encode()


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, (np.bool_, bool)):
        return bool(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (float, np.floating)):
        f = float(o)
        return f if math.isfinite(f) else repr(f)
    return o


def _scatter_svg(path, angles, actions, t, t_out, d):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "azmap", "svg.fonttype": "path"}):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5))
        ax1.scatter(angles, actions, s=0.2, c="k", linewidths=0, rasterized=False)
        ax1.set_xlabel("angle")
        ax1.set_ylabel("action")
        ax1.set_xlim(0, 2)
        ax1.set_title("orbit")
        colors = {1: "tab:red", 0: "tab:gray", -1: "tab:blue"}
        for k, lab in ((1, "gain"), (0, "neutral"), (-1, "loss")):
            m = d == k
            if m.any():
                ax2.scatter(t[m], t_out[m], s=1.0, c=colors[k], linewidths=0, label=lab)
        ax2.set_xlabel("rescaled angle")
        ax2.set_ylabel("rescaled angle after one return")
        ax2.set_xlim(0, 1)
        ax2.set_ylim(0, 1)
        ax2.legend(loc="upper right", markerscale=6, fontsize=8)
        ax2.set_title("first return on one fiber")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def write_outputs(rep: RunReport, out_dir) -> list:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for name, (cols, rows) in sorted(rep.tables.items()):
            p = out / f"{name}.csv"
            p.write_bytes(table_bytes(cols, rows))
            written.append(p)
        for name, args in sorted(rep.plots.items()):
            p = out / f"{name}.svg"
            _scatter_svg(p, *args[1:])
            written.append(p)
        p = out / "report.json"
        p.write_text(json.dumps(_jsonable(rep.to_json()), indent=2, sort_keys=True) + "\n")
        written.append(p)
        t = out / "timings.json"
        t.write_text(json.dumps(_jsonable(rep.timings), indent=2, sort_keys=True) + "\n")
        written.append(t)
    except OSError as exc:
        raise IOError(f"cannot write outputs to {out}: {exc}") from exc
    return written


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"azmap: usage error: {exc}", file=sys.stderr)
        return 2
    try:
        rep = run_experiment(cfg)
        write_outputs(rep, cfg.output_dir)
    except (AzMapError, OSError, ValueError, ArithmeticError) as exc:
        print(f"azmap: {cfg.experiment} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    for name, ok in sorted(rep.checks.items()):
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    print(f"report: {Path(cfg.output_dir) / 'report.json'}")
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
