"""Command-line laboratory: scenario ingestion, experiment orchestration,
and CSV emission.

Scenarios are single JSON documents; unknown keys are rejected outright so
a run either reproduces exactly or fails before any compute starts.  All
CSV output uses 17 significant digits and Unix newlines, so identical
scenarios produce byte-identical CSV bodies.

Exit codes: 0 when every verdict holds, 2 when some verdict fails,
1 on runtime errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .elliptic import EllipticSolution, solve_semilinear, zero_beta
from .errors import ScenarioError, SchwarzflowError
from .exprparse import evaluate, parse_expression
from .manifold import (ModelManifold, curvatures, is_parabolic, make_manifold,
                       volume_ball)
from .nonlinearity import Nonlinearity, nonlinearity_from_spec
from .parabolic import Trajectory, evolve
from .polya import (NazarovResult, TentFamily, ViolationSearch,
                    annulus_isoperimetric_check, curvature_gap,
                    find_radial_violation, nazarov_check, radial_polya_ratio)
from .radial import (ConcentrationReport, RadialFunction, concentration_compare,
                     is_nonincreasing, make_grid, schwarz_rearrangement)
from .errors import ExperimentInconsistent


def _fmt(x) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# scenario ingestion
# ---------------------------------------------------------------------------

_EXPERIMENTS = ("concentration", "falsify", "rearrange", "manifold_info",
                "elliptic", "evolve", "polya_check")

_TOP_KEYS = {"experiment", "manifold", "nonlinearity", "grid", "time",
             "datum", "tolerances", "r_hat", "scan", "tents", "annuli", "beta"}


@dataclass
class Scenario:
    experiment: str
    manifold: ModelManifold
    grid_R: float
    grid_M: int
    nonlinearity: Nonlinearity | None
    k_reg: int | None
    h: float | None
    T: float | None
    output_stride: int
    datum: RadialFunction | None
    tolerances: dict
    r_hat: float | None
    scan_grid: int
    tent_counts: tuple[int, int]
    annuli_count: int
    raw: dict = field(repr=False)


def _require_keys(doc: dict, allowed: set, where: str) -> None:
    extra = set(doc) - allowed
    if extra:
        raise ScenarioError(f"unknown key(s) {sorted(extra)} in {where}")


def _build_manifold(doc) -> ModelManifold:
    _require_keys(doc, {"kind", "n", "expr", "r", "psi"}, "manifold")
    kind = doc.get("kind")
    n = doc.get("n")
    if kind is None or n is None:
        raise ScenarioError("manifold needs 'kind' and 'n'")
    if kind == "table":
        if "r" not in doc or "psi" not in doc:
            raise ScenarioError("table manifold needs 'r' and 'psi' arrays")
        return make_manifold("table", int(n), table=(doc["r"], doc["psi"]))
    if kind == "expression":
        if "expr" not in doc:
            raise ScenarioError("expression manifold needs 'expr'")
        return make_manifold(doc["expr"], int(n))
    return make_manifold(kind, int(n))


def _build_datum(doc, grid) -> RadialFunction:
    _require_keys(doc, {"kind", "sigma", "height", "a", "b", "r", "value",
                        "expr"}, "datum")
    kind = doc.get("kind")
    r = grid.nodes
    if kind == "gaussian":
        sigma = float(doc.get("sigma", 0.5))
        height = float(doc.get("height", 1.0))
        vals = height * np.exp(-r * r / (2.0 * sigma * sigma))
    elif kind == "annulus_tent":
        a = float(doc["a"])
        b = float(doc["b"])
        vals = np.maximum(np.minimum(r - a, b - r), 0.0)
        if "height" in doc:
            peak = float(np.max(vals))
            if peak > 0:
                vals *= float(doc["height"]) / peak
    elif kind == "step_table":
        edges = np.asarray(doc["r"], dtype=float)
        heights = np.asarray(doc["value"], dtype=float)
        if len(edges) != len(heights) or np.any(np.diff(edges) <= 0):
            raise ScenarioError("step_table needs increasing r and matching values")
        idx = np.searchsorted(edges, r, side="right") - 1
        vals = np.where(idx >= 0, heights[np.clip(idx, 0, len(heights) - 1)], 0.0)
    elif kind == "expr":
        ast = parse_expression(doc["expr"])
        vals = np.asarray(evaluate(ast, r=r), dtype=float)
    else:
        raise ScenarioError(f"unknown datum kind {kind!r}")
    if np.any(vals < 0):
        raise ScenarioError("datum must be nonnegative")
    if abs(vals[-1]) > 1e-9 * (1.0 + float(np.max(vals))):
        raise ScenarioError("datum must vanish at the outer radius")
    vals[-1] = 0.0
    return RadialFunction(grid, vals, nonneg=True)


def load_scenario(path, experiment: str | None = None) -> Scenario:
    """Read, validate, and fully construct a scenario document.

    Every referenced constructor runs here, so invalid profiles, grids, or
    data fail before any solve starts.
    """
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"invalid JSON: {exc}") from exc
    _require_keys(doc, _TOP_KEYS, "scenario")
    exp = doc.get("experiment", experiment)
    if exp not in _EXPERIMENTS:
        raise ScenarioError(f"experiment must be one of {_EXPERIMENTS}, got {exp!r}")
    if experiment is not None and exp != experiment:
        raise ScenarioError(f"scenario declares {exp!r} but the command runs {experiment!r}")

    if "manifold" not in doc:
        raise ScenarioError("scenario needs a manifold")
    m = _build_manifold(doc["manifold"])

    grid_doc = doc.get("grid", {})
    _require_keys(grid_doc, {"R", "M"}, "grid")
    R = float(grid_doc.get("R", 4.0))
    M = int(grid_doc.get("M", 400))
    grid = make_grid(m, R, M)

    phi = None
    k_reg = None
    if "nonlinearity" in doc:
        nl_doc = dict(doc["nonlinearity"])
        _require_keys(nl_doc, {"kind", "exponent", "threshold", "expr",
                               "u_scale", "k_reg"}, "nonlinearity")
        k_reg = nl_doc.pop("k_reg", None)
        if k_reg is not None:
            k_reg = int(k_reg)
        try:
            phi = nonlinearity_from_spec(nl_doc)
        except (ValueError, KeyError) as exc:
            raise ScenarioError(f"bad nonlinearity: {exc}") from exc

    time_doc = doc.get("time", {})
    _require_keys(time_doc, {"h", "T", "output_stride"}, "time")
    h = float(time_doc["h"]) if "h" in time_doc else None
    T = float(time_doc["T"]) if "T" in time_doc else None
    stride = int(time_doc.get("output_stride", 1))
    if stride < 1:
        raise ScenarioError("output_stride must be >= 1")

    datum = _build_datum(doc["datum"], grid) if "datum" in doc else None

    tol_doc = doc.get("tolerances", {})
    _require_keys(tol_doc, {"tol_report", "ratio_tol", "nazarov_tol",
                            "monotone_tol"}, "tolerances")

    scan_doc = doc.get("scan", {})
    _require_keys(scan_doc, {"grid_size"}, "scan")
    tents_doc = doc.get("tents", {})
    _require_keys(tents_doc, {"a_count", "b_count"}, "tents")
    annuli = int(doc.get("annuli", 100))

    needs_flow = exp in ("concentration", "evolve")
    if needs_flow:
        if phi is None or datum is None or h is None or T is None:
            raise ScenarioError(f"{exp} needs nonlinearity, datum, and time {{h, T}}")

    return Scenario(exp, m, R, M, phi, k_reg, h, T, stride, datum,
                    dict(tol_doc), doc.get("r_hat"),
                    int(scan_doc.get("grid_size", 128)),
                    (int(tents_doc.get("a_count", 16)), int(tents_doc.get("b_count", 16))),
                    annuli, doc)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

@dataclass
class ConcentrationExperiment:
    times: list[float]
    reports: list[ConcentrationReport]
    trajectory: Trajectory
    trajectory_rearranged: Trajectory
    all_hold: bool


def run_concentration_experiment(s: Scenario, tol_scale: float = 1.0) -> ConcentrationExperiment:
    """Evolve a datum and its rearrangement side by side and compare.

    The rearranged branch is asserted to stay nodewise nonincreasing at
    every step (this holds on every model; losing it flags a solver bug as
    ExperimentInconsistent).  Margin reports are produced at the output
    stride, always including the final time.
    """
    if s.experiment != "concentration":
        raise ScenarioError("scenario is not a concentration experiment")
    u0 = s.datum
    ubar0 = schwarz_rearrangement(u0).f_star
    traj = evolve(s.manifold, s.grid_R, s.nonlinearity, u0, s.h, s.T, k_reg=s.k_reg)
    traj_bar = evolve(s.manifold, s.grid_R, s.nonlinearity, ubar0, s.h, s.T,
                      k_reg=s.k_reg)

    mono_tol = float(s.tolerances.get("monotone_tol", 1e-7)) * tol_scale \
        * (1.0 + float(np.max(u0.values)))
    for i, state in enumerate(traj_bar.states):
        if not is_nonincreasing(state, tol=mono_tol):
            raise ExperimentInconsistent(
                f"rearranged branch lost monotonicity at step {i}")

    N = len(traj.states) - 1
    idx = sorted(set(range(0, N + 1, s.output_stride)) | {N})
    tol_report = s.tolerances.get("tol_report")
    if tol_report is not None:
        tol_report = float(tol_report) * tol_scale
    reports = [concentration_compare(traj.states[i], traj_bar.states[i],
                                     tol_report=tol_report) for i in idx]
    all_hold = all(r.verdict == "holds" for r in reports)
    return ConcentrationExperiment([i * s.h for i in idx], reports, traj,
                                   traj_bar, all_hold)


@dataclass
class FalsificationExperiment:
    nazarov: NazarovResult
    search: ViolationSearch
    gap: object
    flow_times: list[float]
    flow_reports: list[ConcentrationReport]


def run_falsification_experiment(s: Scenario, tol_scale: float = 1.0) -> FalsificationExperiment:
    """Run the subadditivity scan, the tent-witness search, and the
    curvature coefficients; when a witness exists, evolve the flow from it
    (normalized) and report the margins descriptively."""
    if s.experiment != "falsify":
        raise ScenarioError("scenario is not a falsification experiment")
    naz = nazarov_check(s.manifold, s.scan_grid,
                        tol=s.tolerances.get("nazarov_tol"))
    fam = TentFamily(s.grid_R, s.grid_M, s.tent_counts[0], s.tent_counts[1])
    ratio_tol = float(s.tolerances.get("ratio_tol", 1e-6)) * tol_scale
    search = find_radial_violation(s.manifold, fam, tol=ratio_tol)
    gap = curvature_gap(s.manifold, s.r_hat if s.r_hat is not None else 1.0)

    flow_times: list[float] = []
    flow_reports: list[ConcentrationReport] = []
    if search.witness is not None and s.nonlinearity is not None \
            and s.h is not None and s.T is not None:
        w = search.witness
        peak = float(np.max(w.values))
        u0 = RadialFunction(w.grid, w.values / peak, nonneg=True)
        ubar0 = schwarz_rearrangement(u0).f_star
        traj = evolve(s.manifold, s.grid_R, s.nonlinearity, u0, s.h, s.T, k_reg=s.k_reg)
        traj_bar = evolve(s.manifold, s.grid_R, s.nonlinearity, ubar0, s.h, s.T,
                          k_reg=s.k_reg)
        N = len(traj.states) - 1
        idx = sorted(set(range(0, N + 1, s.output_stride)) | {N})
        flow_times = [i * s.h for i in idx]
        flow_reports = [concentration_compare(traj.states[i], traj_bar.states[i])
                        for i in idx]
    return FalsificationExperiment(naz, search, gap, flow_times, flow_reports)


# ---------------------------------------------------------------------------
# output emission
# ---------------------------------------------------------------------------

def emit_outputs(results: dict, out_dir, scenario: Scenario | None = None) -> list[str]:
    """Write tables as CSV plus a run manifest; returns the file list.

    ``results`` maps file stem -> (header row, iterable of rows).  Names are
    used as-is, so callers control the deterministic naming scheme.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise SchwarzflowError(f"cannot create output dir: {exc}") from exc
    t0 = time.time()
    written = []
    for stem, (header, rows) in results.items():
        path = out / f"{stem}.csv"
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(x) if not isinstance(x, str) else x
                                  for x in row) + "\n")
        written.append(path.name)
    manifest = {
        "tool": "schwarzflow",
        "version": __version__,
        "files": written,
        "scenario": scenario.raw if scenario is not None else None,
        "wall_time_s": time.time() - t0,
    }
    with open(out / "manifest.json", "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return written + ["manifest.json"]


def _margin_table(report: ConcentrationReport):
    header = ["r", "margin"]
    rows = zip(report.radii, report.margins)
    return header, rows


def _diagnostics_table(traj: Trajectory):
    d = traj.diagnostics
    header = ["step", "L1", "L2", "Linf", "dirichlet_energy_phi_u",
              "Phi_integral", "hminus1_rate"]
    rows = [(i, d["L1"][i], d["L2"][i], d["Linf"][i],
             d["dirichlet_energy_phi_u"][i], d["Phi_integral"][i],
             d["hminus1_rate"][i]) for i in range(len(d["L1"]))]
    return header, rows


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_manifold_info(s: Scenario, out_dir, args) -> int:
    m = s.manifold
    rs = np.linspace(s.grid_R / 64.0, s.grid_R * (1 - 1e-9), 64)
    rows = []
    for r in rs:
        c = curvatures(m, float(r))
        p0, p1, p2 = (float(x) for x in m.psi(float(r)))
        rows.append((r, p0, p1, p2, c["K_rad"], c["K_perp"], c["Ric_rad"],
                     c["Ric_perp"], c["S"]))
    tables = {"manifold_000": (["r", "psi", "dpsi", "d2psi", "K_rad", "K_perp",
                                "Ric_rad", "Ric_perp", "S"], rows)}
    if out_dir:
        emit_outputs(tables, out_dir, s)
    parab = "compact" if np.isfinite(m.R_dom) else is_parabolic(m)
    total = m.total_volume
    print(f"kind={m.kind} n={m.n} omega_n={_fmt(m.omega_n)} "
          f"R_dom={m.R_dom} recurrence={parab} "
          f"total_volume={_fmt(total) if np.isfinite(total) else 'inf'} "
          f"V(B_R)={_fmt(volume_ball(m, s.grid_R))}")
    return 0


def _cmd_rearrange(s: Scenario, out_dir, args) -> int:
    if s.datum is None:
        raise ScenarioError("rearrange needs a datum")
    res = schwarz_rearrangement(s.datum)
    tables = {
        "rearrange_000": (["r", "value"],
                          zip(s.datum.grid.nodes, res.f_star.values)),
        "rearrange_profile": (["s", "value"],
                              zip(res.f_star_1d.breakpoints[:-1],
                                  res.f_star_1d.values)),
    }
    if out_dir:
        emit_outputs(tables, out_dir, s)
    print(f"rearranged: sup={_fmt(np.max(res.f_star.values))} "
          f"support_volume={_fmt(res.f_star_1d.breakpoints[-1])}")
    return 0


def _cmd_polya_check(s: Scenario, out_dir, args) -> int:
    rng = np.random.default_rng(args.seed)
    naz = nazarov_check(s.manifold, s.scan_grid,
                        tol=s.tolerances.get("nazarov_tol"))
    ok = naz.passed
    annuli_rows = []
    r_hi = s.grid_R * 0.95
    for _ in range(s.annuli_count):
        a = float(rng.uniform(0.0, 0.8 * r_hi))
        b = float(rng.uniform(a + 0.05 * r_hi, r_hi))
        slack = annulus_isoperimetric_check(s.manifold, a, b)
        annuli_rows.append((a, b, slack))
        if slack < -1e-8 * (1.0 + abs(slack)):
            ok = False
    rows_ratio = []
    if s.datum is not None:
        verdict = radial_polya_ratio(
            s.manifold, s.datum,
            tol=float(s.tolerances.get("ratio_tol", 1e-6)) * args.tol_scale)
        rows_ratio.append((verdict.energy_original, verdict.energy_rearranged,
                           verdict.ratio, "holds" if verdict.holds else "fails"))
        ok = ok and verdict.holds
    tables = {
        "polya_check_nazarov": (["mu", "nu", "slack"],
                                zip(naz.mu, naz.nu, naz.slack)),
        "polya_check_annuli": (["a", "b", "slack"], annuli_rows),
    }
    if rows_ratio:
        tables["polya_check_ratio"] = (
            ["energy_original", "energy_rearranged", "ratio", "verdict"],
            rows_ratio)
    if out_dir:
        emit_outputs(tables, out_dir, s)
    print(f"nazarov={naz.verdict} worst_slack={_fmt(naz.worst_slack)} "
          f"annuli_checked={len(annuli_rows)} ok={ok}")
    return 0 if ok else 2


def _cmd_polya_falsify(s: Scenario, out_dir, args) -> int:
    res = run_falsification_experiment(s, tol_scale=args.tol_scale)
    tables = {
        "falsify_nazarov": (["mu", "nu", "slack"],
                            zip(res.nazarov.mu, res.nazarov.nu, res.nazarov.slack)),
        "falsify_witness": (["a", "b", "ratio"], res.search.records),
        "falsify_gap": (["S_o", "S_hat", "coeff_original", "coeff_lowerbound",
                         "gap", "mm1_correction", "gap_expansion"],
                        [(res.gap.S_o, res.gap.S_hat, res.gap.coeff_original,
                          res.gap.coeff_lowerbound, res.gap.gap,
                          res.gap.mm1_correction, res.gap.gap_expansion)]),
    }
    for k, rep in enumerate(res.flow_reports):
        tables[f"falsify_flow_{k:03d}"] = _margin_table(rep)
    if out_dir:
        emit_outputs(tables, out_dir, s)
    found = res.search.witness is not None
    print(f"nazarov={res.nazarov.verdict} witness={'yes' if found else 'no'} "
          f"best_ratio={_fmt(res.search.best_ratio)} gap={_fmt(res.gap.gap)} "
          f"gap_expansion={_fmt(res.gap.gap_expansion)}")
    return 0


def _cmd_elliptic_solve(s: Scenario, out_dir, args) -> int:
    if s.datum is None:
        raise ScenarioError("elliptic solve needs a datum (the source term)")
    if s.nonlinearity is not None and s.h is not None:
        from .elliptic import beta_from_phi, _prepare_phi
        beta = beta_from_phi(_prepare_phi(s.nonlinearity, s.k_reg), s.h)
    else:
        beta = zero_beta()
    sol: EllipticSolution = solve_semilinear(s.manifold, s.grid_R, beta, s.datum)
    tables = {"elliptic_000": (["r", "v", "residual"],
                               zip(sol.v.grid.nodes, sol.v.values,
                                   sol.residual_profile))}
    if out_dir:
        emit_outputs(tables, out_dir, s)
    print(f"alpha={_fmt(sol.alpha)} residual={_fmt(sol.residual)} "
          f"scale={_fmt(sol.residual_scale)} iterations={sol.iterations}")
    ok = sol.residual <= 1e-6 * sol.residual_scale * args.tol_scale
    return 0 if ok else 2


def _cmd_evolve(s: Scenario, out_dir, args) -> int:
    traj = evolve(s.manifold, s.grid_R, s.nonlinearity, s.datum, s.h, s.T,
                  k_reg=s.k_reg)
    N = len(traj.states) - 1
    idx = sorted(set(range(0, N + 1, s.output_stride)) | {N})
    tables = {}
    for k, i in enumerate(idx):
        tables[f"evolve_{k:03d}"] = (["r", "u"],
                                     zip(traj.states[i].grid.nodes,
                                         traj.states[i].values))
    tables["evolve_diagnostics"] = _diagnostics_table(traj)
    if out_dir:
        emit_outputs(tables, out_dir, s)
    print(f"steps={N} final_L1={_fmt(traj.diagnostics['L1'][-1])} "
          f"final_Linf={_fmt(traj.diagnostics['Linf'][-1])}")
    return 0


def _cmd_concentration(s: Scenario, out_dir, args) -> int:
    res = run_concentration_experiment(s, tol_scale=args.tol_scale)
    tables = {}
    for k, rep in enumerate(res.reports):
        tables[f"concentration_{k:03d}"] = _margin_table(rep)
    tables["concentration_diagnostics"] = _diagnostics_table(res.trajectory)
    if out_dir:
        emit_outputs(tables, out_dir, s)
    worst = min(r.min_margin for r in res.reports)
    print(f"outputs={len(res.reports)} worst_margin={_fmt(worst)} "
          f"all_hold={res.all_hold}")
    return 0 if res.all_hold else 2


_COMMANDS = {
    "manifold_info": ("manifold_info", _cmd_manifold_info),
    "rearrange": ("rearrange", _cmd_rearrange),
    "polya_check": ("polya_check", _cmd_polya_check),
    "polya_falsify": ("falsify", _cmd_polya_falsify),
    "elliptic_solve": ("elliptic", _cmd_elliptic_solve),
    "evolve": ("evolve", _cmd_evolve),
    "concentration": ("concentration", _cmd_concentration),
}


def _run_one(key: str, config: str, out_dir, args) -> int:
    experiment, fn = _COMMANDS[key]
    scenario = load_scenario(config, experiment)
    return fn(scenario, out_dir, args)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="schwarzflow",
        description="Rearrangement and nonlinear-diffusion experiments on "
                    "rotationally symmetric model geometries.")
    parser.add_argument("--jobs", type=int, default=1,
                        help="run multiple --config scenarios concurrently")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for randomized property sweeps")
    parser.add_argument("--tol-scale", dest="tol_scale", type=float, default=1.0,
                        help="global multiplier applied to verdict tolerances")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, key, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", action="append", required=True,
                       help="scenario JSON (repeatable)")
        p.add_argument("--out", default=None, help="output directory")
        p.set_defaults(key=key)
        return p

    man = sub.add_parser("manifold", help="geometry commands")
    man_sub = man.add_subparsers(dest="subcommand", required=True)
    mi = man_sub.add_parser("info", help="profile, curvature, and volume summary")
    mi.add_argument("--config", action="append", required=True)
    mi.add_argument("--out", default=None)
    mi.set_defaults(key="manifold_info")

    pol = sub.add_parser("polya", help="energy-inequality commands")
    pol_sub = pol.add_subparsers(dest="subcommand", required=True)
    pc = pol_sub.add_parser("check", help="subadditivity scan and annulus sweep")
    pc.add_argument("--config", action="append", required=True)
    pc.add_argument("--out", default=None)
    pc.set_defaults(key="polya_check")
    pf = pol_sub.add_parser("falsify", help="witness search and curvature gap")
    pf.add_argument("--config", action="append", required=True)
    pf.add_argument("--out", default=None)
    pf.set_defaults(key="polya_falsify")

    ell = sub.add_parser("elliptic", help="elliptic commands")
    ell_sub = ell.add_subparsers(dest="subcommand", required=True)
    es = ell_sub.add_parser("solve", help="one radial Dirichlet solve")
    es.add_argument("--config", action="append", required=True)
    es.add_argument("--out", default=None)
    es.set_defaults(key="elliptic_solve")

    add("rearrange", "rearrange", "rearrange a datum")
    add("evolve", "evolve", "implicit-Euler evolution")
    add("concentration", "concentration", "side-by-side concentration run")

    args = parser.parse_args(argv)

    configs = args.config
    try:
        if args.jobs > 1 and len(configs) > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                codes = list(pool.map(
                    lambda cfg: _run_one(args.key, cfg, args.out, args), configs))
        else:
            codes = [_run_one(args.key, cfg, args.out, args) for cfg in configs]
    except SchwarzflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    return max(codes) if codes else 0


if __name__ == "__main__":
    sys.exit(main())
