"""Command-line driver: declarative configs in, files + reports out.

Verbs: spectrum, branch, evolve, decompose, probe, fit, suite.  Each stage
writes its outputs plus a manifest entry (config hash, package version,
backend, timing); a stage whose outputs already match the config hash is
skipped.  Physical parameters carry no silent defaults: a missing field is
a hard config error naming the field.

Exit codes: 0 ok, 2 config error, 3 numeric failure, 4 acceptance failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from . import __version__, kernels
from .decay import DecayTrace, classify, fit_exponent, verify_exponent_curve, verify_decay_bounds
from .errors import ConfigError, RadnlsError
from .evolution import AbsorberSpec, EvolutionConfig, evolve, sample_localized_fields
from .grid import GridSpec, RadialField, lp_norm
from .hamiltonian import (PotentialSpec, probe_linear_decay, project_continuous,
                          solve_ground_eigenpair)
from .manifold import BoundStateBranch, continue_branch
from .modulation import analyze_run, asymptotic_report
from .nonlinearity import NonlinearitySpec
from .propagator import (LinearizationPath, probe_decay, probe_t_short_time,
                         standard_probe_plan)
from .storage import save_field, save_json, save_table_csv

STAGES = ("spectrum", "branch", "evolve", "decompose", "probe", "fit")


def _need(cfg: dict, key: str, ctx: str):
    if key not in cfg:
        raise ConfigError(f"missing required field '{ctx}.{key}'")
    return cfg[key]


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path} is not a mapping")
    return cfg


def config_hash(cfg: dict, *sections: str) -> str:
    payload = {s: cfg.get(s) for s in sections}
    text = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


class Workspace:
    """Output directory with a manifest of stage products."""

    def __init__(self, out_dir, config):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.config = config
        self.manifest_path = self.dir / "manifest.json"
        if self.manifest_path.exists():
            self.manifest = json.loads(self.manifest_path.read_text())
        else:
            self.manifest = {"version": __version__, "stages": {}}

    def fresh(self, stage: str, h: str) -> bool:
        entry = self.manifest["stages"].get(stage)
        if entry is None or entry.get("hash") != h:
            return False
        return all((self.dir / f).exists() for f in entry["outputs"])

    def record(self, stage: str, h: str, outputs: list[str], seconds: float):
        self.manifest["stages"][stage] = {
            "hash": h, "outputs": outputs, "seconds": round(seconds, 3),
            "version": __version__, "backend": kernels.BACKEND,
        }
        self.manifest_path.write_text(json.dumps(self.manifest, indent=2,
                                                 sort_keys=True) + "\n")


def _grid(cfg) -> GridSpec:
    g = _need(cfg, "grid", "config")
    return GridSpec(int(_need(g, "dim", "grid")),
                    float(_need(g, "r_max", "grid")),
                    int(_need(g, "points", "grid")))


def _potential(cfg) -> PotentialSpec:
    p = _need(cfg, "potential", "config")
    return PotentialSpec(_need(p, "form", "potential"),
                         float(_need(p, "depth", "potential")),
                         float(_need(p, "width", "potential")))


def _nonlinearity(cfg, dim) -> NonlinearitySpec:
    n = _need(cfg, "nonlinearity", "config")
    terms = _need(n, "terms", "nonlinearity")
    return NonlinearitySpec.from_config(terms, dim)


def _absorber(ecfg) -> AbsorberSpec:
    a = _need(ecfg, "absorber", "evolution")
    return AbsorberSpec(float(_need(a, "r_start", "absorber")),
                        float(_need(a, "strength", "absorber")),
                        int(_need(a, "power", "absorber")),
                        float(_need(a, "t_reliable", "absorber")))


def stage_spectrum(ws: Workspace):
    cfg = ws.config
    h = config_hash(cfg, "grid", "potential")
    if ws.fresh("spectrum", h):
        return
    t0 = time.perf_counter()
    sd = solve_ground_eigenpair(_potential(cfg), _grid(cfg))
    save_field(ws.dir / "psi0.npz", sd.psi0)
    save_json(ws.dir / "spectrum.json", {
        "e0": sd.e0, "residual": sd.residual,
        "second_eigenvalue": sd.second_eigenvalue,
    })
    ws.record("spectrum", h, ["psi0.npz", "spectrum.json"],
              time.perf_counter() - t0)


def _load_spectral(ws: Workspace):
    return solve_ground_eigenpair(_potential(ws.config), _grid(ws.config))


def stage_branch(ws: Workspace):
    cfg = ws.config
    h = config_hash(cfg, "grid", "potential", "nonlinearity", "branch")
    if ws.fresh("branch", h):
        return
    t0 = time.perf_counter()
    sd = _load_spectral(ws)
    b = _need(cfg, "branch", "config")
    branch = continue_branch(sd, _nonlinearity(cfg, sd.grid.dim),
                             float(_need(b, "a_max", "branch")),
                             int(_need(b, "steps", "branch")),
                             tol=float(b.get("tol", 1e-11)))
    branch.save(ws.dir / "branch.npz")
    ws.record("branch", h, ["branch.npz"], time.perf_counter() - t0)


def _load_branch(ws: Workspace) -> BoundStateBranch:
    path = ws.dir / "branch.npz"
    if not path.exists():
        stage_branch(ws)
    return BoundStateBranch.load(path)


def _initial_field(ws: Workspace, branch: BoundStateBranch) -> RadialField:
    cfg = ws.config
    icfg = _need(cfg, "initial_data", "config")
    kind = _need(icfg, "kind", "initial_data")
    grid = branch.grid
    sd = branch.spectral
    seed = int(cfg.get("seed", 0))
    if kind == "file":
        from .storage import load_field
        return load_field(_need(icfg, "path", "initial_data"))
    r_support = (branch.grid.r_max / 4 if "absorber" not in cfg.get("evolution", {})
                 else _absorber(cfg["evolution"]).r_start / 4)
    fld = sample_localized_fields(grid, 1, r_support,
                                  width=float(_need(icfg, "seed_width", "initial_data")),
                                  seed=seed)[0]
    fld = project_continuous(sd, fld)
    amp = float(_need(icfg, "seed_l2", "initial_data"))
    n2 = lp_norm(fld, 2)
    vals = (amp / n2) * fld.values if n2 > 0 else fld.values
    if kind == "pure_radiation":
        return RadialField(grid, vals)
    if kind == "bound_state_plus_seed":
        a0 = float(_need(icfg, "a0", "initial_data"))
        psi, _ = branch.eval(a0)
        return RadialField(grid, psi.values + vals)
    raise ConfigError(f"unknown initial_data.kind '{kind}'")


def stage_evolve(ws: Workspace):
    cfg = ws.config
    h = config_hash(cfg, "grid", "potential", "nonlinearity", "branch",
                    "evolution", "initial_data", "seed")
    if ws.fresh("evolve", h):
        return
    t0 = time.perf_counter()
    branch = _load_branch(ws)
    ecfg = _need(cfg, "evolution", "config")
    evo = EvolutionConfig(
        dt=float(_need(ecfg, "dt", "evolution")),
        t_final=float(_need(ecfg, "t_final", "evolution")),
        absorber=_absorber(ecfg),
        scheme=ecfg.get("scheme", "strang_split"),
        frame_stride=int(_need(ecfg, "frame_stride", "evolution")))
    u0 = _initial_field(ws, branch)
    store_every = int(ecfg.get("store_fields_every", 0))
    p_list = [float(p) for p in cfg.get("analysis", {}).get("p_list", [])]
    r_cut = evo.absorber.r_start
    times, masses, energies = [], [], []
    p_norms = {p: [] for p in p_list}
    stored_t, stored_u = [], []
    for k, fr in enumerate(evolve(u0, branch.spectral.potential, branch.g, evo)):
        times.append(fr.t)
        masses.append(fr.mass)
        energies.append(fr.energy)
        for p in p_list:
            p_norms[p].append(lp_norm(fr.u, p, r_cut=r_cut))
        if store_every and k % store_every == 0:
            stored_t.append(fr.t)
            stored_u.append(fr.u.values)
    cols = {"t": np.array(times), "mass": np.array(masses),
            "energy": np.array(energies)}
    for p in p_list:
        cols[f"u_l{p:g}"] = np.array(p_norms[p])
    save_table_csv(ws.dir / "trajectory.csv", cols)
    np.savez(ws.dir / "frames.npz", t=np.array(stored_t),
             u=np.array(stored_u) if stored_u else np.zeros((0, branch.grid.m)),
             dim=branch.grid.dim, r_max=branch.grid.r_max, m=branch.grid.m)
    outputs = ["trajectory.csv", "frames.npz"]
    ws.record("evolve", h, outputs, time.perf_counter() - t0)


def stage_decompose(ws: Workspace):
    cfg = ws.config
    h = config_hash(cfg, "grid", "potential", "nonlinearity", "branch",
                    "evolution", "initial_data", "analysis", "seed")
    if ws.fresh("decompose", h):
        return
    t0 = time.perf_counter()
    branch = _load_branch(ws)
    acfg = _need(cfg, "analysis", "config")
    ecfg = _need(cfg, "evolution", "config")
    evo = EvolutionConfig(
        dt=float(_need(ecfg, "dt", "evolution")),
        t_final=float(_need(ecfg, "t_final", "evolution")),
        absorber=_absorber(ecfg),
        scheme=ecfg.get("scheme", "strang_split"),
        frame_stride=int(_need(ecfg, "frame_stride", "evolution")))
    u0 = _initial_field(ws, branch)
    p_list = [float(p) for p in _need(acfg, "p_list", "analysis")]
    if 2.0 not in p_list:
        p_list = [2.0] + p_list
    sigma = float(_need(acfg, "sigma", "analysis"))
    frames = evolve(u0, branch.spectral.potential, branch.g, evo)
    trace = analyze_run(frames, branch, branch.g, p_list, sigma,
                        r_cut=evo.absorber.r_start)
    cols = {"t": trace.times, "re_a": trace.a.real, "im_a": trace.a.imag,
            "abs_a": np.abs(trace.a), "e": trace.e,
            "orth_residual": trace.orth_residual}
    for p in p_list:
        cols[f"r_l{p:g}"] = trace.r_norms[p]
    cols["ode_residual"] = trace.ode_residual
    save_table_csv(ws.dir / "modulation.csv", cols)
    rep = asymptotic_report(trace, branch)
    save_json(ws.dir / "asymptotic.json", rep.as_dict())
    ws.record("decompose", h, ["modulation.csv", "asymptotic.json"],
              time.perf_counter() - t0)


def stage_probe(ws: Workspace):
    cfg = ws.config
    h = config_hash(cfg, "grid", "potential", "nonlinearity", "branch",
                    "probes", "seed")
    if ws.fresh("probe", h):
        return
    t0 = time.perf_counter()
    pcfg = _need(cfg, "probes", "config")
    branch = _load_branch(ws)
    dim = branch.grid.dim
    sigma = float(_need(pcfg, "sigma", "probes"))
    p1 = float(_need(pcfg, "p1", "probes"))
    q2 = float(_need(pcfg, "q2", "probes"))
    absorber = _absorber(_need(cfg, "evolution", "config"))
    mode = pcfg.get("mode", "frozen")
    if mode == "frozen":
        path = LinearizationPath(branch, "frozen",
                                 a0=float(_need(pcfg, "path_amplitude", "probes")))
    else:
        raise ConfigError("probe stage drives frozen paths; shadowing probes "
                          "run through the library API")
    plan = standard_probe_plan(dim, sigma, p1, q2)
    res = probe_decay(path, 0.0, plan,
                      samples=int(_need(pcfg, "samples", "probes")),
                      t_final=float(_need(pcfg, "t_final", "probes")),
                      dt=float(_need(pcfg, "dt", "probes")),
                      sigma=sigma, absorber=absorber,
                      sample_dt=float(pcfg.get("sample_dt", 0.5)),
                      seed=int(cfg.get("seed", 0)))

    def space_name(tag):
        kind, par = tag
        if kind == "l2":
            return "L2"
        return {"l2sigma": f"L2_{par:g}", "l2msigma": f"L2_-{par:g}",
                "dual": f"L{par / (par - 1):g}", "lp": f"L{par:g}"}[kind]

    with open(ws.dir / "propagator_probes.csv", "w", newline="") as fh:
        import csv as _csv
        w = _csv.writer(fh)
        w.writerow(["operator", "source", "target", "dt", "ratio"])
        for pair in plan:
            tr = res.traces[pair["key"]]
            for t, val in zip(tr.times, tr.values):
                w.writerow([pair["operator"], space_name(pair["source"]),
                            space_name(pair["target"]), repr(float(t)),
                            repr(float(val))])
    save_table_csv(ws.dir / "t_weighted_sq_integral.csv",
                   {"t": res.times,
                    "integral": res.t_weighted_sq_integral})

    fits = {}
    window = tuple(pcfg.get("fit_window", (2.0, float(_need(pcfg, "t_final", "probes")))))
    for key, tr in res.traces.items():
        try:
            fits[key] = fit_exponent(tr, window=window).as_dict()
        except RadnlsError as exc:
            fits[key] = {"error": str(exc)}
    st = pcfg.get("short_time")
    outputs = ["propagator_probes.csv", "t_weighted_sq_integral.csv",
               "propagator_fits.json"]
    if st:
        taus = [float(x) for x in _need(st, "taus", "probes.short_time")]
        trace = probe_t_short_time(path, 0.0, q2, taus,
                                   samples=int(st.get("samples", 6)),
                                   dt=float(_need(st, "dt", "probes.short_time")),
                                   seed=int(cfg.get("seed", 0)))
        save_table_csv(ws.dir / "t_short_time.csv",
                       {"tau": trace.times, "ratio": trace.values})
        slope = float(np.polyfit(np.log(trace.times), np.log(trace.values), 1)[0])
        fits["t_short_time"] = {"slope": slope,
                                "predicted": -(dim * (1 - 2 / q2) - 1)}
        outputs.append("t_short_time.csv")
    save_json(ws.dir / "propagator_fits.json",
              {"sup_l2_ratio": res.sup_l2_ratio, "psi0_drift": res.psi0_drift,
               "fits": fits})
    ws.record("probe", h, outputs, time.perf_counter() - t0)


def stage_fit(ws: Workspace) -> bool:
    """Fit the decomposition trace against the classified predictions.
    Returns True when every gated clause passes."""
    cfg = ws.config
    h = config_hash(cfg, "grid", "potential", "nonlinearity", "branch",
                    "evolution", "initial_data", "analysis", "seed")
    t0 = time.perf_counter()
    from .storage import load_table_csv
    if not (ws.dir / "modulation.csv").exists():
        stage_decompose(ws)
    table = load_table_csv(ws.dir / "modulation.csv")
    acfg = _need(cfg, "analysis", "config")
    nl = _nonlinearity(cfg, _grid(cfg).dim)
    cls = classify(_grid(cfg).dim, nl.alpha1, nl.alpha2)
    window = tuple(float(x) for x in _need(acfg, "fit_window", "analysis"))

    class _NormColumns(dict):
        """Float-keyed lookup tolerant of CSV column-name rounding."""

        def __missing__(self, p):
            for k in self:
                if abs(k - p) < 1e-6 * max(1.0, abs(p)):
                    return self[k]
            raise KeyError(p)

    class _TraceView:
        pass

    tv = _TraceView()
    tv.times = table["t"]
    tv.r_norms = _NormColumns({float(k[3:]): v for k, v in table.items()
                               if k.startswith("r_l")})
    reports = verify_decay_bounds(tv, cls, window,
                                    tol_exponent=float(acfg.get("tol_exponent", 0.3)))
    curve = None
    p_curve = acfg.get("p_curve")
    if p_curve:
        curve = verify_exponent_curve(tv, cls, [float(p) for p in p_curve],
                                      window)
    payload = {
        "classification": cls.as_dict(),
        "clauses": [r.as_dict() for r in reports],
        "curve": curve,
        "passed": all(r.passed for r in reports)
                  and (curve is None or curve["passed"]),
    }
    save_json(ws.dir / "decay_report.json", payload)
    ws.record("fit", h, ["decay_report.json"], time.perf_counter() - t0)
    return bool(payload["passed"])


def run_stages(cfg: dict, out_dir, stages=None) -> int:
    ws = Workspace(out_dir, cfg)
    wanted = stages or list(STAGES)
    ok = True
    for st in wanted:
        if st == "spectrum":
            stage_spectrum(ws)
        elif st == "branch":
            stage_branch(ws)
        elif st == "evolve":
            stage_evolve(ws)
        elif st == "decompose":
            stage_decompose(ws)
        elif st == "probe":
            stage_probe(ws)
        elif st == "fit":
            ok = stage_fit(ws) and ok
        else:
            raise ConfigError(f"unknown stage '{st}'")
    return 0 if ok else 4


def cmd_suite(matrix_path, out_dir, stages=None) -> int:
    """Run a list of configs; aggregate pass/fail; failures do not abort."""
    matrix = load_config(matrix_path)
    runs = _need(matrix, "runs", "suite")
    out_root = Path(out_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    results = []
    worst = 0
    for entry in runs:
        name = _need(entry, "name", "suite.run")
        cfg_path = Path(matrix_path).parent / _need(entry, "config", "suite.run")
        try:
            cfg = load_config(cfg_path)
            code = run_stages(cfg, out_root / name,
                              stages or entry.get("stages"))
            results.append({"name": name, "exit": code})
            worst = max(worst, code)
        except ConfigError as exc:
            results.append({"name": name, "exit": 2, "error": str(exc)})
            worst = max(worst, 2)
        except Exception as exc:  # individual failures collected, suite continues
            results.append({"name": name, "exit": 3,
                            "error": f"{type(exc).__name__}: {exc}"})
            worst = max(worst, 3)
    save_json(out_root / "suite_report.json",
              {"runs": results, "total": len(results),
               "failed": sum(1 for r in results if r["exit"] != 0)})
    return worst


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="radnls",
        description="radial NLS laboratory: branches, evolution, decay probes")
    parser.add_argument("verb", choices=list(STAGES) + ["suite"])
    parser.add_argument("--config", required=True, help="YAML config path")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--stage", action="append", default=None,
                        help="restrict pipeline stages (repeatable)")
    args = parser.parse_args(argv)

    try:
        if args.verb == "suite":
            return cmd_suite(args.config, args.out, args.stage)
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        return run_stages(cfg, args.out, args.stage or [args.verb])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RadnlsError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
