"""Experiment harness: config-driven studies with CSV/JSON artifacts.

Each subcommand reads a strict JSON config (unknown keys are rejected —
a typo in a physics parameter must fail loudly), runs one study at the
configured scale, and writes deterministic artifacts: a compilation
report, cost-trace and comparison CSVs, the final circuit, and a manifest
carrying the config hash and package version.

Exit codes: 0 success, 2 config error, 3 compute error.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import click
import numpy as np

from . import __version__
from .compile import (
    CostSpec,
    evaluate_cost,
    optimize,
    report_to_json,
    report_trace_csv,
    su4_circuit_from,
)
from .evolve import (
    energy_density,
    evolve_state,
    ground_state,
    make_training_set,
)
from .ftcount import TCountModel, frontier
from .gates import (
    ParamCircuit,
    circuit_from_json,
    circuit_to_json,
    identity_circuit,
    merge_adjacent_layers,
)
from .imps import local_fidelity, normalize, product_imps
from .models import (
    TrotterSpec,
    UnitCellHamiltonian,
    tfim,
    tfim_energy_density_exact,
    thirring,
    trotter_circuit,
    trotter_zz_x_circuit,
    xxz,
)
from .finite import cost_finite

__all__ = ["main", "fit_decay", "load_config", "ConfigError"]

NUM_FMT = "%.12e"


class ConfigError(ValueError):
    """Invalid experiment configuration (reported with field paths)."""


class ComputeError(RuntimeError):
    """A failure inside a compute stage, annotated with the stage name."""


# ---------------------------------------------------------------------------
# config handling


def _validate(obj, schema, path=""):
    """Strict schema check: required keys, types, no unknown keys."""
    if not isinstance(obj, dict):
        raise ConfigError(f"{path or 'config'}: expected an object")
    out = {}
    for key, spec in schema.items():
        sub_path = f"{path}.{key}" if path else key
        if key not in obj:
            if spec.get("required", False):
                raise ConfigError(f"{sub_path}: missing required key")
            if "schema" in spec:
                out[key] = _validate({}, spec["schema"], sub_path)
            else:
                out[key] = spec.get("default")
            continue
        val = obj[key]
        if "schema" in spec:
            out[key] = _validate(val, spec["schema"], sub_path)
            continue
        typ = spec.get("type")
        if typ is float and isinstance(val, int):
            val = float(val)
        if typ is not None and not isinstance(val, typ):
            raise ConfigError(f"{sub_path}: expected {typ.__name__}, got {type(val).__name__}")
        check = spec.get("check")
        if check is not None and not check(val):
            raise ConfigError(f"{sub_path}: value {val!r} out of range")
        out[key] = val
    for key in obj:
        if key not in schema:
            raise ConfigError(f"{path + '.' if path else ''}{key}: unknown key")
    return out


_MODEL_SCHEMA = {
    "name": {"type": str, "required": True, "check": lambda v: v in ("tfim", "xxz", "thirring")},
    "params": {"schema": {
        "J": {"type": float, "default": 1.0},
        "h": {"type": float, "default": 1.0},
        "Jx": {"type": float, "default": 1.0},
        "Jz": {"type": float, "default": 0.5},
        "m": {"type": float, "default": 0.8},
        "g": {"type": float, "default": 0.4},
        "a": {"type": float, "default": 1.0},
    }},
}

_OPT_SCHEMA = {"schema": {
    "maxIter": {"type": int, "default": 200, "check": lambda v: v >= 1},
    "gradTol": {"type": float, "default": 1e-9},
    "costTol": {"type": float, "default": 1e-12},
    "h": {"type": float, "default": 1e-7, "check": lambda v: v > 0},
    "evalChiMax": {"type": int, "default": 128, "check": lambda v: v >= 1},
    "testEvery": {"type": int, "default": 1, "check": lambda v: v >= 1},
}}

_INITIAL_SCHEMA = {"schema": {
    "vecA": {"type": list, "default": [1.0, 0.0]},
    "vecB": {"type": list, "default": [1.0, 0.0]},
}}

_EVOLVE_SCHEMA = {"schema": {
    "chiMax": {"type": int, "default": 128, "check": lambda v: v >= 1},
    "tol": {"type": float, "default": 1e-10},
}}

SCHEMAS: Dict[str, dict] = {
    "ground-state": {
        "experiment": {"type": str, "default": "ground-state"},
        "model": {"schema": _MODEL_SCHEMA, "required": True},
        "depths": {"type": list, "required": True},
        "gsChiMax": {"type": int, "default": 64},
        "fitLmin": {"type": int, "default": 2},
        "optimize": _OPT_SCHEMA,
        "seed": {"type": int, "default": 0},
    },
    "state-evolution": {
        "initialState": _INITIAL_SCHEMA,
        "experiment": {"type": str, "default": "state-evolution"},
        "model": {"schema": _MODEL_SCHEMA, "required": True},
        "t": {"type": float, "required": True},
        "depth": {"type": int, "required": True, "check": lambda v: v >= 1},
        "evolve": _EVOLVE_SCHEMA,
        "optimize": _OPT_SCHEMA,
        "seed": {"type": int, "default": 0},
    },
    "unitary-compress": {
        "experiment": {"type": str, "default": "unitary-compress"},
        "model": {"schema": _MODEL_SCHEMA, "required": True},
        "t": {"type": float, "required": True},
        "depth": {"type": int, "required": True, "check": lambda v: v >= 1},
        "nTrain": {"type": int, "default": 4, "check": lambda v: v >= 1},
        "nTest": {"type": int, "default": 4, "check": lambda v: v >= 1},
        "chiTrain": {"type": int, "default": 2, "check": lambda v: v >= 1},
        "evolve": _EVOLVE_SCHEMA,
        "optimize": _OPT_SCHEMA,
        "seed": {"type": int, "default": 0},
    },
    "tcount": {
        "initialState": _INITIAL_SCHEMA,
        "experiment": {"type": str, "default": "tcount"},
        "model": {"schema": _MODEL_SCHEMA, "required": True},
        "t": {"type": float, "required": True},
        "trotterNumbers": {"type": list, "default": [1, 2, 3, 4]},
        "epsExponents": {"type": list, "default": [-2.0, -2.5, -3.0, -3.5, -4.0, -4.5,
                                                   -5.0, -5.5, -6.0, -6.5, -7.0]},
        "modelSlope": {"type": float, "default": 3.0},
        "modelOffset": {"type": float, "default": 4.0},
        "evolve": _EVOLVE_SCHEMA,
        "optimize": _OPT_SCHEMA,
        "seed": {"type": int, "default": 0},
    },
    "finite-validate": {
        "initialState": _INITIAL_SCHEMA,
        "experiment": {"type": str, "default": "finite-validate"},
        "model": {"schema": _MODEL_SCHEMA, "required": True},
        "t": {"type": float, "required": True},
        "depth": {"type": int, "required": True, "check": lambda v: v >= 1},
        "qubitCounts": {"type": list, "default": [8, 10, 12]},
        "haarSamples": {"type": int, "default": 8, "check": lambda v: v >= 1},
        "circuitFile": {"type": str, "default": None},
        "evolve": _EVOLVE_SCHEMA,
        "optimize": _OPT_SCHEMA,
        "seed": {"type": int, "default": 0},
    },
    "generalization": {
        "experiment": {"type": str, "default": "generalization"},
        "model": {"schema": _MODEL_SCHEMA, "required": True},
        "t": {"type": float, "required": True},
        "depth": {"type": int, "required": True, "check": lambda v: v >= 1},
        "nTrainValues": {"type": list, "default": [1, 2, 3, 4]},
        "chiTrainValues": {"type": list, "default": [1, 2]},
        "nTest": {"type": int, "default": 4, "check": lambda v: v >= 1},
        "evolve": _EVOLVE_SCHEMA,
        "optimize": _OPT_SCHEMA,
        "seed": {"type": int, "default": 0},
    },
}


def load_config(path: str, experiment: str) -> dict:
    try:
        with open(path) as f:
            raw = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    cfg = _validate(raw, SCHEMAS[experiment])
    if cfg["experiment"] != experiment:
        raise ConfigError(f"experiment: config says {cfg['experiment']!r}, "
                          f"subcommand is {experiment!r}")
    return cfg


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def build_initial(block: dict):
    return product_imps(block["vecA"], block["vecB"])


def build_model(block: dict) -> UnitCellHamiltonian:
    p = block["params"]
    if block["name"] == "tfim":
        return tfim(p["J"], p["h"])
    if block["name"] == "xxz":
        return xxz(p["Jx"], p["Jz"])
    return thirring(p["m"], p["g"], p["a"])


# ---------------------------------------------------------------------------
# shared analysis / output helpers


def fit_decay(series: Sequence[Tuple[float, float]], lmin: float) -> Tuple[float, float]:
    """Exponential decay constant from a log-linear least-squares fit.

    Fits log(value) = c - alpha*L over points with L >= lmin; returns
    (alpha, mean squared residual of the fit in log space).
    """
    pts = [(L, v) for (L, v) in series if L >= lmin]
    if len(pts) < 2:
        raise ValueError("need at least two points with L >= lmin")
    if any(v <= 0 for _, v in pts):
        raise ValueError("decay fit requires positive values")
    ls = np.array([p[0] for p in pts], dtype=float)
    logs = np.log(np.array([p[1] for p in pts], dtype=float))
    slope, intercept = np.polyfit(ls, logs, 1)
    resid = logs - (slope * ls + intercept)
    return float(-slope), float(np.mean(resid ** 2))


def _write_csv(path: Path, header: List[str], rows: List[List], cfg: dict) -> None:
    chash = config_hash(cfg)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header + ["configHash"])
        for row in rows:
            w.writerow([NUM_FMT % v if isinstance(v, float) else v for v in row] + [chash])


def _write_manifest(outdir: Path, cfg: dict, extra: Optional[dict] = None) -> None:
    manifest = {
        "version": __version__,
        "configHash": config_hash(cfg),
        "config": cfg,
        "generatedAt": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    if extra:
        manifest.update(extra)
    with open(outdir / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2)


def _set_threads(n: Optional[int]) -> None:
    if n is None:
        return
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(limits=n)
    except ImportError:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(n)


def _trotter_comparison(
    h: UnitCellHamiltonian, t: float, depth: int, spec: CostSpec
) -> List[List]:
    """Cost of merged Trotter circuits of every order, up to a depth cap."""
    rows = []
    for order, depth_of in ((1, lambda k: 2 * k), (2, lambda k: 2 * k + 1),
                            (4, lambda k: 10 * k + 1)):
        k = 1
        while depth_of(k) <= depth:
            circ = trotter_circuit(h, TrotterSpec(order, k, t))
            rows.append([order, k, circ.depth, evaluate_cost(circ, spec)])
            k += 1
    return rows


def _save_circuit(path: Path, circ: ParamCircuit) -> None:
    with open(path, "w") as f:
        json.dump(circuit_to_json(circ), f)


# ---------------------------------------------------------------------------
# experiment runners


def run_ground_state(cfg: dict, outdir: Path, seed: int) -> None:
    h = build_model(cfg["model"])
    opt = cfg["optimize"]
    psi_gs, _ = ground_state(h, cfg["gsChiMax"])
    psi_gs = normalize(psi_gs)
    if cfg["model"]["name"] == "tfim":
        e_ref = tfim_energy_density_exact(cfg["model"]["params"]["J"],
                                          cfg["model"]["params"]["h"])
    else:
        e_ref = energy_density(psi_gs, h)
    phi0 = product_imps([1, 0], [1, 0])
    spec = CostSpec("groundState", ((phi0, psi_gs),), eval_chi_max=opt["evalChiMax"])
    rows = []
    for depth in cfg["depths"]:
        c0 = identity_circuit(int(depth), "su4")
        circ, report = optimize(c0, spec, max_iter=opt["maxIter"],
                                grad_tol=opt["gradTol"], cost_tol=opt["costTol"],
                                fd_step=opt["h"])
        from .evolve import apply_circuit

        state, _ = apply_circuit(phi0, circ, opt["evalChiMax"])
        state = normalize(state)
        e_err = abs(energy_density(state, h) - e_ref) / abs(e_ref)
        infid = evaluate_cost(circ, spec)
        rows.append([int(depth), infid, e_err, report.evaluations])
        _save_circuit(outdir / f"circuit_L{int(depth)}.json", circ)
        report_trace_csv(report, str(outdir / f"trace_L{int(depth)}.csv"))
    _write_csv(outdir / "ground_state.csv",
               ["layers", "localInfidelity", "relEnergyError", "evaluations"],
               rows, cfg)
    summary = {}
    try:
        a_f, mse_f = fit_decay([(r[0], r[1]) for r in rows], cfg["fitLmin"])
        a_e, mse_e = fit_decay([(r[0], r[2]) for r in rows], cfg["fitLmin"])
        summary = {"alphaInfidelity": a_f, "mseInfidelity": mse_f,
                   "alphaEnergy": a_e, "mseEnergy": mse_e}
    except ValueError:
        summary = {"fit": "skipped (nonpositive or too few points)"}
    _write_manifest(outdir, cfg, {"summary": summary, "seed": seed})


def run_state_evolution(cfg: dict, outdir: Path, seed: int) -> None:
    h = build_model(cfg["model"])
    opt, ev = cfg["optimize"], cfg["evolve"]
    t, depth = cfg["t"], cfg["depth"]
    phi0 = build_initial(cfg["initialState"])
    target, _ = evolve_state(phi0, h, t, ev["chiMax"], tol=ev["tol"])
    spec = CostSpec("stateEvolution", ((phi0, target),), eval_chi_max=opt["evalChiMax"])
    if depth % 2 == 0:
        raise ConfigError("depth: 2nd-order Trotter initialization needs an odd depth")
    k0 = (depth - 1) // 2
    init = su4_circuit_from(trotter_circuit(h, TrotterSpec(2, max(1, k0), t)))
    circ, report = optimize(init, spec, max_iter=opt["maxIter"],
                            grad_tol=opt["gradTol"], cost_tol=opt["costTol"],
                            fd_step=opt["h"])
    learned_cost = evaluate_cost(circ, spec)
    rows = [["learned", "-", circ.depth, learned_cost]]
    rows += _trotter_comparison(h, t, depth, spec)
    _write_csv(outdir / "comparison.csv", ["method", "trotterNumber", "depth", "cost"], rows, cfg)
    _save_circuit(outdir / "circuit.json", circ)
    report_trace_csv(report, str(outdir / "trace.csv"))
    with open(outdir / "report.json", "w") as f:
        json.dump(report_to_json(report), f, indent=2)
    _write_manifest(outdir, cfg, {"learnedCost": learned_cost, "seed": seed})


def _compress_once(h, t, depth, n_train, n_test, chi_train, ev, opt, seed):
    train = make_training_set(h, t, chi_train, n_train, seed, ev["chiMax"], tol=ev["tol"])
    test = make_training_set(h, t, chi_train, n_test, seed + 7919, ev["chiMax"], tol=ev["tol"])
    spec = CostSpec("unitaryQml", tuple(train), eval_chi_max=opt["evalChiMax"])
    test_spec = CostSpec("unitaryQml", tuple(test), eval_chi_max=opt["evalChiMax"])
    init = identity_circuit(depth, "su4")
    circ, report = optimize(init, spec, max_iter=opt["maxIter"],
                            grad_tol=opt["gradTol"], cost_tol=opt["costTol"],
                            fd_step=opt["h"], test_set=test_spec,
                            test_every=opt["testEvery"])
    return circ, report, evaluate_cost(circ, spec), evaluate_cost(circ, test_spec)


def run_unitary_compress(cfg: dict, outdir: Path, seed: int) -> None:
    h = build_model(cfg["model"])
    circ, report, train_cost, test_cost = _compress_once(
        h, cfg["t"], cfg["depth"], cfg["nTrain"], cfg["nTest"], cfg["chiTrain"],
        cfg["evolve"], cfg["optimize"], seed)
    _save_circuit(outdir / "circuit.json", circ)
    report_trace_csv(report, str(outdir / "trace.csv"))
    with open(outdir / "report.json", "w") as f:
        json.dump(report_to_json(report), f, indent=2)
    _write_csv(outdir / "compress.csv",
               ["nTrain", "chiTrain", "trainCost", "testCost"],
               [[cfg["nTrain"], cfg["chiTrain"], train_cost, test_cost]], cfg)
    _write_manifest(outdir, cfg, {"trainCost": train_cost, "testCost": test_cost,
                                  "seed": seed})


def run_tcount(cfg: dict, outdir: Path, seed: int) -> None:
    if cfg["model"]["name"] != "tfim":
        raise ConfigError("model.name: the tcount study uses the lowrz family, tfim only")
    p = cfg["model"]["params"]
    h = build_model(cfg["model"])
    opt, ev = cfg["optimize"], cfg["evolve"]
    t = cfg["t"]
    phi0 = build_initial(cfg["initialState"])
    target, _ = evolve_state(phi0, h, t, ev["chiMax"], tol=ev["tol"])
    spec = CostSpec("stateEvolution", ((phi0, target),), eval_chi_max=opt["evalChiMax"])
    model = TCountModel(cfg["modelSlope"], cfg["modelOffset"])
    circuits, groups = [], {}
    for k in cfg["trotterNumbers"]:
        base = trotter_zz_x_circuit(p["J"], p["h"], t, int(k), order=1)
        circuits.append((f"trotter1_k{k}", base))
        groups[f"trotter1_k{k}"] = "trotter"
        opt_circ, _ = optimize(base, spec, max_iter=opt["maxIter"],
                               grad_tol=opt["gradTol"], cost_tol=opt["costTol"],
                               fd_step=opt["h"])
        circuits.append((f"optimized_k{k}", opt_circ))
        groups[f"optimized_k{k}"] = "optimized"
        _save_circuit(outdir / f"circuit_optimized_k{k}.json", opt_circ)
    eps_grid = [10.0 ** e for e in cfg["epsExponents"]]
    rows = frontier(circuits, eps_grid, spec, model, seed=seed, groups=groups)
    _write_csv(outdir / "frontier.csv",
               ["circuitId", "family", "layers", "eps", "tPerQubit", "cost",
                "paretoFlag", "group", "modelSlope", "modelOffset", "seed"],
               [[r["circuitId"], r["family"], r["layers"], r["eps"], r["tPerQubit"],
                 r["cost"], r["paretoFlag"], r["group"], r["modelSlope"],
                 r["modelOffset"], r["seed"]] for r in rows], cfg)
    _write_manifest(outdir, cfg, {"seed": seed})


def run_finite_validate(cfg: dict, outdir: Path, seed: int) -> None:
    h = build_model(cfg["model"])
    opt, ev = cfg["optimize"], cfg["evolve"]
    t, depth = cfg["t"], cfg["depth"]
    if cfg["circuitFile"]:
        with open(cfg["circuitFile"]) as f:
            learned = circuit_from_json(json.load(f))
    else:
        phi0 = build_initial(cfg["initialState"])
        target, _ = evolve_state(phi0, h, t, ev["chiMax"], tol=ev["tol"])
        spec = CostSpec("stateEvolution", ((phi0, target),), eval_chi_max=opt["evalChiMax"])
        if depth % 2 == 0:
            raise ConfigError("depth: needs an odd depth for the Trotter init")
        init = su4_circuit_from(trotter_circuit(h, TrotterSpec(2, (depth - 1) // 2, t)))
        learned, _ = optimize(init, spec, max_iter=opt["maxIter"],
                              grad_tol=opt["gradTol"], cost_tol=opt["costTol"],
                              fd_step=opt["h"])
        _save_circuit(outdir / "circuit.json", learned)
    rows = []
    for n in cfg["qubitCounts"]:
        n = int(n)
        mean, std = cost_finite(learned, h, t, n, cfg["haarSamples"], seed)
        rows.append([n, learned.depth, learned.gate_family, "learned", mean, std, seed])
        k = max(1, (learned.depth - 1) // 2)
        tr = trotter_circuit(h, TrotterSpec(2, k, t))
        mean, std = cost_finite(tr, h, t, n, cfg["haarSamples"], seed)
        rows.append([n, tr.depth, "raw", "trotter2", mean, std, seed])
    _write_csv(outdir / "finite.csv",
               ["n", "layers", "family", "method", "meanCost", "stdCost", "seed"], rows, cfg)
    _write_manifest(outdir, cfg, {"seed": seed})


def run_generalization(cfg: dict, outdir: Path, seed: int) -> None:
    h = build_model(cfg["model"])
    rows = []
    for chi_train in cfg["chiTrainValues"]:
        for n_train in cfg["nTrainValues"]:
            _, _, train_cost, test_cost = _compress_once(
                h, cfg["t"], cfg["depth"], int(n_train), cfg["nTest"],
                int(chi_train), cfg["evolve"], cfg["optimize"], seed)
            rows.append([int(n_train), int(chi_train), train_cost, test_cost])
    _write_csv(outdir / "generalization.csv",
               ["nTrain", "chiTrain", "trainCost", "testCost"], rows, cfg)
    _write_manifest(outdir, cfg, {"seed": seed})


RUNNERS = {
    "ground-state": run_ground_state,
    "state-evolution": run_state_evolution,
    "unitary-compress": run_unitary_compress,
    "tcount": run_tcount,
    "finite-validate": run_finite_validate,
    "generalization": run_generalization,
}


# ---------------------------------------------------------------------------
# click wiring


def _run(experiment: str, config: str, out: str, seed: Optional[int],
         threads: Optional[int]) -> None:
    try:
        cfg = load_config(config, experiment)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    _set_threads(threads)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    eff_seed = cfg["seed"] if seed is None else seed
    try:
        RUNNERS[experiment](cfg, outdir, eff_seed)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    except Exception as exc:  # compute failure: report the stage and fail with 3
        click.echo(f"compute error in {experiment}: {exc}", err=True)
        sys.exit(3)
    click.echo(f"{experiment}: artifacts written to {outdir}")


def _subcommand(name: str):
    @click.command(name=name)
    @click.option("--config", required=True, type=click.Path(), help="JSON config file.")
    @click.option("--out", required=True, type=click.Path(), help="Output directory.")
    @click.option("--seed", type=int, default=None, help="Override the config seed.")
    @click.option("--threads", type=int, default=None, help="Cap BLAS/OMP threads.")
    def cmd(config, out, seed, threads):
        _run(name, config, out, seed, threads)

    cmd.help = f"Run the {name} study from a JSON config."
    return cmd


@click.group()
@click.version_option(__version__)
def main():
    """Translation-invariant circuit compilation experiments."""


for _name in RUNNERS:
    main.add_command(_subcommand(_name))


if __name__ == "__main__":
    main()
