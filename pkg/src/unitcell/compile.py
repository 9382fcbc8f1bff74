"""Variational compiler for translation-invariant circuits.

The cost function is the mean local infidelity 1 - |lambda_0|^2 between
circuit-evolved inputs and target iMPS.  Gradients use the environment-iMPS
trick: with everything below and above one layer pre-contracted into a pair
of states, the cost is a single gate-interposed transfer eigenvalue, so a
finite-difference sweep needs only O(L) layer applications per training
pair.  Optimization is scipy's L-BFGS with the analytic-free gradient.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from .evolve import apply_layer
from .gates import GateLayer, ParamCircuit, su4_params_from_unitary
from .imps import InfiniteMPS, TransferOperator, leading_eigenvalue, normalize
from .tensors import NumericalError

__all__ = [
    "CostSpec",
    "EnvironmentPair",
    "CompilationReport",
    "evaluate_cost",
    "layer_gradient",
    "sweep_gradient",
    "layer_local_cost",
    "optimize",
    "su4_circuit_from",
    "report_to_json",
    "report_trace_csv",
    "FD_STEP",
]

FD_STEP = 1e-7

COST_KINDS = ("groundState", "stateEvolution", "unitaryQml")


@dataclass(frozen=True)
class CostSpec:
    """Training objective: pairs of (input, target) iMPS plus evaluation caps."""

    kind: str
    targets: Tuple[Tuple[InfiniteMPS, InfiniteMPS], ...]
    eval_chi_max: int = 128
    weight_tol: float = 1e-12
    trunc_error_max: float = 1e-6
    eig_tol: float = 1e-12

    def __post_init__(self):
        if self.kind not in COST_KINDS:
            raise ValueError(f"unknown cost kind {self.kind!r}")
        targets = tuple(self.targets)
        object.__setattr__(self, "targets", targets)
        if self.kind in ("groundState", "stateEvolution") and len(targets) != 1:
            raise ValueError(f"{self.kind} requires exactly one (input, target) pair")
        if not targets:
            raise ValueError("at least one training pair required")


@dataclass
class EnvironmentPair:
    """Below/above accumulations that make one layer's cost layer-local."""

    phi_tilde: InfiniteMPS
    psi_tilde: InfiniteMPS
    layer_index: int
    warm_vector: Optional[np.ndarray] = None
    warm_left: Optional[np.ndarray] = None


@dataclass
class CompilationReport:
    cost_trace: List[Tuple[int, float, Optional[float]]] = field(default_factory=list)
    final_params: Optional[np.ndarray] = None
    gradient_norm_trace: List[float] = field(default_factory=list)
    truncation_max: float = 0.0
    wall_time: float = 0.0
    evaluations: int = 0
    converged: bool = False
    line_search_failed: bool = False
    message: str = ""


def _apply_and_normalize(psi, layer, spec, trunc_box):
    psi, dw = apply_layer(psi, layer, spec.eval_chi_max, spec.weight_tol)
    trunc_box[0] = max(trunc_box[0], dw)
    if dw > spec.trunc_error_max:
        raise NumericalError(
            f"discarded weight {dw:.3e} exceeds limit {spec.trunc_error_max:.1e}"
        )
    return normalize(psi, tol=spec.eig_tol)


def _pair_overlap_sq(phi, psi, spec, warm=None):
    op = TransferOperator(phi, psi)
    res = leading_eigenvalue(op, warm_start=warm, tol=spec.eig_tol)
    return abs(res.value) ** 2, res.vector


def evaluate_cost(
    c: ParamCircuit,
    spec: CostSpec,
    trunc_out: Optional[list] = None,
) -> float:
    """Mean over training pairs of 1 - |lambda_0(V|phi>, |psi>)|^2."""
    trunc_box = [0.0]
    total = 0.0
    for phi, psi in spec.targets:
        state = normalize(phi, tol=spec.eig_tol)
        for layer in c.layers:
            state = _apply_and_normalize(state, layer, spec, trunc_box)
        fid, _ = _pair_overlap_sq(state, psi, spec)
        total += 1.0 - fid
    if trunc_out is not None:
        trunc_out.append(trunc_box[0])
    return total / len(spec.targets)


def _interposed_operator(env: EnvironmentPair, unitary: np.ndarray, parity: int):
    ket, bra = env.phi_tilde, env.psi_tilde
    if parity == 1:
        ket, bra = ket.shift(), bra.shift()
    return TransferOperator(ket, bra, gate=unitary)


def layer_local_cost(env: EnvironmentPair, layer: GateLayer, spec: CostSpec) -> float:
    """Cost of the full circuit written as a single-layer sandwich."""
    op = _interposed_operator(env, layer.unitary, layer.parity)
    res = leading_eigenvalue(op, warm_start=env.warm_vector, tol=spec.eig_tol)
    return 1.0 - abs(res.value) ** 2


def layer_gradient(
    env: EnvironmentPair,
    layer: GateLayer,
    spec: CostSpec,
    h: float = FD_STEP,
) -> np.ndarray:
    """Forward-difference gradient of one layer's parameters.

    The unperturbed right eigenvector seeds every perturbed Arnoldi solve,
    which is what keeps the per-parameter cost at a handful of iterations.
    The eigenvalue shift under each perturbation is evaluated through the
    left/right eigenvector pair of the unperturbed operator, with the gate
    difference inserted directly (the transfer operator is linear in the
    gate).  That keeps every term at O(h), so dividing by h does not
    amplify eigensolver round-off and the result is independent of the
    Arnoldi starting vector to machine precision.
    """
    n = layer.n_params
    if n == 0:
        return np.zeros(0)
    op_ref = _interposed_operator(env, layer.unitary, layer.parity)
    res_r = leading_eigenvalue(op_ref, warm_start=env.warm_vector, tol=spec.eig_tol)
    res_l = leading_eigenvalue(
        op_ref, warm_start=env.warm_left, tol=spec.eig_tol, adjoint=True
    )
    env.warm_vector = res_r.vector
    env.warm_left = res_l.vector
    w, v = res_l.vector, res_r.vector
    lam_ref = np.vdot(w, op_ref.apply_vec(v)) / np.vdot(w, v)
    params = np.asarray(layer.params, dtype=float)
    grad = np.empty(n)
    for k in range(n):
        pert = params.copy()
        pert[k] += h
        gate = layer.with_params(pert)
        op_k = _interposed_operator(env, gate.unitary, gate.parity)
        res_k = leading_eigenvalue(op_k, warm_start=v, tol=spec.eig_tol)
        vk = res_k.vector
        op_d = _interposed_operator(env, gate.unitary - layer.unitary, layer.parity)
        dlam = np.vdot(w, op_d.apply_vec(vk)) / np.vdot(w, vk)
        # cost difference: |lam_k|^2 - |lam_ref|^2 = 2 Re(conj(lam_ref) dlam) + |dlam|^2
        grad[k] = -(2.0 * np.real(np.conj(lam_ref) * dlam) + abs(dlam) ** 2) / h
    return grad


def _pair_sweep(
    c: ParamCircuit,
    phi: InfiniteMPS,
    psi: InfiniteMPS,
    spec: CostSpec,
    warm_cache: Dict[int, Tuple[np.ndarray, np.ndarray]],
    h: float,
    trunc_box: list,
) -> Tuple[np.ndarray, float]:
    """One bottom-up gradient sweep for a single training pair.

    phi_tilde carries the layers already passed; psi_tilde carries the
    adjoints of the layers still above, so each position sees the whole
    circuit through a single interposed gate.
    """
    layers = c.layers
    depth = len(layers)
    phi_t = normalize(phi, tol=spec.eig_tol)
    psi_t = normalize(psi, tol=spec.eig_tol)
    for l in range(depth - 1, 0, -1):
        adj = GateLayer(layers[l].parity, layers[l].adjoint_unitary(), "raw")
        psi_t = _apply_and_normalize(psi_t, adj, spec, trunc_box)

    grads = []
    cost = 0.0
    for l in range(depth):
        warm_r, warm_l = warm_cache.get(l, (None, None))
        env = EnvironmentPair(phi_t, psi_t, l, warm_r, warm_l)
        grads.append(layer_gradient(env, layers[l], spec, h))
        warm_cache[l] = (env.warm_vector, env.warm_left)
        if l == 0:
            op = _interposed_operator(env, layers[0].unitary, layers[0].parity)
            res = leading_eigenvalue(op, warm_start=env.warm_vector, tol=spec.eig_tol)
            cost = 1.0 - abs(res.value) ** 2
        if l < depth - 1:
            phi_t = _apply_and_normalize(phi_t, layers[l], spec, trunc_box)
            psi_t = _apply_and_normalize(psi_t, layers[l + 1], spec, trunc_box)
    return np.concatenate(grads) if grads else np.zeros(0), cost


def sweep_gradient(
    c: ParamCircuit,
    spec: CostSpec,
    h: float = FD_STEP,
    warm_caches: Optional[List[Dict[int, Tuple[np.ndarray, np.ndarray]]]] = None,
    trunc_out: Optional[list] = None,
) -> Tuple[np.ndarray, float]:
    """Full circuit gradient and layer-local cost, averaged over pairs."""
    n_pairs = len(spec.targets)
    if warm_caches is None:
        warm_caches = [{} for _ in range(n_pairs)]
    trunc_box = [0.0]
    grad = np.zeros(c.n_params)
    cost = 0.0
    for i, (phi, psi) in enumerate(spec.targets):
        g, ci = _pair_sweep(c, phi, psi, spec, warm_caches[i], h, trunc_box)
        grad += g
        cost += ci
    if trunc_out is not None:
        trunc_out.append(trunc_box[0])
    return grad / n_pairs, cost / n_pairs


def optimize(
    c0: ParamCircuit,
    spec: CostSpec,
    max_iter: int = 2000,
    grad_tol: float = 1e-9,
    cost_tol: float = 1e-12,
    test_set: Optional[CostSpec] = None,
    test_every: int = 1,
    fd_step: float = FD_STEP,
    verbose: bool = False,
) -> Tuple[ParamCircuit, CompilationReport]:
    """L-BFGS driver over all layer parameters simultaneously.

    The test set, if given, is only ever evaluated for the trace; it never
    feeds back into the update.  A line-search failure returns the best
    iterate seen with a flag rather than raising.
    """
    if c0.n_params == 0:
        raise ValueError("circuit has no optimizable parameters")
    report = CompilationReport()
    t0 = time.time()
    warm_caches = [{} for _ in spec.targets]
    best = {"x": c0.params_vector(), "cost": np.inf}
    it_count = [0]
    last = {"x": None, "cost": None, "grad": None}

    def objective(x):
        circ = c0.with_params(x)
        trunc = []
        grad, cost = sweep_gradient(circ, spec, fd_step, warm_caches, trunc)
        report.truncation_max = max(report.truncation_max, trunc[0])
        report.evaluations += 1
        if cost < best["cost"]:
            best["cost"] = cost
            best["x"] = np.array(x)
        last["x"] = np.array(x)
        last["cost"] = cost
        last["grad"] = grad
        return cost, grad

    def callback(x):
        it = it_count[0]
        it_count[0] += 1
        circ = c0.with_params(x)
        # L-BFGS invokes the callback at the accepted iterate, which is the
        # last point the objective evaluated; reuse that work if it matches.
        if last["x"] is not None and np.array_equal(x, last["x"]):
            cost, grad_norm = last["cost"], float(np.linalg.norm(last["grad"]))
        else:  # pragma: no cover - scipy always calls objective at x first
            trunc = []
            grad, cost = sweep_gradient(circ, spec, fd_step, warm_caches, trunc)
            grad_norm = float(np.linalg.norm(grad))
        test_cost = None
        if test_set is not None and it % test_every == 0:
            test_cost = evaluate_cost(circ, test_set)
        report.cost_trace.append((it, cost, test_cost))
        report.gradient_norm_trace.append(grad_norm)
        if verbose:
            print(f"iter {it}: cost {cost:.3e} test {test_cost}")

    res = minimize(
        objective,
        c0.params_vector(),
        jac=True,
        method="L-BFGS-B",
        options={
            "maxiter": max_iter,
            "maxcor": 10,
            "gtol": grad_tol,
            "ftol": cost_tol,
        },
        callback=callback,
    )
    report.wall_time = time.time() - t0
    report.message = str(res.message)
    report.converged = bool(res.success)
    if not res.success and "LINE SEARCH" in report.message.upper():
        report.line_search_failed = True
    x_final = res.x if res.fun <= best["cost"] else best["x"]
    report.final_params = np.array(x_final)
    final = c0.with_params(x_final)
    final_cost = evaluate_cost(final, spec)
    final_test = evaluate_cost(final, test_set) if test_set is not None else None
    report.cost_trace.append((it_count[0], final_cost, final_test))
    return final, report


def su4_circuit_from(c: ParamCircuit) -> ParamCircuit:
    """Re-express any circuit in the su4 family via principal-branch logs."""
    layers = tuple(
        GateLayer.from_params(l.parity, "su4", su4_params_from_unitary(l.unitary))
        for l in c.layers
    )
    return ParamCircuit(layers, "su4")


def report_to_json(report: CompilationReport) -> dict:
    return {
        "cost_trace": [
            {"iteration": i, "train_cost": tr, "test_cost": te}
            for (i, tr, te) in report.cost_trace
        ],
        "final_params": None
        if report.final_params is None
        else [float(v) for v in report.final_params],
        "gradient_norm_trace": [float(g) for g in report.gradient_norm_trace],
        "truncation_max": report.truncation_max,
        "wall_time": report.wall_time,
        "evaluations": report.evaluations,
        "converged": report.converged,
        "line_search_failed": report.line_search_failed,
        "message": report.message,
    }


def report_trace_csv(report: CompilationReport, path: str) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["iteration", "trainCost", "testCost"])
        for it, train, test in report.cost_trace:
            writer.writerow([it, f"{train:.12e}", "" if test is None else f"{test:.12e}"])
