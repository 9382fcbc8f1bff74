"""Acceptance gate: one end-to-end test per release criterion.

Each test prints a single PASS/FAIL line (bypassing pytest capture) so a
release run reads as a checklist.  Physics scales (models, times, depths,
bond dimensions, tolerances) are fixed by the criteria; iteration budgets
are desk-scale calibrations chosen to fit the stated runtime limits.

Truncation budgets: optimization CostSpecs use a loose discarded-weight
guard (5e-2) because the adjoint environment sweep pushes entanglement
through the chi cap much harder than forward application; every number
quoted against a criterion comes from a strict forward-only evaluation
spec (1e-3 .. 1e-4).
"""

import sys
import time

import numpy as np
import pytest

from unitcell.cli import _trotter_comparison, fit_decay
from unitcell.compile import (
    CostSpec,
    EnvironmentPair,
    evaluate_cost,
    layer_gradient,
    optimize,
    su4_circuit_from,
    sweep_gradient,
)
from unitcell.evolve import (
    apply_circuit,
    apply_layer,
    energy_density,
    evolve_state,
    ground_state,
    make_training_set,
)
from unitcell.finite import (
    apply_circuit_pbc,
    cost_finite,
    haar_state,
    reference_evolution,
)
from unitcell.ftcount import (
    RzInventory,
    TCountModel,
    _reduce_angle,
    extract_rz,
    is_clifford_angle,
    pareto_flags,
    perturbed_cost,
    t_count_per_qubit,
)
from unitcell.gates import (
    GateLayer,
    ParamCircuit,
    build_low_rz,
    build_su4,
    circuit_from_json,
    circuit_to_json,
    identity_circuit,
    merge_adjacent_layers,
)
from unitcell.imps import (
    InfiniteMPS,
    TransferOperator,
    correlation_length,
    leading_eigenvalue,
    local_fidelity,
    normalize,
    product_imps,
    random_imps,
)
from unitcell.models import (
    TrotterSpec,
    tfim,
    tfim_energy_density_exact,
    trotter_circuit,
    trotter_zz_x_circuit,
    xxz,
)
from unitcell.tensors import contract, expm_hermitian, svd_truncate


def _report(num: int, name: str, ok: bool, detail: str) -> None:
    line = f"\n[ACCEPTANCE {num:02d}] {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line, flush=True)
    assert ok, line


# ---------------------------------------------------------------------------
# 1. transfer-matrix oracle equivalence


def test_c01_transfer_oracle():
    rng = np.random.default_rng(11)
    t0 = time.time()
    worst = 0.0
    chis = [1, 2, 4, 8]
    for _ in range(50):
        chi_b = int(rng.choice(chis))
        chi_k = int(rng.choice([c for c in chis if c * chi_b <= 64]))
        bra = normalize(random_imps(chi_b, int(rng.integers(1, 10 ** 6))))
        ket = normalize(random_imps(chi_k, int(rng.integers(1, 10 ** 6))))
        op = TransferOperator(ket, bra)
        res = leading_eigenvalue(op)
        lam_dense = float(np.abs(np.linalg.eigvals(op.to_matrix())).max())
        worst = max(worst, abs(abs(res.value) - lam_dense))
    elapsed = time.time() - t0
    _report(
        1,
        "transfer-matrix oracle equivalence",
        worst <= 1e-10 and elapsed < 10.0,
        f"worst |lam| gap {worst:.2e}, {elapsed:.1f}s",
    )


# ---------------------------------------------------------------------------
# 2. analytic TFIM ground-state energy


def test_c02_ground_state_energy():
    t0 = time.time()
    h = tfim(1.0, 1.1)
    psi, _ = ground_state(h, 64)
    e = energy_density(psi, h)
    exact = tfim_energy_density_exact(1.0, 1.1)
    rel = abs(e - exact) / abs(exact)
    elapsed = time.time() - t0
    _report(
        2,
        "TFIM h=1.1 chi=64 ground-state energy",
        rel <= 1e-6 and elapsed < 300.0,
        f"relative error {rel:.2e}, {elapsed:.0f}s",
    )


# ---------------------------------------------------------------------------
# 3/4. ground-state compilation ladders (shared fixture)

_LADDER_FIELDS = (1.1, 1.178, 1.316)
_LADDER_DEPTHS = (2, 4, 6, 8)


def _pad_to_depth(circ: ParamCircuit, depth: int) -> ParamCircuit:
    """Extend an optimized circuit with identity layers, keeping alternation."""
    extra = depth - circ.depth
    first = circ.layers[-1].parity ^ 1
    pad = identity_circuit(extra, first_parity=first)
    return ParamCircuit(list(circ.layers) + list(pad.layers))


@pytest.fixture(scope="module")
def ladders():
    """Per field: ground state, correlation length, (L, infidelity, energy-err) rows."""
    out = {}
    for field in _LADDER_FIELDS:
        h = tfim(1.0, field)
        gs, _ = ground_state(h, 32)
        xi = correlation_length(gs)
        e_exact = tfim_energy_density_exact(1.0, field)
        phi0 = normalize(product_imps([1, 0], [1, 0]))
        spec = CostSpec(
            "groundState", ((phi0, gs),), eval_chi_max=32, trunc_error_max=1e-4
        )
        rows = []
        circ = None
        for depth in _LADDER_DEPTHS:
            circ = (
                identity_circuit(depth) if circ is None else _pad_to_depth(circ, depth)
            )
            # deeper circuits chase smaller infidelities and need more steps
            circ, _ = optimize(circ, spec, max_iter=300 if depth <= 4 else 600)
            infid = evaluate_cost(circ, spec)
            state, _ = apply_circuit(phi0, circ, 32, 1e-12)
            e = energy_density(normalize(state), h)
            rows.append((depth, infid, abs(e - e_exact) / abs(e_exact)))
        out[field] = (gs, xi, rows)
    return out


def test_c03_ground_state_compilation_trend(ladders):
    t0 = time.time()
    _, _, rows = ladders[1.316]
    infids = [r[1] for r in rows]
    erels = [r[2] for r in rows]
    decreasing = all(np.diff(infids) < 0) and all(np.diff(erels) < 0)
    # the exponential fit excludes the shallow-depth transient (L=2), the
    # same convention fit_decay's lmin exists for
    _, mse_f = fit_decay([(r[0], r[1]) for r in rows], lmin=4)
    _, mse_e = fit_decay([(r[0], r[2]) for r in rows], lmin=4)
    ok = decreasing and mse_f <= 0.1 and mse_e <= 0.1 and infids[-1] <= 1e-3
    _report(
        3,
        "ground-state compilation decay (h=1.316)",
        ok,
        f"infidelities {['%.1e' % v for v in infids]}, "
        f"fit MSE {mse_f:.3f}/{mse_e:.3f}, {time.time() - t0:.0f}s",
    )


def test_c04_decay_vs_correlation_length(ladders):
    xis = []
    alphas = []
    for field in _LADDER_FIELDS:
        _, xi, rows = ladders[field]
        alpha, _ = fit_decay([(r[0], r[1]) for r in rows], lmin=2)
        xis.append(xi)
        alphas.append(alpha)
    ok = all(np.diff(xis) < 0) and all(np.diff(alphas) > 0)
    _report(
        4,
        "decay constant grows as xi shrinks",
        ok,
        f"xi {['%.2f' % x for x in xis]} -> alpha {['%.3f' % a for a in alphas]}",
    )


# ---------------------------------------------------------------------------
# 5. state-evolution advantage over equal-depth Trotter


def test_c05_state_evolution_advantage():
    t0 = time.time()
    h = xxz(1.0, 0.5)
    phi0 = normalize(product_imps([1, 0], [0, 1]))  # Neel cell; |00> is an eigenstate
    target, _ = evolve_state(phi0, h, 1.5, 64, tol=1e-7)
    final = CostSpec(
        "stateEvolution", ((phi0, target),), eval_chi_max=96, trunc_error_max=1e-3
    )
    train = CostSpec(
        "stateEvolution", ((phi0, target),), eval_chi_max=96, trunc_error_max=5e-2
    )
    depth = 9
    trotter_rows = _trotter_comparison(h, 1.5, depth, final)
    best_trotter = min(r[3] for r in trotter_rows)
    init = su4_circuit_from(trotter_circuit(h, TrotterSpec(2, 4, 1.5)))
    assert init.depth == depth
    circ, _ = optimize(init, train, max_iter=50)
    learned = evaluate_cost(circ, final)
    elapsed = time.time() - t0
    _report(
        5,
        "XXZ t=1.5 depth-9 learned vs best Trotter",
        learned <= best_trotter / 3.0 and elapsed < 7200.0,
        f"learned {learned:.2e} vs best Trotter {best_trotter:.2e}, {elapsed:.0f}s",
    )


# ---------------------------------------------------------------------------
# 6. unitary-compression generalization


def test_c06_generalization():
    t0 = time.time()
    h = tfim(1.0, 1.0)
    train4 = make_training_set(h, 2.0, 2, 4, 100, 64, tol=1e-7)
    test4 = make_training_set(h, 2.0, 2, 4, 200, 64, tol=1e-7)
    init = su4_circuit_from(trotter_circuit(h, TrotterSpec(2, 3, 2.0)))  # depth 7
    test_spec = CostSpec(
        "unitaryQml", tuple(test4), eval_chi_max=96, trunc_error_max=1e-3
    )

    def run(pairs, max_iter):
        train = CostSpec(
            "unitaryQml", tuple(pairs), eval_chi_max=96, trunc_error_max=5e-2
        )
        circ, _ = optimize(init, train, max_iter=max_iter)
        eval_spec = CostSpec(
            "unitaryQml", tuple(pairs), eval_chi_max=96, trunc_error_max=1e-3
        )
        return evaluate_cost(circ, eval_spec), evaluate_cost(circ, test_spec)

    tr1, te1 = run(train4[:1], 400)
    tr4, te4 = run(train4, 150)
    ok = tr1 < 1e-5 and te1 >= 10.0 * tr1 and te4 <= 2.0 * tr4
    _report(
        6,
        "compression generalization (N_train 1 vs 4)",
        ok and time.time() - t0 < 7200.0,
        f"N1 train {tr1:.1e} test {te1:.1e}; N4 train {tr4:.1e} test {te4:.1e}; "
        f"{time.time() - t0:.0f}s",
    )


# ---------------------------------------------------------------------------
# 7. gradient correctness (naive recontraction + central differences)


def _naive_gradient(circ, spec):
    """Per-layer gradients with environments rebuilt from scratch each time."""
    phi0, psi_top = spec.targets[0]
    grads = []
    for l, layer in enumerate(circ.layers):
        below = normalize(phi0, tol=spec.eig_tol)
        for lower in circ.layers[:l]:
            below, _ = apply_layer(below, lower, spec.eval_chi_max, spec.weight_tol)
            below = normalize(below, tol=spec.eig_tol)
        above = normalize(psi_top, tol=spec.eig_tol)
        for upper in reversed(circ.layers[l + 1:]):
            adj = GateLayer(upper.parity, upper.adjoint_unitary(), "raw")
            above, _ = apply_layer(above, adj, spec.eval_chi_max, spec.weight_tol)
            above = normalize(above, tol=spec.eig_tol)
        env = EnvironmentPair(below, above, l)
        grads.append(layer_gradient(env, layer, spec))
    return np.concatenate(grads)


def test_c07_gradient_correctness():
    t0 = time.time()
    rng = np.random.default_rng(7)
    # chi=2 input through 3 layers grows to exactly chi=16: no truncation,
    # so the environment-sweep gradient identity holds to solver precision.
    phi0 = normalize(random_imps(2, 71))
    target_circ = ParamCircuit(
        [
            GateLayer.from_params(l % 2, "su4", 0.25 * rng.standard_normal(15))
            for l in range(3)
        ]
    )
    psi_target, _ = apply_circuit(phi0, target_circ, 16, 1e-12)
    psi_target = normalize(psi_target)
    circ = ParamCircuit(
        [
            GateLayer.from_params(
                l % 2, "su4", t.params + 0.05 * rng.standard_normal(15)
            )
            for l, t in enumerate(target_circ.layers)
        ]
    )
    # cap above any bond this depth can reach: the 1e-9 sweep/naive identity
    # is exact only when no truncation happens along either environment path
    spec = CostSpec("stateEvolution", ((phi0, psi_target),), eval_chi_max=128)
    g_sweep, _ = sweep_gradient(circ, spec)
    g_naive = _naive_gradient(circ, spec)
    gap_naive = float(np.max(np.abs(g_sweep - g_naive)))

    x0 = circ.params_vector()
    step = 1e-5
    worst_rel = 0.0
    for k in range(len(x0)):
        xp, xm = x0.copy(), x0.copy()
        xp[k] += step
        xm[k] -= step
        central = (
            evaluate_cost(circ.with_params(xp), spec)
            - evaluate_cost(circ.with_params(xm), spec)
        ) / (2 * step)
        if abs(central) > 1e-6:
            worst_rel = max(worst_rel, abs(g_sweep[k] - central) / abs(central))
    elapsed = time.time() - t0
    ok = gap_naive <= 1e-9 and worst_rel <= 1e-3 and elapsed < 300.0
    _report(
        7,
        "sweep gradient vs recontraction + central differences",
        ok,
        f"naive gap {gap_naive:.1e}, central rel {worst_rel:.1e}, {elapsed:.0f}s",
    )


# ---------------------------------------------------------------------------
# 8. warm-start soundness


def test_c08_warm_start_soundness():
    rng = np.random.default_rng(8)
    spec = CostSpec(
        "stateEvolution",
        ((normalize(random_imps(2, 1)), normalize(random_imps(2, 2))),),
        eval_chi_max=16,
    )
    worst_gap = 0.0
    iters_cold = []
    iters_warm = []
    for i in range(20):
        # chi=8 pairs give a dim-64 transfer operator, larger than the
        # Krylov space, so the start vector genuinely matters.
        phi = normalize(random_imps(8, 300 + i))
        psi = normalize(random_imps(8, 400 + i))
        params = 0.2 * rng.standard_normal(15)
        layer = GateLayer.from_params(0, "su4", params)
        nearby = GateLayer.from_params(0, "su4", params + 1e-3 * rng.standard_normal(15))

        g_cold = layer_gradient(EnvironmentPair(phi, psi, 0), layer, spec)
        env_warm = EnvironmentPair(phi, psi, 0)
        layer_gradient(env_warm, nearby, spec)  # populates warm caches
        g_warm = layer_gradient(env_warm, layer, spec)
        worst_gap = max(worst_gap, float(np.max(np.abs(g_warm - g_cold))))

        op = TransferOperator(phi, psi, gate=layer.unitary)
        res_near = leading_eigenvalue(TransferOperator(phi, psi, gate=nearby.unitary))
        iters_cold.append(leading_eigenvalue(op).iterations)
        iters_warm.append(leading_eigenvalue(op, warm_start=res_near.vector).iterations)
    mean_cold = float(np.mean(iters_cold))
    mean_warm = float(np.mean(iters_warm))
    ok = worst_gap <= 1e-8 and mean_warm < mean_cold
    _report(
        8,
        "warm-start gradient agreement + iteration savings",
        ok,
        f"max gradient gap {worst_gap:.1e}, mean iters {mean_warm:.1f} warm "
        f"vs {mean_cold:.1f} cold",
    )


# ---------------------------------------------------------------------------
# 9. Trotter order verification on statevectors


def test_c09_trotter_orders():
    h = tfim(1.0, 1.0)
    n, t = 8, 1.0
    psi0 = haar_state(n, np.random.default_rng(9))
    ref = reference_evolution(h, t, n)(psi0)
    slopes = {}
    grids = {1: (8, 16, 32, 64), 2: (4, 8, 16, 32), 4: (2, 4, 8, 16)}
    for order, ks in grids.items():
        errs = [
            np.linalg.norm(
                apply_circuit_pbc(psi0, trotter_circuit(h, TrotterSpec(order, k, t)), n)
                - ref
            )
            for k in ks
        ]
        slopes[order] = -np.polyfit(np.log(ks), np.log(errs), 1)[0]
    ok = all(abs(slopes[p] - p) <= 0.15 for p in (1, 2, 4))
    _report(
        9,
        "Trotter convergence slopes 1/2/4",
        ok,
        ", ".join(f"order {p}: {slopes[p]:.2f}" for p in (1, 2, 4)),
    )


# ---------------------------------------------------------------------------
# 10. infinite-trained circuit beats Trotter on finite chains


def test_c10_infinite_to_finite():
    t0 = time.time()
    h = tfim(1.0, 1.0)
    t = 3.0
    pairs = make_training_set(h, t, 2, 4, 500, 96, tol=1e-6)
    train = CostSpec("unitaryQml", tuple(pairs), eval_chi_max=96, trunc_error_max=5e-2)
    init = su4_circuit_from(trotter_circuit(h, TrotterSpec(2, 3, t)))  # depth 7
    learned, _ = optimize(init, train, max_iter=150)
    trot = trotter_circuit(h, TrotterSpec(2, 3, t))
    details = []
    ok = True
    for n in (8, 10, 12):
        lm, ls = cost_finite(learned, h, t, n, n_samples=8, seed=10 + n)
        tm, _ = cost_finite(trot, h, t, n, n_samples=8, seed=10 + n)
        ok = ok and lm < tm and lm - ls < tm
        details.append(f"n={n}: {lm:.1e}<{tm:.1e}")
    elapsed = time.time() - t0
    _report(
        10,
        "7-layer learned circuit vs Trotter-2 on finite chains",
        ok and elapsed < 3600.0,
        "; ".join(details) + f"; {elapsed:.0f}s",
    )


# ---------------------------------------------------------------------------
# 11. T-count frontier at matched cost


def test_c11_tcount_frontier():
    t0 = time.time()
    h = tfim(1.0, 1.0)
    t = 2.0
    phi0 = normalize(product_imps([1, 0], [1, 0]))
    target, _ = evolve_state(phi0, h, t, 64, tol=1e-7)
    final = CostSpec(
        "stateEvolution", ((phi0, target),), eval_chi_max=64, trunc_error_max=1e-3
    )
    train = CostSpec(
        "stateEvolution", ((phi0, target),), eval_chi_max=64, trunc_error_max=5e-2
    )
    model = TCountModel()
    eps_grid = np.geomspace(1e-5, 1e-2, 7)
    level = 1e-4

    def min_t_at_level(circuits):
        best = np.inf
        for circ in circuits:
            inv = extract_rz(circ)
            for j, eps in enumerate(eps_grid):
                cost = perturbed_cost(circ, float(eps), final, seed=110 + 13 * j)
                if cost <= level:
                    best = min(best, t_count_per_qubit(inv, float(eps), model))
        return best

    optimized = []
    for k in range(1, 5):
        circ, _ = optimize(trotter_zz_x_circuit(1.0, 1.0, t, k, order=1), train,
                           max_iter=200)
        optimized.append(circ)
    trotters = [trotter_zz_x_circuit(1.0, 1.0, t, k, order=1) for k in (64, 128, 256)]
    t_opt = min_t_at_level(optimized)
    t_trot = min_t_at_level(trotters)
    elapsed = time.time() - t0
    ok = np.isfinite(t_opt) and np.isfinite(t_trot) and t_opt <= t_trot / 2.0
    _report(
        11,
        "T-per-qubit at matched cost 1e-4, optimized vs Trotter",
        ok,
        f"optimized {t_opt:.0f} vs Trotter {t_trot:.0f} "
        f"(ratio {t_trot / t_opt:.1f}x), {elapsed:.0f}s",
    )


# ---------------------------------------------------------------------------
# 12. randomized property suites


def _prop_tensors(rng, n_cases):
    for _ in range(n_cases):
        a = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        b = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        alpha = complex(rng.standard_normal(), rng.standard_normal())
        lhs = contract(alpha * a, b, [(1, 0)])
        rhs = alpha * contract(a, b, [(1, 0)])
        assert np.allclose(lhs, rhs, rtol=1e-14, atol=1e-12)
        m = rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5))
        sv = svd_truncate(m, chi_max=6, weight_tol=0.0)
        rec = (sv.u * sv.s) @ sv.vh
        assert np.linalg.norm(rec - m) <= 1e-10 * np.linalg.norm(m)
        hmat = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        hmat = hmat + hmat.conj().T
        tt = rng.uniform(-10, 10)
        u = expm_hermitian(hmat, -1j * tt) @ expm_hermitian(hmat, 1j * tt)
        assert np.linalg.norm(u - np.eye(4)) <= 1e-10


def _prop_gates(rng, n_cases):
    for _ in range(n_cases):
        th = rng.standard_normal(15)
        u = build_su4(th)
        assert np.linalg.norm(u.conj().T @ u - np.eye(4)) <= 1e-10
        delta = 1e-6 * rng.standard_normal(15)
        assert np.linalg.norm(build_su4(th + delta) - u) <= 20 * np.linalg.norm(delta)
        v = build_low_rz(rng.standard_normal(3))
        assert np.linalg.norm(v.conj().T @ v - np.eye(4)) <= 1e-10
    circ = ParamCircuit(
        [GateLayer.from_params(l % 2, "su4", rng.standard_normal(15)) for l in range(4)]
    )
    merged = merge_adjacent_layers(circ)
    assert merge_adjacent_layers(merged).depth == merged.depth
    assert circuit_from_json(circuit_to_json(circ)).depth == circ.depth


def _prop_imps(rng, n_cases):
    for i in range(n_cases):
        psi1 = normalize(random_imps(2, 9000 + i))
        psi2 = normalize(random_imps(2, 19000 + i))
        f12 = local_fidelity(psi1, psi2)
        f21 = local_fidelity(psi2, psi1)
        assert abs(f12 - f21) <= 1e-10
        # warm-start correctness on the self transfer operator
        op = TransferOperator(psi1, psi1)
        cold = leading_eigenvalue(op)
        warm = leading_eigenvalue(op, warm_start=rng.standard_normal(op.dim))
        assert abs(abs(cold.value) - abs(warm.value)) <= 1e-10
        # gauge invariance: insert G, G^-1 on the intra-cell bond
        g = np.eye(2) + 0.3 * rng.standard_normal((2, 2))
        while np.linalg.cond(g) > 10:
            g = np.eye(2) + 0.3 * rng.standard_normal((2, 2))
        ginv = np.linalg.inv(g)
        w = psi1.bond_ab
        site_a = np.einsum("lam,mn->lan", psi1.site_a, g)
        site_b = np.einsum("m,mn,n,nbr->mbr", 1.0 / w, ginv, w, psi1.site_b)
        gauged = InfiniteMPS(site_a, site_b, psi1.bond_ab, psi1.bond_ba)
        assert abs(local_fidelity(gauged, psi2) - f12) <= 1e-8


def _prop_ftcount(rng, n_cases):
    model = TCountModel()
    for _ in range(n_cases):
        theta = rng.uniform(-20, 20)
        r = _reduce_angle(theta)
        assert -np.pi < r <= np.pi + 1e-12
        assert abs(np.exp(1j * r) - np.exp(1j * theta)) <= 1e-9
        eps1, eps2 = sorted(rng.uniform(1e-8, 1e-1, size=2))
        assert model.t_count(eps1) >= model.t_count(eps2)
        inv_a = RzInventory([(rng.uniform(0, np.pi), 0.5)])
        inv_b = RzInventory([(rng.uniform(0, np.pi), 1.0)])
        joint = t_count_per_qubit(inv_a.extend(inv_b), eps1)
        split = t_count_per_qubit(inv_a, eps1) + t_count_per_qubit(inv_b, eps1)
        assert abs(joint - split) <= 1e-9
        assert is_clifford_angle(float(rng.integers(-4, 5)) * np.pi / 2)
    pts = [(1.0, 1.0), (2.0, 0.5), (3.0, 0.7)]
    base = pareto_flags(pts)
    assert pareto_flags(pts + [(3.0, 0.7)])[:3] == base


def _prop_finite(rng, n_cases):
    n = 8
    overlaps = []
    for i in range(n_cases):
        r1 = haar_state(n, np.random.default_rng(5000 + i))
        r1_again = haar_state(n, np.random.default_rng(5000 + i))
        assert np.array_equal(r1, r1_again)
        r2 = haar_state(n, np.random.default_rng(6000 + i))
        overlaps.append(abs(np.vdot(r1, r2)) ** 2)
    mean = np.mean(overlaps)
    se = np.std(overlaps) / np.sqrt(len(overlaps))
    assert abs(mean - 2.0 ** -n) <= 5 * se


def test_c12_property_suites():
    t0 = time.time()
    rng = np.random.default_rng(12)
    counts = {
        "tensors": 300,
        "gates": 300,
        "imps": 100,
        "ftcount": 300,
        "finite": 100,
    }
    _prop_tensors(rng, counts["tensors"])
    _prop_gates(rng, counts["gates"])
    _prop_imps(rng, counts["imps"])
    _prop_ftcount(rng, counts["ftcount"])
    _prop_finite(rng, counts["finite"])
    total = sum(counts.values())
    elapsed = time.time() - t0
    _report(
        12,
        "randomized property suites",
        total >= 1000 and elapsed < 900.0,
        f"{total} cases, {elapsed:.0f}s",
    )
