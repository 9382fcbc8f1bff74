"""Clifford+T accounting for low-R_z circuits.

Rotations are harvested from the R_zz(t1)(R_x(t2) x R_x(t3)) gate family,
Clifford angles (multiples of pi/2) are filtered out, and the remaining
R_z count is priced with a configurable ceil(slope*log2(1/eps) + offset)
model.  Approximation error is modeled by uniform angle perturbations of
size eps rather than explicit Clifford+T sequences; the same model is
applied to every circuit being compared, so ratios remain meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .compile import CostSpec, evaluate_cost
from .gates import GateLayer, ParamCircuit

__all__ = [
    "RzInventory",
    "TCountModel",
    "extract_rz",
    "t_count_per_qubit",
    "perturbed_cost",
    "frontier",
    "pareto_flags",
    "CLIFFORD_ANGLE_TOL",
]

CLIFFORD_ANGLE_TOL = 1e-12


def _reduce_angle(theta: float) -> float:
    """Map an angle into (-pi, pi]."""
    t = math.fmod(theta, 2.0 * math.pi)
    if t > math.pi:
        t -= 2.0 * math.pi
    elif t <= -math.pi:
        t += 2.0 * math.pi
    return t


def is_clifford_angle(theta: float, tol: float = CLIFFORD_ANGLE_TOL) -> bool:
    """True if the rotation is an exact multiple of pi/2 (within tol)."""
    r = math.fmod(abs(theta), math.pi / 2.0)
    return min(r, math.pi / 2.0 - r) <= tol


@dataclass
class RzInventory:
    """Non-Clifford R_z rotations with per-qubit-per-period multiplicities."""

    rotations: List[Tuple[float, Fraction]] = field(default_factory=list)
    clifford_only: List[bool] = field(default_factory=list)  # one flag per layer

    def extend(self, other: "RzInventory") -> "RzInventory":
        return RzInventory(
            self.rotations + other.rotations,
            self.clifford_only + other.clifford_only,
        )

    @property
    def n_rotations(self) -> int:
        return len(self.rotations)


@dataclass(frozen=True)
class TCountModel:
    """T gates per R_z at synthesis precision eps."""

    slope: float = 3.0
    offset: float = 4.0

    def t_count(self, eps: float) -> int:
        if not 0.0 < eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        return max(0, math.ceil(self.slope * math.log2(1.0 / eps) + self.offset))


def extract_rz(c: ParamCircuit) -> RzInventory:
    """Rotation inventory of a low-R_z circuit.

    Each layer contributes one R_zz per bond and one R_x per site, i.e.
    multiplicity 1/2 per qubit per 2-site period for each of its three
    angles.  Clifford angles are dropped from the count (their synthesis
    is exact and T-free).
    """
    if c.gate_family != "lowrz":
        raise ValueError(
            "T-counting requires the lowrz gate family; su4/raw circuits "
            "have no canonical Clifford+R_z decomposition here"
        )
    inv = RzInventory()
    half = Fraction(1, 2)
    for layer in c.layers:
        all_clifford = True
        for theta in layer.params:
            theta = _reduce_angle(float(theta))
            if is_clifford_angle(theta):
                continue
            inv.rotations.append((theta, half))
            all_clifford = False
        inv.clifford_only.append(all_clifford)
    return inv


def t_count_per_qubit(inv: RzInventory, eps: float, model: Optional[TCountModel] = None) -> float:
    """Total T gates per qubit per translation period at precision eps."""
    if model is None:
        model = TCountModel()
    per_rz = model.t_count(eps)
    return float(sum(mult for _, mult in inv.rotations) * per_rz)


def perturbed_cost(c: ParamCircuit, eps: float, spec: CostSpec, seed: int) -> float:
    """Cost after perturbing every non-Clifford angle by uniform(-eps, eps).

    Stands in for synthesizing each R_z to precision eps: the operator-norm
    error of an eps-approximate R_z is bounded by an angle shift of the
    same order.  The draw is deterministic per seed.
    """
    if c.gate_family != "lowrz":
        raise ValueError("perturbed_cost requires the lowrz gate family")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    rng = np.random.default_rng(seed)
    layers = []
    for layer in c.layers:
        params = np.array(layer.params, dtype=float)
        for k in range(len(params)):
            if not is_clifford_angle(_reduce_angle(params[k])):
                params[k] += rng.uniform(-eps, eps)
        layers.append(layer.with_params(params) if eps > 0 else layer)
    pert = ParamCircuit(tuple(layers), c.gate_family)
    return evaluate_cost(pert, spec)


def pareto_flags(points: Sequence[Tuple[float, float]]) -> List[bool]:
    """Lower-left Pareto flags: True if no other point weakly dominates."""
    flags = []
    for i, (ti, ci) in enumerate(points):
        dominated = any(
            (tj <= ti and cj <= ci) and (tj < ti or cj < ci)
            for j, (tj, cj) in enumerate(points)
            if j != i
        )
        flags.append(not dominated)
    return flags


def frontier(
    circuits: Sequence[Tuple[str, ParamCircuit]],
    eps_grid: Sequence[float],
    spec: CostSpec,
    model: Optional[TCountModel] = None,
    seed: int = 0,
    groups: Optional[Dict[str, str]] = None,
) -> List[dict]:
    """T-per-qubit vs perturbed-cost table over an eps grid.

    ``circuits`` is a list of (circuitId, circuit); ``groups`` maps ids to
    a frontier group (default: each id is its own group).  Pareto flags
    are computed within each group.
    """
    if not circuits or not len(eps_grid):
        raise ValueError("circuits and eps_grid must be non-empty")
    if model is None:
        model = TCountModel()
    rows = []
    for cid, circ in circuits:
        inv = extract_rz(circ)
        for j, eps in enumerate(eps_grid):
            rows.append(
                {
                    "circuitId": cid,
                    "family": circ.gate_family,
                    "layers": circ.depth,
                    "eps": float(eps),
                    "tPerQubit": t_count_per_qubit(inv, eps, model),
                    "cost": perturbed_cost(circ, eps, spec, seed + 1000 * j),
                    "group": cid if groups is None else groups.get(cid, cid),
                    "modelSlope": model.slope,
                    "modelOffset": model.offset,
                    "seed": seed,
                }
            )
    for group in {r["group"] for r in rows}:
        members = [r for r in rows if r["group"] == group]
        flags = pareto_flags([(r["tPerQubit"], r["cost"]) for r in members])
        for r, f in zip(members, flags):
            r["paretoFlag"] = bool(f)
    return rows
