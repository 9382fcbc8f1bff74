"""Parameterized 2-qubit gates and translation-invariant layer stacks.

Conventions, fixed once for the whole package:

* Rotation angles follow ``R_P(theta) = exp(-i theta/2 * P)``.
* The 15-parameter gate family uses the 2-qubit Pauli products as
  generators, ordered lexicographically over ``{I, X, Y, Z}`` pairs with
  the identity pair removed: IX, IY, IZ, XI, XX, ..., ZZ.
* A layer with parity 0 acts on qubit pairs ``[2r, 2r+1]``; parity 1 acts
  on ``[2r-1, 2r]``.  Circuits are read bottom-up: ``layers[0]`` is applied
  first.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg

from .tensors import expm_hermitian

__all__ = [
    "PAULI",
    "SU4_GENERATORS",
    "SU4_LABELS",
    "GateLayer",
    "ParamCircuit",
    "build_su4",
    "build_low_rz",
    "su4_params_from_unitary",
    "low_rz_unitary_parts",
    "identity_circuit",
    "merge_adjacent_layers",
    "count_resources",
    "circuit_to_json",
    "circuit_from_json",
]

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

SU4_LABELS = [
    a + b for a in "IXYZ" for b in "IXYZ" if a + b != "II"
]
SU4_GENERATORS = [np.kron(PAULI[l[0]], PAULI[l[1]]) for l in SU4_LABELS]

N_PARAMS = {"su4": 15, "lowrz": 3, "raw": 0}


def build_su4(params: Sequence[float]) -> np.ndarray:
    """exp(-i sum_k theta_k G_k) over the 15 two-qubit Pauli generators."""
    params = np.asarray(params, dtype=float)
    if params.shape != (15,):
        raise ValueError(f"expected 15 parameters, got shape {params.shape}")
    gen = np.zeros((4, 4), dtype=complex)
    for theta, g in zip(params, SU4_GENERATORS):
        gen += theta * g
    return expm_hermitian(gen, -1j)


def su4_params_from_unitary(u: np.ndarray) -> np.ndarray:
    """Invert :func:`build_su4` via the principal matrix logarithm.

    The identity (global phase) component is dropped; ``build_su4`` of the
    result reproduces ``u`` up to that phase.
    """
    u = np.asarray(u, dtype=complex)
    herm = 1j * scipy.linalg.logm(u)
    herm = (herm + herm.conj().T) / 2.0
    return np.array([np.trace(g @ herm).real / 4.0 for g in SU4_GENERATORS])


def _rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def low_rz_unitary_parts(params: Sequence[float]):
    """The ZZ-rotation and the two X rotations of the 3-angle gate family."""
    t1, t2, t3 = params
    zz = np.exp(-0.5j * t1 * np.array([1.0, -1.0, -1.0, 1.0]))
    return np.diag(zz), _rx(t2), _rx(t3)


def build_low_rz(params: Sequence[float]) -> np.ndarray:
    """``R_zz(t1) (R_x(t2) x R_x(t3))`` with ``R_P(t) = exp(-i t/2 P)``."""
    params = np.asarray(params, dtype=float)
    if params.shape != (3,):
        raise ValueError(f"expected 3 parameters, got shape {params.shape}")
    rzz, rx2, rx3 = low_rz_unitary_parts(params)
    return rzz @ np.kron(rx2, rx3)


_BUILDERS = {"su4": build_su4, "lowrz": build_low_rz}


@dataclass(frozen=True)
class GateLayer:
    """One infinite translation-invariant layer of identical 2-qubit gates."""

    parity: int
    unitary: np.ndarray
    family: str = "raw"
    params: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.parity not in (0, 1):
            raise ValueError("parity must be 0 or 1")
        if self.family not in N_PARAMS:
            raise ValueError(f"unknown gate family {self.family!r}")
        if self.family != "raw" and (
            self.params is None or len(self.params) != N_PARAMS[self.family]
        ):
            raise ValueError(f"{self.family} layer needs {N_PARAMS[self.family]} params")

    @classmethod
    def from_params(cls, parity: int, family: str, params: Sequence[float]) -> "GateLayer":
        params = np.asarray(params, dtype=float)
        return cls(parity, _BUILDERS[family](params), family, params)

    @property
    def n_params(self) -> int:
        return N_PARAMS[self.family]

    def with_params(self, params: Sequence[float]) -> "GateLayer":
        return GateLayer.from_params(self.parity, self.family, params)

    def adjoint_unitary(self) -> np.ndarray:
        return self.unitary.conj().T


@dataclass(frozen=True)
class ParamCircuit:
    """Stack of gate layers, applied in list order (index 0 first)."""

    layers: tuple
    gate_family: str = "su4"

    def __init__(self, layers, gate_family="su4"):
        object.__setattr__(self, "layers", tuple(layers))
        object.__setattr__(self, "gate_family", gate_family)

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def is_alternating(self) -> bool:
        return all(
            self.layers[i].parity != self.layers[i + 1].parity
            for i in range(len(self.layers) - 1)
        )

    @property
    def n_params(self) -> int:
        return sum(l.n_params for l in self.layers)

    def params_vector(self) -> np.ndarray:
        parts = [l.params for l in self.layers if l.params is not None]
        if not parts:
            return np.zeros(0)
        return np.concatenate(parts)

    def with_params(self, x: Sequence[float]) -> "ParamCircuit":
        x = np.asarray(x, dtype=float)
        if len(x) != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters, got {len(x)}")
        new_layers = []
        pos = 0
        for l in self.layers:
            if l.n_params == 0:
                new_layers.append(l)
            else:
                new_layers.append(l.with_params(x[pos : pos + l.n_params]))
                pos += l.n_params
        return ParamCircuit(new_layers, self.gate_family)


def identity_circuit(depth: int, family: str = "su4", first_parity: int = 0) -> ParamCircuit:
    """All-zero-parameter circuit of alternating parities."""
    layers = [
        GateLayer.from_params((first_parity + l) % 2, family, np.zeros(N_PARAMS[family]))
        for l in range(depth)
    ]
    return ParamCircuit(layers, family)


def merge_adjacent_layers(c: ParamCircuit) -> ParamCircuit:
    """Fuse consecutive layers of equal parity into single raw-unitary layers.

    The total unitary action is unchanged; the output parities strictly
    alternate.  Idempotent.
    """
    merged: List[GateLayer] = []
    for layer in c.layers:
        if merged and merged[-1].parity == layer.parity:
            prev = merged[-1]
            merged[-1] = GateLayer(layer.parity, layer.unitary @ prev.unitary, "raw")
        else:
            merged.append(layer)
    return ParamCircuit(merged, c.gate_family)


def count_resources(c: ParamCircuit) -> dict:
    """Two-qubit-layer and rotation accounting for one translation period.

    Counts are per qubit, with the 2-qubit translation period as the unit;
    each qubit touches one gate per layer, and a KAK decomposition needs at
    most 3 CNOTs per gate (3/2 per qubit per layer).
    """
    merged = merge_adjacent_layers(c)
    n_layers = merged.depth
    rz_per_gate = {"su4": 15, "lowrz": 3, "raw": 15}
    rz = sum(Fraction(rz_per_gate[l.family], 2) for l in merged.layers)
    return {
        "su4_layers": n_layers,
        "cnot_per_qubit_upper_bound": Fraction(3, 2) * n_layers,
        "rz_per_qubit_per_period": rz,
    }


def circuit_to_json(c: ParamCircuit) -> dict:
    layers = []
    for l in c.layers:
        entry = {"parity": l.parity, "family": l.family}
        if l.params is not None:
            entry["params"] = [float(p) for p in l.params]
        else:
            flat = l.unitary.reshape(-1)
            entry["unitary"] = {"re": flat.real.tolist(), "im": flat.imag.tolist()}
        layers.append(entry)
    return {
        "gateFamily": c.gate_family,
        "firstParity": c.layers[0].parity if c.layers else 0,
        "layers": layers,
    }


def circuit_from_json(obj: dict) -> ParamCircuit:
    layers = []
    for entry in obj["layers"]:
        family = entry.get("family", "raw")
        if "params" in entry:
            layers.append(GateLayer.from_params(entry["parity"], family, entry["params"]))
        else:
            u = (
                np.asarray(entry["unitary"]["re"]) + 1j * np.asarray(entry["unitary"]["im"])
            ).reshape(4, 4)
            layers.append(GateLayer(entry["parity"], u, "raw"))
    return ParamCircuit(layers, obj.get("gateFamily", "su4"))
