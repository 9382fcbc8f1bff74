"""Spin-chain Hamiltonians as 2-site bond terms, and Trotter-step circuits.

Single-site fields are split evenly onto the two adjacent bonds (half to
each), which keeps the bond-gate picture translation invariant.  The energy
density per site is ``(<bond_even> + <bond_odd>) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.integrate

from .gates import PAULI, GateLayer, ParamCircuit, merge_adjacent_layers
from .tensors import expm_hermitian

__all__ = [
    "UnitCellHamiltonian",
    "TrotterSpec",
    "tfim",
    "thirring",
    "xxz",
    "trotter_circuit",
    "trotter_zz_x_circuit",
    "tfim_energy_density_exact",
    "SUZUKI_P4",
]

# 4th-order Suzuki fractal coefficient: S2(p*dt)^2 S2((1-4p)*dt) S2(p*dt)^2.
SUZUKI_P4 = 1.0 / (4.0 - 4.0 ** (1.0 / 3.0))

_I2 = PAULI["I"]
_X = PAULI["X"]
_Y = PAULI["Y"]
_Z = PAULI["Z"]


@dataclass(frozen=True)
class UnitCellHamiltonian:
    """Bond terms on the two inequivalent bonds of a 2-site unit cell."""

    bond_even: np.ndarray  # bond [2r, 2r+1]
    bond_odd: np.ndarray   # bond [2r+1, 2r+2]
    name: str
    params: dict

    def __post_init__(self):
        for term in (self.bond_even, self.bond_odd):
            if np.linalg.norm(term - term.conj().T) > 1e-12:
                raise ValueError("bond terms must be Hermitian")

    def bond(self, parity: int) -> np.ndarray:
        return self.bond_even if parity == 0 else self.bond_odd


@dataclass(frozen=True)
class TrotterSpec:
    order: int
    trotter_number: int
    total_time: float

    def __post_init__(self):
        if self.order not in (1, 2, 4):
            raise ValueError("order must be 1, 2 or 4")
        if self.trotter_number < 1:
            raise ValueError("trotter_number must be >= 1")


def tfim(J: float, h: float) -> UnitCellHamiltonian:
    """Ising chain with transverse field: -J sum ZZ - h sum X."""
    bond = -J * np.kron(_Z, _Z) - (h / 2.0) * (np.kron(_X, _I2) + np.kron(_I2, _X))
    return UnitCellHamiltonian(bond, bond.copy(), "tfim", {"J": J, "h": h})


def xxz(Jx: float, Jz: float) -> UnitCellHamiltonian:
    bond = Jx * (np.kron(_X, _X) + np.kron(_Y, _Y)) + Jz * np.kron(_Z, _Z)
    return UnitCellHamiltonian(bond, bond.copy(), "xxz", {"Jx": Jx, "Jz": Jz})


def thirring(m: float, g: float, a: float = 1.0) -> UnitCellHamiltonian:
    """Staggered-fermion lattice Hamiltonian of the massive Thirring model.

    Even sites carry the ``+m/2 (1 - Z)`` mass term, odd sites the opposite
    sign, so the two bond terms differ by exactly the staggered mass piece.
    """
    if a <= 0:
        raise ValueError("lattice spacing a must be positive")
    sp = (_X + 1j * _Y) / 2.0
    sm = (_X - 1j * _Y) / 2.0
    hop = (1j / (2.0 * a)) * (np.kron(sp, sm) - np.kron(sm, sp))
    n_op = _I2 - _Z  # 2 * occupation of the "down" state
    inter = (g / (4.0 * a)) * np.kron(n_op, n_op)
    mass_site = (m / 2.0) * n_op
    # Half of each site term goes to each adjacent bond; even sites have
    # (-1)^i = +1, odd sites -1.
    bond_even = hop + inter + 0.5 * (np.kron(mass_site, _I2) - np.kron(_I2, mass_site))
    bond_odd = hop + inter + 0.5 * (-np.kron(mass_site, _I2) + np.kron(_I2, mass_site))
    return UnitCellHamiltonian(bond_even, bond_odd, "thirring", {"m": m, "g": g, "a": a})


def _bond_layer(h: UnitCellHamiltonian, parity: int, dt: complex) -> GateLayer:
    """Layer of ``exp(-i dt * bond_term)`` gates (``dt`` may be imaginary)."""
    return GateLayer(parity, expm_hermitian(h.bond(parity), -1j * dt), "raw")


def _strang_step(h: UnitCellHamiltonian, dt: float) -> list:
    return [
        _bond_layer(h, 0, dt / 2.0),
        _bond_layer(h, 1, dt),
        _bond_layer(h, 0, dt / 2.0),
    ]


def _suzuki4_step(h: UnitCellHamiltonian, dt: float) -> list:
    p = SUZUKI_P4
    layers = []
    for frac in (p, p, 1.0 - 4.0 * p, p, p):
        layers.extend(_strang_step(h, frac * dt))
    return layers


def trotter_circuit(h: UnitCellHamiltonian, spec: TrotterSpec, merge: bool = True) -> ParamCircuit:
    """Product-formula circuit for ``exp(-i H t)`` built from bond-term layers.

    Merged layer counts: 2k (1st order), 2k+1 (2nd), 10k+1 (4th).
    """
    dt = spec.total_time / spec.trotter_number
    layers = []
    for _ in range(spec.trotter_number):
        if spec.order == 1:
            layers.extend([_bond_layer(h, 0, dt), _bond_layer(h, 1, dt)])
        elif spec.order == 2:
            layers.extend(_strang_step(h, dt))
        else:
            layers.extend(_suzuki4_step(h, dt))
    c = ParamCircuit(layers, "su4")
    return merge_adjacent_layers(c) if merge else c


def trotter_zz_x_circuit(J: float, h: float, t: float, k: int, order: int = 1) -> ParamCircuit:
    """Trotterization of the Ising chain split as two-body ZZ plus one-body X.

    Unlike :func:`trotter_circuit`, the transverse field is kept as its own
    single-qubit rotation layer, so every layer is in the 3-angle low-Rz
    family: a ZZ layer is ``(theta_zz, 0, 0)`` and an X layer ``(0, tx, tx)``.
    One first-order step is exactly two alternating-parity low-Rz layers.
    """
    dt = t / k
    layers: list = []

    def push(parity, params):
        # Fold compatible consecutive low-Rz layers of equal parity: an
        # X-only layer followed by anything adds into its R_x angles, and a
        # trailing ZZ-only layer adds into the R_zz angle.
        params = list(params)
        if layers and layers[-1].parity == parity:
            prev = layers[-1].params
            if prev[0] == 0.0:
                merged = [params[0], params[1] + prev[1], params[2] + prev[2]]
                layers[-1] = GateLayer.from_params(parity, "lowrz", merged)
                return
            if params[1] == 0.0 and params[2] == 0.0:
                merged = [prev[0] + params[0], prev[1], prev[2]]
                layers[-1] = GateLayer.from_params(parity, "lowrz", merged)
                return
        layers.append(GateLayer.from_params(parity, "lowrz", params))

    def zz_angle(delta):
        # exp(+i delta J ZZ) per bond is R_zz(-2 J delta)
        return -2.0 * J * delta

    def x_angle(delta):
        # exp(+i delta h X) per site is R_x(-2 h delta)
        return -2.0 * h * delta

    def first_order_step(delta):
        # exp(-i delta H_X) first, then both ZZ parities; the X rotations
        # ride along on the parity-1 layer (one 1q gate per qubit).
        push(1, [zz_angle(delta), x_angle(delta), x_angle(delta)])
        push(0, [zz_angle(delta), 0.0, 0.0])

    def strang_step(delta):
        push(1, [zz_angle(delta), x_angle(delta / 2.0), x_angle(delta / 2.0)])
        push(0, [zz_angle(delta), 0.0, 0.0])
        push(1, [0.0, x_angle(delta / 2.0), x_angle(delta / 2.0)])

    for _ in range(k):
        if order == 1:
            first_order_step(dt)
        elif order == 2:
            strang_step(dt)
        elif order == 4:
            p = SUZUKI_P4
            for frac in (p, p, 1.0 - 4.0 * p, p, p):
                strang_step(frac * dt)
        else:
            raise ValueError("order must be 1, 2 or 4")
    return ParamCircuit(layers, "lowrz")


def tfim_energy_density_exact(J: float, h: float) -> float:
    """Ground-state energy per site of the transverse-field Ising chain.

    Numerical quadrature of the free-fermion dispersion,
    ``-(1/2pi) * integral sqrt(J^2 + h^2 - 2 J h cos k) dk``.
    """
    def eps(k):
        return math.sqrt(J * J + h * h - 2.0 * J * h * math.cos(k))

    val, _ = scipy.integrate.quad(eps, -math.pi, math.pi, limit=400, epsabs=1e-13, epsrel=1e-13)
    return -val / (2.0 * math.pi)
