"""Gate-level preparation of the qubit-qutrit family: ``U (H (x) R) |0>|0>``."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .quantum_core import ATOL, BipartiteState, basis_ket, tensor
from .state_families import general_coefficients

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)


def rx(t: float, sign: int = 1) -> np.ndarray:
    c, s = math.cos(t), sign * math.sin(t)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])


def ry(t: float, sign: int = 1) -> np.ndarray:
    c, s = math.cos(t), sign * math.sin(t)
    return np.array([[c, 0, -s], [0, 1, 0], [s, 0, c]])


def rz(t: float, sign: int = 1) -> np.ndarray:
    c, s = math.cos(t), sign * math.sin(t)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])


@dataclass(frozen=True)
class QutritRotation:
    theta: float
    gamma: float
    delta: float
    matrix: np.ndarray
    signs: tuple[int, int, int] = (1, 1, 1)


@dataclass(frozen=True)
class EntanglerU:
    matrix: np.ndarray


def _first_column_ok(r: np.ndarray, theta: float, gamma: float, delta: float) -> bool:
    target = general_coefficients(theta, gamma, delta)[0]
    return float(np.abs(r[:, 0] - target).max()) <= ATOL


def build_rotation(theta: float, gamma: float, delta: float, signs=None) -> QutritRotation:
    """``R = Rx(theta) Ry(gamma) Rz(delta)`` whose first column is ``phi0``.

    ``signs`` flips the sine sign of each axis rotation; left as ``None`` the
    default convention is tried first and the remaining seven are searched.
    """
    candidates = [tuple(signs)] if signs is not None else [(1, 1, 1)] + [
        s for s in itertools.product((1, -1), repeat=3) if s != (1, 1, 1)
    ]
    for sx, sy, sz in candidates:
        r = rx(theta, sx) @ ry(gamma, sy) @ rz(delta, sz)
        if _first_column_ok(r, theta, gamma, delta):
            return QutritRotation(theta, gamma, delta, r, (sx, sy, sz))
    raise ValueError("no axis-sign convention reproduces the phi0 column")


def build_entangler() -> EntanglerU:
    """``U`` on ``C^2 (x) C^3``: identity on ``|0.>``; on ``|1.>`` swap 0<->1 and negate 2."""
    u = np.zeros((6, 6), dtype=complex)

    def k(b, a):
        return b * 3 + a

    u[k(0, 0), k(0, 0)] = 1
    u[k(0, 1), k(0, 1)] = 1
    u[k(0, 2), k(0, 2)] = 1
    u[k(1, 1), k(1, 0)] = 1
    u[k(1, 0), k(1, 1)] = 1
    u[k(1, 2), k(1, 2)] = -1
    return EntanglerU(u)


def circuit_unitary(theta: float, gamma: float, delta: float) -> np.ndarray:
    r = build_rotation(theta, gamma, delta).matrix
    return build_entangler().matrix @ np.kron(HADAMARD, r)


def prepare(theta: float, gamma: float, delta: float) -> BipartiteState:
    start = tensor(basis_ket(2, 0), basis_ket(3, 0))
    return BipartiteState(2, 3, circuit_unitary(theta, gamma, delta) @ start)


def fidelity(u: BipartiteState, v: BipartiteState) -> float:
    """``|<u|v>|``; equal to 1 iff the states agree up to global phase."""
    return float(abs(np.vdot(u.amplitudes, v.amplitudes)))


def is_unitary(m: np.ndarray, atol: float = ATOL) -> bool:
    return float(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max()) <= atol
