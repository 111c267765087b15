"""Parametrized qubit-qutrit states, measurement triads and OAM encodings.

Qutrit kets are written over the cyclic window ``|i>, |i+1>, |i+2>`` with
indices taken mod 3. Angles are radians.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import singledispatch

import numpy as np

from .quantum_core import (
    ATOL,
    NO_DETECT,
    BipartiteState,
    Ket,
    MeasurementBasis,
    StateEnsemble,
)

SQRT1_2 = 1.0 / math.sqrt(2.0)


class Kind(str, enum.Enum):
    GENERAL_QUTRIT = "general"
    SAME_SUBSPACE = "same"
    DIFF_SUBSPACE = "diff"
    PRODUCT_PAIR = "product"


@dataclass(frozen=True)
class FamilyParams:
    theta: float
    gamma: float = 0.0
    delta: float = 0.0
    offset_i: int = 0
    kind: Kind = Kind.GENERAL_QUTRIT

    def __post_init__(self):
        for name in ("theta", "gamma", "delta"):
            value = getattr(self, name)
            if not (-ATOL <= value <= math.pi / 2 + ATOL):
                raise ValueError(f"{name}={value!r} outside [0, pi/2]")
        if self.offset_i not in (0, 1, 2):
            raise ValueError(f"offset_i must be 0, 1 or 2, got {self.offset_i!r}")


def qutrit(c0: float, c1: float, c2: float, offset_i: int = 0) -> Ket:
    """``c0|i> + c1|i+1> + c2|i+2>`` with mod-3 wraparound."""
    out = np.zeros(3, dtype=complex)
    for j, c in enumerate((c0, c1, c2)):
        out[(offset_i + j) % 3] = c
    return out


def entangled(phi0: Ket, phi1: Ket) -> BipartiteState:
    """``(|0>|phi0> + |1>|phi1>)/sqrt(2)``."""
    return BipartiteState.from_branches([(SQRT1_2, phi0), (SQRT1_2, phi1)])


# -- general two-angle qutrit family -------------------------------------------------


def general_coefficients(theta: float, gamma: float, delta: float) -> tuple[np.ndarray, np.ndarray]:
    st, ct = math.sin(theta), math.cos(theta)
    sg, cg = math.sin(gamma), math.cos(gamma)
    sd, cd = math.sin(delta), math.cos(delta)
    u = cg * cd
    v = ct * sd - st * sg * cd
    w = st * sd + ct * sg * cd
    return np.array([u, v, w]), np.array([v, u, -w])


def general_branches(p: FamilyParams) -> tuple[Ket, Ket]:
    c0, c1 = general_coefficients(p.theta, p.gamma, p.delta)
    return qutrit(*c0, p.offset_i), qutrit(*c1, p.offset_i)


def general_qutrit_state(p: FamilyParams) -> BipartiteState:
    if p.kind is not Kind.GENERAL_QUTRIT:
        raise ValueError(f"expected GENERAL_QUTRIT params, got {p.kind}")
    return entangled(*general_branches(p))


# -- same-subspace / different-subspace / product families ---------------------------


def same_subspace_branches(theta: float, offset_i: int = 0) -> tuple[Ket, Ket]:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return qutrit(c, s, 0.0, offset_i), qutrit(c, -s, 0.0, offset_i)


def same_subspace_state(theta: float, offset_i: int = 0) -> BipartiteState:
    return entangled(*same_subspace_branches(theta, offset_i))


def diff_subspace_branches(theta: float, offset_i: int = 0) -> tuple[Ket, Ket]:
    c, s = math.cos(theta), math.sin(theta)
    return qutrit(0.0, c, s, offset_i), qutrit(c, 0.0, -s, offset_i)


def diff_subspace_state(theta: float, offset_i: int = 0) -> BipartiteState:
    return entangled(*diff_subspace_branches(theta, offset_i))


def product_ensemble(theta: float, offset_i: int = 0) -> StateEnsemble:
    """Half ``|0>|phi0>``, half ``|1>|phi1>`` with the same-subspace kets."""
    phi0, phi1 = same_subspace_branches(theta, offset_i)
    zero, one = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    return StateEnsemble(
        ((0.5, BipartiteState.product(zero, phi0)), (0.5, BipartiteState.product(one, phi1)))
    )


def qubit_qubit_branches(theta: float) -> tuple[Ket, Ket]:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([c, s], dtype=complex), np.array([c, -s], dtype=complex)


def qubit_qubit_state(theta: float) -> BipartiteState:
    return entangled(*qubit_qubit_branches(theta))


def family_supply(kind: Kind | str, theta: float, offset_i: int = 0) -> StateEnsemble:
    """Game supply for one of the three families compared by the certifier."""
    kind = Kind(kind)
    if kind is Kind.PRODUCT_PAIR:
        return product_ensemble(theta, offset_i)
    if kind is Kind.SAME_SUBSPACE:
        return StateEnsemble.pure(same_subspace_state(theta, offset_i))
    if kind is Kind.DIFF_SUBSPACE:
        return StateEnsemble.pure(diff_subspace_state(theta, offset_i))
    raise ValueError(f"no game supply for kind {kind}")


# -- Bob's qutrit-side game triads ---------------------------------------------------


def game_basis(y: int, offset_i: int = 0) -> MeasurementBasis:
    """Primed (``y=0``, angle pi/8) or double-primed (``y=1``, 3pi/8) triad.

    The printed 1/sqrt(2) prefactor is dropped so the kets are unit vectors.
    Outcome labels are the trit values 0, 1, 2.
    """
    if y not in (0, 1):
        raise ValueError(f"y must be 0 or 1, got {y!r}")
    angle = math.pi / 8 if y == 0 else 3 * math.pi / 8
    c, s = math.cos(angle), math.sin(angle)
    return MeasurementBasis(
        3,
        (
            (0, qutrit(c, s, 0.0, offset_i)),
            (1, qutrit(s, -c, 0.0, offset_i)),
            (2, qutrit(0.0, 0.0, 1.0, offset_i)),
        ),
    )


# -- OAM embeddings -----------------------------------------------------------------

AMBIENT_LABELS = ("H,+1", "V,+1", "H,-1", "V,-1")


@dataclass(frozen=True)
class EncodingMap:
    name: str
    injection: tuple[int, int, int]

    def __post_init__(self):
        if len(set(self.injection)) != 3 or not all(0 <= k < 4 for k in self.injection):
            raise ValueError(f"injection {self.injection} is not injective into 4 levels")

    def matrix(self) -> np.ndarray:
        """4x3 isometry sending logical level ``j`` to ambient ``injection[j]``."""
        iso = np.zeros((4, 3), dtype=complex)
        for j, k in enumerate(self.injection):
            iso[k, j] = 1.0
        return iso


E_HMINUS = EncodingMap("E_Hminus", (0, 1, 2))
E_VMINUS = EncodingMap("E_Vminus", (0, 1, 3))
ENCODINGS = {e.name: e for e in (E_HMINUS, E_VMINUS)}


def other_encoding(enc: EncodingMap) -> EncodingMap:
    return E_VMINUS if enc == E_HMINUS else E_HMINUS


@singledispatch
def embed(obj, enc: EncodingMap):
    """Carry a qutrit-side ket, state, ensemble or basis into the 4-level space."""
    raise TypeError(f"cannot embed {type(obj).__name__}")


@embed.register
def _(obj: np.ndarray, enc: EncodingMap) -> np.ndarray:
    if obj.shape != (3,):
        raise ValueError(f"expected a qutrit ket, got shape {obj.shape}")
    return enc.matrix() @ obj


@embed.register
def _(obj: BipartiteState, enc: EncodingMap) -> BipartiteState:
    if obj.dim_a != 3:
        raise ValueError(f"expected dim_a=3, got {obj.dim_a}")
    return BipartiteState(obj.dim_b, 4, (obj.matrix() @ enc.matrix().T).reshape(-1))


@embed.register
def _(obj: StateEnsemble, enc: EncodingMap) -> StateEnsemble:
    return StateEnsemble(tuple((w, embed(s, enc)) for w, s in obj.members))


@embed.register
def _(obj: MeasurementBasis, enc: EncodingMap) -> MeasurementBasis:
    if obj.ambient_dim != 3:
        raise ValueError(f"expected a 3-level basis, got ambient dim {obj.ambient_dim}")
    return MeasurementBasis(
        4,
        tuple((label, embed(v, enc)) for label, v in obj.vectors),
        obj.completion_label if obj.completion_label is not None else NO_DETECT,
    )
