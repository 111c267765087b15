"""Small-dimensional pure-state linear algebra.

Kets are plain 1-D complex numpy arrays. A bipartite state stores its
amplitudes with the composite index ``k = i_b * dim_a + i_a``: the qubit
(Bob, first factor) is the slow index, the qutrit side (Alice, second
factor) the fast one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence, Union

import numpy as np

ATOL = 1e-12

#: label of the completion outcome of an incomplete basis
NO_DETECT = "⊥"

Ket = np.ndarray
Label = Hashable


def ket(*amplitudes: complex) -> Ket:
    return np.asarray(amplitudes, dtype=complex)


def basis_ket(dim: int, index: int) -> Ket:
    out = np.zeros(dim, dtype=complex)
    out[index] = 1.0
    return out


def tensor(u: Ket, v: Ket) -> Ket:
    """Kronecker product with ``out[i * len(v) + j] = u[i] * v[j]``."""
    return np.kron(np.asarray(u, dtype=complex), np.asarray(v, dtype=complex))


def norm_sq(v: Ket) -> float:
    return float(np.vdot(v, v).real)


def is_normalized(v: Ket, atol: float = ATOL) -> bool:
    return abs(norm_sq(v) - 1.0) <= atol


@dataclass(frozen=True)
class BipartiteState:
    dim_b: int
    dim_a: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.dim_b != 2 or self.dim_a not in (2, 3, 4):
            raise ValueError(f"unsupported subsystem dims ({self.dim_b}, {self.dim_a})")
        if amps.size != self.dim_b * self.dim_a:
            raise ValueError(
                f"expected {self.dim_b * self.dim_a} amplitudes, got {amps.size}"
            )
        if not is_normalized(amps):
            raise ValueError(f"state not normalized: norm^2 = {norm_sq(amps)!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_branches(cls, branches: Sequence[tuple[complex, Ket]]) -> "BipartiteState":
        """Build ``sum_l c_l |l>_B |phi_l>_A`` from ``[(c_0, phi_0), (c_1, phi_1)]``."""
        dim_a = len(branches[0][1])
        amps = sum(
            c * tensor(basis_ket(2, l), phi) for l, (c, phi) in enumerate(branches)
        )
        return cls(2, dim_a, amps)

    @classmethod
    def product(cls, bob: Ket, alice: Ket) -> "BipartiteState":
        return cls(len(bob), len(alice), tensor(bob, alice))

    def matrix(self) -> np.ndarray:
        """Amplitudes as a ``(dim_b, dim_a)`` array."""
        return self.amplitudes.reshape(self.dim_b, self.dim_a)

    def with_phase(self, phase: float) -> "BipartiteState":
        return BipartiteState(self.dim_b, self.dim_a, np.exp(1j * phase) * self.amplitudes)


@dataclass(frozen=True)
class MeasurementBasis:
    """Labeled orthonormal kets, optionally completed by a no-detect outcome.

    When fewer kets than ``ambient_dim`` are listed, the projector onto the
    orthogonal complement is an extra outcome labeled ``completion_label``.
    """

    ambient_dim: int
    vectors: tuple[tuple[Label, Ket], ...]
    completion_label: Label | None = None

    def __post_init__(self):
        vecs = tuple((label, np.asarray(v, dtype=complex)) for label, v in self.vectors)
        object.__setattr__(self, "vectors", vecs)
        for label, v in vecs:
            if v.shape != (self.ambient_dim,):
                raise ValueError(f"ket {label!r} has shape {v.shape}, ambient dim {self.ambient_dim}")
        gram = self.matrix() @ self.matrix().conj().T
        err = np.abs(gram - np.eye(len(vecs))).max() if vecs else 0.0
        if err > ATOL:
            raise ValueError(f"basis is not orthonormal (max Gram error {err:.3e})")
        labels = [label for label, _ in vecs]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate outcome labels")
        if len(vecs) < self.ambient_dim and self.completion_label is None:
            raise ValueError("incomplete basis requires a completion label")
        if len(vecs) > self.ambient_dim:
            raise ValueError("more vectors than the ambient dimension")

    @property
    def is_complete(self) -> bool:
        return len(self.vectors) == self.ambient_dim

    def matrix(self) -> np.ndarray:
        """Rows are the listed kets."""
        if not self.vectors:
            return np.zeros((0, self.ambient_dim), dtype=complex)
        return np.array([v for _, v in self.vectors])

    def labels(self) -> list[Label]:
        out = [label for label, _ in self.vectors]
        if not self.is_complete:
            out.append(self.completion_label)
        return out

    def __getitem__(self, label: Label) -> Ket:
        for lab, v in self.vectors:
            if lab == label:
                return v
        raise KeyError(label)


def as_basis(labels_and_kets: Iterable[tuple[Label, Ket]], completion_label: Label | None = None) -> MeasurementBasis:
    pairs = tuple(labels_and_kets)
    return MeasurementBasis(len(pairs[0][1]), pairs, completion_label)


@dataclass(frozen=True)
class StateEnsemble:
    members: tuple[tuple[float, BipartiteState], ...]

    def __post_init__(self):
        members = tuple((float(w), s) for w, s in self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise ValueError("empty ensemble")
        if any(w < 0 for w, _ in members):
            raise ValueError("negative ensemble weight")
        total = sum(w for w, _ in members)
        if abs(total - 1.0) > ATOL:
            raise ValueError(f"ensemble weights sum to {total!r}")
        dims = {(s.dim_b, s.dim_a) for _, s in members}
        if len(dims) != 1:
            raise ValueError(f"ensemble members have mixed dims {sorted(dims)}")

    @classmethod
    def pure(cls, state: BipartiteState) -> "StateEnsemble":
        return cls(((1.0, state),))

    @property
    def dims(self) -> tuple[int, int]:
        s = self.members[0][1]
        return s.dim_b, s.dim_a


Supply = Union[BipartiteState, StateEnsemble]


def as_ensemble(supply: Supply) -> StateEnsemble:
    if isinstance(supply, StateEnsemble):
        return supply
    return StateEnsemble.pure(supply)


def born_probability(state: BipartiteState, bob_vec: Ket, alice_vec: Ket) -> float:
    """``|(<bob_vec| (x) <alice_vec|) |state>|^2``."""
    bob_vec = np.asarray(bob_vec, dtype=complex)
    alice_vec = np.asarray(alice_vec, dtype=complex)
    if bob_vec.shape != (state.dim_b,) or alice_vec.shape != (state.dim_a,):
        raise ValueError(
            f"vector dims ({bob_vec.size}, {alice_vec.size}) do not match state "
            f"dims ({state.dim_b}, {state.dim_a})"
        )
    amp = bob_vec.conj() @ state.matrix() @ alice_vec.conj()
    return float(abs(amp) ** 2)


def _residual(basis: MeasurementBasis, v: np.ndarray) -> np.ndarray:
    """Component of ``v`` (along axis 0) outside the span of the listed kets."""
    m = basis.matrix()
    return v - m.T @ (m.conj() @ v)


def _pure_joint(state: BipartiteState, basis_b: MeasurementBasis, basis_a: MeasurementBasis) -> dict:
    psi = state.matrix()
    # unnormalized Alice-side ket left behind by each Bob outcome
    rows = {label: v.conj() @ psi for label, v in basis_b.vectors}
    if not basis_b.is_complete:
        # (I - P_B) psi; its Alice-side content is still a dim_b x dim_a block
        rows[basis_b.completion_label] = _residual(basis_b, psi)

    out = {}
    for lb in basis_b.labels():
        cond = rows[lb]
        for la, va in basis_a.vectors:
            amp = cond @ va.conj()
            out[(lb, la)] = float(np.sum(np.abs(amp) ** 2))
        if not basis_a.is_complete:
            rest = _residual(basis_a, np.asarray(cond).T)
            out[(lb, basis_a.completion_label)] = float(np.sum(np.abs(rest) ** 2))
    return out


def joint_distribution(
    supply: Supply, basis_b: MeasurementBasis, basis_a: MeasurementBasis
) -> dict[tuple[Label, Label], float]:
    """Outcome distribution of measuring Bob in ``basis_b`` and Alice in ``basis_a``.

    Keys are ``(bob_label, alice_label)`` in basis order, completion outcomes
    last. Ensemble members are mixed with their weights.
    """
    ens = as_ensemble(supply)
    dim_b, dim_a = ens.dims
    if basis_b.ambient_dim != dim_b or basis_a.ambient_dim != dim_a:
        raise ValueError(
            f"basis dims ({basis_b.ambient_dim}, {basis_a.ambient_dim}) do not match "
            f"supply dims ({dim_b}, {dim_a})"
        )
    total: dict = {}
    for w, state in ens.members:
        for key, p in _pure_joint(state, basis_b, basis_a).items():
            total[key] = total.get(key, 0.0) + w * p
    return total


def sample_outcome(dist: Mapping[Label, float], rng: np.random.Generator) -> Label:
    """Inverse-CDF draw over the mapping's iteration order."""
    return sample_outcomes(dist, rng, 1)[0]


def sample_outcomes(dist: Mapping[Label, float], rng: np.random.Generator, size: int) -> list:
    labels = list(dist)
    cdf = np.cumsum([dist[k] for k in labels])
    idx = np.searchsorted(cdf, rng.random(size) * cdf[-1], side="right")
    idx = np.minimum(idx, len(labels) - 1)
    return [labels[i] for i in idx]
