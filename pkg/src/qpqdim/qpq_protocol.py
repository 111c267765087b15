"""Raw-key round of the quantum private-query protocol and Alice's guessing odds.

Bob measures his qubit in the computational basis; Alice picks one of two
measurement bases uniformly at random. An outcome on a primed ket of basis
``A_l`` (``phi_l'`` or ``phi_l''``) rules out Bob's bit ``l`` and Alice
guesses ``1 - l``; an outcome on ``phi_l`` itself is inconclusive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quantum_core import (
    ATOL,
    BipartiteState,
    MeasurementBasis,
    Supply,
    as_ensemble,
    basis_ket,
    joint_distribution,
    sample_outcomes,
)
from .state_families import (
    FamilyParams,
    Kind,
    general_branches,
    product_ensemble,
    qubit_qubit_branches,
    qutrit,
    same_subspace_branches,
    same_subspace_state,
)

BOB_BASIS = MeasurementBasis(2, ((0, basis_ket(2, 0)), (1, basis_ket(2, 1))))

# outcome label -> Alice's guess of Bob's bit (None: inconclusive)
GUESS = {
    "phi0": None, "phi0'": 1, "phi0''": 1,
    "phi1": None, "phi1'": 0, "phi1''": 0,
}


@dataclass(frozen=True)
class KeyRoundResult:
    bob_bit: int
    alice_basis: int
    alice_outcome: str
    alice_guess: int | None

    @property
    def correct(self) -> bool:
        return self.alice_guess is not None and self.alice_guess == self.bob_bit


def _triad(label: str, kets) -> MeasurementBasis:
    names = (label, label + "'", label + "''")
    return MeasurementBasis(len(kets[0]), tuple(zip(names, kets)))


def alice_attack_bases(p: FamilyParams) -> tuple[MeasurementBasis, MeasurementBasis]:
    """Alice's triads ``A_0 = {phi0, phi0', phi0''}`` and ``A_1`` for the general family.

    Raises ``ValueError`` if the transcribed kets fail orthonormality.
    """
    if p.kind is not Kind.GENERAL_QUTRIT:
        raise ValueError(f"expected GENERAL_QUTRIT params, got {p.kind}")
    st, ct = math.sin(p.theta), math.cos(p.theta)
    sg, cg = math.sin(p.gamma), math.cos(p.gamma)
    sd, cd = math.sin(p.delta), math.cos(p.delta)
    i = p.offset_i
    phi0, phi1 = general_branches(p)
    phi0p = qutrit(-cg * sd, st * sg * sd + ct * cd, st * cd - sd * ct * sg, i)
    phi0pp = qutrit(-sg, -st * cg, ct * cg, i)
    phi1p = qutrit(st * sg * sd + ct * cd, -cg * sd, -(st * cd - sd * ct * sg), i)
    phi1pp = qutrit(-st * cg, -sg, -ct * cg, i)
    return _triad("phi0", (phi0, phi0p, phi0pp)), _triad("phi1", (phi1, phi1p, phi1pp))


def same_subspace_bases(theta: float, offset_i: int = 0) -> tuple[MeasurementBasis, MeasurementBasis]:
    """Triads for the same-subspace state: ``phi_l'`` in span{|i>,|i+1>}, ``phi_l'' = |i+2>``.

    Signs are fixed by ``phi0 = cos(theta) phi1 + sin(theta) phi1'`` and its mirror.
    """
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    phi0, phi1 = same_subspace_branches(theta, offset_i)
    third = qutrit(0.0, 0.0, 1.0, offset_i)
    return (
        _triad("phi0", (phi0, qutrit(s, -c, 0.0, offset_i), third)),
        _triad("phi1", (phi1, qutrit(s, c, 0.0, offset_i), third)),
    )


def qubit_qubit_bases(theta: float) -> tuple[MeasurementBasis, MeasurementBasis]:
    """Honest qubit reference: ``{phi_l, phi_l^perp}`` pairs."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    phi0, phi1 = qubit_qubit_branches(theta)
    b0 = MeasurementBasis(2, (("phi0", phi0), ("phi0'", np.array([s, -c], dtype=complex))))
    b1 = MeasurementBasis(2, (("phi1", phi1), ("phi1'", np.array([s, c], dtype=complex))))
    return b0, b1


def alice_success_general(p: FamilyParams) -> float:
    """Closed-form Pr(A=B) for the general qutrit family, as printed.

    This expression equals ``1 - |<phi0|phi1>|^2``, i.e. it omits the 1/2 of
    Alice's random basis choice; :func:`alice_success_born` gives the
    Born-rule value, which is half of this.
    """
    t, g, d = p.theta, p.gamma, p.delta
    st, ct = math.sin(t), math.cos(t)
    sg, cg = math.sin(g), math.cos(g)
    sd, cd = math.sin(d), math.cos(d)
    first = (
        st * sg * cg * math.sin(2 * d)
        + ct * cg * math.cos(2 * d)
        - st * ct * sg * math.cos(2 * d)
        - st**2 * sd * cd
        + ct**2 * sg**2 * sd * cd
    )
    second = (
        st * cd * math.cos(2 * g)
        + ct * sg * sd
        + st * ct * cg * sd
        + ct**2 * sg * cg * cd
    )
    return first**2 + second**2


def alice_success_same_subspace(theta: float) -> float:
    return 0.5 * math.sin(theta) ** 2


def qubit_qutrit_delta_half_pi(theta: float) -> float:
    """Printed value of :func:`alice_success_general` at delta = pi/2."""
    return 1.0 - math.sin(theta) ** 4


def conditional_table(
    supply: Supply, bases: tuple[MeasurementBasis, MeasurementBasis]
) -> dict[tuple[str, int], float]:
    """``Pr(B=b) * Pr(A=a | B=b, Alice measured the triad containing a)``.

    Keys are ``(alice_label, bob_bit)``; within each triad the entries for a
    fixed ``b`` sum to ``Pr(B=b)``.
    """
    out = {}
    for basis in bases:
        for (b, a), p in joint_distribution(supply, BOB_BASIS, basis).items():
            out[(a, b)] = p
    return out


def alice_success_born(supply: Supply, bases: tuple[MeasurementBasis, MeasurementBasis]) -> float:
    """Exact probability that Alice emits a correct conclusive guess."""
    total = 0.0
    for basis in bases:
        for (b, a), p in joint_distribution(supply, BOB_BASIS, basis).items():
            if GUESS.get(a) == b:
                total += 0.5 * p
    return total


def alice_error_born(supply: Supply, bases: tuple[MeasurementBasis, MeasurementBasis]) -> float:
    """Exact probability of a conclusive but wrong guess."""
    total = 0.0
    for basis in bases:
        for (b, a), p in joint_distribution(supply, BOB_BASIS, basis).items():
            guess = GUESS.get(a)
            if guess is not None and guess != b:
                total += 0.5 * p
    return total


def simulate_key_round(
    supply: Supply, bases: tuple[MeasurementBasis, MeasurementBasis], rng: np.random.Generator
) -> KeyRoundResult:
    selector = int(rng.integers(2))
    dist = joint_distribution(supply, BOB_BASIS, bases[selector])
    (b, a), = sample_outcomes(dist, rng, 1)
    return KeyRoundResult(int(b), selector, a, GUESS.get(a))


def simulate_key_rounds(
    supply: Supply,
    bases: tuple[MeasurementBasis, MeasurementBasis],
    rng: np.random.Generator,
    n: int,
) -> dict[str, np.ndarray]:
    """Vectorized rounds: returns arrays ``bob_bit``, ``alice_basis``, ``guess``, ``correct``.

    ``guess`` is -1 for inconclusive rounds.
    """
    dists = [joint_distribution(supply, BOB_BASIS, basis) for basis in bases]
    selector = rng.integers(0, 2, size=n)
    u = rng.random(n)
    bob = np.empty(n, dtype=np.int64)
    guess = np.empty(n, dtype=np.int64)
    for sel, dist in enumerate(dists):
        keys = list(dist)
        cdf = np.cumsum([dist[k] for k in keys])
        mask = selector == sel
        idx = np.minimum(np.searchsorted(cdf, u[mask] * cdf[-1], side="right"), len(keys) - 1)
        bob[mask] = np.array([k[0] for k in keys])[idx]
        g = [GUESS.get(k[1]) for k in keys]
        guess[mask] = np.array([-1 if x is None else x for x in g])[idx]
    return {
        "bob_bit": bob,
        "alice_basis": selector,
        "guess": guess,
        "correct": guess == bob,
    }


def bob_marginal(supply: Supply) -> np.ndarray:
    """Bob's computational-basis outcome probabilities."""
    ens = as_ensemble(supply)
    return np.array(
        [
            sum(w * np.sum(np.abs(s.matrix()[b]) ** 2) for w, s in ens.members)
            for b in (0, 1)
        ]
    )


def product_state_attack_correlation(theta: float, offset_i: int = 0) -> float:
    """Alice's key accuracy when Charlie hands out ``|l>|phi_l>`` and tells her ``l``.

    Alice simply outputs ``l``; the return value is Pr(Bob's bit == l).
    """
    ens = product_ensemble(theta, offset_i)
    return sum(w * bob_marginal(state)[l] for (w, state), l in zip(ens.members, (0, 1)))


def product_attack_without_side_info(theta: float, offset_i: int = 0) -> float:
    """Same supply, Alice restricted to the honest guessing rule."""
    return alice_success_born(product_ensemble(theta, offset_i), same_subspace_bases(theta, offset_i))


def marginal_indistinguishable(theta: float, offset_i: int = 0) -> bool:
    return bool(
        np.allclose(
            bob_marginal(product_ensemble(theta, offset_i)),
            bob_marginal(same_subspace_state(theta, offset_i)),
            atol=ATOL,
            rtol=0,
        )
    )
