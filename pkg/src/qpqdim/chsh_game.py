"""CHSH-like certification game with a bit output ``a`` and a trit output ``b``.

Box X measures the qubit (``x=0``: computational, ``x=1``: Hadamard basis),
box Y the qutrit side (``y=0``: primed triad, ``y=1``: double-primed). The
round is won iff ``f(a, b) == x AND y`` with ``f(a, b) = [a != b]``. A
no-detect result on the qutrit side (``b = NO_DETECT``) is always a loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .quantum_core import (
    ATOL,
    NO_DETECT,
    MeasurementBasis,
    Supply,
    as_ensemble,
    basis_ket,
    joint_distribution,
)
from .state_families import EncodingMap, Kind, embed, game_basis

INPUTS = ((0, 0), (0, 1), (1, 0), (1, 1))
SQRT2 = math.sqrt(2.0)


def embedded_xor(a: int, b: int) -> int:
    return int(a != b)


def win_predicate(x: int, y: int, a: int, b) -> bool:
    if b == NO_DETECT:
        return False
    return embedded_xor(a, b) == (x & y)


def bob_qubit_basis(x: int) -> MeasurementBasis:
    if x == 0:
        return MeasurementBasis(2, ((0, basis_ket(2, 0)), (1, basis_ket(2, 1))))
    h = 1 / SQRT2
    return MeasurementBasis(
        2, ((0, np.array([h, h], dtype=complex)), (1, np.array([h, -h], dtype=complex)))
    )


@dataclass(frozen=True)
class GameStrategy:
    x_basis: dict[int, MeasurementBasis]
    y_basis: dict[int, MeasurementBasis]
    encoding: EncodingMap | None = None

    @classmethod
    def default(cls, offset_i: int = 0, encoding: EncodingMap | None = None) -> "GameStrategy":
        """The fixed quantum strategy; with ``encoding`` the triads live in 4 levels."""
        y_basis = {y: game_basis(y, offset_i) for y in (0, 1)}
        if encoding is not None:
            y_basis = {y: embed(b, encoding) for y, b in y_basis.items()}
        return cls({x: bob_qubit_basis(x) for x in (0, 1)}, y_basis, encoding)

    def check_dims(self, supply: Supply) -> None:
        dim_b, dim_a = as_ensemble(supply).dims
        for basis in self.x_basis.values():
            if basis.ambient_dim != dim_b:
                raise ValueError(f"X basis dim {basis.ambient_dim} != qubit dim {dim_b}")
        for basis in self.y_basis.values():
            if basis.ambient_dim != dim_a:
                raise ValueError(f"Y basis dim {basis.ambient_dim} != qutrit-side dim {dim_a}")


@dataclass
class ConditionalTable:
    """``Pr(a, b | x, y)`` keyed by ``(x, y, a, b)``."""

    entries: dict[tuple, float] = field(default_factory=dict)

    def __getitem__(self, key) -> float:
        return self.entries.get(key, 0.0)

    def __iter__(self) -> Iterator[tuple]:
        return iter(self.entries)

    def row(self, x: int, y: int) -> dict[tuple, float]:
        return {(a, b): p for (xx, yy, a, b), p in self.entries.items() if (xx, yy) == (x, y)}

    def row_sums(self) -> dict[tuple[int, int], float]:
        return {xy: sum(self.row(*xy).values()) for xy in INPUTS}

    def validate(self, atol: float = ATOL) -> None:
        for xy, total in self.row_sums().items():
            if abs(total - 1.0) > atol:
                raise ValueError(f"row {xy} sums to {total!r}")
        for key, p in self.entries.items():
            if not (-atol <= p <= 1 + atol):
                raise ValueError(f"entry {key} = {p!r} outside [0, 1]")

    def max_abs_diff(self, other: "ConditionalTable") -> float:
        keys = set(self.entries) | set(other.entries)
        return max(abs(self[k] - other[k]) for k in keys)

    def no_detect_rate(self) -> float:
        return 0.25 * sum(p for (x, y, a, b), p in self.entries.items() if b == NO_DETECT)

    def outcome_rate(self, b) -> float:
        """Probability (uniform inputs) that Y reports ``b``."""
        return 0.25 * sum(p for (x, y, a, bb), p in self.entries.items() if bb == b)

    def records(self) -> list[dict]:
        return [
            {"x": x, "y": y, "a": a, "b": b, "p": p}
            for (x, y, a, b), p in self.entries.items()
        ]


def exact_table(supply: Supply, strat: GameStrategy) -> ConditionalTable:
    strat.check_dims(supply)
    entries = {}
    for x, y in INPUTS:
        for (a, b), p in joint_distribution(supply, strat.x_basis[x], strat.y_basis[y]).items():
            entries[(x, y, a, b)] = p
    return ConditionalTable(entries)


def exact_win_probability(table: ConditionalTable) -> float:
    return 0.25 * sum(
        p for (x, y, a, b), p in table.entries.items() if win_predicate(x, y, a, b)
    )


def closed_form_win(kind: Kind | str, theta: float) -> float:
    kind = Kind(kind)
    s = math.sin(theta)
    if kind is Kind.PRODUCT_PAIR:
        return 0.5 * (1 + s / (2 * SQRT2))
    if kind is Kind.SAME_SUBSPACE:
        return 0.5 * (1 + 1 / (2 * SQRT2) + s / (2 * SQRT2))
    if kind is Kind.DIFF_SUBSPACE:
        return 0.25 * (1 + math.cos(theta) ** 2)
    raise ValueError(f"no closed-form winning probability for {kind}")


CLASSICAL_BOUND = 0.75


@dataclass(frozen=True)
class RoundRecord:
    x: int
    y: int
    a: int
    b: object
    win: bool


def _row_sampler(table: ConditionalTable) -> dict[tuple[int, int], tuple[list, np.ndarray]]:
    out = {}
    for xy in INPUTS:
        row = table.row(*xy)
        keys = list(row)
        out[xy] = (keys, np.cumsum([row[k] for k in keys]))
    return out


def play_round(supply: Supply, strat: GameStrategy, rng: np.random.Generator) -> RoundRecord:
    x, y = (int(v) for v in rng.integers(0, 2, size=2))
    dist = joint_distribution(supply, strat.x_basis[x], strat.y_basis[y])
    keys = list(dist)
    cdf = np.cumsum([dist[k] for k in keys])
    idx = min(int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right")), len(keys) - 1)
    a, b = keys[idx]
    return RoundRecord(x, y, a, b, win_predicate(x, y, a, b))


def play_rounds(
    table: ConditionalTable,
    rng: np.random.Generator,
    n: int,
    xs: np.ndarray | None = None,
    ys: np.ndarray | None = None,
) -> dict[str, np.ndarray]:
    """Vectorized rounds sampled from a precomputed table.

    Returns arrays ``x``, ``y``, ``b_index`` (position in the row's key list),
    ``win`` and ``no_detect``.
    """
    if xs is None:
        xs = rng.integers(0, 2, size=n)
    if ys is None:
        ys = rng.integers(0, 2, size=n)
    u = rng.random(n)
    win = np.zeros(n, dtype=bool)
    nd = np.zeros(n, dtype=bool)
    for (x, y), (keys, cdf) in _row_sampler(table).items():
        mask = (xs == x) & (ys == y)
        idx = np.minimum(np.searchsorted(cdf, u[mask] * cdf[-1], side="right"), len(keys) - 1)
        win[mask] = np.array([win_predicate(x, y, a, b) for a, b in keys])[idx]
        nd[mask] = np.array([b == NO_DETECT for a, b in keys])[idx]
    return {"x": xs, "y": ys, "win": win, "no_detect": nd}


def win_grid(
    kinds, thetas, offsets=(0,), encodings=(None,), supply_factory: Callable | None = None
) -> Iterator[tuple]:
    """Yield ``(kind, theta, offset, encoding, exact, closed)`` over a parameter grid."""
    from .state_families import family_supply

    factory = supply_factory or family_supply
    for kind in kinds:
        for offset in offsets:
            for enc in encodings:
                strat = GameStrategy.default(offset, enc)
                for theta in thetas:
                    supply = factory(kind, theta, offset)
                    if enc is not None:
                        supply = embed(supply, enc)
                    exact = exact_win_probability(exact_table(supply, strat))
                    yield kind, theta, offset, enc, exact, closed_form_win(kind, theta)
