"""Bob's local dimensionality test.

Each round Bob picks a qutrit encoding (per policy), inputs ``x, y`` uniformly,
measures a supplied pair and scores ``Y_i``. He proceeds iff the mean score
reaches the honest same-subspace expectation minus a slack ``epsilon``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .chsh_game import (
    ConditionalTable,
    GameStrategy,
    closed_form_win,
    exact_table,
    exact_win_probability,
    play_rounds,
)
from .quantum_core import Supply, as_ensemble
from .state_families import (
    E_HMINUS,
    E_VMINUS,
    ENCODINGS,
    EncodingMap,
    Kind,
    diff_subspace_state,
    embed,
    other_encoding,
)

SCHEMA_VERSION = 1


class EncodingPolicy(str, enum.Enum):
    FIXED_E_HMINUS = "FIXED_E_Hminus"
    FIXED_E_VMINUS = "FIXED_E_Vminus"
    RANDOM_SWITCH = "RANDOM_SWITCH"


class Decision(str, enum.Enum):
    PROCEED = "PROCEED"
    ABORT = "ABORT"


def default_epsilon(theta: float, n: int) -> float:
    """Three binomial standard deviations of the honest mean score."""
    p = closed_form_win(Kind.SAME_SUBSPACE, theta)
    return 3.0 * math.sqrt(p * (1 - p) / n)


@dataclass(frozen=True)
class CertifierConfig:
    n: int
    theta: float
    epsilon: float | None = None  # None: default_epsilon(theta, n)
    seed: int = 0
    encoding_policy: EncodingPolicy = EncodingPolicy.RANDOM_SWITCH
    supply_encoding: EncodingMap = E_VMINUS
    offset_i: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.epsilon is not None and not (0 <= self.epsilon < 1):
            raise ValueError(f"epsilon must be in [0, 1), got {self.epsilon}")
        object.__setattr__(self, "encoding_policy", EncodingPolicy(self.encoding_policy))

    @property
    def slack(self) -> float:
        return default_epsilon(self.theta, self.n) if self.epsilon is None else self.epsilon

    @property
    def threshold(self) -> float:
        return closed_form_win(Kind.SAME_SUBSPACE, self.theta) - self.slack


@dataclass
class EncodingStats:
    rounds: int
    mean_y: float
    no_detect_rate: float


@dataclass
class Verdict:
    mean_y: float
    threshold: float
    decision: Decision
    per_encoding_stats: dict[str, EncodingStats] = field(default_factory=dict)
    n: int = 0
    seed: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["decision"] = self.decision.value
        d["schema_version"] = SCHEMA_VERSION
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _bob_encodings(policy: EncodingPolicy) -> tuple[EncodingMap, ...]:
    if policy is EncodingPolicy.FIXED_E_HMINUS:
        return (E_HMINUS,)
    if policy is EncodingPolicy.FIXED_E_VMINUS:
        return (E_VMINUS,)
    return (E_HMINUS, E_VMINUS)


def ambient_supply(supply: Supply, enc: EncodingMap):
    """Supply as photons in the 4-level space (3-level input is embedded with ``enc``)."""
    ens = as_ensemble(supply)
    dim_a = ens.dims[1]
    if dim_a == 3:
        return embed(ens, enc)
    if dim_a == 4:
        return ens
    raise ValueError(f"certifier needs a qutrit-side dim of 3 or 4, got {dim_a}")


def encoding_tables(supply: Supply, cfg: CertifierConfig) -> dict[str, ConditionalTable]:
    photons = ambient_supply(supply, cfg.supply_encoding)
    return {
        enc.name: exact_table(photons, GameStrategy.default(cfg.offset_i, enc))
        for enc in _bob_encodings(cfg.encoding_policy)
    }


def run_certification(cfg: CertifierConfig, supply: Supply, tables=None) -> Verdict:
    """Play ``cfg.n`` rounds and compare the mean score to the threshold.

    Draw order from ``default_rng(cfg.seed)``: per-round encoding choice
    (``RANDOM_SWITCH`` only), then the ``x``, ``y`` and outcome streams.
    """
    tables = tables or encoding_tables(supply, cfg)
    names = list(tables)
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n
    choice = rng.integers(0, len(names), size=n) if len(names) > 1 else np.zeros(n, dtype=np.int64)
    xs = rng.integers(0, 2, size=n)
    ys = rng.integers(0, 2, size=n)
    wins = np.zeros(n, dtype=bool)
    stats = {}
    for k, name in enumerate(names):
        mask = choice == k
        m = int(mask.sum())
        res = play_rounds(tables[name], rng, m, xs[mask], ys[mask])
        wins[mask] = res["win"]
        stats[name] = EncodingStats(
            rounds=m,
            mean_y=float(res["win"].mean()) if m else 0.0,
            no_detect_rate=float(res["no_detect"].mean()) if m else 0.0,
        )
    mean_y = float(wins.mean())
    threshold = cfg.threshold
    decision = Decision.ABORT if mean_y < threshold else Decision.PROCEED
    return Verdict(mean_y, threshold, decision, stats, n=n, seed=cfg.seed)


def required_sample_size(gap: float, alpha: float) -> int:
    """Rounds for a one-sided Hoeffding error ``alpha`` at a threshold halfway across ``gap``."""
    if not (0 < gap < 1 and 0 < alpha < 1):
        raise ValueError("gap and alpha must lie in (0, 1)")
    return max(1, math.ceil(math.log(1 / alpha) / (2 * (gap / 2) ** 2)))


def mixed_policy_win(tables: dict[str, ConditionalTable]) -> float:
    """Exact win when Bob's encoding is uniform over ``tables``."""
    return sum(exact_win_probability(t) for t in tables.values()) / len(tables)


def encoding_mismatch_report(
    theta: float, charlie: EncodingMap = E_VMINUS, offset_i: int = 0, table_fn=exact_table
) -> dict:
    """Exact 4-level statistics of a different-subspace supply under each Bob policy.

    ``table_fn`` computes a ConditionalTable from (supply, strategy); the oracle
    passes its projector path here.
    """
    photons = embed(as_ensemble(diff_subspace_state(theta, offset_i)), charlie)
    matched = table_fn(photons, GameStrategy.default(offset_i, charlie))
    mismatched = table_fn(photons, GameStrategy.default(offset_i, other_encoding(charlie)))
    out = {}
    for name, tabs in (
        ("matched", [matched]),
        ("mismatched", [mismatched]),
        ("random_switch", [matched, mismatched]),
    ):
        out[name] = {
            "win": sum(exact_win_probability(t) for t in tabs) / len(tabs),
            "no_detect_rate": sum(t.no_detect_rate() for t in tabs) / len(tabs),
            "trit2_rate": sum(t.outcome_rate(2) for t in tabs) / len(tabs),
        }
    return out


def fixed_encoding_blindness(theta: float, charlie: EncodingMap = E_VMINUS, offset_i: int = 0) -> tuple[float, float]:
    """(win under RANDOM_SWITCH, win with Bob fixed to the encoding Charlie did not use)."""
    rep = encoding_mismatch_report(theta, charlie, offset_i)
    return rep["random_switch"]["win"], rep["mismatched"]["win"]


def encoding_by_name(name: str) -> EncodingMap:
    return ENCODINGS[name]

