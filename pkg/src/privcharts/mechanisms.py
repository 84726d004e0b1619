"""Randomized DP primitives (Laplace, exponential), seedable noise, budget accounting.

Every mechanism accepts ``epsilon=ORACLE`` (the ``None`` sentinel) as a
test-only escape hatch: noise is disabled and selection becomes argmax.
Oracle-mode output is NOT differentially private and anything built on it
must be flagged as such.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

ORACLE = None  # epsilon sentinel: noise off, argmax selection; output is non-private

_U64 = (1 << 64) - 1


class MechanismError(ValueError):
    """Invalid mechanism parameters."""


class NoiseSource:
    """Deterministic, splittable randomness for the DP mechanisms.

    Identical seeds yield identical draw sequences. substream(label) derives
    an independent child stream keyed by a stable hash of (seed, label), so
    pipeline stages (structure noise vs. marginal noise vs. sampling) are
    independently reproducible.
    """

    def __init__(self, seed: int) -> None:
        self.seed = int(seed) & _U64
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed)))

    def substream(self, label: str) -> "NoiseSource":
        digest = hashlib.blake2b(
            self.seed.to_bytes(8, "big") + label.encode("utf-8"), digest_size=8
        ).digest()
        return NoiseSource(int.from_bytes(digest, "big"))

    def random(self, size=None) -> np.ndarray | float:
        """Uniform draws on [0, 1)."""
        return self._gen.random(size)

    def integers(self, n: int) -> int:
        """One uniform integer in [0, n)."""
        return int(self._gen.integers(n))


def laplace_noise(scale: float, src: NoiseSource, size=None):
    """Draw from Lap(0, scale) by inverse CDF: sign(u) * b * ln(1 - 2|u|),
    u uniform on (-0.5, 0.5). scale=0 returns exactly 0."""
    if scale < 0:
        raise MechanismError("Laplace scale must be >= 0")
    if scale == 0:
        return 0.0 if size is None else np.zeros(size)
    u = np.asarray(src.random(size)) - 0.5
    mag = np.maximum(1.0 - 2.0 * np.abs(u), np.finfo(float).tiny)
    out = np.sign(u) * scale * np.log(mag)
    return float(out) if size is None else out


def laplace_mechanism(
    values, sensitivity: float, epsilon: float | None, src: NoiseSource
) -> np.ndarray:
    """Add independent Lap(sensitivity/epsilon) noise to each component.

    epsilon=ORACLE returns the values unchanged (non-private test path).
    """
    values = np.asarray(values, dtype=float)
    if epsilon is ORACLE:
        return values.copy()
    if sensitivity <= 0:
        raise MechanismError("sensitivity must be > 0")
    if epsilon <= 0:
        raise MechanismError("epsilon must be > 0")
    if values.size == 0:
        return values.copy()
    return values + laplace_noise(sensitivity / epsilon, src, size=values.shape)


def exponential_probabilities(scores, sensitivity: float, epsilon: float) -> np.ndarray:
    """Closed-form selection distribution: p_i ∝ exp(epsilon * q_i / (2 * sensitivity)).

    Scores are max-shifted before exponentiation for numerical stability.
    """
    q = np.asarray(scores, dtype=float)
    logits = (epsilon / (2.0 * sensitivity)) * q
    logits -= logits.max()
    w = np.exp(logits)
    return w / w.sum()


def exponential_select(
    scores, sensitivity: float, epsilon: float | None, src: NoiseSource | None
) -> int:
    """Privately select an index with probability ∝ exp(eps*q/(2*Δq)).

    epsilon=ORACLE returns the argmax (first index on ties), drawing no
    randomness; callers wanting a specific tie order pre-sort candidates.
    """
    q = np.asarray(scores, dtype=float)
    if q.size == 0:
        raise MechanismError("empty candidate list")
    if epsilon is ORACLE:
        return int(np.argmax(q))
    if sensitivity <= 0:
        raise MechanismError("sensitivity must be > 0")
    if epsilon <= 0:
        raise MechanismError("epsilon must be > 0")
    p = exponential_probabilities(q, sensitivity, epsilon)
    u = src.random()
    return int(np.searchsorted(np.cumsum(p), u, side="right").clip(0, q.size - 1))


# ---------------------------------------------------------------------------
# Budget accounting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BudgetSpec:
    """A total privacy budget split between structure learning (ε1) and
    marginal noising (ε2); the split must be exact: ε1 + ε2 == ε_total."""

    epsilon_total: float
    epsilon_structure: float
    epsilon_marginals: float

    def __post_init__(self) -> None:
        if self.epsilon_total <= 0 or self.epsilon_structure <= 0 or self.epsilon_marginals <= 0:
            raise MechanismError("all budget components must be > 0")
        if self.epsilon_structure + self.epsilon_marginals != self.epsilon_total:
            raise MechanismError("epsilon_structure + epsilon_marginals must equal epsilon_total")

    def to_json(self) -> dict:
        return {
            "epsilon_total": self.epsilon_total,
            "epsilon_structure": self.epsilon_structure,
            "epsilon_marginals": self.epsilon_marginals,
        }

    @classmethod
    def from_json(cls, obj) -> "BudgetSpec":
        return cls(obj["epsilon_total"], obj["epsilon_structure"], obj["epsilon_marginals"])


def split_budget(epsilon_total: float, structure_fraction: float = 0.5) -> BudgetSpec:
    """Split ε_total as ε1 = fraction * ε_total, ε2 = remainder, keeping the
    float identity ε1 + ε2 == ε_total exact (ε2 is ULP-nudged if needed)."""
    if epsilon_total <= 0:
        raise MechanismError("epsilon_total must be > 0")
    if not (0.0 < structure_fraction < 1.0):
        raise MechanismError("structure_fraction must be in (0, 1)")
    eps1 = structure_fraction * epsilon_total
    eps2 = epsilon_total - eps1
    for _ in range(4):  # correct double-rounding in pathological splits
        s = eps1 + eps2
        if s == epsilon_total:
            break
        eps2 = math.nextafter(eps2, math.inf if s < epsilon_total else -math.inf)
    if eps1 <= 0 or eps2 <= 0 or eps1 + eps2 != epsilon_total:
        raise MechanismError("could not realize an exact positive budget split")
    return BudgetSpec(epsilon_total, eps1, eps2)


@dataclass(frozen=True)
class DrawEvent:
    """One instrumented mechanism invocation."""

    stage: str
    mechanism: str
    epsilon: float


@dataclass
class BudgetLedger:
    """Privacy-consumption record for one scheme run.

    Stage charges carry the exact budget arithmetic (ε1 + ε2 == ε_total);
    draw events instrument the per-invocation split (d-1 exponential picks
    at ε1/(d-1), one Laplace pass per noised marginal at ε2/(d-k)).
    """

    epsilon_total: float
    stages: dict = field(default_factory=dict)
    events: list = field(default_factory=list)

    def charge_stage(self, stage: str, epsilon: float) -> None:
        if stage in self.stages:
            raise MechanismError(f"stage {stage!r} already charged")
        self.stages[stage] = float(epsilon)

    def record_draw(self, stage: str, mechanism: str, epsilon: float) -> None:
        self.events.append(DrawEvent(stage, mechanism, epsilon))

    @property
    def consumed(self) -> float:
        total = 0.0
        for eps in self.stages.values():
            total += eps
        return total

    def draw_count(self, stage: str | None = None, mechanism: str | None = None) -> int:
        return sum(
            1
            for e in self.events
            if (stage is None or e.stage == stage)
            and (mechanism is None or e.mechanism == mechanism)
        )

    def to_json(self) -> dict:
        return {
            "epsilon_total": self.epsilon_total,
            "stages": dict(self.stages),
            "draws": [
                {"stage": e.stage, "mechanism": e.mechanism, "epsilon": e.epsilon}
                for e in self.events
            ],
        }
