"""Tree parity machine with bounded integer weights and non-binary inputs."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Rule(str, enum.Enum):
    HEBBIAN = "hebbian"
    ANTI_HEBBIAN = "anti_hebbian"
    RANDOM_WALK = "random_walk"


class Role(str, enum.Enum):
    """Which side of the exchange a machine plays.

    The role only matters when a hidden neuron's local field is exactly zero:
    the sender's signum returns +1 there, the recipient's returns -1.
    """

    SENDER = "sender"
    RECIPIENT = "recipient"

    @property
    def peer(self) -> Role:
        return Role.RECIPIENT if self is Role.SENDER else Role.SENDER

    @property
    def tie_sign(self) -> int:
        return 1 if self is Role.SENDER else -1


@dataclass(frozen=True)
class TpmParams:
    """Shape of a machine: K hidden units, N inputs each, weights in [-L, L],
    inputs in [-M, M] without zero.

    ``allow_large_m`` lifts the M <= L guard; inputs that large make the
    synchronized weights pile up on the bounds.
    """

    K: int
    L: int
    M: int
    N: int
    rule: Rule = Rule.HEBBIAN
    allow_large_m: bool = False

    def __post_init__(self):
        for name in ("K", "L", "M", "N"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise TypeError(f"{name} must be an integer, got {value!r}")
            if value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")
        object.__setattr__(self, "rule", Rule(self.rule))
        if self.M > self.L and not self.allow_large_m:
            raise ValueError(
                f"M={self.M} exceeds L={self.L}; pass allow_large_m=True to override"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return (self.K, self.N)

    @property
    def size(self) -> int:
        return self.K * self.N

    @property
    def alphabet_size(self) -> int:
        """Number of distinct weight values, 2L+1."""
        return 2 * self.L + 1


def init_weights(params: TpmParams, seed=None) -> np.ndarray:
    """Draw a K x N weight matrix uniformly from the integers in [-L, L]."""
    rng = np.random.default_rng(seed)
    return rng.integers(-params.L, params.L + 1, size=params.shape, dtype=np.int64)


def _check_shapes(w: np.ndarray, x: np.ndarray) -> None:
    if w.ndim != 2 or w.shape != x.shape:
        raise ValueError(f"weight shape {w.shape} does not match input shape {x.shape}")


def local_fields(w: np.ndarray, x: np.ndarray) -> np.ndarray:
    w, x = np.asarray(w), np.asarray(x)
    _check_shapes(w, x)
    return np.einsum("kn,kn->k", w, x)


def hidden_outputs(w: np.ndarray, x: np.ndarray, role: Role) -> np.ndarray:
    """Signum of each hidden unit's local field, never zero.

    A zero field resolves to ``role.tie_sign``.
    """
    y = np.sign(local_fields(w, x))
    y[y == 0] = Role(role).tie_sign
    return y


def tpm_output(y) -> int:
    """Parity of the hidden outputs."""
    values = np.asarray(y).ravel().tolist()
    if not values or not set(values) <= {1, -1}:
        raise ValueError("hidden outputs must be a non-empty sequence of -1/+1")
    # product of +-1 values is the parity of the number of -1 entries
    return -1 if values.count(-1) % 2 else 1


def apply_update(
    w: np.ndarray, x: np.ndarray, y, o: int, rule: Rule, L: int
) -> np.ndarray:
    """One learning step; only rows whose hidden output equals ``o`` move.

    Returns a new matrix, saturated to [-L, L]. The caller is responsible for
    only invoking this when both parties' outputs agreed.
    """
    w, x, y = np.asarray(w), np.asarray(x), np.asarray(y)
    _check_shapes(w, x)
    if y.shape != (w.shape[0],):
        raise ValueError(f"expected {w.shape[0]} hidden outputs, got shape {y.shape}")
    rule = Rule(rule)
    if rule is Rule.HEBBIAN:
        delta = o * x
    elif rule is Rule.ANTI_HEBBIAN:
        delta = -o * x
    else:
        delta = x
    gate = (y == o)[:, None]
    return np.minimum(np.maximum(w + delta * gate, -L), L)


class TreeParityMachine:
    """A machine's mutable state: params, role and current weights."""

    def __init__(self, params: TpmParams, role: Role = Role.SENDER, weights=None, seed=None):
        self.params = params
        self.role = Role(role)
        if weights is None:
            weights = init_weights(params, seed)
        weights = np.array(weights, dtype=np.int64)
        if weights.shape != params.shape:
            raise ValueError(f"weights must have shape {params.shape}, got {weights.shape}")
        if np.any(np.abs(weights) > params.L):
            raise ValueError(f"weights outside [-{params.L}, {params.L}]")
        self.weights = weights

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, int]:
        y = hidden_outputs(self.weights, x, self.role)
        return y, tpm_output(y)

    def update(self, x: np.ndarray, y: np.ndarray, o: int) -> None:
        self.weights = apply_update(self.weights, x, y, o, self.params.rule, self.params.L)

    def __repr__(self):
        p = self.params
        return f"TreeParityMachine(K={p.K}, L={p.L}, M={p.M}, N={p.N}, role={self.role.value})"


@dataclass(frozen=True)
class Distribution:
    """Empirical frequency of each weight value in [-L, L]."""

    L: int
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (2 * self.L + 1,):
            raise ValueError(f"expected {2 * self.L + 1} probabilities, got {probs.shape}")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError("probabilities must be non-negative and sum to 1")
        object.__setattr__(self, "probs", probs)

    @property
    def values(self) -> np.ndarray:
        return np.arange(-self.L, self.L + 1)

    def __getitem__(self, value: int) -> float:
        if not -self.L <= value <= self.L:
            raise KeyError(value)
        return float(self.probs[value + self.L])

    def as_dict(self) -> dict[int, float]:
        return {int(v): float(p) for v, p in zip(self.values, self.probs)}

    def extrema_mass(self) -> float:
        """Probability of a weight sitting on either bound."""
        return float(self.probs[0] + self.probs[-1])

    def max_deviation_from_uniform(self) -> float:
        return float(np.max(np.abs(self.probs - 1.0 / self.probs.size)))

    @classmethod
    def uniform(cls, L: int) -> Distribution:
        return cls(L, np.full(2 * L + 1, 1.0 / (2 * L + 1)))


def weight_counts(w, L: int) -> np.ndarray:
    """Occurrence count of each value -L..L, indexed by value + L."""
    flat = np.asarray(w, dtype=np.int64).ravel()
    if flat.size and (flat.min() < -L or flat.max() > L):
        raise ValueError(f"weights outside [-{L}, {L}]")
    return np.bincount(flat + L, minlength=2 * L + 1)


def weight_distribution(w, L: int) -> Distribution:
    """Empirical distribution of one weight matrix or any concatenation of them."""
    counts = weight_counts(w, L)
    total = counts.sum()
    if total == 0:
        raise ValueError("cannot take the distribution of zero weights")
    return Distribution(L, counts / total)
