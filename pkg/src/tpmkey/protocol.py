"""Mutual learning between two machines until their weights coincide."""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .distill import weights_digest
from .tpm import Role, TpmParams, TreeParityMachine, apply_update, hidden_outputs, tpm_output

DEFAULT_PROBE_INTERVAL = 25


class Status(str, enum.Enum):
    LEARNING = "learning"
    SYNCHRONIZED = "synchronized"
    FAILED = "failed"


class SessionError(RuntimeError):
    pass


def default_max_rounds(params: TpmParams) -> int:
    return 10_000 * params.K


def generate_input(params: TpmParams, rng: np.random.Generator) -> np.ndarray:
    """Uniform K x N draw from {-M..-1, 1..M}."""
    v = rng.integers(0, 2 * params.M, size=params.shape, dtype=np.int64)
    return v - params.M + (v >= params.M)


@dataclass
class RoundResult:
    input: np.ndarray
    output_self: int
    output_peer: int
    updated: bool


@dataclass
class Session:
    """One party's view of an ongoing key agreement."""

    params: TpmParams
    role: Role
    weights: np.ndarray
    round: int = 0
    updates: int = 0
    consecutive_agreements: int = 0
    status: Status = Status.LEARNING
    _transcript: "hashlib._Hash" = field(default_factory=hashlib.sha256, repr=False)

    @classmethod
    def start(cls, params: TpmParams, role: Role, seed=None) -> Session:
        machine = TreeParityMachine(params, role, seed=seed)
        return cls(params, machine.role, machine.weights)

    @property
    def L(self) -> int:
        return self.params.L

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, int]:
        y = hidden_outputs(self.weights, x, self.role)
        return y, tpm_output(y)

    def finish_round(self, x: np.ndarray, y: np.ndarray, o_self: int, o_peer: int) -> RoundResult:
        """Record a round whose outputs are known and learn if they agree."""
        if self.status is not Status.LEARNING:
            raise SessionError(f"session is {self.status.value}")
        updated = o_self == o_peer
        if updated:
            self.weights = apply_update(self.weights, x, y, o_self, self.params.rule, self.L)
            self.updates += 1
            self.consecutive_agreements += 1
        else:
            self.consecutive_agreements = 0
        self.round += 1
        self._transcript.update(np.ascontiguousarray(x, dtype="<i2").tobytes())
        self._transcript.update(bytes([o_self & 0xFF, o_peer & 0xFF]))
        return RoundResult(x, o_self, o_peer, updated)

    def digest(self, hash_name: str = "sha256") -> bytes:
        return weights_digest(self.weights, self.L, hash_name)

    def transcript_digest(self) -> bytes:
        return self._transcript.copy().digest()

    def mark(self, status: Status) -> None:
        if self.status is not Status.LEARNING:
            raise SessionError(f"cannot move from {self.status.value} to {status.value}")
        self.status = status

    def report(self, hash_name: str = "sha256") -> SessionReport:
        return SessionReport(
            role=self.role,
            status=self.status,
            iterations=self.round,
            updates=self.updates,
            final_weights=self.weights.copy(),
            sync_digest=self.digest(hash_name),
            transcript_digest=self.transcript_digest(),
        )


@dataclass
class SessionReport:
    role: Role
    status: Status
    iterations: int
    updates: int
    final_weights: np.ndarray
    sync_digest: bytes
    transcript_digest: bytes
    detail: str | None = None

    @property
    def synchronized(self) -> bool:
        return self.status is Status.SYNCHRONIZED


def run_round(a: Session, b: Session, x: np.ndarray) -> tuple[RoundResult, RoundResult]:
    """Both parties see ``x``, publish outputs and learn on agreement."""
    if a.params != b.params:
        raise SessionError("sessions use different parameters")
    if a.role == b.role:
        raise SessionError("sessions must play opposite roles")
    if a.status is not Status.LEARNING or b.status is not Status.LEARNING:
        raise SessionError("both sessions must still be learning")
    ya, oa = a.forward(x)
    yb, ob = b.forward(x)
    return a.finish_round(x, ya, oa, ob), b.finish_round(x, yb, ob, oa)


def check_sync(a: Session, b: Session) -> bool:
    return a.weights.shape == b.weights.shape and np.array_equal(a.weights, b.weights)


def check_sync_digest(digest_a: bytes, digest_b: bytes) -> bool:
    """Networked variant: parties only see each other's weight digests."""
    return digest_a == digest_b


def run_session(
    params: TpmParams,
    seed_a=None,
    seed_b=None,
    seed_inputs=None,
    max_rounds: int | None = None,
    hash_name: str = "sha256",
) -> tuple[SessionReport, SessionReport]:
    """Run mutual learning in-process; returns (sender report, recipient report).

    Weights are compared directly after every round. When ``max_rounds`` is
    exhausted both reports carry status FAILED.
    """
    if max_rounds is None:
        max_rounds = default_max_rounds(params)
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    a = Session.start(params, Role.SENDER, seed_a)
    b = Session.start(params, Role.RECIPIENT, seed_b)
    rng = np.random.default_rng(seed_inputs)
    while a.round < max_rounds:
        run_round(a, b, generate_input(params, rng))
        if check_sync(a, b):
            a.mark(Status.SYNCHRONIZED)
            b.mark(Status.SYNCHRONIZED)
            break
    else:
        a.mark(Status.FAILED)
        b.mark(Status.FAILED)
    return a.report(hash_name), b.report(hash_name)
