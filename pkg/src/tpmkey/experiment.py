"""Batches of independent key agreements and the statistics drawn from them."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distill import DistillConfig, Encoding, distill_stages, encode_bits, equalize
from .protocol import SessionReport, run_session
from .tpm import Distribution, TpmParams, weight_distribution


def session_seeds(master_seed: int, sessions: int) -> list[tuple[np.random.SeedSequence, ...]]:
    """(seed_a, seed_b, seed_inputs) for every session, derived from one master seed."""
    children = np.random.SeedSequence(master_seed).spawn(sessions)
    return [tuple(c.spawn(3)) for c in children]


def _one(args) -> tuple[SessionReport, SessionReport]:
    params, seeds, max_rounds = args
    return run_session(params, *seeds, max_rounds=max_rounds)


@dataclass
class Batch:
    params: TpmParams
    master_seed: int
    pairs: list[tuple[SessionReport, SessionReport]]

    @property
    def synchronized(self) -> list[tuple[SessionReport, SessionReport]]:
        return [p for p in self.pairs if p[0].synchronized]

    @property
    def failures(self) -> int:
        return len(self.pairs) - len(self.synchronized)

    @property
    def iterations(self) -> np.ndarray:
        return np.array([a.iterations for a, _ in self.synchronized])

    def final_weights(self) -> list[np.ndarray]:
        return [a.final_weights for a, _ in self.synchronized]


def run_batch(
    params: TpmParams,
    sessions: int = 1000,
    master_seed: int = 0,
    max_rounds: int | None = None,
    workers: int = 1,
) -> Batch:
    """Run ``sessions`` independent synchronizations; order follows session index."""
    if sessions < 1:
        raise ValueError("sessions must be >= 1")
    jobs = [(params, seeds, max_rounds) for seeds in session_seeds(master_seed, sessions)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            pairs = list(pool.map(_one, jobs, chunksize=16))
    else:
        pairs = [_one(j) for j in jobs]
    return Batch(params, master_seed, pairs)


@dataclass
class DistributionSummary:
    L: int
    before: Distribution
    after: Distribution
    mean_iterations: float
    sessions: int
    failures: int

    def to_dict(self) -> dict:
        return {
            "sessions": self.sessions,
            "failures": self.failures,
            "mean_iterations": self.mean_iterations,
            "extrema_mass_before": self.before.extrema_mass(),
            "extrema_mass_after": self.after.extrema_mass(),
            "max_deviation_before": self.before.max_deviation_from_uniform(),
            "max_deviation_after": self.after.max_deviation_from_uniform(),
            "uniform_reference": 1.0 / (2 * self.L + 1),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["weight_value", "p_before", "p_after", "uniform_reference"])
        ref = 1.0 / (2 * self.L + 1)
        for v, pb, pa in zip(self.before.values, self.before.probs, self.after.probs):
            writer.writerow([int(v), f"{pb:.6f}", f"{pa:.6f}", f"{ref:.6f}"])
        return buf.getvalue()


def summarize(batch: Batch) -> DistributionSummary:
    """Weight distributions over all synchronized sessions, before and after equalization."""
    params = batch.params
    weights = batch.final_weights()
    if not weights:
        raise ValueError("no synchronized sessions to summarize")
    before = weight_distribution(np.concatenate([w.ravel() for w in weights]), params.L)
    after = weight_distribution(np.concatenate([equalize(w, params) for w in weights]), params.L)
    return DistributionSummary(
        params.L, before, after, float(batch.iterations.mean()), len(batch.pairs), batch.failures
    )


def before_equalization_stream(batch: Batch) -> np.ndarray:
    """Raw weights of every session, zeros removed, concatenated in session order."""
    L = batch.params.L
    return np.concatenate([encode_bits(w, L, Encoding.ZERO_REMOVED) for w in batch.final_weights()])


def after_distillation_stream(batch: Batch, cfg: DistillConfig | None = None) -> np.ndarray:
    """Distilled secrets of every session concatenated in session order."""
    parts = [distill_stages(w, batch.params, cfg).secret for w in batch.final_weights()]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint8)


def after_equalization_stream(batch: Batch, cfg: DistillConfig | None = None) -> np.ndarray:
    """Encoded weights after equalization and dropout, before hashing, in session order."""
    parts = [distill_stages(w, batch.params, cfg).encoded for w in batch.final_weights()]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint8)
