"""Turning synchronized weights into a key: equalization, dropout, substitution.

Bit strings throughout are 1-D ``uint8`` arrays of 0/1 values. When bits are
packed into bytes (for hashing or digests) the first bit of each group of
eight becomes the least significant bit of the byte.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .tpm import Distribution, TpmParams, weight_distribution


class Encoding(str, enum.Enum):
    FULL = "full"
    ZERO_REMOVED = "zero_removed"


def entropy(d: Distribution) -> float:
    """Shannon entropy in bits per weight; 0 log 0 counts as 0."""
    p = d.probs[d.probs > 0]
    return float(-(p * np.log2(p)).sum()) + 0.0


def secret_length(params: TpmParams, d: Distribution) -> float:
    """Number of secret bits a K x N weight matrix with distribution ``d`` holds."""
    return params.K * params.N * entropy(d)


def _as_sequence(w, params: TpmParams) -> np.ndarray:
    seq = np.asarray(w, dtype=np.int64).ravel()
    if seq.size != params.size:
        raise ValueError(f"expected {params.size} weights, got {seq.size}")
    if seq.size and (seq.min() < -params.L or seq.max() > params.L):
        raise ValueError(f"weights outside [-{params.L}, {params.L}]")
    return seq


def equalize(w, params: TpmParams) -> np.ndarray:
    """Single pass that swaps currently most frequent values for the rarest one.

    ``w`` is read row-major. A value is replaced when it belongs to the set of
    most frequent values seen so far (ties included); it becomes the smallest
    of the least frequent values. The running histogram counts the value that
    was actually emitted.
    """
    seq = _as_sequence(w, params)
    L = params.L
    counts = [0] * (2 * L + 1)
    out = np.empty_like(seq)
    for i, v in enumerate(seq.tolist()):
        if counts[v + L] == max(counts):
            v = counts.index(min(counts)) - L
        counts[v + L] += 1
        out[i] = v
    return out


def dropout(w_eq, e: float, params: TpmParams) -> np.ndarray:
    """Keep a weight only while the emitted length stays under the entropy budget.

    ``e`` is the entropy (bits per weight) of the vector *before* equalization.
    Each kept weight costs log2(2L+1) bits.
    """
    if e < 0:
        raise ValueError(f"entropy must be non-negative, got {e}")
    seq = _as_sequence(w_eq, params)
    width = math.log2(params.alphabet_size)
    kept = []
    length = 0.0
    for pos, v in enumerate(seq.tolist(), start=1):
        if length < pos * e:
            kept.append(v)
            length += width
    return np.array(kept, dtype=np.int64)


def symbol_width(L: int, mode: Encoding) -> int:
    if Encoding(mode) is Encoding.FULL:
        return math.ceil(math.log2(2 * L + 1))
    width = math.log2(2 * L)
    if not width.is_integer():
        raise ValueError(f"zero-removed encoding needs 2L to be a power of two, got L={L}")
    return int(width)


def encode_bits(w, L: int, mode: Encoding = Encoding.FULL) -> np.ndarray:
    """Encode weights as fixed-width indices, least significant bit first.

    FULL maps v to v + L. ZERO_REMOVED drops zeros and closes the gap, mapping
    negatives to v + L and positives to v + L - 1.
    """
    mode = Encoding(mode)
    seq = np.asarray(w, dtype=np.int64).ravel()
    if seq.size and (seq.min() < -L or seq.max() > L):
        raise ValueError(f"weights outside [-{L}, {L}]")
    width = symbol_width(L, mode)
    if mode is Encoding.FULL:
        index = seq + L
    else:
        seq = seq[seq != 0]
        index = np.where(seq < 0, seq + L, seq + L - 1)
    shifts = np.arange(width)
    return ((index[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def pack_bits(bits) -> bytes:
    bits = np.asarray(bits, dtype=np.uint8)
    return np.packbits(bits, bitorder="little").tobytes()


def unpack_bits(data: bytes, count: int | None = None) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    return bits if count is None else bits[:count]


def hash_bits(name: str) -> int:
    """Output length in bits of a hashlib algorithm."""
    return hashlib.new(name).digest_size * 8


def substitute(bits, hash_name: str = "sha256") -> np.ndarray:
    """Replace every full hash-sized block with its digest; drop the remainder."""
    bits = np.asarray(bits, dtype=np.uint8)
    block = hash_bits(hash_name)
    blocks = bits.size // block
    out = []
    for i in range(blocks):
        chunk = pack_bits(bits[i * block:(i + 1) * block])
        out.append(unpack_bits(hashlib.new(hash_name, chunk).digest()))
    if not out:
        return np.zeros(0, dtype=np.uint8)
    return np.concatenate(out)


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in _TRUE:
        return True
    if text in _FALSE:
        return False
    raise ValueError(f"not a boolean: {value!r}")


@dataclass(frozen=True)
class DistillConfig:
    """Hash for substitution, bit encoding of kept weights, and whether to
    equalize at all (off only for comparison runs)."""

    hash_name: str = "sha256"
    encoding: Encoding = Encoding.FULL
    equalization: bool = True

    def __post_init__(self):
        object.__setattr__(self, "encoding", Encoding(self.encoding))
        object.__setattr__(self, "equalization", parse_bool(self.equalization))
        # hashlib raises ValueError for unknown names; XOFs have no fixed block
        if hashlib.new(self.hash_name).digest_size == 0:
            raise ValueError(f"{self.hash_name} has no fixed output length")

    def to_text(self) -> str:
        return (
            f"hash = {self.hash_name}\n"
            f"encoding = {self.encoding.value}\n"
            f"equalization = {str(self.equalization).lower()}\n"
        )

    @classmethod
    def from_text(cls, text: str) -> DistillConfig:
        keys = {"hash": "hash_name", "encoding": "encoding", "equalization": "equalization"}
        kwargs = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in keys:
                raise ValueError(f"bad distill config line: {raw!r}")
            kwargs[keys[key]] = value.strip()
        return cls(**kwargs)


@dataclass
class DistillResult:
    """Every intermediate stage of one distillation, for inspection."""

    weights: np.ndarray
    distribution: Distribution
    entropy: float
    equalized: np.ndarray
    kept: np.ndarray
    encoded: np.ndarray
    secret: np.ndarray = field(repr=False)


def distill_stages(final_weights, params: TpmParams, cfg: DistillConfig | None = None) -> DistillResult:
    cfg = cfg or DistillConfig()
    flat = _as_sequence(final_weights, params)
    dist = weight_distribution(flat, params.L)
    e = entropy(dist)
    equalized = equalize(flat, params) if cfg.equalization else flat.copy()
    kept = dropout(equalized, e, params)
    encoded = encode_bits(kept, params.L, cfg.encoding)
    secret = substitute(encoded, cfg.hash_name)
    return DistillResult(flat, dist, e, equalized, kept, encoded, secret)


def distill(final_weights, params: TpmParams, cfg: DistillConfig | None = None) -> np.ndarray:
    """Full pipeline from a synchronized weight matrix to secret bits."""
    return distill_stages(final_weights, params, cfg).secret


def weights_digest(w, L: int, hash_name: str = "sha256") -> bytes:
    """Digest of the canonical (FULL-mode) encoding of a weight matrix."""
    return hashlib.new(hash_name, pack_bits(encode_bits(w, L, Encoding.FULL))).digest()
