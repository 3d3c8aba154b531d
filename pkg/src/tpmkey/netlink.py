"""Framed wire protocol for running mutual learning between two processes.

Every frame is ``<u32 body length> <u8 tag> <body>``, integers little-endian.
Only inputs, outputs and weight digests cross the wire; the distilled secret
never does. Note that a SyncProbe digest is a fingerprint of the weights and
is visible to anyone watching the channel.
"""

from __future__ import annotations

import enum
import hashlib
import logging
import socket
import struct
import time
from dataclasses import dataclass

import numpy as np

from .protocol import (
    DEFAULT_PROBE_INTERVAL,
    Session,
    SessionReport,
    Status,
    default_max_rounds,
    generate_input,
)
from .tpm import Role, Rule, TpmParams

log = logging.getLogger(__name__)

PROTOCOL_VERSION = 1
DEFAULT_PORT = 47_800
DIGEST_SIZE = 32

_HEADER = struct.Struct("<IB")
_RULES = [Rule.HEBBIAN, Rule.ANTI_HEBBIAN, Rule.RANDOM_WALK]
_ROLES = [Role.SENDER, Role.RECIPIENT]


class CodecError(ValueError):
    """Malformed frame; the session has to be aborted."""


class UnknownTag(CodecError):
    pass


class Truncated(CodecError):
    pass


class LengthMismatch(CodecError):
    pass


class AbortReason(enum.IntEnum):
    VERSION_MISMATCH = 1
    PARAM_MISMATCH = 2
    ROLE_CONFLICT = 3
    PROTOCOL_ERROR = 4
    MAX_ROUNDS = 5
    INTERNAL = 6


@dataclass(frozen=True)
class Hello:
    protocol_version: int
    params: TpmParams
    role: Role
    session_id: int


@dataclass(frozen=True)
class Input:
    round: int
    values: tuple[int, ...]


@dataclass(frozen=True)
class Output:
    round: int
    o: int


@dataclass(frozen=True)
class SyncProbe:
    round: int
    digest: bytes


@dataclass(frozen=True)
class SyncConfirm:
    round: int


@dataclass(frozen=True)
class Abort:
    reason: AbortReason


Message = Hello | Input | Output | SyncProbe | SyncConfirm | Abort

_TAGS = {Hello: 1, Input: 2, Output: 3, SyncProbe: 4, SyncConfirm: 5, Abort: 6}
_TYPES = {tag: cls for cls, tag in _TAGS.items()}

_HELLO = struct.Struct("<HHHHHBBQ")
_ROUND = struct.Struct("<I")
_OUTPUT = struct.Struct("<Ib")


def _encode_body(m: Message) -> bytes:
    if isinstance(m, Hello):
        p = m.params
        return _HELLO.pack(m.protocol_version, p.K, p.L, p.M, p.N,
                           _RULES.index(p.rule), _ROLES.index(Role(m.role)), m.session_id)
    if isinstance(m, Input):
        values = np.asarray(m.values, dtype=np.int64)
        if values.size and (values.min() < -(2 ** 15) or values.max() >= 2 ** 15):
            raise ValueError("input values must fit in 16 bits")
        return _ROUND.pack(m.round) + values.astype("<i2").tobytes()
    if isinstance(m, Output):
        if m.o not in (-1, 1):
            raise ValueError(f"output must be -1 or +1, got {m.o}")
        return _OUTPUT.pack(m.round, m.o)
    if isinstance(m, SyncProbe):
        if len(m.digest) != DIGEST_SIZE:
            raise ValueError(f"digest must be {DIGEST_SIZE} bytes")
        return _ROUND.pack(m.round) + bytes(m.digest)
    if isinstance(m, SyncConfirm):
        return _ROUND.pack(m.round)
    if isinstance(m, Abort):
        return bytes([int(m.reason)])
    raise TypeError(f"not a protocol message: {m!r}")


def encode_message(m: Message) -> bytes:
    body = _encode_body(m)
    return _HEADER.pack(len(body), _TAGS[type(m)]) + body


def _expect_size(body: bytes, size: int, name: str) -> None:
    if len(body) != size:
        raise LengthMismatch(f"{name} body is {len(body)} bytes, expected {size}")


def decode_body(tag: int, body: bytes) -> Message:
    cls = _TYPES.get(tag)
    if cls is None:
        raise UnknownTag(f"unknown message tag {tag}")
    if cls is Hello:
        _expect_size(body, _HELLO.size, "Hello")
        version, K, L, M, N, rule, role, sid = _HELLO.unpack(body)
        if rule >= len(_RULES) or role >= len(_ROLES):
            raise CodecError("bad rule or role code in Hello")
        try:
            params = TpmParams(K, L, M, N, _RULES[rule], allow_large_m=True)
        except ValueError as exc:
            raise CodecError(str(exc)) from exc
        return Hello(version, params, _ROLES[role], sid)
    if cls is Input:
        if len(body) < _ROUND.size or (len(body) - _ROUND.size) % 2:
            raise LengthMismatch(f"Input body of {len(body)} bytes")
        values = np.frombuffer(body, dtype="<i2", offset=_ROUND.size)
        return Input(_ROUND.unpack_from(body)[0], tuple(values.tolist()))
    if cls is Output:
        _expect_size(body, _OUTPUT.size, "Output")
        rnd, o = _OUTPUT.unpack(body)
        if o not in (-1, 1):
            raise CodecError(f"output must be -1 or +1, got {o}")
        return Output(rnd, o)
    if cls is SyncProbe:
        _expect_size(body, _ROUND.size + DIGEST_SIZE, "SyncProbe")
        return SyncProbe(_ROUND.unpack_from(body)[0], body[_ROUND.size:])
    if cls is SyncConfirm:
        _expect_size(body, _ROUND.size, "SyncConfirm")
        return SyncConfirm(_ROUND.unpack(body)[0])
    _expect_size(body, 1, "Abort")
    try:
        return Abort(AbortReason(body[0]))
    except ValueError as exc:
        raise CodecError(f"unknown abort reason {body[0]}") from exc


def decode_message(data: bytes) -> Message:
    """Decode exactly one complete frame."""
    if len(data) < _HEADER.size:
        raise Truncated(f"frame header needs {_HEADER.size} bytes, got {len(data)}")
    length, tag = _HEADER.unpack_from(data)
    body = data[_HEADER.size:]
    if len(body) < length:
        raise Truncated(f"declared body length {length}, only {len(body)} bytes present")
    if len(body) > length:
        raise LengthMismatch(f"{len(body) - length} trailing bytes after frame")
    return decode_body(tag, body)


class Channel:
    """Message stream over a connected socket (or anything with the socket API)."""

    def __init__(self, sock: socket.socket, record: bool = False):
        self.sock = sock
        self._reader = sock.makefile("rb")
        self.sent: list[Message] | None = [] if record else None
        self.received: list[Message] | None = [] if record else None

    def send(self, m: Message) -> None:
        self.sock.sendall(encode_message(m))
        if self.sent is not None:
            self.sent.append(m)

    def _read_exact(self, n: int) -> bytes:
        data = self._reader.read(n)
        if data is None or len(data) < n:
            raise ConnectionError("peer closed the connection")
        return data

    def recv(self) -> Message:
        length, tag = _HEADER.unpack(self._read_exact(_HEADER.size))
        m = decode_body(tag, self._read_exact(length) if length else b"")
        if self.received is not None:
            self.received.append(m)
        return m

    def close(self) -> None:
        try:
            self._reader.close()
        finally:
            self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _tune(sock: socket.socket) -> socket.socket:
    if sock.family in (socket.AF_INET, socket.AF_INET6):
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    return sock


def connect(host: str, port: int = DEFAULT_PORT, timeout: float | None = 30.0, record=False,
            retry_interval: float = 0.1) -> Channel:
    """Connect, retrying refused attempts until ``timeout`` so either side may start first."""
    deadline = None if timeout is None else time.monotonic() + timeout
    while True:
        try:
            sock = socket.create_connection((host, port), timeout=timeout)
            return Channel(_tune(sock), record)
        except ConnectionRefusedError:
            if deadline is not None and time.monotonic() + retry_interval > deadline:
                raise
            time.sleep(retry_interval)


def listen(host: str = "127.0.0.1", port: int = DEFAULT_PORT) -> socket.socket:
    """Bound, listening server socket; pass port 0 for an ephemeral port."""
    server = socket.create_server((host, port))
    return server


def accept(server: socket.socket, timeout: float | None = 30.0, record=False) -> Channel:
    server.settimeout(timeout)
    sock, _ = server.accept()
    sock.settimeout(timeout)
    return Channel(_tune(sock), record)


class RemoteAbort(RuntimeError):
    def __init__(self, reason: AbortReason, detail: str = "", from_peer: bool = False):
        super().__init__(f"{reason.name}: {detail}" if detail else reason.name)
        self.reason = reason
        self.from_peer = from_peer


def _expect(ch: Channel, cls, round_: int | None = None):
    m = ch.recv()
    if isinstance(m, Abort):
        raise RemoteAbort(m.reason, "peer aborted", from_peer=True)
    if not isinstance(m, cls):
        raise RemoteAbort(AbortReason.PROTOCOL_ERROR, f"expected {cls.__name__}, got {type(m).__name__}")
    if round_ is not None and m.round != round_:
        raise RemoteAbort(AbortReason.PROTOCOL_ERROR, f"expected round {round_}, got {m.round}")
    return m


def _handshake(ch: Channel, params: TpmParams, role: Role, session_id: int, version: int) -> Hello:
    ch.send(Hello(version, params, role, session_id))
    peer = _expect(ch, Hello)
    if peer.protocol_version != version:
        raise RemoteAbort(AbortReason.VERSION_MISMATCH, f"peer speaks {peer.protocol_version}")
    if (peer.params.K, peer.params.L, peer.params.M, peer.params.N, peer.params.rule) != (
        params.K, params.L, params.M, params.N, params.rule
    ):
        raise RemoteAbort(AbortReason.PARAM_MISMATCH, f"peer params {peer.params}")
    if peer.role == role:
        raise RemoteAbort(AbortReason.ROLE_CONFLICT, f"both sides are {role.value}")
    return peer


def run_remote_session(
    channel: Channel,
    params: TpmParams,
    role: Role,
    seed_weights=None,
    seed_inputs=None,
    probe_interval: int = DEFAULT_PROBE_INTERVAL,
    max_rounds: int | None = None,
    session_id: int = 0,
    hash_name: str = "sha256",
    protocol_version: int = PROTOCOL_VERSION,
) -> SessionReport:
    """Run one side of the key agreement over ``channel``.

    The sender draws every input from ``seed_inputs``. Each ``probe_interval``
    rounds both sides swap weight digests and stop once they agree. Any abort,
    codec error or transport failure leaves the report FAILED.
    """
    role = Role(role)
    if max_rounds is None:
        max_rounds = default_max_rounds(params)
    if probe_interval < 1:
        raise ValueError("probe_interval must be >= 1")
    if hashlib.new(hash_name).digest_size != DIGEST_SIZE:
        raise ValueError(f"sync probes need a {DIGEST_SIZE}-byte digest, {hash_name} differs")
    session = Session.start(params, role, seed_weights)
    rng = np.random.default_rng(seed_inputs) if role is Role.SENDER else None
    detail = None
    try:
        _handshake(channel, params, role, session_id, protocol_version)
        while True:
            t = session.round + 1
            if t > max_rounds:
                raise RemoteAbort(AbortReason.MAX_ROUNDS, f"no agreement after {max_rounds} rounds")
            if role is Role.SENDER:
                x = generate_input(params, rng)
                channel.send(Input(t, tuple(x.ravel().tolist())))
            else:
                msg = _expect(channel, Input, t)
                if len(msg.values) != params.size:
                    raise RemoteAbort(AbortReason.PROTOCOL_ERROR, "input has wrong size")
                x = np.array(msg.values, dtype=np.int64).reshape(params.shape)
                if np.any(x == 0) or np.any(np.abs(x) > params.M):
                    raise RemoteAbort(AbortReason.PROTOCOL_ERROR, "input outside alphabet")
            y, o = session.forward(x)
            channel.send(Output(t, o))
            peer_o = _expect(channel, Output, t).o
            session.finish_round(x, y, o, peer_o)
            if t % probe_interval == 0:
                digest = session.digest(hash_name)
                channel.send(SyncProbe(t, digest))
                if _expect(channel, SyncProbe, t).digest == digest:
                    channel.send(SyncConfirm(t))
                    _expect(channel, SyncConfirm, t)
                    session.mark(Status.SYNCHRONIZED)
                    break
    except RemoteAbort as exc:
        detail = str(exc)
        if not exc.from_peer:
            try:
                channel.send(Abort(exc.reason))
            except OSError:
                pass
    except CodecError as exc:
        detail = f"codec error: {exc}"
        try:
            channel.send(Abort(AbortReason.PROTOCOL_ERROR))
        except OSError:
            pass
    except (OSError, ConnectionError) as exc:
        detail = f"transport failure: {exc}"
    if detail is not None:
        log.info("%s session failed: %s", role.value, detail)
        session.mark(Status.FAILED)
    report = session.report(hash_name)
    report.detail = detail
    return report
