"""Client for the score-provider wire protocol.

Newline-delimited JSON, one message per line, UTF-8, over the stdio of a
child process or a TCP connection:

    server -> client   {"type":"hello","dim":d,"cond_dim":c|null,"has_log_density":bool,"version":1}
    client -> server   {"type":"score","id":i,"points":[[..],..],"cond":[[..],..]|null,"t":[..]|null}
    server -> client   {"type":"result","id":i,"scores":[[..],..],"log_density":[..]|null}
    either             {"type":"error","id":i|null,"message":"..."}

Numbers are JSON doubles; Python's json round-trips IEEE-754 binary64 through
shortest-representation formatting, so values survive the wire bit-exactly.
Request ids are strictly increasing per connection and one batch is in flight
at a time (callers are serialized by a lock).
"""

from __future__ import annotations

import json
import socket
import subprocess
import threading

import numpy as np

from .density import ScoreProvider, ScoreResult, _check_points
from .errors import (DimensionMismatchError, MalformedResponseError,
                     RemoteProviderError, TransportError)

PROTOCOL_VERSION = 1


class _LineStream:
    """One readline/write pair over either a subprocess or a socket."""

    def __init__(self, reader, writer, closer):
        self._reader = reader
        self._writer = writer
        self._closer = closer

    def send_line(self, text: str):
        try:
            self._writer.write(text.encode("utf-8") + b"\n")
            self._writer.flush()
        except (BrokenPipeError, OSError) as exc:
            raise TransportError(f"failed to send request: {exc}") from exc

    def recv_line(self) -> str:
        try:
            line = self._reader.readline()
        except OSError as exc:
            raise TransportError(f"failed to read response: {exc}") from exc
        if not line:
            raise TransportError("provider stream closed")
        return line.decode("utf-8")

    def close(self):
        self._closer()


class ExternalScoreProvider(ScoreProvider):
    """Score provider backed by an external process or TCP endpoint."""

    def __init__(self, stream: _LineStream):
        self._stream = stream
        self._lock = threading.Lock()
        self._next_id = 0
        hello = self._read_message(expect="hello", request_id=None)
        if hello.get("version") != PROTOCOL_VERSION:
            raise MalformedResponseError(
                f"unsupported protocol version {hello.get('version')!r}")
        self.dim = int(hello["dim"])
        cd = hello.get("cond_dim")
        self.cond_dim = None if cd is None else int(cd)
        self.has_log_density = bool(hello["has_log_density"])

    @classmethod
    def spawn(cls, argv: list[str]) -> "ExternalScoreProvider":
        """Start a child process speaking the protocol on its stdio."""
        try:
            proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE)
        except OSError as exc:
            raise TransportError(f"failed to spawn provider {argv!r}: {exc}") from exc

        def close():
            try:
                proc.stdin.close()
            except OSError:
                pass
            proc.wait(timeout=10)

        return cls(_LineStream(proc.stdout, proc.stdin, close))

    @classmethod
    def connect(cls, host: str, port: int) -> "ExternalScoreProvider":
        """Connect to a TCP provider."""
        try:
            sock = socket.create_connection((host, port))
        except OSError as exc:
            raise TransportError(f"failed to connect to {host}:{port}: {exc}") from exc
        reader = sock.makefile("rb")
        writer = sock.makefile("wb")

        def close():
            reader.close()
            writer.close()
            sock.close()

        return cls(_LineStream(reader, writer, close))

    def _read_message(self, expect: str, request_id):
        raw = self._stream.recv_line()
        try:
            msg = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedResponseError(
                f"unparseable provider line: {raw[:200]!r}", request_id) from exc
        if not isinstance(msg, dict) or "type" not in msg:
            raise MalformedResponseError(
                f"provider message without a type: {raw[:200]!r}", request_id)
        if msg["type"] == "error":
            raise RemoteProviderError(
                f"provider error: {msg.get('message', '(no message)')}",
                msg.get("id", request_id))
        if msg["type"] != expect:
            raise MalformedResponseError(
                f"expected {expect!r} message, got {msg['type']!r}", request_id)
        return msg

    def score(self, points, cond=None, t=None) -> ScoreResult:
        pts = _check_points(points, self.dim)
        n = len(pts)
        if cond is not None:
            cond = np.asarray(cond, dtype=float)
            if cond.ndim == 1:
                cond = cond[:, None]
            if self.cond_dim is None:
                raise DimensionMismatchError(
                    "provider declared no condition support but cond was given")
            if cond.shape != (n, self.cond_dim):
                raise DimensionMismatchError(
                    f"cond batch shape {cond.shape} does not match "
                    f"({n}, {self.cond_dim})")
        if t is not None:
            t = np.asarray(t, dtype=float)
            if t.shape != (n,):
                raise DimensionMismatchError(
                    f"t batch of shape {t.shape} does not match point count {n}")
        with self._lock:
            req_id = self._next_id
            self._next_id += 1
            request = {
                "type": "score",
                "id": req_id,
                "points": pts.tolist(),
                "cond": None if cond is None else cond.tolist(),
                "t": None if t is None else t.tolist(),
            }
            self._stream.send_line(json.dumps(request))
            msg = self._read_message(expect="result", request_id=req_id)
        if msg.get("id") != req_id:
            raise MalformedResponseError(
                f"response id {msg.get('id')!r} does not match request {req_id}", req_id)
        try:
            scores = np.asarray(msg["scores"], dtype=float)
        except (KeyError, ValueError) as exc:
            raise MalformedResponseError(f"bad scores payload: {exc}", req_id) from exc
        if scores.shape != pts.shape:
            raise DimensionMismatchError(
                f"scores shape {scores.shape} does not match query {pts.shape}", req_id)
        log_density = None
        if self.has_log_density:
            if msg.get("log_density") is None:
                raise MalformedResponseError(
                    "provider declared log-density but omitted it", req_id)
            log_density = np.asarray(msg["log_density"], dtype=float)
            if log_density.shape != (n,):
                raise DimensionMismatchError(
                    f"log_density shape {log_density.shape} != ({n},)", req_id)
        return ScoreResult(scores, log_density)

    def close(self):
        self._stream.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
