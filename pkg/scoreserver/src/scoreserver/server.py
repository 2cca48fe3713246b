"""Protocol loop: one hello, then score requests until the stream closes.

Wire format (one JSON object per line, UTF-8):

    server -> client   {"type":"hello","dim":d,"cond_dim":null,"has_log_density":true,"version":1}
    client -> server   {"type":"score","id":i,"points":[[..],..],"cond":null,"t":[..]|null}
    server -> client   {"type":"result","id":i,"scores":[[..],..],"log_density":[..]}
    server -> client   {"type":"error","id":i|null,"message":"..."}

A malformed or invalid request line produces exactly one error message and
the connection keeps serving. The optional t batch is accepted and ignored
(the analytic mixture has no timestep); cond must be null since the server
declares cond_dim = null.
"""

from __future__ import annotations

import json
import logging
import socket
import sys
from dataclasses import dataclass

import numpy as np

from .mixture import Mixture

PROTOCOL_VERSION = 1

logger = logging.getLogger("scoreserver")


@dataclass
class ServerConfig:
    mixture: Mixture
    tcp_address: str | None = None     # "host:port"; None serves stdio
    log_level: str = "warning"


def _hello(mixture: Mixture) -> dict:
    return {"type": "hello", "dim": mixture.dim, "cond_dim": None,
            "has_log_density": True, "version": PROTOCOL_VERSION}


def _error(request_id, message: str) -> dict:
    return {"type": "error", "id": request_id, "message": message}


def _answer(mixture: Mixture, line: str) -> dict:
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as exc:
        return _error(None, f"unparseable request line: {exc}")
    if not isinstance(msg, dict):
        return _error(None, "request must be a JSON object")
    request_id = msg.get("id")
    if msg.get("type") != "score":
        return _error(request_id, f"unsupported message type {msg.get('type')!r}")
    if not isinstance(request_id, int):
        return _error(None, "request id must be an integer")
    try:
        points = np.asarray(msg["points"], dtype=float)
    except (KeyError, TypeError, ValueError):
        return _error(request_id, "points must be a batch of number lists")
    if points.ndim != 2 or points.shape[1] != mixture.dim:
        return _error(request_id,
                      f"points must have shape (n, {mixture.dim})")
    if msg.get("cond") is not None:
        return _error(request_id, "server is unconditioned; cond must be null")
    t = msg.get("t")
    if t is not None and len(t) != len(points):
        return _error(request_id, "t batch length must match points")
    scores, log_density = mixture.score_and_log_density(points)
    return {"type": "result", "id": request_id,
            "scores": scores.tolist(), "log_density": log_density.tolist()}


def _serve_stream(mixture: Mixture, reader, writer):
    writer.write((json.dumps(_hello(mixture)) + "\n").encode("utf-8"))
    writer.flush()
    for raw in reader:
        response = _answer(mixture, raw.decode("utf-8"))
        if response["type"] == "error":
            logger.warning("request failed: %s", response["message"])
        writer.write((json.dumps(response) + "\n").encode("utf-8"))
        writer.flush()
    logger.info("stream closed")


def serve(config: ServerConfig):
    """Serve until the peer closes the stream (stdio) or forever (TCP)."""
    logging.basicConfig(level=config.log_level.upper(),
                        format="scoreserver: %(levelname)s: %(message)s")
    if config.tcp_address is None:
        _serve_stream(config.mixture, sys.stdin.buffer, sys.stdout.buffer)
        return
    host, _, port = config.tcp_address.rpartition(":")
    with socket.create_server((host or "127.0.0.1", int(port))) as server_sock:
        logger.info("listening on %s", config.tcp_address)
        while True:
            conn, peer = server_sock.accept()
            logger.info("connection from %s", peer)
            with conn, conn.makefile("rb") as reader, conn.makefile("wb") as writer:
                try:
                    _serve_stream(config.mixture, reader, writer)
                except (BrokenPipeError, ConnectionResetError):
                    logger.info("peer disconnected")
