"""Reference score-provider server.

A standalone process that serves Gaussian-mixture scores and log-densities
over the newline-delimited JSON wire protocol (stdio by default, TCP
optionally). It shares only the protocol and the mixture JSON file format
with client implementations, proving cross-implementation compatibility, and
doubles as the template for adapters that wrap real generative-model scores.
"""

from .mixture import Mixture, load_mixture
from .server import ServerConfig, serve

__version__ = "0.1.0"

__all__ = ["Mixture", "ServerConfig", "load_mixture", "serve"]
