"""Template for serving scores from a learned generative model.

The reference server answers from an analytic mixture; a real deployment
replaces the mixture with an adapter that queries a pretrained score model.
This module is the documented, non-executing skeleton for that adapter: it
imports cleanly, raises on use, and spells out how the protocol fields map
onto model inputs.

Protocol field mapping
----------------------
points : the latent-space query batch x, shape (n, d). For an image latent
    model, d is the flattened latent dimension and each row is a latent at
    the model's working noise level.
cond : per-point condition embeddings, shape (n, cond_dim), e.g. encoded
    text prompts. The adapter declares cond_dim in its hello message; the
    linear-in-time conditioning schedule on the client side produces these.
t : per-point scalar passed through verbatim, intended for the model's
    noise/timestep parameter. Whether the adapter samples one timestep or
    averages a neighborhood of timesteps is its own business; the protocol
    only carries the scalar.

The returned scores approximate the gradient of the log-density at the
query points; clients apply their own scale factor (the solver's score-scale
hyperparameter, typically well below 1 for distillation-style estimates), so
adapters should NOT bake that scale in. Score-only models set
has_log_density = false in the hello message and leave log_density null;
clients then degrade to relative quantities.
"""

from __future__ import annotations

import numpy as np


class DiffusionScoreAdapter:
    """Skeleton adapter: wire a pretrained score model into the server loop.

    Subclass and implement ``score_batch``; everything protocol-shaped is the
    server's job. Typical ingredients of an implementation, none of which are
    provided here: encoding conditions, evaluating the noise-prediction
    network at one or more timesteps around ``t``, combining conditional and
    unconditional predictions (guidance and negative conditions), and mapping
    the result into gradient units.
    """

    #: latent dimension served; fill in from the wrapped model
    dim: int | None = None
    #: condition embedding dimension, or None for unconditional serving
    cond_dim: int | None = None
    #: whether the adapter can report absolute log-densities (rarely true)
    has_log_density: bool = False

    def score_batch(self, points: np.ndarray, cond: np.ndarray | None,
                    t: np.ndarray | None):
        """Return (scores, log_density-or-None) for a query batch.

        points : (n, dim) float64
        cond   : (n, cond_dim) float64 or None
        t      : (n,) float64 or None
        """
        raise NotImplementedError(
            "DiffusionScoreAdapter is a documentation skeleton; subclass it "
            "and implement score_batch() against your model")
