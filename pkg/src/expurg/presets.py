"""Built-in instances used by the CLI and the test suite.

``fig1-*`` is the 3x3 channel with diagonal dominance parameters
(0.01, 0.05, 0.25) and uniform inputs.  The mismatched decoder uses a
minimum-Hamming-distance metric: a matrix of the same shape with one fixed
off-diagonal value delta.  Any delta in (0, 1/3) induces the same decision
rule, and the optimized exponents are invariant to the choice because s is a
free parameter multiplying log((1-2*delta)/delta); we pin delta = 0.25.
"""

from __future__ import annotations

import numpy as np

from .errors import UsageError
from .model import ChannelModel, DecodingMetric, InputDistribution

FIG1_DELTAS = (0.01, 0.05, 0.25)
MIN_HAMMING_DELTA = 0.25


def _diag_dominant(deltas) -> np.ndarray:
    k = len(deltas)
    w = np.empty((k, k))
    for i, d in enumerate(deltas):
        w[i] = d
        w[i, i] = 1.0 - (k - 1) * d
    return w


def min_hamming_metric(k: int, delta: float = MIN_HAMMING_DELTA) -> DecodingMetric:
    return DecodingMetric(_diag_dominant([delta] * k))


def fig1_channel() -> ChannelModel:
    return ChannelModel(_diag_dominant(FIG1_DELTAS))


def fig1_mismatched() -> tuple[ChannelModel, DecodingMetric, InputDistribution]:
    ch = fig1_channel()
    return ch, min_hamming_metric(3), InputDistribution.uniform(3)


def fig1_ml() -> tuple[ChannelModel, DecodingMetric, InputDistribution]:
    ch = fig1_channel()
    return ch, DecodingMetric.ml(ch), InputDistribution.uniform(3)


def bsc_ml(p: float = 0.1) -> tuple[ChannelModel, DecodingMetric, InputDistribution]:
    ch = ChannelModel.bsc(p)
    return ch, DecodingMetric.ml(ch), InputDistribution.uniform(2)


def bec_ml(eps: float = 0.5) -> tuple[ChannelModel, DecodingMetric, InputDistribution]:
    ch = ChannelModel.bec(eps)
    return ch, DecodingMetric.ml(ch), InputDistribution.uniform(2)


PRESETS = {
    "fig1-mismatched": fig1_mismatched,
    "fig1-ml": fig1_ml,
    "bsc": bsc_ml,
    "bec": bec_ml,
}


def load_preset(name: str):
    try:
        return PRESETS[name]()
    except KeyError:
        raise UsageError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}") from None
