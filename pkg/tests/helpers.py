"""Shared scaffolding for the test suite (not reference implementations)."""

import numpy as np

from uqstream import nn


def make_gradcheck_case(rng, final_layer_kind="deterministic", dropout_rate=0.0):
    """Random small network plus batch, suitable for finite differences.

    Redraws until every hidden pre-activation is at least 1e-3 away from the
    ReLU kink, where a central difference with step 1e-5 would straddle the
    nondifferentiable point and the comparison stops being meaningful.
    """
    while True:
        din = int(rng.integers(1, 5))
        dout = int(rng.integers(1, 4))
        # dropout rescales a layer's output, which would shift deeper
        # pre-activations and void the kink guard below; keep one layer then
        depth = 1 if dropout_rate > 0.0 else int(rng.integers(1, 3))
        hidden = tuple(int(rng.integers(2, 7)) for _ in range(depth))
        arch = nn.NetworkArchitecture(din, dout, hidden, final_layer_kind, dropout_rate)
        params = nn.init_network(arch, int(rng.integers(0, 2 ** 31)))
        n = int(rng.integers(1, 6))
        x = rng.standard_normal((n, din))
        y = rng.standard_normal((n, dout))
        if _min_preactivation_gap(params, arch, x) > 1e-3:
            return arch, params, x, y


def _min_preactivation_gap(params, arch, x):
    a = x
    gap = np.inf
    for i in range(len(arch.hidden_layer_sizes)):
        w, b = params[2 * i], params[2 * i + 1]
        z = a @ w + b
        gap = min(gap, float(np.min(np.abs(z))))
        a = z * (z > 0.0)
    return gap
