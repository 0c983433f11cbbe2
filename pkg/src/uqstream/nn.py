"""Small dense networks on numpy with hand-written backprop.

ReLU hidden layers, a linear output layer, mean-squared-error loss and the
Adam optimizer. The output layer can optionally be a variational layer whose
weights carry a mean and a log-stddev; stochastic forward passes perturb the
weights with a shared Gaussian draw that is decorrelated across batch rows by
random sign flips. Training such a layer adds a KL penalty toward a standard
normal prior.

Parameters are a flat list of arrays. For each hidden layer the list holds
[weights, bias]; the final layer appends [weights, bias] in the deterministic
case and [weight_mean, weight_log_std, bias] in the variational case.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

Params = list[np.ndarray]

FINAL_LAYER_KINDS = ("deterministic", "flipout")
_MODES = ("train", "infer", "infer_stochastic")


class TrainingFault(RuntimeError):
    """Raised when training produces non-finite losses or parameters."""


@dataclass(frozen=True)
class NetworkArchitecture:
    input_dim: int
    output_dim: int
    hidden_layer_sizes: tuple[int, ...] = (16,)
    final_layer_kind: str = "deterministic"
    dropout_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "hidden_layer_sizes", tuple(int(h) for h in self.hidden_layer_sizes))
        if self.input_dim < 1 or self.output_dim < 1:
            raise ValueError("input_dim and output_dim must be positive")
        if not self.hidden_layer_sizes or any(h < 1 for h in self.hidden_layer_sizes):
            raise ValueError("hidden_layer_sizes must be non-empty positive ints")
        if self.final_layer_kind not in FINAL_LAYER_KINDS:
            raise ValueError(f"unknown final_layer_kind: {self.final_layer_kind!r}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 100
    patience: int = 3
    batch_size: int = 16
    learning_rate: float = 1e-3
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_epochs < 1 or self.patience < 1 or self.batch_size < 1:
            raise ValueError("max_epochs, patience and batch_size must be positive")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")


@dataclass(frozen=True)
class TrainReport:
    epochs_run: int
    best_validation_loss: float
    final_training_loss: float
    stopped_early: bool


def init_network(arch: NetworkArchitecture, seed: int) -> Params:
    """Seeded init: uniform fan-in scaling for weights, zero biases.

    Weight matrices draw from U(-sqrt(6/fan_in), sqrt(6/fan_in)), the usual
    uniform variant of fan-in scaling for ReLU stacks. The variational output
    layer starts with log-stddev -5 so it behaves near-deterministically until
    training widens it.
    """
    rng = np.random.default_rng(seed)
    params: Params = []
    fan_in = arch.input_dim
    for width in arch.hidden_layer_sizes:
        limit = math.sqrt(6.0 / fan_in)
        params.append(rng.uniform(-limit, limit, size=(fan_in, width)))
        params.append(np.zeros(width))
        fan_in = width
    limit = math.sqrt(6.0 / fan_in)
    params.append(rng.uniform(-limit, limit, size=(fan_in, arch.output_dim)))
    if arch.final_layer_kind == "flipout":
        params.append(np.full((fan_in, arch.output_dim), -5.0))
    params.append(np.zeros(arch.output_dim))
    return params


def mse_loss(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean squared error over all rows and output components."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: pred {pred.shape} vs target {target.shape}")
    diff = pred - target
    return float(np.mean(diff * diff))


def _needs_rng(arch: NetworkArchitecture, stochastic: bool) -> bool:
    return stochastic and (arch.dropout_rate > 0.0 or arch.final_layer_kind == "flipout")


def _check_mode(arch, mode, rng):
    if mode not in _MODES:
        raise ValueError(f"unknown mode: {mode!r}")
    stochastic = mode != "infer"
    if _needs_rng(arch, stochastic) and rng is None:
        raise ValueError(f"mode {mode!r} with this architecture requires an rng")
    return stochastic


def _forward_tape(params, arch, x, stochastic, rng):
    """Forward pass over a 2-D batch, caching what backward needs.

    Returns (outputs, per-layer caches, final-layer noise or None). Cache
    entries are (layer input, relu mask, dropout mask).
    """
    n_hidden = len(arch.hidden_layer_sizes)
    drop = arch.dropout_rate if stochastic else 0.0
    caches = []
    a = x
    for i in range(n_hidden):
        w, b = params[2 * i], params[2 * i + 1]
        z = a @ w + b
        mask = z > 0.0
        h = z * mask
        if drop > 0.0:
            keep = 1.0 - drop
            dmask = (rng.random(h.shape) < keep) / keep
            h = h * dmask
        else:
            dmask = None
        caches.append((a, mask, dmask))
        a = h
    base = 2 * n_hidden
    if arch.final_layer_kind == "flipout":
        w_mu, w_ls, b = params[base], params[base + 1], params[base + 2]
        if stochastic:
            sigma = np.exp(w_ls)
            eps = rng.standard_normal(w_mu.shape)
            # one perturbation per batch, decorrelated across rows by sign flips
            s_in = rng.integers(0, 2, size=(a.shape[0], w_mu.shape[0])) * 2.0 - 1.0
            s_out = rng.integers(0, 2, size=(a.shape[0], w_mu.shape[1])) * 2.0 - 1.0
            dw = sigma * eps
            y = a @ w_mu + b + ((a * s_in) @ dw) * s_out
            noise = (sigma, eps, s_in, s_out, dw)
        else:
            y = a @ w_mu + b
            noise = None
    else:
        w, b = params[base], params[base + 1]
        y = a @ w + b
        noise = None
    caches.append((a, None, None))
    return y, caches, noise


def _check_x(arch, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[-1] != arch.input_dim:
        raise ValueError(f"input shape {x.shape} does not match input_dim {arch.input_dim}")
    if not np.isfinite(x).all():
        raise ValueError("input contains non-finite values")
    return x


def forward(params: Params, arch: NetworkArchitecture, x, mode: str = "infer",
            rng: np.random.Generator | None = None) -> np.ndarray:
    """Evaluate the network on a vector or a batch of rows.

    In mode "infer" the pass is fully deterministic (dropout off, variational
    layer collapsed to its weight means) and the rng is never consulted. The
    stochastic modes sample dropout masks and weight perturbations.
    """
    stochastic = _check_mode(arch, mode, rng)
    x = _check_x(arch, x)
    single = x.ndim == 1
    y, _, _ = _forward_tape(params, arch, x[None, :] if single else x, stochastic, rng)
    return y[0] if single else y


def _kl_to_standard_normal(w_mu, w_ls):
    # sum over weights of KL(N(mu, sigma^2) || N(0, 1)), sigma = exp(w_ls)
    return float(np.sum(-w_ls + 0.5 * (np.exp(2.0 * w_ls) + w_mu * w_mu) - 0.5))


def batch_loss(params: Params, arch: NetworkArchitecture, x, y, mode: str = "train",
               rng: np.random.Generator | None = None, kl_weight: float = 0.0) -> float:
    """Training objective on one batch: MSE plus the weighted KL penalty.

    Passing generators seeded identically reproduces the same sampled
    objective, which is what the finite-difference checks rely on.
    """
    stochastic = _check_mode(arch, mode, rng)
    x = _check_x(arch, x)
    if x.ndim == 1:
        x = x[None, :]
        y = np.asarray(y, dtype=np.float64)[None, :]
    pred, _, _ = _forward_tape(params, arch, x, stochastic, rng)
    loss = mse_loss(pred, y)
    if kl_weight and arch.final_layer_kind == "flipout":
        base = 2 * len(arch.hidden_layer_sizes)
        loss += kl_weight * _kl_to_standard_normal(params[base], params[base + 1])
    return loss


def _backprop_tape(params, arch, x, y, stochastic, rng, kl_weight):
    """Gradients of the batch objective for every parameter array."""
    pred, caches, noise = _forward_tape(params, arch, x, stochastic, rng)
    n, dout = pred.shape
    g = (2.0 / (n * dout)) * (pred - y)
    grads: Params = [None] * len(params)  # type: ignore[list-item]
    n_hidden = len(arch.hidden_layer_sizes)
    base = 2 * n_hidden
    a_last = caches[-1][0]
    if arch.final_layer_kind == "flipout":
        w_mu, w_ls = params[base], params[base + 1]
        g_mu = a_last.T @ g
        g_b = g.sum(axis=0)
        if stochastic:
            sigma, eps, s_in, s_out, dw = noise
            gs = g * s_out
            g_dw = (a_last * s_in).T @ gs
            g_ls = g_dw * eps * sigma
            g_in = g @ w_mu.T + (gs @ dw.T) * s_in
        else:
            sigma = np.exp(w_ls)
            g_ls = np.zeros_like(w_ls)
            g_in = g @ w_mu.T
        if kl_weight:
            g_mu = g_mu + kl_weight * w_mu
            g_ls = g_ls + kl_weight * (sigma * sigma - 1.0)
        grads[base], grads[base + 1], grads[base + 2] = g_mu, g_ls, g_b
    else:
        w = params[base]
        grads[base] = a_last.T @ g
        grads[base + 1] = g.sum(axis=0)
        g_in = g @ w.T
    for i in reversed(range(n_hidden)):
        a_i, mask, dmask = caches[i]
        if dmask is not None:
            g_in = g_in * dmask
        gz = g_in * mask
        grads[2 * i] = a_i.T @ gz
        grads[2 * i + 1] = gz.sum(axis=0)
        if i > 0:
            g_in = gz @ params[2 * i].T
    return grads, pred


def backprop(params: Params, arch: NetworkArchitecture, x, y, mode: str = "train",
             rng: np.random.Generator | None = None, kl_weight: float = 0.0) -> Params:
    """Analytic gradients of batch_loss with respect to every parameter array."""
    stochastic = _check_mode(arch, mode, rng)
    x = _check_x(arch, x)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
        y = y[None, :]
    if y.shape != (x.shape[0], arch.output_dim):
        raise ValueError(f"target shape {y.shape} does not match ({x.shape[0]}, {arch.output_dim})")
    grads, _ = _backprop_tape(params, arch, x, y, stochastic, rng, kl_weight)
    return grads


@dataclass(frozen=True)
class AdamState:
    learning_rate: float
    step: int
    m: Params
    v: Params
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


def init_adam(params: Params, learning_rate: float) -> AdamState:
    return AdamState(
        learning_rate=learning_rate,
        step=0,
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
    )


def adam_step(params: Params, grads: Params, state: AdamState) -> tuple[Params, AdamState]:
    """One bias-corrected Adam update; returns fresh params and state."""
    if not (len(params) == len(grads) == len(state.m) == len(state.v)):
        raise ValueError("params, grads and optimizer state must have equal length")
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    new_p: Params = []
    new_m: Params = []
    new_v: Params = []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter shape {p.shape}")
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * (g * g)
        new_m.append(m)
        new_v.append(v)
        new_p.append(p - state.learning_rate * (m / c1) / (np.sqrt(v / c2) + state.epsilon))
    return new_p, replace(state, step=t, m=new_m, v=new_v)


def _as_xy(pair, arch, role):
    x, y = pair
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2:
        raise ValueError(f"{role} arrays must be 2-D, got {x.shape} and {y.shape}")
    if x.shape[0] == 0:
        raise ValueError(f"{role} set is empty")
    if x.shape[1] != arch.input_dim or y.shape != (x.shape[0], arch.output_dim):
        raise ValueError(f"{role} shapes {x.shape}/{y.shape} do not match the architecture")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError(f"{role} set contains non-finite values")
    return x, y


def fit(params: Params, arch: NetworkArchitecture, train_set, val_set,
        cfg: TrainConfig) -> tuple[Params, TrainReport]:
    """Minibatch training with early stopping on validation loss.

    train_set and val_set are (inputs, targets) array pairs. Each epoch
    shuffles the training rows with the config's seeded stream and applies one
    Adam update per minibatch. Validation MSE is measured deterministically
    after every epoch; when it fails to improve for `patience` consecutive
    epochs training stops and the best parameters seen are returned. With a
    variational output layer the objective adds the KL penalty weighted by
    1 / len(train_set).

    Divergence (non-finite validation loss) raises TrainingFault.
    """
    x, y = _as_xy(train_set, arch, "train")
    xv, yv = _as_xy(val_set, arch, "validation")
    rng = np.random.default_rng(cfg.rng_seed)
    kl_weight = 1.0 / x.shape[0] if arch.final_layer_kind == "flipout" else 0.0
    state = init_adam(params, cfg.learning_rate)
    stochastic = arch.dropout_rate > 0.0 or arch.final_layer_kind == "flipout"

    best_val = math.inf
    best_params = [p.copy() for p in params]
    bad_epochs = 0
    stopped_early = False
    epochs_run = 0
    n = x.shape[0]
    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            grads, _ = _backprop_tape(params, arch, x[idx], y[idx], stochastic, rng, kl_weight)
            params, state = adam_step(params, grads, state)
        epochs_run = epoch
        val_pred, _, _ = _forward_tape(params, arch, xv, False, None)
        val_loss = mse_loss(val_pred, yv)
        if not math.isfinite(val_loss):
            raise TrainingFault(f"validation loss became non-finite at epoch {epoch}")
        if val_loss < best_val:
            best_val = val_loss
            best_params = [p.copy() for p in params]
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= cfg.patience:
                stopped_early = True
                break
    train_pred, _, _ = _forward_tape(best_params, arch, x, False, None)
    report = TrainReport(
        epochs_run=epochs_run,
        best_validation_loss=best_val,
        final_training_loss=mse_loss(train_pred, y),
        stopped_early=stopped_early,
    )
    return best_params, report
