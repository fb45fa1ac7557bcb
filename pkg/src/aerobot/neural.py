"""Small neural machinery: activations, an MLP trained by backprop,
training-pathology diagnostics, and the Hopfield associative memory.

The MLP exists to exercise activation and gradient behavior (vanishing
gradients under Sigmoid, dead units under ReLU); the Hopfield net is the
decision memory of the sidewalk pipeline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadTopology,
    DimensionMismatch,
    EmptyDataset,
    LengthMismatch,
    NonBipolarPattern,
    NonConvergent,
)

SIGMOID = "sigmoid"
RELU = "relu"
LEAKY_RELU = "leaky_relu"
_KINDS = (SIGMOID, RELU, LEAKY_RELU)


@dataclass(frozen=True)
class Activation:
    """One of sigmoid, relu, or leaky_relu; alpha is the leaky negative slope."""

    kind: str
    alpha: float = 0.01

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown activation {self.kind!r}")
        if self.kind == LEAKY_RELU and not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha {self.alpha} outside (0, 1)")

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == SIGMOID:
            return 1.0 / (1.0 + np.exp(-x))
        if self.kind == RELU:
            return np.maximum(0.0, x)
        return np.where(x >= 0.0, x, self.alpha * x)

    def deriv(self, x):
        """Derivative at the pre-activation x; the ReLU kink at 0 maps to 0."""
        x = np.asarray(x, dtype=np.float64)
        if self.kind == SIGMOID:
            s = 1.0 / (1.0 + np.exp(-x))
            return s * (1.0 - s)
        if self.kind == RELU:
            return np.where(x > 0.0, 1.0, 0.0)
        return np.where(x >= 0.0, 1.0, self.alpha)


def activate(a: Activation, x: float) -> float:
    return float(a(x))


def activate_deriv(a: Activation, x: float) -> float:
    return float(a.deriv(x))


# MLP ------------------------------------------------------------------------

@dataclass
class Mlp:
    """Fully connected net; weights[i] maps layer i to layer i+1."""

    layer_sizes: tuple
    activation: Activation
    seed: int
    weights: list = field(repr=False, default_factory=list)
    biases: list = field(repr=False, default_factory=list)


def mlp_init(layer_sizes, activation: Activation, seed: int) -> Mlp:
    """Weights uniform in [-0.5, 0.5] from the seeded generator; biases zero."""
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 3 or any(s < 1 for s in sizes):
        raise BadTopology(f"layer sizes {sizes}")
    rng = np.random.default_rng(seed)
    weights = [rng.uniform(-0.5, 0.5, size=(sizes[i + 1], sizes[i])) for i in range(len(sizes) - 1)]
    biases = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]
    return Mlp(sizes, activation, seed, weights, biases)


def _forward(net: Mlp, x: np.ndarray):
    """All pre-activations and activations, input layer included in the latter."""
    if x.shape != (net.layer_sizes[0],):
        raise DimensionMismatch(f"input shaped {x.shape}, expected ({net.layer_sizes[0]},)")
    activations = [x]
    pre = []
    for w, b in zip(net.weights, net.biases):
        z = w @ activations[-1] + b
        pre.append(z)
        activations.append(net.activation(z))
    return pre, activations


def mlp_forward(net: Mlp, x) -> list:
    """Per-layer activations of one input vector, input layer first."""
    _, activations = _forward(net, np.asarray(x, dtype=np.float64))
    return activations


def _backprop(net: Mlp, x: np.ndarray, target: np.ndarray):
    """Gradients of the squared-error term ||y - t||^2 / n_out for one pair."""
    if target.shape != (net.layer_sizes[-1],):
        raise DimensionMismatch(f"target shaped {target.shape}, expected ({net.layer_sizes[-1]},)")
    pre, acts = _forward(net, x)
    n_out = net.layer_sizes[-1]
    delta = 2.0 * (acts[-1] - target) / n_out * net.activation.deriv(pre[-1])
    grads_w = [None] * len(net.weights)
    grads_b = [None] * len(net.biases)
    for i in range(len(net.weights) - 1, -1, -1):
        grads_w[i] = np.outer(delta, acts[i])
        grads_b[i] = delta
        if i > 0:
            delta = (net.weights[i].T @ delta) * net.activation.deriv(pre[i - 1])
    loss = float(np.mean((acts[-1] - target) ** 2))
    return grads_w, grads_b, loss


def _batch_gradients(net: Mlp, batch):
    if not batch:
        raise EmptyDataset("batch is empty")
    sum_w = [np.zeros_like(w) for w in net.weights]
    sum_b = [np.zeros_like(b) for b in net.biases]
    total_loss = 0.0
    for x, target in batch:
        gw, gb, loss = _backprop(net, np.asarray(x, dtype=np.float64),
                                 np.asarray(target, dtype=np.float64))
        for acc, g in zip(sum_w, gw):
            acc += g
        for acc, g in zip(sum_b, gb):
            acc += g
        total_loss += loss
    m = len(batch)
    return [g / m for g in sum_w], [g / m for g in sum_b], total_loss / m


def mlp_train_step(net: Mlp, batch, learning_rate: float) -> tuple[Mlp, float]:
    """One batch-averaged gradient descent step; returns the pre-update MSE."""
    if learning_rate < 0:
        raise ValueError(f"learning rate {learning_rate}")
    grads_w, grads_b, loss = _batch_gradients(net, batch)
    for w, g in zip(net.weights, grads_w):
        w -= learning_rate * g
    for b, g in zip(net.biases, grads_b):
        b -= learning_rate * g
    return net, loss


def gradient_check(net: Mlp, x, target, epsilon: float = 1e-5) -> float:
    """Max relative error of analytic vs central finite-difference gradients.

    Callers must keep pre-activations at least 1e-3 from ReLU/leaky kinks so
    the two-sided difference never straddles one.
    """
    if not 0.0 < epsilon <= 1e-2:
        raise ValueError(f"epsilon {epsilon} outside (0, 1e-2]")
    x = np.asarray(x, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    grads_w, grads_b, _ = _batch_gradients(net, [(x, target)])

    def loss_now():
        _, _, loss = _backprop(net, x, target)
        return loss

    worst = 0.0
    for params, grads in ((net.weights, grads_w), (net.biases, grads_b)):
        for p, g in zip(params, grads):
            flat_p = p.reshape(-1)
            flat_g = g.reshape(-1)
            for i in range(flat_p.size):
                orig = flat_p[i]
                flat_p[i] = orig + epsilon
                up = loss_now()
                flat_p[i] = orig - epsilon
                down = loss_now()
                flat_p[i] = orig
                numeric = (up - down) / (2.0 * epsilon)
                denom = max(abs(numeric), abs(flat_g[i]), 1e-12)
                worst = max(worst, abs(numeric - flat_g[i]) / denom)
    return worst


@dataclass(frozen=True)
class GradientReport:
    """Per-weight-layer mean |gradient| and per-neuron dead flags."""

    layer_mean_abs_grad: tuple
    dead: tuple  # tuple per non-input layer of per-neuron booleans

    def dead_neurons(self) -> list[tuple[int, int]]:
        """(layer, neuron) pairs, layers numbered from 1 (first hidden)."""
        found = []
        for li, flags in enumerate(self.dead, start=1):
            for ni, flag in enumerate(flags):
                if flag:
                    found.append((li, ni))
        return found

    def to_csv(self) -> str:
        rows = ["layer,mean_abs_grad"]
        rows += [f"{i},{g!r}" for i, g in enumerate(self.layer_mean_abs_grad, start=1)]
        rows.append("dead_layer,dead_neuron")
        rows += [f"{li},{ni}" for li, ni in self.dead_neurons()]
        return "\n".join(rows) + "\n"


def diagnose(net: Mlp, dataset) -> GradientReport:
    """Dead-unit and gradient-magnitude report over a set of inputs.

    A neuron is dead only under ReLU, when its pre-activation is negative for
    every input (zero output, zero gradient, no influence downstream). The
    gradient magnitudes come from one backprop pass of the squared error
    against zero targets, averaged over the dataset.
    """
    inputs = [np.asarray(x, dtype=np.float64) for x in dataset]
    if not inputs:
        raise EmptyDataset("dataset is empty")
    n_layers = len(net.weights)
    always_negative = [np.ones(net.layer_sizes[i + 1], dtype=bool) for i in range(n_layers)]
    for x in inputs:
        pre, _ = _forward(net, x)
        for i, z in enumerate(pre):
            always_negative[i] &= z < 0.0
    if net.activation.kind == RELU:
        dead = tuple(tuple(bool(f) for f in flags) for flags in always_negative)
    else:
        dead = tuple(tuple(False for _ in flags) for flags in always_negative)

    zero_target = np.zeros(net.layer_sizes[-1])
    grads_w, _, _ = _batch_gradients(net, [(x, zero_target) for x in inputs])
    means = tuple(float(np.mean(np.abs(g))) for g in grads_w)
    return GradientReport(means, dead)


# Hopfield ---------------------------------------------------------------

@dataclass(frozen=True)
class HopfieldNet:
    """Symmetric zero-diagonal weights storing bipolar patterns as attractors."""

    n: int
    weights: np.ndarray
    stored_patterns: tuple


def _check_bipolar(pattern, n: int) -> np.ndarray:
    p = np.asarray(pattern, dtype=np.float64)
    if p.shape != (n,):
        raise LengthMismatch(f"pattern length {p.shape}, expected {n}")
    if not np.all(np.isin(p, (-1.0, 1.0))):
        raise NonBipolarPattern(f"entries must be -1 or +1, got {list(p)}")
    return p


def hopfield_train(patterns, n: int) -> HopfieldNet:
    """Hebbian storage: W = (1/n) sum of outer products, diagonal forced to 0."""
    checked = [_check_bipolar(p, n) for p in patterns]
    if not checked:
        raise ValueError("need at least one pattern")
    weights = np.zeros((n, n))
    for p in checked:
        weights += np.outer(p, p)
    weights /= n
    np.fill_diagonal(weights, 0.0)
    return HopfieldNet(n, weights, tuple(tuple(int(v) for v in p) for p in checked))


def hopfield_recall(net: HopfieldNet, pattern, max_iter: int = 10) -> tuple[np.ndarray, int]:
    """Synchronous recall of a ternary probe; zero local fields hold their state.

    Sweeps s <- sign(W s) until the state repeats; returns the fixed point and
    the number of sweeps spent confirming it (a stored vertex reports 1).
    Raises NonConvergent when no zero-free fixed point appears in max_iter.
    """
    state = np.asarray(pattern, dtype=np.float64)
    if state.shape != (net.n,):
        raise LengthMismatch(f"input length {state.shape}, expected {net.n}")
    if not np.all(np.isin(state, (-1.0, 0.0, 1.0))):
        raise ValueError(f"entries must be -1, 0, or +1, got {list(state)}")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    for sweep in range(1, max_iter + 1):
        field_ = net.weights @ state
        new_state = np.where(field_ > 0.0, 1.0, np.where(field_ < 0.0, -1.0, state))
        if np.array_equal(new_state, state):
            if np.any(new_state == 0.0):
                raise NonConvergent(f"fixed point {list(new_state)} keeps a zero entry")
            return new_state, sweep
        state = new_state
    raise NonConvergent(f"no fixed point within {max_iter} sweeps")


def hopfield_energy(net: HopfieldNet, state) -> float:
    """Attractor energy E = -1/2 s^T W s of a bipolar state."""
    s = _check_bipolar(state, net.n)
    return float(-0.5 * s @ net.weights @ s)


# Serialization ------------------------------------------------------------

MLP_FORMAT = "aerobot-mlp"
HOPFIELD_FORMAT = "aerobot-hopfield"
_FORMAT_VERSION = 1


def mlp_to_json(net: Mlp) -> str:
    doc = {
        "format": MLP_FORMAT,
        "version": _FORMAT_VERSION,
        "layer_sizes": list(net.layer_sizes),
        "activation": net.activation.kind,
        "alpha": net.activation.alpha,
        "seed": net.seed,
        "weights": [w.reshape(-1).tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
    }
    return json.dumps(doc)


def mlp_from_json(text: str) -> Mlp:
    doc = json.loads(text)
    if doc.get("format") != MLP_FORMAT or doc.get("version") != _FORMAT_VERSION:
        raise ValueError(f"not a {MLP_FORMAT} v{_FORMAT_VERSION} document")
    sizes = tuple(doc["layer_sizes"])
    net = Mlp(sizes, Activation(doc["activation"], doc["alpha"]), doc["seed"])
    for i, flat in enumerate(doc["weights"]):
        net.weights.append(np.array(flat).reshape(sizes[i + 1], sizes[i]))
    for b in doc["biases"]:
        net.biases.append(np.array(b))
    return net


def hopfield_to_json(net: HopfieldNet) -> str:
    doc = {
        "format": HOPFIELD_FORMAT,
        "version": _FORMAT_VERSION,
        "n": net.n,
        "weights": net.weights.reshape(-1).tolist(),
        "stored_patterns": [list(p) for p in net.stored_patterns],
    }
    return json.dumps(doc)


def hopfield_from_json(text: str) -> HopfieldNet:
    doc = json.loads(text)
    if doc.get("format") != HOPFIELD_FORMAT or doc.get("version") != _FORMAT_VERSION:
        raise ValueError(f"not a {HOPFIELD_FORMAT} v{_FORMAT_VERSION} document")
    n = doc["n"]
    weights = np.array(doc["weights"]).reshape(n, n)
    return HopfieldNet(n, weights, tuple(tuple(p) for p in doc["stored_patterns"]))
