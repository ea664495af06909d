"""Feed-forward networks with exact reverse-mode gradients, in plain numpy.

Hidden layers use tanh; the output layer is identity (critics) or tanh
(actors, to bound force commands). `forward` accepts a single vector or a
batch of row vectors; `backward` returns parameter gradients plus the
gradient with respect to the input, which the actor update chains through a
critic. An adaptive-moment optimizer and target-network soft updates round
out the substrate. Everything is a pure function: callers receive new
parameter objects and the inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, ContractViolation

_ACTIVATIONS = ("identity", "tanh")


@dataclass(eq=False)
class MlpParams:
    """Weights and biases of one network; weights[l] has shape (in, out)."""

    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    output_activation: str = "identity"

    def copy(self) -> "MlpParams":
        return MlpParams(
            layer_sizes=self.layer_sizes,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            output_activation=self.output_activation,
        )

    def __eq__(self, other):
        if not isinstance(other, MlpParams):
            return NotImplemented
        return (
            self.layer_sizes == other.layer_sizes
            and self.output_activation == other.output_activation
            and all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights))
            and all(np.array_equal(a, b) for a, b in zip(self.biases, other.biases))
        )


@dataclass
class ForwardCache:
    """Per-layer activations kept for the backward pass; activations[0] is the input."""

    activations: list[np.ndarray]


@dataclass(eq=False)
class GradBundle:
    """Gradients mirroring MlpParams, plus the gradient at the network input."""

    weight_grads: list[np.ndarray]
    bias_grads: list[np.ndarray]
    input_grad: np.ndarray


@dataclass
class OptState:
    """Adaptive-moment accumulators, one pair per parameter array."""

    m_weights: list[np.ndarray]
    v_weights: list[np.ndarray]
    m_biases: list[np.ndarray]
    v_biases: list[np.ndarray]
    step: int = 0
    learning_rate: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


def init_mlp(
    layer_sizes: Sequence[int], output_activation: str = "identity", seed: int = 0
) -> MlpParams:
    """Fan-in-scaled uniform weights, zero biases, deterministic per seed.

    Every weight entry is drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    """
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2:
        raise ConfigError(f"need at least input and output sizes, got {sizes}")
    if any(s < 1 for s in sizes):
        raise ConfigError(f"layer sizes must be positive, got {sizes}")
    if output_activation not in _ACTIVATIONS:
        raise ConfigError(f"output_activation must be one of {_ACTIVATIONS}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(
        layer_sizes=sizes, weights=weights, biases=biases, output_activation=output_activation
    )


def forward(params: MlpParams, inputs) -> tuple[np.ndarray, ForwardCache]:
    """Evaluate the network on one vector or a batch of row vectors."""
    x = np.asarray(inputs, dtype=float)
    if x.ndim not in (1, 2) or x.shape[-1] != params.layer_sizes[0]:
        raise ContractViolation(
            f"input shape {x.shape} does not feed a network with input size "
            f"{params.layer_sizes[0]}"
        )
    activations = [x]
    last = len(params.weights) - 1
    for l, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = activations[-1] @ w + b
        if l < last or params.output_activation == "tanh":
            z = np.tanh(z)
        activations.append(z)
    return activations[-1], ForwardCache(activations=activations)


def backward(params: MlpParams, cache: ForwardCache, output_gradient) -> GradBundle:
    """Exact reverse-mode gradients for a matching `forward` call.

    For batched inputs the parameter gradients are summed over the batch and
    the input gradient is per-row. The cache must come from the same
    (params, input) pair; shape mismatches are rejected.
    """
    acts = cache.activations
    if len(acts) != len(params.weights) + 1:
        raise ContractViolation("cache does not match the network depth")
    for a, size in zip(acts, params.layer_sizes):
        if a.shape[-1] != size:
            raise ContractViolation("cache does not match the network layer sizes")
    grad = np.asarray(output_gradient, dtype=float)
    if grad.shape != acts[-1].shape:
        raise ContractViolation(
            f"output gradient shape {grad.shape} does not match output {acts[-1].shape}"
        )

    single = acts[0].ndim == 1
    layered = [a[None, :] if single else a for a in acts]
    grad = grad[None, :] if single else grad

    if params.output_activation == "tanh":
        grad = grad * (1.0 - layered[-1] ** 2)
    weight_grads = [np.empty(0)] * len(params.weights)
    bias_grads = [np.empty(0)] * len(params.weights)
    for l in range(len(params.weights) - 1, -1, -1):
        below = layered[l]
        weight_grads[l] = below.T @ grad
        bias_grads[l] = grad.sum(axis=0)
        grad = grad @ params.weights[l].T
        if l > 0:
            grad = grad * (1.0 - below**2)  # below is a tanh output for l >= 1
    input_grad = grad[0] if single else grad
    return GradBundle(weight_grads=weight_grads, bias_grads=bias_grads, input_grad=input_grad)


def init_opt_state(
    params: MlpParams,
    learning_rate: float = 1e-2,
    beta1: float = 0.9,
    beta2: float = 0.999,
    epsilon: float = 1e-8,
) -> OptState:
    return OptState(
        m_weights=[np.zeros_like(w) for w in params.weights],
        v_weights=[np.zeros_like(w) for w in params.weights],
        m_biases=[np.zeros_like(b) for b in params.biases],
        v_biases=[np.zeros_like(b) for b in params.biases],
        step=0,
        learning_rate=learning_rate,
        beta1=beta1,
        beta2=beta2,
        epsilon=epsilon,
    )


def _check_mirror(params: MlpParams, arrays_w, arrays_b, what: str):
    ok = len(arrays_w) == len(params.weights) and len(arrays_b) == len(params.biases)
    if ok:
        ok = all(a.shape == w.shape for a, w in zip(arrays_w, params.weights)) and all(
            a.shape == b.shape for a, b in zip(arrays_b, params.biases)
        )
    if not ok:
        raise ContractViolation(f"{what} shapes do not mirror the parameters")


def opt_step(
    params: MlpParams, grads: GradBundle, opt_state: OptState
) -> tuple[MlpParams, OptState]:
    """One adaptive-moment update with bias correction; returns new objects."""
    _check_mirror(params, grads.weight_grads, grads.bias_grads, "gradient")
    t = opt_state.step + 1
    b1, b2 = opt_state.beta1, opt_state.beta2
    lr, eps = opt_state.learning_rate, opt_state.epsilon
    corr1 = 1.0 - b1**t
    corr2 = 1.0 - b2**t

    def update(value, grad, m, v):
        m_new = b1 * m + (1.0 - b1) * grad
        v_new = b2 * v + (1.0 - b2) * grad * grad
        step = lr * (m_new / corr1) / (np.sqrt(v_new / corr2) + eps)
        return value - step, m_new, v_new

    new_weights, new_m_w, new_v_w = [], [], []
    for w, g, m, v in zip(params.weights, grads.weight_grads, opt_state.m_weights, opt_state.v_weights):
        nw, nm, nv = update(w, g, m, v)
        new_weights.append(nw)
        new_m_w.append(nm)
        new_v_w.append(nv)
    new_biases, new_m_b, new_v_b = [], [], []
    for b, g, m, v in zip(params.biases, grads.bias_grads, opt_state.m_biases, opt_state.v_biases):
        nb, nm, nv = update(b, g, m, v)
        new_biases.append(nb)
        new_m_b.append(nm)
        new_v_b.append(nv)

    new_params = MlpParams(
        layer_sizes=params.layer_sizes,
        weights=new_weights,
        biases=new_biases,
        output_activation=params.output_activation,
    )
    new_state = OptState(
        m_weights=new_m_w,
        v_weights=new_v_w,
        m_biases=new_m_b,
        v_biases=new_v_b,
        step=t,
        learning_rate=lr,
        beta1=b1,
        beta2=b2,
        epsilon=eps,
    )
    return new_params, new_state


def soft_update(target: MlpParams, source: MlpParams, tau: float) -> MlpParams:
    """Elementwise (1 - tau) * target + tau * source; tau=1 copies the source."""
    if target.layer_sizes != source.layer_sizes:
        raise ContractViolation("target and source networks have different shapes")
    return MlpParams(
        layer_sizes=target.layer_sizes,
        weights=[(1.0 - tau) * t + tau * s for t, s in zip(target.weights, source.weights)],
        biases=[(1.0 - tau) * t + tau * s for t, s in zip(target.biases, source.biases)],
        output_activation=target.output_activation,
    )


def grad_global_norm(grads: GradBundle) -> float:
    total = 0.0
    for g in grads.weight_grads:
        total += float((g * g).sum())
    for g in grads.bias_grads:
        total += float((g * g).sum())
    return float(np.sqrt(total))


def clip_grad_norm(grads: GradBundle, max_norm: float) -> GradBundle:
    """Rescale all parameter gradients so their global norm is at most max_norm."""
    norm = grad_global_norm(grads)
    if norm <= max_norm or norm == 0.0:
        return grads
    scale = max_norm / norm
    return GradBundle(
        weight_grads=[g * scale for g in grads.weight_grads],
        bias_grads=[g * scale for g in grads.bias_grads],
        input_grad=grads.input_grad,
    )
