"""Nonlinear mode-3 transform network.

The transform ``f`` is a stack of nonlinear mode-3 fully connected
layers ``x -> act(x x3 W)`` mapping the third-mode length ``n3`` up to a
working width, and ``g`` is a second stack mapping back down to ``n3``.
Both are trained self-supervised on a single observed tensor by
minimizing a weighted sum of the nuclear norms of the transformed
frontal slices plus a data-fidelity term; the reconstruction is
``g(f(obs))``.

Gradients are hand-written reverse mode.  The nuclear-norm term is
back-propagated through its subgradient ``U_r @ V_r.T`` built from the
singular vectors of each slice (singular values below
``EPS_RANK * sigma_max`` truncated); the truncated factors are treated
as constants of the step.
"""

from dataclasses import dataclass, field

import numpy as np

from .tensors import EPS_RANK, diff_p, diff_p_adj, mode3_product, unfold3
from .problems import fidelity


@dataclass(frozen=True)
class Activation:
    """Elementwise activation: ``identity``, ``relu`` or ``leaky_relu``."""

    kind: str = "leaky_relu"
    slope: float = 0.01

    def __post_init__(self):
        if self.kind not in ("identity", "relu", "leaky_relu"):
            raise ValueError(f"unknown activation {self.kind!r}")
        if self.kind == "leaky_relu" and not 0.0 < self.slope < 1.0:
            raise ValueError("leaky_relu slope must lie in (0, 1)")

    def apply(self, z):
        if self.kind == "identity":
            return z
        if self.kind == "relu":
            return np.maximum(z, 0.0)
        return np.where(z > 0.0, z, self.slope * z)

    def grad(self, z):
        """Derivative at the pre-activation ``z`` (subgradient 0 at relu kinks)."""
        if self.kind == "identity":
            return np.ones_like(z)
        if self.kind == "relu":
            return (z > 0.0).astype(z.dtype)
        return np.where(z > 0.0, 1.0, self.slope)


@dataclass(frozen=True)
class LayerSpec:
    in_dim: int
    out_dim: int
    activation: Activation

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise ValueError("layer dims must be positive")


@dataclass
class Layer:
    weight: np.ndarray  # (out_dim, in_dim), acts on mode-3 tubes
    activation: Activation


@dataclass
class NetworkParams:
    """Weights and activations of the forward stack ``f`` and the
    inverse-role stack ``g``.  ``f`` maps third-mode length n3 to the
    working width and ``g`` maps it back."""

    f_layers: list = field(default_factory=list)
    g_layers: list = field(default_factory=list)

    @property
    def p(self):
        return len(self.f_layers)

    @property
    def q(self):
        return len(self.g_layers)

    def weights(self):
        """All weight matrices, f stack first then g stack."""
        return [lay.weight for lay in self.f_layers + self.g_layers]

    def with_weights(self, weights):
        """Copy of the params with the given weight matrices substituted."""
        n_f = len(self.f_layers)
        f_new = [Layer(w, lay.activation) for w, lay in zip(weights[:n_f], self.f_layers)]
        g_new = [Layer(w, lay.activation) for w, lay in zip(weights[n_f:], self.g_layers)]
        return NetworkParams(f_new, g_new)


@dataclass
class LossBreakdown:
    l1_lowrank: float
    l2_fidelity: float
    tv_penalty: float = 0.0

    @property
    def total(self):
        return self.l1_lowrank + self.l2_fidelity + self.tv_penalty


def init_weights(f_specs, g_specs, seed=0):
    """Draw every weight uniformly from +-sqrt(6 / (in_dim + out_dim)).

    Deterministic for a fixed seed.  The two spec lists must chain:
    each layer's ``in_dim`` equals the previous layer's ``out_dim`` and
    ``g`` starts where ``f`` ends.
    """
    chain = list(f_specs) + list(g_specs)
    for prev, nxt in zip(chain, chain[1:]):
        if prev.out_dim != nxt.in_dim:
            raise ValueError(
                f"layer dims do not chain: {prev.out_dim} -> {nxt.in_dim}"
            )
    rng = np.random.default_rng(seed)

    def draw(specs):
        layers = []
        for s in specs:
            bound = np.sqrt(6.0 / (s.in_dim + s.out_dim))
            w = rng.uniform(-bound, bound, size=(s.out_dim, s.in_dim))
            layers.append(Layer(w, s.activation))
        return layers

    return NetworkParams(draw(f_specs), draw(g_specs))


def default_specs(n3, width, p, q, activation):
    """Layer specs for an f stack n3 -> width and a g stack width -> n3.

    Intermediate layers keep the working width; single-layer stacks map
    straight through.
    """
    f_specs = []
    for i in range(p):
        f_specs.append(LayerSpec(n3 if i == 0 else width, width, activation))
    g_specs = []
    for i in range(q):
        g_specs.append(LayerSpec(width, n3 if i == q - 1 else width, activation))
    return f_specs, g_specs


def nofc3_forward(t, w, act):
    """Single nonlinear mode-3 fully connected layer ``act(t x3 w)``."""
    return act.apply(mode3_product(t, w))


def _forward_stack(t, layers):
    """Run a layer stack, caching (input, pre-activation) per layer."""
    tape = []
    x = t
    for lay in layers:
        z = mode3_product(x, lay.weight)
        tape.append((x, z))
        x = lay.activation.apply(z)
    return x, tape


def forward_f(t, params):
    """Apply the forward transform; returns the transformed tensor and
    the tape of cached pre-activations needed for reverse mode."""
    if params.f_layers and t.shape[2] != params.f_layers[0].weight.shape[1]:
        raise ValueError("input third-mode length does not match the first layer")
    return _forward_stack(t, params.f_layers)


def forward_g(t, params):
    """Apply the inverse-role transform (same contract as :func:`forward_f`)."""
    if params.g_layers and t.shape[2] != params.g_layers[0].weight.shape[1]:
        raise ValueError("input third-mode length does not match the first layer")
    return _forward_stack(t, params.g_layers)


def _backward_stack(layers, tape, cotangent):
    """Reverse through a stack.  Returns per-layer weight gradients and
    the cotangent with respect to the stack input."""
    grads = [None] * len(layers)
    g = cotangent
    for i in range(len(layers) - 1, -1, -1):
        x_in, z = tape[i]
        dz = g * layers[i].activation.grad(z)
        grads[i] = unfold3(dz) @ unfold3(x_in).T
        g = mode3_product(dz, layers[i].weight.T)
    return grads, g


def nuclear_subgrad(m, eps=EPS_RANK):
    """Subgradient ``U_r @ V_r.T`` of the nuclear norm at ``m``.

    ``U_r, V_r`` keep the singular vectors whose singular values exceed
    ``eps`` times the largest one; a zero matrix maps to a zero matrix.
    """
    u, s, vh = np.linalg.svd(np.asarray(m), full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        return np.zeros_like(np.asarray(m))
    keep = s > eps * s[0]
    return u[:, keep] @ vh[keep, :]


def loss_and_grad(obs, params, model, cfg, admm=None):
    """Loss and exact reverse-mode weight gradients at ``params``.

    ``obs`` is the (already initialized) network input tensor; the
    fidelity term compares the reconstruction ``g(f(obs))`` against the
    measurement held by ``model``.  With an ADMM state the quadratic
    penalty ``beta/2 * sum_p ||diff_p(x) - V_p + L_p/beta||_F^2`` is
    added and reported as ``tv_penalty``.

    Returns ``(LossBreakdown, grads)`` where ``grads`` aligns with
    ``params.weights()``.  A non-finite loss aborts with ``FloatingPointError``.
    """
    y, tape_f = forward_f(obs, params)
    x, tape_g = forward_g(y, params)
    if not (np.isfinite(y).all() and np.isfinite(x).all()):
        raise FloatingPointError("non-finite network output; check weights and input")

    lam = cfg.lam
    l1 = 0.0
    g_y_lowrank = np.zeros_like(y)
    if lam > 0.0:
        for k in range(y.shape[2]):
            slab = y[:, :, k]
            u, s, vh = np.linalg.svd(slab, full_matrices=False)
            l1 += lam * float(s.sum())
            if s.size and s[0] > 0.0:
                keep = s > EPS_RANK * s[0]
                g_y_lowrank[:, :, k] = lam * (u[:, keep] @ vh[keep, :])

    l2, g_x = fidelity(x, model)

    tv = 0.0
    if admm is not None:
        beta = cfg.beta
        for p, v_p, l_p in ((1, admm.v1, admm.l1), (2, admm.v2, admm.l2)):
            r = diff_p(x, p) - v_p + l_p / beta
            tv += 0.5 * beta * float(np.vdot(r, r).real)
            g_x = g_x + beta * diff_p_adj(r, p)

    loss = LossBreakdown(l1, l2, tv)
    if not np.isfinite(loss.total):
        raise FloatingPointError(
            f"non-finite loss: lowrank={l1!r} fidelity={l2!r} tv={tv!r}"
        )

    grads_g, g_y = _backward_stack(params.g_layers, tape_g, g_x)
    grads_f, _ = _backward_stack(params.f_layers, tape_f, g_y + g_y_lowrank)
    return loss, grads_f + grads_g


def reconstruct(obs, params):
    """Reconstruction ``g(f(obs))`` without any tape bookkeeping."""
    y, _ = forward_f(obs, params)
    x, _ = forward_g(y, params)
    return x
