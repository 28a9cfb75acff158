"""Optimization drivers.

``solve_ssnt`` trains the transform pair by plain Adam on the
low-rank-plus-fidelity loss.  ``solve_ssnt_tv`` adds an anisotropic
spatial total-variation term, handled by an ADMM-style outer loop: per
outer iteration the network takes ``inner_steps`` Adam steps on the
augmented objective, then the TV splitting variables get their
closed-form soft-threshold update and the multipliers a dual ascent
step.

The whole observed tensor is one batch; there is no early stopping
unless the opt-in loss-plateau flag is set.
"""

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .network import (
    Activation,
    LossBreakdown,
    default_specs,
    init_weights,
    loss_and_grad,
    reconstruct,
)
from .problems import assemble, init_observation
from .tensors import diff_p, soft_threshold

# Relative-error denominators are floored here; division by an exactly
# zero previous iterate never produces inf diagnostics.
REL_ERR_FLOOR = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters of one solve.

    ``lam`` weights the transformed low-rank term, ``tau`` the TV term
    and ``beta`` the ADMM penalty.  ``width`` is the third-mode length
    at the f/g interface (``None`` means twice the input length).
    Adam runs with (lr, beta1, beta2, eps); everything is seeded.
    """

    lam: float = 0.0
    tau: float = 0.0
    beta: float = 1.0
    t_max: int = 1
    inner_steps: int = 1
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    width: int | None = None
    p: int = 2
    q: int = 2
    activation: str = "leaky_relu"
    slope: float = 0.01
    plateau_stop: bool = False
    plateau_tol: float = 1e-9
    plateau_patience: int = 20

    def __post_init__(self):
        if self.lam < 0 or self.tau < 0 or self.beta <= 0:
            raise ValueError("lam, tau must be >= 0 and beta > 0")
        if self.t_max < 0 or self.inner_steps < 1:
            raise ValueError("t_max must be >= 0 and inner_steps >= 1")
        for name in ("lam", "tau", "beta", "lr", "beta1", "beta2", "eps"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


def default_config(kind, dims, **overrides):
    """Documented defaults per problem kind for a tensor of shape ``dims``.

    With ``N = n1*n2*n3``: the low-rank weight is ``1e-7 * N`` for
    completion and robust completion, ``1e-3 * N`` for background
    subtraction and ``1e-5 * N`` for snapshot imaging; the TV weight is
    ``0.01 * N``; the penalty is 1; two layers on each side with the
    interface width twice the third-mode length; 7000 iterations.

    Note the background-subtraction weight is large by design on
    [0, 1]-normalized data; it is exposed as-is rather than rescaled.
    """
    n = int(np.prod(dims))
    lam = {"tc": 1e-7, "rtc": 1e-7, "bs": 1e-3, "sci": 1e-5}[kind] * n
    cfg = SolverConfig(
        lam=lam,
        tau=0.01 * n,
        beta=1.0,
        t_max=7000,
        width=2 * int(dims[2]),
        p=2,
        q=2,
    )
    return replace(cfg, **overrides) if overrides else cfg


@dataclass
class AdamState:
    """First/second moment buffers mirroring the weight list."""

    m: list
    v: list
    t: int = 0

    @classmethod
    def zeros(cls, weights):
        return cls([np.zeros_like(w) for w in weights], [np.zeros_like(w) for w in weights])


@dataclass
class AdmmState:
    """Splitting variables and multipliers of the TV solver, one pair
    per spatial difference direction."""

    v1: np.ndarray
    v2: np.ndarray
    l1: np.ndarray
    l2: np.ndarray
    iter: int = 0


@dataclass
class Diagnostics:
    iteration: int
    rel_err_weights: float
    rel_err_v: float
    loss: LossBreakdown


def adam_step(weights, grads, state, cfg):
    """One bias-corrected Adam update over a list of weight matrices.

    Returns the updated weights and state; inputs are not mutated.
    Non-finite gradients abort.
    """
    for g in grads:
        if not np.isfinite(g).all():
            raise FloatingPointError("non-finite gradient")
    t = state.t + 1
    c1 = 1.0 - cfg.beta1**t
    c2 = 1.0 - cfg.beta2**t
    new_w, new_m, new_v = [], [], []
    for w, g, m, v in zip(weights, grads, state.m, state.v):
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g
        new_m.append(m)
        new_v.append(v)
        new_w.append(w - cfg.lr * (m / c1) / (np.sqrt(v / c2) + cfg.eps))
    return new_w, AdamState(new_m, new_v, t)


def _build_network(cfg, n3):
    width = cfg.width if cfg.width is not None else 2 * n3
    act = Activation(cfg.activation, cfg.slope)
    f_specs, g_specs = default_specs(n3, width, cfg.p, cfg.q, act)
    return init_weights(f_specs, g_specs, cfg.seed)


def _rel_change(new, old):
    return float(
        sum(
            np.linalg.norm(n - o) / max(np.linalg.norm(o), REL_ERR_FLOOR)
            for n, o in zip(new, old)
        )
    )


def _plateaued(history, cfg):
    if not cfg.plateau_stop or len(history) <= cfg.plateau_patience:
        return False
    recent = [d.loss.total for d in history[-(cfg.plateau_patience + 1):]]
    scale = max(abs(recent[0]), REL_ERR_FLOOR)
    return max(recent) - min(recent) <= cfg.plateau_tol * scale


def solve_ssnt(model, cfg, x0=None):
    """Train the transform pair with plain Adam (no TV term).

    ``x0`` overrides the problem initializer feeding the network.
    Returns the assembled estimate, the trained parameters and the
    per-iteration diagnostics.  Warns (does not fail) when the final
    loss exceeds the initial one.
    """
    if x0 is None:
        x0 = init_observation(model)
    params = _build_network(cfg, x0.shape[2])
    state = AdamState.zeros(params.weights())
    history = []
    for it in range(cfg.t_max):
        loss, grads = loss_and_grad(x0, params, model, cfg)
        old = params.weights()
        new, state = adam_step(old, grads, state, cfg)
        params = params.with_weights(new)
        history.append(Diagnostics(it, _rel_change(new, old), 0.0, loss))
        if _plateaued(history, cfg):
            break
    if history and history[-1].loss.total > history[0].loss.total:
        warnings.warn("loss increased over the run", RuntimeWarning)
    x = assemble(reconstruct(x0, params), model).x
    return x, params, history


def v_update(x, admm, cfg):
    """Closed-form TV splitting update: soft-threshold the shifted
    spatial differences of the current reconstruction at ``tau/beta``."""
    thr = cfg.tau / cfg.beta
    v1 = soft_threshold(diff_p(x, 1) + admm.l1 / cfg.beta, thr)
    v2 = soft_threshold(diff_p(x, 2) + admm.l2 / cfg.beta, thr)
    return v1, v2


def multiplier_update(admm, x, cfg):
    """Dual ascent on the splitting residual: ``L_p += beta * (diff_p(x) - V_p)``."""
    l1 = admm.l1 + cfg.beta * (diff_p(x, 1) - admm.v1)
    l2 = admm.l2 + cfg.beta * (diff_p(x, 2) - admm.v2)
    return l1, l2


def solve_ssnt_tv(model, cfg, x0=None, admm0=None):
    """TV-regularized solve (ADMM-style outer loop).

    Initialization: splitting variables start at the spatial differences
    of the initialized observation, multipliers at zero (``admm0``
    overrides this).  Each outer iteration runs ``inner_steps`` Adam
    steps on the augmented objective, then the splitting update, then
    the multiplier update.  Diagnostics record the summed relative
    changes of the weights and of the splitting variables per outer
    iteration.
    """
    if x0 is None:
        x0 = init_observation(model)
    params = _build_network(cfg, x0.shape[2])
    state = AdamState.zeros(params.weights())
    admm = admm0 if admm0 is not None else AdmmState(
        v1=diff_p(x0, 1),
        v2=diff_p(x0, 2),
        l1=np.zeros(x0.shape),
        l2=np.zeros(x0.shape),
    )
    history = []
    for it in range(cfg.t_max):
        old = params.weights()
        loss = None
        for _ in range(cfg.inner_steps):
            loss, grads = loss_and_grad(x0, params, model, cfg, admm)
            new, state = adam_step(params.weights(), grads, state, cfg)
            params = params.with_weights(new)
        rel_w = _rel_change(params.weights(), old)
        x = reconstruct(x0, params)
        v1, v2 = v_update(x, admm, cfg)
        rel_v = _rel_change([v1, v2], [admm.v1, admm.v2])
        admm.v1, admm.v2 = v1, v2
        admm.l1, admm.l2 = multiplier_update(admm, x, cfg)
        admm.iter = it + 1
        history.append(Diagnostics(it, rel_w, rel_v, loss))
        if _plateaued(history, cfg):
            break
    if history and history[-1].loss.total > history[0].loss.total:
        warnings.warn("loss increased over the run", RuntimeWarning)
    x = assemble(reconstruct(x0, params), model).x
    return x, params, history
