"""Dense third-order tensor algebra.

A third-order tensor is an ordinary ``numpy.ndarray`` of shape
``(n1, n2, n3)`` and dtype ``float64``, indexed ``t[i, j, k]``.  The
``k``-th frontal slice is ``t[:, :, k]`` and the ``(i, j)``-th tube is
``t[i, j, :]``.  Complex tensors appear only on the DFT path.

Fixed conventions (every operator here agrees with them):

* ``unfold3`` produces an ``n3 x (n1*n2)`` matrix whose column index
  enumerates ``(i, j)`` pairs with ``i`` fastest, i.e. column
  ``j*n1 + i`` holds the tube at ``(i, j)``.
* The mode-3 DFT is the unnormalized forward transform with a
  ``1/n3``-scaled inverse (numpy's default), so the tensor nuclear norm
  computed here depends on that scale.
* Forward differences use a Neumann boundary: the last difference row
  (or column) is zero, which keeps the operator linear with an exact
  adjoint.
"""

import numpy as np

# Relative threshold below which a singular value (or singular tube) is
# treated as zero; exact zeros never occur in floating point.
EPS_RANK = 1e-8


def _as_tensor(t):
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={t.ndim}")
    return t


def unfold3(t):
    """Mode-3 unfolding: ``(n1, n2, n3) -> (n3, n1*n2)``, columns i-fastest."""
    t = np.asarray(t)
    n1, n2, n3 = t.shape
    return t.reshape(n1 * n2, n3, order="F").T


def fold3(m, dims):
    """Inverse of :func:`unfold3` for the target shape ``dims``.

    Raises ``ValueError`` when the matrix shape is inconsistent with
    ``dims``.
    """
    m = np.asarray(m)
    n1, n2, n3 = dims
    if m.shape != (n3, n1 * n2):
        raise ValueError(f"cannot fold {m.shape} into {dims}")
    return m.T.reshape(n1, n2, n3, order="F")


def mode3_product(t, a):
    """Mode-3 tensor-matrix product ``t x3 a = fold3(a @ unfold3(t))``.

    ``a`` has shape ``(rows, n3)``; the result has shape
    ``(n1, n2, rows)``.  Works for real or complex ``a``.
    """
    t = np.asarray(t)
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[1] != t.shape[2]:
        raise ValueError(
            f"matrix {a.shape} does not act on mode-3 of tensor {t.shape}"
        )
    return np.tensordot(t, a, axes=([2], [1]))


def fro_norm(t):
    """Frobenius norm ``sqrt(sum of squared entries)`` of any array."""
    return float(np.linalg.norm(np.asarray(t).ravel()))


def l1_norm(t):
    """Entrywise l1 norm ``sum |entries|`` of any array."""
    return float(np.abs(np.asarray(t)).sum())


def nuclear_norm(m):
    """Nuclear norm (sum of singular values) of a matrix.

    SVD non-convergence surfaces as ``numpy.linalg.LinAlgError``.
    """
    return float(np.linalg.svd(np.asarray(m), compute_uv=False).sum())


def soft_threshold(t, v):
    """Entrywise soft-thresholding ``sign(x) * max(|x| - v, 0)``.

    The proximal operator of ``v * ||.||_1``; requires ``v >= 0``.
    """
    if v < 0:
        raise ValueError("threshold must be nonnegative")
    t = np.asarray(t)
    return np.sign(t) * np.maximum(np.abs(t) - v, 0.0)


def diff_p(t, p):
    """Forward difference along spatial dimension ``p`` in {1, 2}.

    Neumann boundary: the final difference along the chosen axis is
    zero, so the output shape equals the input shape.
    """
    t = np.asarray(t)
    d = np.zeros_like(t)
    if p == 1:
        d[:-1] = t[1:] - t[:-1]
    elif p == 2:
        d[:, :-1] = t[:, 1:] - t[:, :-1]
    else:
        raise ValueError("p must be 1 or 2")
    return d


def diff_p_adj(y, p):
    """Exact adjoint of :func:`diff_p`: ``<diff_p(x), y> = <x, diff_p_adj(y)>``."""
    y = np.asarray(y)
    out = np.zeros_like(y)
    if p == 1:
        if y.shape[0] == 1:
            return out
        out[0] = -y[0]
        out[1:-1] = y[:-2] - y[1:-1]
        out[-1] = y[-2]
    elif p == 2:
        if y.shape[1] == 1:
            return out
        out[:, 0] = -y[:, 0]
        out[:, 1:-1] = y[:, :-2] - y[:, 1:-1]
        out[:, -1] = y[:, -2]
    else:
        raise ValueError("p must be 1 or 2")
    return out


def dft_mode3(t):
    """Unnormalized forward DFT along every mode-3 tube (complex result)."""
    return np.fft.fft(np.asarray(t), axis=2)


def idft_mode3(t):
    """Inverse of :func:`dft_mode3` (``1/n3``-scaled)."""
    return np.fft.ifft(np.asarray(t), axis=2)


def tnn(t):
    """Tensor nuclear norm: sum of nuclear norms of the DFT-domain slices."""
    that = dft_mode3(t)
    return float(
        sum(
            np.linalg.svd(that[:, :, k], compute_uv=False).sum()
            for k in range(that.shape[2])
        )
    )


def identity_tensor(n, n3):
    """Identity tensor for the t-product: first frontal slice is I, rest 0."""
    ident = np.zeros((n, n, n3))
    ident[:, :, 0] = np.eye(n)
    return ident


def t_product(a, b):
    """Tensor-tensor product via slice-wise products in the DFT domain.

    ``a`` is ``(n1, n2, n3)`` and ``b`` is ``(n2, m, n3)``; the result is
    ``(n1, m, n3)``.  Equivalent to circular convolution of matching
    tubes.  Real inputs give a real result.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 3 or b.ndim != 3 or a.shape[1] != b.shape[0] or a.shape[2] != b.shape[2]:
        raise ValueError(f"t-product shape mismatch: {a.shape} * {b.shape}")
    ahat = np.fft.fft(a, axis=2)
    bhat = np.fft.fft(b, axis=2)
    chat = np.einsum("ijk,jlk->ilk", ahat, bhat)
    c = np.fft.ifft(chat, axis=2)
    if np.isrealobj(a) and np.isrealobj(b):
        return c.real
    return c


def conj_transpose(a):
    """Conjugate transpose: slice 0 is transposed, slices 1.. are
    transposed and reversed in order."""
    a = np.asarray(a)
    n3 = a.shape[2]
    out = np.conj(np.swapaxes(a, 0, 1)).copy()
    if n3 > 1:
        out[:, :, 1:] = out[:, :, :0:-1]
    return out


def t_svd(a):
    """Tensor singular value decomposition ``a = U * S * V^H``.

    ``U`` (n1 x n1 x n3) and ``V`` (n2 x n2 x n3) are orthogonal in the
    t-product sense and ``S`` (n1 x n2 x n3) is f-diagonal in the DFT
    domain.  Per-slice SVDs are computed for the first ``n3//2 + 1``
    DFT slices only; the rest are filled in by conjugate symmetry so the
    factors come back exactly real.
    """
    a = _as_tensor(a)
    n1, n2, n3 = a.shape
    ahat = np.fft.fft(a, axis=2)
    uhat = np.zeros((n1, n1, n3), dtype=complex)
    shat = np.zeros((n1, n2, n3), dtype=complex)
    vhat = np.zeros((n2, n2, n3), dtype=complex)
    r = min(n1, n2)
    for k in range(n3 // 2 + 1):
        u, s, vh = np.linalg.svd(ahat[:, :, k])
        uhat[:, :, k] = u
        shat[:r, :r, k] = np.diag(s)
        vhat[:, :, k] = vh.conj().T
    for k in range(n3 // 2 + 1, n3):
        uhat[:, :, k] = uhat[:, :, n3 - k].conj()
        shat[:, :, k] = shat[:, :, n3 - k].conj()
        vhat[:, :, k] = vhat[:, :, n3 - k].conj()
    u = np.fft.ifft(uhat, axis=2).real
    s = np.fft.ifft(shat, axis=2).real
    v = np.fft.ifft(vhat, axis=2).real
    return u, s, v


def tubal_rank(a, eps=EPS_RANK):
    """Number of singular tubes of the t-SVD with Frobenius norm above
    ``eps`` times the largest tube norm."""
    _, s, _ = t_svd(a)
    r = min(s.shape[0], s.shape[1])
    tube_norms = np.array([np.linalg.norm(s[i, i, :]) for i in range(r)])
    if tube_norms.size == 0:
        return 0
    return int(np.count_nonzero(tube_norms > eps * tube_norms.max()))
