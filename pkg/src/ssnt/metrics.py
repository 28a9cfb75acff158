"""Quality metrics, the singular-value energy diagnostic, and an
independent transform-domain nuclear-norm completion baseline.

The baseline exists as a correctness oracle for the learned solvers: it
minimizes the classical DFT-domain tensor nuclear norm subject to the
observed entries, a convex problem with a known good answer on
synthetic low-tubal-rank data.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


@dataclass
class MetricReport:
    """psnr in dB (inf for exact equality), ssim in [-1, 1], sam in
    radians; ``peak`` records the dynamic range the numbers assume."""

    psnr: float
    ssim: float
    sam: float
    peak: float = 1.0
    per_slice: list | None = None


def psnr(x, ref, peak=1.0):
    """Peak signal-to-noise ratio ``10*log10(peak^2 * N / ||x - ref||_F^2)``."""
    x = np.asarray(x)
    ref = np.asarray(ref)
    if x.shape != ref.shape:
        raise ValueError("shape mismatch")
    if peak <= 0:
        raise ValueError("peak must be positive")
    err = float(np.vdot(x - ref, x - ref).real)
    if err == 0.0:
        return float("inf")
    return float(10.0 * np.log10(peak**2 * x.size / err))


def _gaussian_window(size, sigma=1.5):
    half = (size - 1) / 2.0
    g = np.exp(-((np.arange(size) - half) ** 2) / (2.0 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


def _ssim_slice(a, b, peak, k1=0.01, k2=0.03):
    # 11x11 Gaussian window (sigma 1.5), shrunk to fit small slices;
    # statistics over the valid interior only.
    win = min(11, a.shape[0], a.shape[1])
    if win % 2 == 0:
        win -= 1
    w = _gaussian_window(win)

    def filt(img):
        return np.einsum("ijkl,kl->ij", sliding_window_view(img, (win, win)), w)

    mu_a = filt(a)
    mu_b = filt(b)
    var_a = filt(a * a) - mu_a**2
    var_b = filt(b * b) - mu_b**2
    cov = filt(a * b) - mu_a * mu_b
    c1 = (k1 * peak) ** 2
    c2 = (k2 * peak) ** 2
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def ssim(x, ref, peak=1.0):
    """Mean over frontal slices of windowed 2-D structural similarity."""
    x = np.asarray(x)
    ref = np.asarray(ref)
    if x.shape != ref.shape:
        raise ValueError("shape mismatch")
    return float(
        np.mean([_ssim_slice(x[:, :, k], ref[:, :, k], peak) for k in range(x.shape[2])])
    )


def sam(x, ref):
    """Spectral angle mapper: mean angle between matching mode-3 tubes.

    Tube pairs where either side has zero norm contribute angle 0.
    """
    x = np.asarray(x)
    ref = np.asarray(ref)
    if x.shape != ref.shape:
        raise ValueError("shape mismatch")
    dot = (x * ref).sum(axis=2)
    nx = np.linalg.norm(x, axis=2)
    nr = np.linalg.norm(ref, axis=2)
    ok = (nx > 0) & (nr > 0) & ~(x == ref).all(axis=2)
    cos = np.ones_like(dot)
    cos[ok] = np.clip(dot[ok] / (nx[ok] * nr[ok]), -1.0, 1.0)
    return float(np.mean(np.arccos(cos)))


def metric_report(x, ref, peak=1.0, per_slice=False):
    slices = None
    if per_slice:
        slices = [psnr(x[:, :, k], ref[:, :, k], peak) for k in range(x.shape[2])]
    return MetricReport(psnr(x, ref, peak), ssim(x, ref, peak), sam(x, ref), peak, slices)


@dataclass
class AccEgyCurve:
    """Cumulative squared-singular-value energy over the pooled,
    descending-sorted singular values of all frontal slices."""

    fractions: np.ndarray
    energy_ratio: np.ndarray

    def at_fraction(self, frac):
        """Energy ratio at the smallest pool fraction >= ``frac``."""
        k = max(1, int(np.ceil(frac * self.fractions.size)))
        return float(self.energy_ratio[k - 1])


def acc_egy(transformed):
    """Energy-compaction curve of a (real or complex) tensor's slices.

    An all-zero input yields a curve of ones, with a warning.
    """
    t = np.asarray(transformed)
    sv = np.concatenate(
        [np.linalg.svd(t[:, :, k], compute_uv=False) for k in range(t.shape[2])]
    )
    sv = np.sort(sv)[::-1]
    energy = sv**2
    total = energy.sum()
    fractions = np.arange(1, sv.size + 1) / sv.size
    if total == 0.0:
        warnings.warn("all singular values are zero", RuntimeWarning)
        return AccEgyCurve(fractions, np.ones(sv.size))
    return AccEgyCurve(fractions, np.cumsum(energy) / total)


def _tsvt(t, thr):
    """Slice-wise singular value thresholding in the mode-3 DFT domain.

    Conjugate-symmetric slices share one SVD so the result is exactly
    real for real input.
    """
    n1, n2, n3 = t.shape
    that = np.fft.fft(t, axis=2)
    out = np.zeros_like(that)
    for k in range(n3 // 2 + 1):
        u, s, vh = np.linalg.svd(that[:, :, k], full_matrices=False)
        s = np.maximum(s - thr, 0.0)
        out[:, :, k] = (u * s) @ vh
    for k in range(n3 // 2 + 1, n3):
        out[:, :, k] = out[:, :, n3 - k].conj()
    return np.fft.ifft(out, axis=2).real


def tnn_baseline_complete(model, rho=1e-2, iters=200):
    """ADMM completion under the DFT-domain tensor nuclear norm.

    Minimizes the transform-domain nuclear norm subject to agreement on
    the observed entries: a singular-value-thresholding step (threshold
    ``1/rho``), re-imposition of the observed entries, and a multiplier
    update, for a fixed number of iterations.
    """
    if model.kind != "tc":
        raise ValueError("the baseline handles tensor completion only")
    mask = model.mask
    obs = model.measurement
    x = obs.copy()
    y = np.zeros_like(x)
    for _ in range(iters):
        z = _tsvt(x - y / rho, 1.0 / rho)
        x = z + y / rho
        x = np.where(mask == 1.0, obs, x)
        y = y + rho * (z - x)
    return x
