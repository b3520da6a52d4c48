"""Two-dimensional FFT conventions and dealiased spectral convolution.

Positions are ``q_n = q0 + n dq`` (``n = 0..N-1``, ``q0 = -L/2``) on both axes
and wavevectors are ``k = 2 pi fftfreq(N, dq)``.  The continuous transform
``f^(k) = int d^2q f(q) exp(-i k.q)`` is approximated by

    f^ = dq^2 exp(-i k.q0) fft2(f),     f = ifft2(f^ exp(i k.q0)) / dq^2 .

The Nyquist row and column are kept at zero so that the discrete spectra
have the same ``k -> -k`` symmetry as the continuous ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SpectralGrid:
    """Square ``n x n`` grid of side ``extent``; axes are ordered ``(x, z)``."""

    n: int = 256
    extent: float = 20.0

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise ValueError(f"spectral grids need an even node count >= 4, got {self.n}")
        if not self.extent > 0:
            raise ValueError("extent must be positive")

    @property
    def dq(self):
        return self.extent / self.n

    @property
    def q0(self):
        return -0.5 * self.extent

    @property
    def q(self):
        return self.q0 + self.dq * np.arange(self.n)

    @property
    def k(self):
        return 2 * np.pi * np.fft.fftfreq(self.n, self.dq)

    @property
    def dk(self):
        return 2 * np.pi / self.extent

    def mesh_q(self):
        return np.meshgrid(self.q, self.q, indexing="ij")

    def mesh_k(self):
        return np.meshgrid(self.k, self.k, indexing="ij")

    def nyquist_mask(self):
        """True on every mode except the Nyquist row and column."""
        keep = np.ones(self.n, dtype=bool)
        keep[self.n // 2] = False
        return keep[:, None] & keep[None, :]

    def _phase(self):
        kx, kz = self.mesh_k()
        return np.exp(-1j * (kx + kz) * self.q0)

    def forward(self, f):
        """Continuous-normalized 2D transform over the last two axes."""
        out = self.dq**2 * self._phase() * np.fft.fft2(f, axes=(-2, -1))
        return out * self.nyquist_mask()

    def inverse(self, f_hat):
        return np.fft.ifft2(f_hat * self.nyquist_mask() / self._phase(), axes=(-2, -1)) / self.dq**2


def padded_size(n):
    """Smallest even size ``>= 3n/2`` (exact linear convolution of kept modes)."""
    m = -(-3 * n // 2)
    return m + (m % 2)


def _embed(c, m):
    """Place an ``n x n`` spectrum (FFT order) into an ``m x m`` zero array."""
    n = c.shape[-1]
    h = n // 2
    out = np.zeros(c.shape[:-2] + (m, m), dtype=complex)
    idx = np.r_[0:h, m - h:m]
    src = np.r_[0:h, n - h:n]
    out[..., idx[:, None], idx[None, :]] = c[..., src[:, None], src[None, :]]
    return out


def _extract(c, n):
    m = c.shape[-1]
    h = n // 2
    idx = np.r_[0:h, m - h:m]
    return c[..., idx[:, None], idx[None, :]]


def index_convolution(a, b):
    """``sum_{k'} a[k'] b[k - k']`` over signed mode indices, output on the input modes.

    Pairs with ``k - k'`` outside the grid are dropped (no wrap-around).  Uses
    zero padding to ``padded_size(n)``.
    """
    n = a.shape[-1]
    m = padded_size(n)
    fa = np.fft.ifft2(_embed(a, m), axes=(-2, -1))
    fb = np.fft.ifft2(_embed(b, m), axes=(-2, -1))
    return m * m * _extract(np.fft.fft2(fa * fb, axes=(-2, -1)), n)


def index_convolution_direct(a, b):
    """Brute-force double sum reference for :func:`index_convolution`."""
    n = a.shape[-1]
    signed = np.fft.fftfreq(n, 1.0 / n).astype(int)
    pos = {int(s): i for i, s in enumerate(signed)}
    out = np.zeros_like(a, dtype=complex)
    for i, kx in enumerate(signed):
        for j, kz in enumerate(signed):
            total = 0j
            for i2, kx2 in enumerate(signed):
                ix = pos.get(int(kx - kx2))
                if ix is None:
                    continue
                for j2, kz2 in enumerate(signed):
                    iz = pos.get(int(kz - kz2))
                    if iz is None:
                        continue
                    total += a[i2, j2] * b[ix, iz]
            out[i, j] = total
    return out


def gradient_square_hat(w_hat, grid):
    """Transform of ``|grad w|^2`` from the spectrum of ``w`` (dealiased).

    ``FT[|grad w|^2](k) = -(2 pi)^-2 int dk' k'.(k - k') w^(k') w^(k - k')``.
    """
    kx, kz = grid.mesh_k()
    w_hat = w_hat * grid.nyquist_mask()
    total = index_convolution(kx * w_hat, kx * w_hat) + index_convolution(kz * w_hat, kz * w_hat)
    return -total / grid.extent**2 * grid.nyquist_mask()
