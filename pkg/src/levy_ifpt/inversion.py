"""Numerical Laplace inversion by Euler summation (Abate-Whitt)."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import comb


@lru_cache(maxsize=16)
def euler_nodes(M: int = 25) -> tuple[np.ndarray, np.ndarray]:
    """Nodes ``beta_k`` and weights ``eta_k``, ``k = 0..2M``, so that
    ``f(t) ~ (1/t) sum_k eta_k Re F(beta_k / t)``."""
    k = np.arange(2 * M + 1)
    beta = M * np.log(10.0) / 3.0 + 1j * np.pi * k
    xi = np.zeros(2 * M + 1)
    xi[0] = 0.5
    xi[1 : M + 1] = 1.0
    xi[2 * M] = 2.0**-M
    for j in range(1, M):
        xi[2 * M - j] = xi[2 * M - j + 1] + 2.0**-M * comb(M, j, exact=True)
    eta = (-1.0) ** k * 10.0 ** (M / 3.0) * xi
    beta.setflags(write=False)
    eta.setflags(write=False)
    return beta, eta


def euler_invert(F, t: float, M: int = 25, complex_valued: bool = False):
    """Invert the Laplace transform ``F`` at ``t > 0``.

    ``F`` takes an array of complex arguments. When the original function is
    complex valued, ``F`` is also evaluated at the conjugate nodes and the
    real and imaginary parts are inverted separately. Extra trailing axes of
    ``F``'s output are inverted elementwise.
    """
    beta, eta = euler_nodes(M)
    q = beta / t
    if not complex_valued:
        return np.tensordot(eta, np.real(np.asarray(F(q))), axes=(0, 0)) / t
    vals = np.asarray(F(q)) + np.asarray(F(np.conj(q)))
    return np.tensordot(eta, vals, axes=(0, 0)) / (2.0 * t)
