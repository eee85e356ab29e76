"""Pure numpy versions of the discrete-energy kernels.

Discretization: cell slopes ``d_k = (u[k+1] - u[k]) / h[k]`` weighted by the
cell measures ``mu``; nodal terms weighted by ``w``. All sums exclude the
surface-area factor, which callers apply.
"""
import numpy as np

from .. import _families as fam


def energy_parts(code, params, q, u, h, mu, w, V):
    d = np.abs(np.diff(u)) / h
    au = np.abs(u)
    grad = np.dot(mu, fam.A(code, params, d))
    pot = np.dot(w * V, fam.A(code, params, au))
    nonlin = np.dot(w, au**q) / q
    return grad, pot, nonlin


def gradient(code, params, q, u, h, mu, w, V):
    d = np.diff(u) / h
    flux = mu * np.sign(d) * fam.dA(code, params, np.abs(d)) / h
    au = np.abs(u)
    g = w * (V * np.sign(u) * fam.dA(code, params, au) - np.sign(u) * au ** (q - 1))
    g[1:] += flux
    g[:-1] -= flux
    return g


def hessian_bands(code, params, q, u, h, mu, w, V, eps_reg, include_nonlin):
    d = np.maximum(np.abs(np.diff(u)) / h, eps_reg)
    kappa = mu * fam.d2A(code, params, d) / h**2
    au = np.maximum(np.abs(u), eps_reg)
    diag = w * V * fam.d2A(code, params, au)
    if include_nonlin:
        diag = diag - w * (q - 1) * au ** (q - 2)
    diag = diag.copy()
    diag[1:] += kappa
    diag[:-1] += kappa
    return diag, -kappa
