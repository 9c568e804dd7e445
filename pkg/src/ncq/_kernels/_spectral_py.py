"""Pure-numpy implementation of the block spectral kernel."""
from __future__ import annotations

import numpy as np

EIG_FLOOR = 1e-14
ENTROPY, PPOWER, MAXEIG = 0, 1, 2


def block_spectral(y, offsets, sizes, weights, mode: int, p: float = 1.0):
    """Return (value, gradient) for mode 0 (entropy), 1 (τ(y^p)) or 2 (largest eigenvalue).

    The gradient G satisfies dF = Σ_k w_k Tr(G_k dy_k).
    """
    y = np.asarray(y, dtype=complex)
    grad = np.zeros_like(y)
    value = 0.0
    best = (-np.inf, -1, None)
    by_size: dict[int, list[int]] = {}
    for k, n in enumerate(sizes):
        by_size.setdefault(int(n), []).append(k)
    for n, ks in by_size.items():
        idx = np.array([np.arange(offsets[k], offsets[k] + n * n) for k in ks])
        stack = y[idx].reshape(len(ks), n, n)
        mu, vecs = np.linalg.eigh(stack)
        if mode == MAXEIG:
            j = int(np.argmax(mu[:, -1]))
            if mu[j, -1] > best[0]:
                best = (float(mu[j, -1]), ks[j], vecs[j, :, -1])
            continue
        w = np.asarray([weights[k] for k in ks])
        mu = np.maximum(mu, 0.0)
        if mode == ENTROPY:
            with np.errstate(divide="ignore", invalid="ignore"):
                terms = np.where(mu > 0, mu * np.log(np.where(mu > 0, mu, 1.0)), 0.0)
            value -= float(np.sum(w[:, None] * terms))
            fmu = -(np.log(np.maximum(mu, EIG_FLOOR)) + 1.0)
        else:
            value += float(np.sum(w[:, None] * mu ** p))
            with np.errstate(divide="ignore"):
                fmu = p * np.where(mu > 0, mu, 0.0) ** (p - 1.0) if p != 1.0 else np.ones_like(mu)
            if p != 1.0:
                fmu = np.where(mu > 0, fmu, 0.0)
        g = np.einsum("kri,ki,kci->krc", vecs, fmu, vecs.conj())
        grad[idx] = g.reshape(len(ks), n * n)
    if mode == MAXEIG:
        value, k, v = best
        n = int(sizes[k])
        off = int(offsets[k])
        grad[off:off + n * n] = (np.outer(v, v.conj()) / weights[k]).reshape(-1)
    return value, grad
