"""Random symmetric forms and curvature structures for property checks."""

from __future__ import annotations

import numpy as np

from .double_forms import CurvatureStructure, kulkarni_nomizu, random_curvature
from .invariants import elementary_symmetric, weyl


def _shape(size) -> tuple[int, ...]:
    return () if size is None else tuple(np.atleast_1d(size))


def random_orthogonal(n: int, rng: np.random.Generator, size=None) -> np.ndarray:
    z = rng.standard_normal(_shape(size) + (n, n))
    q, r = np.linalg.qr(z)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d = np.where(d == 0, 1.0, d)
    return q * d[..., None, :]


def symmetric_from_spectrum(lam, rng: np.random.Generator) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[-1]
    q = random_orthogonal(n, rng, lam.shape[:-1] or None)
    return np.einsum("...ij,...j,...kj->...ik", q, lam, q)


def random_symmetric(n: int, rng: np.random.Generator, size=None,
                     low: float = -1.0, high: float = 2.0) -> np.ndarray:
    """Symmetric forms in a random frame, eigenvalues uniform in [low, high]."""
    lam = rng.uniform(low, high, _shape(size) + (n,))
    return symmetric_from_spectrum(lam, rng)


def random_tracefree(n: int, rng: np.random.Generator, size=None) -> np.ndarray:
    a = rng.standard_normal(_shape(size) + (n, n))
    a = (a + np.swapaxes(a, -1, -2)) / 2
    tr = np.trace(a, axis1=-2, axis2=-1) / n
    return a - tr[..., None, None] * np.eye(n)


def random_gamma_positive(n: int, k: int, rng: np.random.Generator, count: int,
                          max_rounds: int = 50) -> np.ndarray:
    """``count`` symmetric forms with sigma_1..sigma_k > 0.

    Spectra are drawn uniform in [-1, 2] and rejection-tested; if the
    acceptance rate is too low to finish in ``max_rounds`` batches, the
    remainder is drawn with positive spectra (which lie in every cone).
    """
    found = []
    have = 0
    for _ in range(max_rounds):
        lam = rng.uniform(-1.0, 2.0, (max(count, 64), n))
        ok = np.all(elementary_symmetric(lam)[..., 1:k + 1] > 0, axis=-1)
        found.append(lam[ok])
        have += int(ok.sum())
        if have >= count:
            break
    lam = np.concatenate(found)[:count]
    if len(lam) < count:
        extra = rng.uniform(0.05, 2.0, (count - len(lam), n))
        lam = np.concatenate([lam, extra])
    return symmetric_from_spectrum(lam, rng)


def random_weyl(n: int, rng: np.random.Generator, size=None) -> CurvatureStructure:
    return weyl(random_curvature(n, rng, size))


def structure_from_schouten(a, w: CurvatureStructure | None = None) -> CurvatureStructure:
    """R = W + g a, the structure with Schouten tensor ``a`` and Weyl part ``w``."""
    a = np.asarray(a, dtype=float)
    R = kulkarni_nomizu(np.eye(a.shape[-1]), a)
    return R if w is None else R + w
