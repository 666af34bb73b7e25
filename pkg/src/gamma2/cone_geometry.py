"""Curvature cones in the space of algebraic curvature structures.

The space splits orthogonally as Weyl part + g * (trace-free forms) + R g^2.
On this splitting sigma_1 and sigma_2 only see the last two summands, which
is what makes the Gamma_k cones convex; h_4 also sees the Weyl part, and its
positivity set is not convex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .double_forms import CurvatureStructure, g_power, kulkarni_nomizu, norm_sq
from .invariants import (
    elementary_symmetric,
    gamma_positive,
    gauss_bonnet,
    h4_direct,
    schouten,
    sigmas,
    weyl,
)
from .model_spaces import product, sphere
from .sampling import random_tracefree, random_weyl


@dataclass(frozen=True)
class ConeDecomposition:
    weyl: CurvatureStructure     # omega_2, trace-free
    tracefree: np.ndarray        # omega_1, trace-free symmetric form
    scalar: float | np.ndarray   # omega_0

    @property
    def n(self) -> int:
        return self.weyl.n

    def parts(self) -> tuple[CurvatureStructure, CurvatureStructure, CurvatureStructure]:
        n = self.n
        return (self.weyl,
                kulkarni_nomizu(np.eye(n), self.tracefree),
                g_power(n, 2) * np.asarray(self.scalar))

    def reconstruct(self) -> CurvatureStructure:
        w, a, s = self.parts()
        return w + a + s


def decompose(R: CurvatureStructure) -> ConeDecomposition:
    """R = omega_2 + g omega_1 + omega_0 g^2.  In dimension 3 the Weyl part
    vanishes identically and comes out as zero up to rounding."""
    n = R.n
    A = schouten(R)
    w0 = np.trace(A, axis1=-2, axis2=-1) / n
    w1 = A - w0[..., None, None] * np.eye(n)
    return ConeDecomposition(weyl(R), w1, float(w0) if np.ndim(w0) == 0 else w0)


def _split_coefficients(n: int) -> tuple[float, float]:
    return -1.0 / (2 * (n - 2)), 0.25


def sigma2_split(d: ConeDecomposition):
    """sigma_2 as the quadratic form -|g w1|^2 / (2(n-2)) + |g^2 w0|^2 / 4."""
    _, a, s = d.parts()
    c1, c0 = _split_coefficients(d.n)
    return c1 * norm_sq(a) + c0 * norm_sq(s)


def in_gamma_cone(R: CurvatureStructure, k: int):
    return gamma_positive(schouten(R), k)


def _root(x, k):
    return np.sign(x) * np.abs(x) ** (1.0 / k)


def concavity_check(R: CurvatureStructure, Rbar: CurvatureStructure, t, k: int):
    """sigma_k^{1/k}((1-t)R + t Rbar) - [(1-t) sigma_k^{1/k}(R) + t sigma_k^{1/k}(Rbar)].

    Non-negative whenever both ends lie in the Gamma_k cone.  Works on
    batches; raises ``ValueError`` if any input lies outside the cone.
    """
    if not (np.all(in_gamma_cone(R, k)) and np.all(in_gamma_cone(Rbar, k))):
        raise ValueError(f"inputs must lie in the Gamma_{k} cone")
    t = np.asarray(t, dtype=float)
    if np.any((t < 0) | (t > 1)):
        raise ValueError("t must lie in [0, 1]")
    mix = R * (1 - t) + Rbar * t
    lhs = _root(sigmas(schouten(mix))[..., k], k)
    rhs = (1 - t) * _root(sigmas(schouten(R))[..., k], k) + t * _root(sigmas(schouten(Rbar))[..., k], k)
    v = lhs - rhs
    return float(v) if np.ndim(v) == 0 else v


# ---------------------------------------------------------------------------
# h_4 is not convex

@dataclass(frozen=True)
class H4Witness:
    R: CurvatureStructure
    Rbar: CurvatureStructure
    h4: tuple[float, float, float]   # at R, Rbar, and the midpoint
    trial: int


def _unit(x, axes):
    return x / np.sqrt(np.sum(x ** 2, axis=axes, keepdims=True))


def h4_nonconvexity_witness(n: int, seed: int = 0, budget: int = 100_000,
                            margin: float = 1e-6, batch: int = 256) -> H4Witness | None:
    """Random search for R, Rbar with h_4 > 0 at both and h_4 < 0 at the
    midpoint, all three by more than ``margin`` after scaling the pair to
    unit total norm.

    Candidates pair a Weyl-dominated structure with one whose Weyl part is
    roughly opposite and whose trace-free Ricci part is roughly equal; the
    midpoint then loses most of its Weyl part and keeps the negative
    trace-free contribution.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    rng = np.random.default_rng(seed)
    d = (n - 2) * (n - 3)
    g = np.eye(n)
    g2 = g_power(n, 2)
    done = 0
    while done < budget:
        m = min(batch, budget - done)
        w1 = random_weyl(n, rng, m)
        w1 = CurvatureStructure(n, _unit(w1.coeffs, (-2, -1)))
        w2 = CurvatureStructure(n, _unit(random_weyl(n, rng, m).coeffs, (-2, -1)))
        a1 = _unit(random_tracefree(n, rng, m), (-2, -1))
        a2 = _unit(random_tracefree(n, rng, m), (-2, -1))
        rho = rng.uniform(0.2, 3.0, m) * math.sqrt(d)
        eps = rng.uniform(0.0, 0.6, (3, m))
        s = rng.normal(0.0, 0.3, (2, m))
        R = w1 * rho + kulkarni_nomizu(g, a1) + g2 * s[0]
        Rbar = (w1 * (-rho) + w2 * (eps[0] * rho)
                + kulkarni_nomizu(g, a1 * (1 + eps[1])[:, None, None] + a2 * eps[2][:, None, None])
                + g2 * s[1])
        scale = np.sqrt(norm_sq(R) + norm_sq(Rbar))
        R, Rbar = R / scale, Rbar / scale
        h = np.stack([h4_direct(R), h4_direct(Rbar), h4_direct((R + Rbar) * 0.5)])
        hit = (h[0] > margin) & (h[1] > margin) & (h[2] < -margin)
        if np.any(hit):
            i = int(np.argmax(hit))
            r = CurvatureStructure(n, R.coeffs[i])
            rb = CurvatureStructure(n, Rbar.coeffs[i])
            return H4Witness(r, rb, tuple(float(x) for x in h[:, i]), done + i + 1)
        done += m
    return None


def verify_h4_witness(R: CurvatureStructure, Rbar: CurvatureStructure,
                      margin: float = 1e-6) -> bool:
    """Independent recheck of a witness through the Gauss-Bonnet star route."""
    vals = (gauss_bonnet(R, 2), gauss_bonnet(Rbar, 2), gauss_bonnet((R + Rbar) * 0.5, 2))
    return vals[0] > margin and vals[1] > margin and vals[2] < -margin


# ---------------------------------------------------------------------------
# surgery model S^{c-1} x R^{n-c+1}

def surgery_product(n: int, c: int) -> CurvatureStructure:
    if not 3 <= c <= n:
        raise ValueError(f"codimension c={c} outside 3..{n}")
    return product(sphere(c - 1, 1.0), n - c + 1)


def surgery_product_sigma2(n: int, c: int) -> float:
    """sigma_2 of S^{c-1}(1) x R^{n-c+1} in closed form."""
    if not 3 <= c <= n:
        raise ValueError(f"codimension c={c} outside 3..{n}")
    return (c - 2) ** 2 * (c - 1) * (n * (c - 5) + 4) / (8 * (n - 2) ** 2 * (n - 1))


@dataclass(frozen=True)
class SphereCrossPlane:
    n: int
    k: int
    oracle: float
    closed_form: float | None
    quadratic: int

    @property
    def sign_agrees(self) -> bool:
        return np.sign(self.oracle) == np.sign(self.quadratic)


def sphere_cross_R2_sigma_k(n: int, k: int) -> SphereCrossPlane:
    """sigma_k of the rescaled Schouten tensor of S^{n-2} x R^2, whose spectrum
    is n (n-2 times) and 2-n (twice).

    The closed form needs 2 <= k <= n-2 to keep its factorials finite; outside
    that range only the spectrum value is returned.
    """
    if n < 4 or not 1 <= k <= n:
        raise ValueError(f"need n >= 4 and 1 <= k <= n, got n={n}, k={k}")
    lam = np.array([n] * (n - 2) + [2 - n] * 2, dtype=float)
    oracle = float(elementary_symmetric(lam)[k])
    closed = None
    if 2 <= k <= n - 2:
        f = math.factorial
        pre = f(n - 2) * n ** (k - 2) / (f(n - k - 2) * f(k - 2))
        closed = pre * (n ** 2 / (k * (k - 1))
                        - 2 * n * (n - 2) / ((k - 1) * (n - k - 1))
                        + (n - 2) ** 2 / ((n - k) * (n - k - 1)))
    quad = 4 * (n - 1) * k ** 2 + 4 * (1 - n ** 2) * k + n ** 3
    return SphereCrossPlane(n, k, oracle, closed, quad)


def one_surgery_bound(n: int) -> float:
    """Right side of 2k < n + 1 - sqrt(n - 1/(n-1))."""
    return n + 1 - math.sqrt(n - 1 / (n - 1))


def one_surgery_max_k(n: int) -> int | None:
    """Largest k >= 2 with 2k < n + 1 - sqrt(n - 1/(n-1)), or None."""
    if n < 4:
        raise ValueError("n must be >= 4")
    k = math.ceil(one_surgery_bound(n) / 2) - 1
    return k if k >= 2 else None


def h2r_product_value(c: int, r: int) -> float:
    """h_{2r} of S^{c-1}(1) x R^{n-c+1}, equal to that of the unit S^{c-1}."""
    if not (r >= 1 and c - 1 >= 2 * r):
        raise ValueError(f"need c-1 >= 2r >= 2, got c={c}, r={r}")
    return math.factorial(c - 1) / (2 ** r * math.factorial(c - 1 - 2 * r))


def fundamental_group_status(n: int, k: int) -> str:
    """'unrestricted', 'finite_required' or 'open' for positive Gamma_k
    curvature on closed n-manifolds.  k = 1 with n >= 5 is the classical
    positive scalar curvature case."""
    if n < 3 or not 1 <= k <= n:
        raise ValueError(f"need n >= 3 and 1 <= k <= n, got n={n}, k={k}")
    if k == 1 and n >= 5:
        return "unrestricted"
    if k >= 2 and 2 * k < one_surgery_bound(n):
        return "unrestricted"
    if 2 * k >= n:
        return "finite_required"
    return "open"
