"""Scalar and tensor curvature invariants of algebraic curvature structures.

Every function accepts batches: a curvature structure may carry leading batch
axes, and symmetric forms may be passed as ``(..., n, n)`` arrays.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .double_forms import (
    CurvatureStructure,
    DegreeError,
    DoubleForm,
    contraction,
    hodge_star,
    inner_product,
    kulkarni_nomizu,
    norm_sq,
    symmetry_residual,
    times_g_power,
)

TOL_STRUCTURAL = 1e-12
TOL_RELATIVE = 1e-9


class IdentityError(AssertionError):
    """A cross-checked identity failed beyond its tolerance."""


def rel_err(x, y, scale=0.0):
    """|x - y| relative to the larger of |x|, |y| and a natural ``scale``.

    The scale keeps the measure meaningful when a quantity is a sum with
    cancellation and the exact value sits near zero.
    """
    x, y = np.asarray(x, float), np.asarray(y, float)
    den = np.maximum(np.maximum(np.abs(x), np.abs(y)), np.asarray(scale, float))
    den = np.where(den == 0, 1.0, den)
    return np.abs(x - y) / den


def _matrix(a) -> np.ndarray:
    if isinstance(a, DoubleForm):
        return a.matrix()
    a = np.asarray(a, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    return a


def _eye_like(a: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.eye(a.shape[-1]), a.shape)


def _scalar(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


# ---------------------------------------------------------------------------
# Ricci, scalar, Schouten, Weyl

def ricci(R: CurvatureStructure) -> np.ndarray:
    return contraction(R).matrix()


def scalar(R: CurvatureStructure):
    return _scalar(np.trace(ricci(R), axis1=-2, axis2=-1))


def _require_n3(n):
    if n < 3:
        raise DegreeError(f"Schouten tensor needs n >= 3, got {n}")


def schouten(R: CurvatureStructure) -> np.ndarray:
    n = R.n
    _require_n3(n)
    ric = ricci(R)
    scal = np.trace(ric, axis1=-2, axis2=-1)
    return (ric - (scal / (2 * (n - 1)))[..., None, None] * _eye_like(ric)) / (n - 2)


def weyl(R: CurvatureStructure) -> CurvatureStructure:
    _require_n3(R.n)
    return R - kulkarni_nomizu(np.eye(R.n), schouten(R))


def weyl_norm_sq(R: CurvatureStructure):
    return norm_sq(weyl(R))


# ---------------------------------------------------------------------------
# elementary symmetric functions

def elementary_symmetric(values) -> np.ndarray:
    """All e_0..e_N of the last axis of ``values``, stacked on the last axis."""
    values = np.asarray(values, dtype=float)
    N = values.shape[-1]
    e = np.zeros(values.shape[:-1] + (N + 1,))
    e[..., 0] = 1.0
    for i in range(N):
        lam = values[..., i:i + 1]
        e[..., 1:i + 2] = e[..., 1:i + 2] + lam * e[..., 0:i + 1]
    return e


def _check_k(k, n, lo=1):
    if not lo <= k <= n:
        raise DegreeError(f"k={k} outside {lo}..{n}")


def sigma_k(A, k: int, method: str = "eigen"):
    """k-th elementary symmetric function of the eigenvalues of A.

    ``method`` selects one of four independent routes: ``"eigen"``
    (symmetric eigensolver), ``"newton"`` (Newton's identities on the power
    sums tr A^j), ``"double_form"`` (c^k A^k / (k!)^2) or ``"star"``
    (*(g^{n-k} A^k) / ((n-k)! k!)).
    """
    a = _matrix(A)
    n = a.shape[-1]
    _check_k(k, n, lo=0)
    if method == "eigen":
        return _scalar(elementary_symmetric(np.linalg.eigvalsh(a))[..., k])
    if method == "newton":
        return _scalar(_newton_identities(a, k)[..., k])
    form = DoubleForm.from_symmetric(a)
    if method == "double_form":
        return _scalar(contraction(form ** k, k).value() / math.factorial(k) ** 2)
    if method == "star":
        top = times_g_power(form ** k, n - k)
        return _scalar(hodge_star(top).value()
                       / (math.factorial(n - k) * math.factorial(k)))
    raise ValueError(f"unknown method {method!r}")


def _newton_identities(a: np.ndarray, kmax: int) -> np.ndarray:
    # The recursion cancels terms of size |A|^k, so it runs in extended
    # precision; the result is rounded back to float64.
    a = a.astype(np.longdouble)
    power = np.broadcast_to(np.eye(a.shape[-1], dtype=np.longdouble), a.shape).copy()
    p = []
    for _ in range(kmax):
        power = power @ a
        p.append(np.trace(power, axis1=-2, axis2=-1))
    e = np.zeros(a.shape[:-2] + (kmax + 1,), dtype=np.longdouble)
    e[..., 0] = 1.0
    for k in range(1, kmax + 1):
        acc = sum((-1) ** (i - 1) * e[..., k - i] * p[i - 1] for i in range(1, k + 1))
        e[..., k] = acc / k
    return e.astype(float)


def sigma_scale(A, k: int):
    """e_k of the absolute eigenvalues: an upper bound for |sigma_k(A)| and
    the natural magnitude against which its rounding error is measured."""
    lam = np.abs(np.linalg.eigvalsh(_matrix(A)))
    return _scalar(elementary_symmetric(lam)[..., k])


def sigmas(A) -> np.ndarray:
    """sigma_0..sigma_n via the eigenvalue route."""
    return elementary_symmetric(np.linalg.eigvalsh(_matrix(A)))


def sigmas_double_form(A) -> np.ndarray:
    """sigma_0..sigma_n as c^k A^k / (k!)^2, building the powers of A once."""
    a = _matrix(A)
    n = a.shape[-1]
    form = DoubleForm.from_symmetric(a)
    out = np.zeros(a.shape[:-2] + (n + 1,))
    out[..., 0] = 1.0
    power = form
    for k in range(1, n + 1):
        if k > 1:
            power = power * form
        out[..., k] = contraction(power, k).value() / math.factorial(k) ** 2
    return out


# ---------------------------------------------------------------------------
# Newton transformations and the Einstein tensor

def newton(A, k: int, method: str = "double_form") -> np.ndarray:
    """k-th Newton transformation t_k(A).

    ``"double_form"``: sigma_k g - c^{k-1} A^k / ((k-1)! k!);
    ``"polynomial"``: sum_j (-1)^j sigma_{k-j} A^j;
    ``"star"``: *(g^{n-k-1} A^k) / ((n-k-1)! k!).
    """
    a = _matrix(A)
    n = a.shape[-1]
    _check_k(k, n - 1)
    if method == "polynomial":
        s = sigmas(a)
        out = np.zeros_like(a)
        power = _eye_like(a).copy()
        for j in range(k + 1):
            out = out + (-1) ** j * s[..., k - j, None, None] * power
            power = power @ a
        return out
    form = DoubleForm.from_symmetric(a)
    if method == "double_form":
        s = np.asarray(sigma_k(a, k, method="double_form"))
        c = contraction(form ** k, k - 1).matrix()
        return (s[..., None, None] * _eye_like(a)
                - c / (math.factorial(k - 1) * math.factorial(k)))
    if method == "star":
        top = times_g_power(form ** k, n - k - 1)
        return hodge_star(top).matrix() / (math.factorial(n - k - 1) * math.factorial(k))
    raise ValueError(f"unknown method {method!r}")


def einstein_tensor(R: CurvatureStructure, check: bool = True,
                    tol: float = 1e-10) -> np.ndarray:
    """S = Scal/2 g - Ric, checked against (n-2) t_1(A)."""
    n = R.n
    _require_n3(n)
    ric = ricci(R)
    scal = np.trace(ric, axis1=-2, axis2=-1)
    S = (scal / 2)[..., None, None] * _eye_like(ric) - ric
    if check:
        via_newton = (n - 2) * newton(schouten(R), 1)
        scale = np.maximum(1.0, np.abs(ric).max())
        err = np.abs(S - via_newton).max()
        if err > tol * scale:
            raise IdentityError(f"Einstein tensor != (n-2) t_1(A): residual {err:.3e}")
    return S


# ---------------------------------------------------------------------------
# Gauss-Bonnet curvatures and Einstein-Lovelock tensors

def gauss_bonnet(R: CurvatureStructure, k: int):
    """h_{2k} = *(g^{n-2k} R^k) / (n-2k)!, with h_0 = 1."""
    n = R.n
    if k < 0 or 2 * k > n:
        raise DegreeError(f"h_{2 * k} undefined in dimension {n}")
    if k == 0:
        return _scalar(np.ones(R.batch_shape))
    top = times_g_power(R ** k, n - 2 * k)
    return _scalar(hodge_star(top).value() / math.factorial(n - 2 * k))


def h4_direct(R: CurvatureStructure):
    """|R|^2 - |Ric|^2 + Scal^2/4."""
    if R.n < 4:
        raise DegreeError("h_4 needs n >= 4")
    ric = ricci(R)
    scal = np.trace(ric, axis1=-2, axis2=-1)
    return _scalar(norm_sq(R) - np.sum(ric ** 2, axis=(-2, -1)) + scal ** 2 / 4)


def h4_weyl_split(R: CurvatureStructure):
    """|W|^2 + 2(n-2)(n-3) sigma_2."""
    n = R.n
    return _scalar(weyl_norm_sq(R) + 2 * (n - 2) * (n - 3) * sigma_k(schouten(R), 2))


def lovelock(R: CurvatureStructure, k: int) -> np.ndarray:
    """T_{2k} = *(g^{n-2k-1} R^k) / (n-2k-1)!, with T_0 = g and T_n = 0."""
    n = R.n
    if k < 0 or 2 * k > n:
        raise DegreeError(f"T_{2 * k} undefined in dimension {n}")
    eye = np.broadcast_to(np.eye(n), R.batch_shape + (n, n))
    if k == 0:
        return np.array(eye)
    if 2 * k == n:
        return np.zeros_like(eye)
    top = times_g_power(R ** k, n - 2 * k - 1)
    return hodge_star(top).matrix() / math.factorial(n - 2 * k - 1)


# ---------------------------------------------------------------------------
# positivity and the sigma_2 identities

def gamma_positive(A, k: int):
    """True iff sigma_1..sigma_k of A are all positive."""
    a = _matrix(A)
    _check_k(k, a.shape[-1])
    s = sigmas(a)[..., 1:k + 1]
    v = np.all(s > 0, axis=-1)
    return bool(v) if v.ndim == 0 else v


def sigma2_via_ricci(R: CurvatureStructure):
    """(-|Ric|^2 + n Scal^2 / (4(n-1))) / (2 (n-2)^2)."""
    n = R.n
    _require_n3(n)
    ric = ricci(R)
    scal = np.trace(ric, axis1=-2, axis2=-1)
    val = (-np.sum(ric ** 2, axis=(-2, -1)) + n * scal ** 2 / (4 * (n - 1))) / (2 * (n - 2) ** 2)
    return _scalar(val)


@dataclass(frozen=True)
class ComplementarySum:
    sigma2: float
    sigma2_double_form: float
    min_half_sum: float


def complementary_sum_sigma2(A) -> ComplementarySum:
    """sigma_2 for even n = 2k+2 from the split of the spectrum into two
    halves of k+1 eigenvalues.

    With g^k A a (k+1, k+1) form, ``<*g^k A, g^k A> = (k!)^2 sum_I s_I (sigma_1 - s_I)``
    over (k+1)-subsets I, s_I the sum of the eigenvalues in I, and
    ``sigma_2 = <*g^k A, g^k A> / (2 (n-2)!)``.  Also returns the smallest
    s_I; when it is positive every term is positive and so is sigma_2.
    """
    a = _matrix(A)
    if a.ndim != 2:
        raise ValueError("complementary_sum_sigma2 takes a single form")
    n = a.shape[-1]
    if n < 4 or n % 2:
        raise DegreeError(f"needs even n >= 4, got {n}")
    k = (n - 2) // 2
    lam = np.linalg.eigvalsh(a)
    s1 = lam.sum()
    sums = np.array([lam[list(I)].sum() for I in itertools.combinations(range(n), k + 1)])
    total = math.factorial(k) ** 2 * np.sum(sums * (s1 - sums))
    sigma2 = total / (2 * math.factorial(n - 2))
    gkA = times_g_power(DoubleForm.from_symmetric(a), k)
    via_forms = inner_product(hodge_star(gkA), gkA) / (2 * math.factorial(n - 2))
    return ComplementarySum(float(sigma2), float(via_forms), float(sums.min()))


@dataclass(frozen=True)
class EinsteinBound:
    lambda_min: float
    bound: float
    margin: float


def einstein_bound_check(R: CurvatureStructure) -> EinsteinBound:
    """Smallest eigenvalue of the Einstein tensor against (n-2) sigma_2/sigma_1."""
    n = R.n
    A = schouten(R)
    s = sigmas(A)
    if np.any(s[..., 1] <= 0):
        raise ValueError("einstein_bound_check needs sigma_1 > 0")
    lam = np.linalg.eigvalsh(einstein_tensor(R))[..., 0]
    bound = (n - 2) * s[..., 2] / s[..., 1]
    return EinsteinBound(_scalar(lam), _scalar(bound), _scalar(lam - bound))


def cns_margins(A, k: int):
    """(hypothesis held, smallest eigenvalue of t_k(A)) for a batch."""
    a = _matrix(A)
    n = a.shape[-1]
    _check_k(k + 1, n)
    held = np.all(sigmas(a)[..., 1:k + 2] > 0, axis=-1)
    lam = np.linalg.eigvalsh(newton(a, k, method="polynomial"))[..., 0]
    return held, lam


def cns_check(A, k: int) -> bool:
    """If sigma_1..sigma_{k+1} > 0, require t_k(A) positive definite.

    Returns whether the hypothesis held; raises :class:`IdentityError` when it
    held and the conclusion did not.
    """
    held, lam = cns_margins(A, k)
    if np.any(held & (lam <= 0)):
        raise IdentityError(f"t_{k}(A) not positive definite under the Gamma_{k + 1} hypothesis")
    return bool(held) if np.ndim(held) == 0 else held


# ---------------------------------------------------------------------------
# full report

@dataclass
class InvariantReport:
    n: int
    scal: float
    ricci: list
    schouten: list
    sigma: list            # sigma_1..sigma_n
    newton: list           # t_1..t_{n-1}
    einstein: list
    gauss_bonnet: list     # h_0, h_2, ..., h_{2 floor(n/2)}
    lovelock: list         # T_0, T_2, ..., T_{2k} with 2k < n
    weyl_norm_sq: float
    gamma: list            # Gamma_1..Gamma_n flags
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d.update(d.pop("extra"))
        return d


def invariant_report(R: CurvatureStructure) -> InvariantReport:
    if R.batch_shape:
        raise ValueError("invariant_report takes a single structure")
    n = R.n
    _require_n3(n)
    A = schouten(R)
    s = sigmas(A)
    ric = ricci(R)
    report = InvariantReport(
        n=n,
        scal=float(np.trace(ric)),
        ricci=ric.tolist(),
        schouten=A.tolist(),
        sigma=[float(x) for x in s[1:]],
        newton=[newton(A, k).tolist() for k in range(1, n)],
        einstein=einstein_tensor(R, check=False).tolist(),
        gauss_bonnet=[float(gauss_bonnet(R, k)) for k in range(n // 2 + 1)],
        lovelock=[lovelock(R, k).tolist() for k in range((n - 1) // 2 + 1)],
        weyl_norm_sq=float(weyl_norm_sq(R)),
        gamma=[bool(np.all(s[1:k + 1] > 0)) for k in range(1, n + 1)],
    )
    if n >= 4:
        report.extra["h4_direct"] = float(h4_direct(R))
    return report


def identity_residuals(R: CurvatureStructure, tol_structural: float = TOL_STRUCTURAL,
                       tol_relative: float = TOL_RELATIVE) -> dict[str, tuple[float, float]]:
    """Every identity that applies to a single structure, as
    ``name -> (residual, tolerance)``; residuals are relative unless the name
    ends in ``_abs``."""
    n = R.n
    A = schouten(R)
    out = {}
    rscale = float(norm_sq(R)) ** 0.5
    ric = ricci(R)
    s = sigmas(A)
    lam_abs = elementary_symmetric(np.abs(np.linalg.eigvalsh(A)))
    out["bianchi_abs"] = (float(symmetry_residual(R)), tol_structural * max(1.0, rscale))
    norm_a = float(np.sum(A ** 2))
    out["sigma1_sq_identity"] = (
        float(rel_err(s[1] ** 2, 2 * s[2] + norm_a, lam_abs[1] ** 2)), 1e-10)
    for k in range(1, n + 1):
        scale = lam_abs[k]
        for method in ("newton", "double_form", "star"):
            out[f"sigma_{k}_{method}"] = (
                float(rel_err(s[k], sigma_k(A, k, method), scale)), tol_relative)
    for k in range(1, n):
        ref = newton(A, k, "polynomial")
        scale = max(lam_abs[k], 1e-300)
        for method in ("double_form", "star"):
            out[f"newton_{k}_{method}"] = (
                float(np.abs(newton(A, k, method) - ref).max() / scale), tol_relative)
    S = einstein_tensor(R, check=False)
    out["einstein_newton_abs"] = (
        float(np.abs(S - (n - 2) * newton(A, 1)).max()), 1e-10 * max(1.0, np.abs(ric).max()))
    out["einstein_lovelock_abs"] = (
        float(np.abs(S - lovelock(R, 1)).max()),
        1e-10 * max(1.0, np.abs(ric).max()))
    out["h2_half_scal"] = (
        float(rel_err(gauss_bonnet(R, 1), np.trace(ric) / 2, rscale)), tol_relative)
    out["sigma2_via_ricci"] = (
        float(rel_err(sigma2_via_ricci(R), s[2], lam_abs[2])), tol_relative)
    recon = weyl(R) + kulkarni_nomizu(np.eye(n), A)
    out["weyl_reconstruct_abs"] = (
        float(np.abs(recon.coeffs - R.coeffs).max()), 1e-10 * max(1.0, rscale))
    out["weyl_tracefree_abs"] = (
        float(np.abs(ricci(weyl(R))).max()), 1e-10 * max(1.0, rscale))
    if n >= 4:
        h4 = h4_direct(R)
        out["h4_star"] = (float(rel_err(h4, gauss_bonnet(R, 2), rscale ** 2)), tol_relative)
        out["h4_weyl_split"] = (float(rel_err(h4, h4_weyl_split(R), rscale ** 2)), tol_relative)
    return out
