"""Model curvature structures: space forms, Riemannian products, fiber-scaled
products, and the sign predicates for canonical variations of submersions.

Only products are built exactly.  For a general submersion the sign of
sigma_2 on the shrunk-fiber metric is decided from the fiber data alone by
:func:`submersion_sigma2_predicate`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .double_forms import CurvatureStructure, DegreeError, g_power, subsets
from .invariants import (
    einstein_tensor,
    h4_direct,
    ricci,
    schouten,
    sigma_k,
)


def space_form(p: int, kappa: float) -> CurvatureStructure:
    """Constant sectional curvature ``kappa`` on R^p: (kappa/2) g^2."""
    if p < 2:
        raise DegreeError(f"space form needs dimension >= 2, got {p}")
    return CurvatureStructure(p, kappa / 2 * g_power(p, 2).coeffs)


def sphere(p: int, r: float = 1.0) -> CurvatureStructure:
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    return space_form(p, 1.0 / r ** 2)


def flat(p: int) -> CurvatureStructure:
    return space_form(p, 0.0)


def product(*factors) -> CurvatureStructure:
    """Block direct sum.  A factor may be an int, meaning flat R^q (this is
    how one-dimensional factors enter)."""
    dims = [f if isinstance(f, int) else f.n for f in factors]
    n = sum(dims)
    t = np.zeros((n, n, n, n))
    off = 0
    for f, d in zip(factors, dims):
        if not isinstance(f, int):
            if f.batch_shape:
                raise ValueError("product takes single structures")
            s = slice(off, off + d)
            t[s, s, s, s] = f.tensor()
        off += d
    return CurvatureStructure.from_tensor(t)


# ---------------------------------------------------------------------------
# fiber-scaled products

FACTOR_KINDS = ("sphere", "space_form", "einstein", "flat")


@dataclass(frozen=True)
class Factor:
    """One factor of a product model.

    ``value`` is the radius for ``sphere``, the sectional curvature for
    ``space_form`` and the scalar curvature for ``einstein`` (realized by the
    constant-curvature metric with that scalar curvature).
    """

    dim: int
    kind: str = "sphere"
    value: float = 1.0

    def __post_init__(self):
        if self.kind not in FACTOR_KINDS:
            raise ValueError(f"unknown factor kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("factor dimension must be positive")
        if self.kind == "sphere" and self.value <= 0:
            raise ValueError("sphere radius must be positive")
        if self.dim == 1 and self.kind != "flat":
            raise ValueError("one-dimensional factors are flat")

    @property
    def curvature(self) -> float:
        if self.kind == "sphere":
            return 1.0 / self.value ** 2
        if self.kind == "space_form":
            return self.value
        if self.kind == "einstein":
            return self.value / (self.dim * (self.dim - 1))
        return 0.0

    @property
    def scal(self) -> float:
        return self.curvature * self.dim * (self.dim - 1)

    def structure(self):
        if self.dim == 1:
            return 1
        return space_form(self.dim, self.curvature)


@dataclass(frozen=True)
class ProductSpec:
    fiber: Factor
    base: Factor
    t: float = 1.0

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError("fiber scale t must be positive")
        if self.n < 3:
            raise ValueError("total dimension must be at least 3")

    @property
    def n(self) -> int:
        return self.fiber.dim + self.base.dim

    @property
    def p(self) -> int:
        return self.fiber.dim


def canonical_variation(spec: ProductSpec) -> CurvatureStructure:
    """Product with the fiber metric scaled by t^2, so the fiber curvature
    is scaled by 1/t^2.  Exact for products."""
    if not isinstance(spec, ProductSpec):
        raise TypeError("canonical_variation is only defined for product specs")
    fib = spec.fiber.structure()
    if not isinstance(fib, int):
        fib = fib / spec.t ** 2
    return product(fib, spec.base.structure())


# ---------------------------------------------------------------------------
# closed-form predicates

def einstein_fiber_sigma2(p: int, scal: float) -> float:
    """sigma_2 of an Einstein p-manifold with scalar curvature ``scal``."""
    if p < 2:
        raise DegreeError("fiber dimension must be >= 2")
    return scal ** 2 / (8 * p * (p - 1))


def submersion_sigma2_predicate(n: int, p: int, sigma2_fiber: float,
                                scal_fiber: float, rtol: float = 1e-12) -> str:
    """Sign of sigma_2 of the canonical variation for small t.

    Compares ``8(n-1)(p-1)(p-2)^2 sigma_2`` with ``(n-p) Scal^2`` for the
    fiber.  At p = 2 the left side vanishes identically.
    """
    if not 2 <= p < n:
        raise DegreeError(f"need 2 <= p < n, got p={p}, n={n}")
    lhs = 8 * (n - 1) * (p - 1) * (p - 2) ** 2 * sigma2_fiber
    rhs = (n - p) * scal_fiber ** 2
    if abs(lhs - rhs) <= rtol * max(abs(lhs), abs(rhs)):
        return "indeterminate"
    return "positive" if lhs > rhs else "negative"


def leading_coefficient(n: int, p: int, scal_fiber: float) -> float:
    """Coefficient of t^-4 in 2(n-2)^2 sigma_2(g_t) for an Einstein fiber:
    ``Scal^2 (n(p-4)+4) / (4 p (n-1))``."""
    if p < 2:
        raise DegreeError("fiber dimension must be >= 2")
    return scal_fiber ** 2 * (n * (p - 4) + 4) / (4 * p * (n - 1))


def sigma2_scaled(spec: ProductSpec) -> float:
    """t^4 sigma_2(g_t) computed from the exact product structure."""
    return spec.t ** 4 * sigma_k(schouten(canonical_variation(spec)), 2)


# ---------------------------------------------------------------------------
# sign tables

def expected_small_r_signs(p: int, q: int):
    """(Scal sign, sigma_2 sign) of S^p(r) x B^q for small r, or None where
    no sign is predicted."""
    if p == 2 and q >= 1:
        return (1, -1)
    if p == 3 and q >= 2:
        return (1, -1)
    if p >= 4:
        return (1, 1)
    return None


@dataclass(frozen=True)
class SignRow:
    r: float
    scal: float
    sigma2: float

    @property
    def signs(self) -> tuple[int, int]:
        return int(np.sign(self.scal)), int(np.sign(self.sigma2))


@dataclass
class SignTable:
    p: int
    q: int
    base: str
    rows: list[SignRow] = field(default_factory=list)
    expected: tuple[int, int] | None = None
    largest_r: float | None = None


def _row(p, q, base, r) -> SignRow:
    b = Factor(q, "sphere", 1.0) if base == "sphere" and q >= 2 else Factor(q, "flat", 0.0)
    R = canonical_variation(ProductSpec(Factor(p, "sphere", 1.0), b, r))
    return SignRow(r, float(np.trace(ricci(R))), float(sigma_k(schouten(R), 2)))


def product_sign_table(p: int, q: int, r_values, base: str = "sphere",
                       r_max: float = 10.0, grid: int = 60) -> SignTable:
    """Exact (Scal, sigma_2) of S^p(r) x B^q for each r, where B is the unit
    sphere or flat R^q.

    ``largest_r`` is the largest r on a geometric grid up to ``r_max`` (refined
    by bisection) below which every tested r shows the small-r signs.  It is
    an observation about the tested points, not a proven threshold.
    """
    if base not in ("sphere", "flat"):
        raise ValueError(f"base must be 'sphere' or 'flat', got {base!r}")
    table = SignTable(p, q, base, expected=expected_small_r_signs(p, q))
    table.rows = [_row(p, q, base, float(r)) for r in r_values]
    if table.expected is None:
        return table
    ok = lambda r: _row(p, q, base, r).signs == table.expected  # noqa: E731
    rs = np.geomspace(1e-3, r_max, grid)
    if not ok(rs[0]):
        return table
    last = rs[0]
    for r in rs[1:]:
        if not ok(r):
            lo, hi = last, r
            for _ in range(40):
                mid = (lo + hi) / 2
                lo, hi = (mid, hi) if ok(mid) else (lo, mid)
            table.largest_r = float(lo)
            return table
        last = r
    table.largest_r = float(rs[-1])
    return table


@dataclass(frozen=True)
class SignPortfolio:
    sectional_min: float
    ricci_min: float
    einstein_min: float
    h4: float | None
    sigma2: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def sign_portfolio(R: CurvatureStructure, rng: np.random.Generator | None = None,
                   samples: int = 10_000) -> SignPortfolio:
    """Five curvature signs at once.  The sectional minimum is taken over all
    coordinate planes and ``samples`` random planes, so it is an estimate
    from above of the true minimum."""
    rng = np.random.default_rng(0) if rng is None else rng
    n = R.n
    coord = np.diagonal(R.coeffs).min() if len(subsets(n, 2)) else 0.0
    x = rng.standard_normal((samples, n))
    y = rng.standard_normal((samples, n))
    sec = min(float(coord), float(R.sectional(x, y).min()))
    return SignPortfolio(
        sectional_min=sec,
        ricci_min=float(np.linalg.eigvalsh(ricci(R))[0]),
        einstein_min=float(np.linalg.eigvalsh(einstein_tensor(R))[0]),
        h4=float(h4_direct(R)) if n >= 4 else None,
        sigma2=float(sigma_k(schouten(R), 2)),
    )
