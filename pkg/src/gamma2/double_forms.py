"""Dense exterior algebra of double forms on R^n.

A double form of bidegree (p, q) is stored as a coefficient matrix indexed by
strictly increasing multi-indices: ``coeffs[..., I, J]`` with ``I`` running over
the p-subsets and ``J`` over the q-subsets of ``range(n)`` in lexicographic
order.  Leading axes are batch axes, so every operation here acts on stacks of
forms at once.

Conventions
-----------
* exterior product: the wedge taken independently in each block, with the
  determinant normalization ``(e_1 ^ e_2)(e_1, e_2) = 1``.  For two symmetric
  (1,1) forms this is exactly the four-term Kulkarni-Nomizu product.
* contraction: ``(c w)(x..; y..) = sum_m w(e_m, x..; e_m, y..)``.
* Hodge star: ``(*w)(I, J) = eps(I^c, I) eps(J^c, J) w(I^c, J^c)``.
* inner product: sum over increasing index pairs, so that for a (2,2) form
  ``|R|^2 = 1/4 sum_{ijkl} R_ijkl^2``.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from numbers import Real

import numpy as np

MAX_DIM = 12


class DegreeError(ValueError):
    """Raised when a bidegree is out of range for the ambient dimension."""


# ---------------------------------------------------------------------------
# index tables

@lru_cache(maxsize=None)
def subsets(n: int, p: int) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.combinations(range(n), p))


@lru_cache(maxsize=None)
def subset_index(n: int, p: int) -> dict[tuple[int, ...], int]:
    return {s: i for i, s in enumerate(subsets(n, p))}


def _shuffle_sign(first, second) -> int:
    # sign of the permutation sorting the concatenation first + second,
    # both already increasing
    inversions = sum(1 for a in first for b in second if a > b)
    return -1 if inversions % 2 else 1


@lru_cache(maxsize=None)
def _split_table(n: int, p: int, r: int):
    """For every (p+r)-subset U and every r-subset K of U: index of U\\K,
    index of K and the shuffle sign of (U\\K, K)."""
    us = subsets(n, p + r)
    ip, ir = subset_index(n, p), subset_index(n, r)
    npat = math.comb(p + r, r)
    left = np.empty((len(us), npat), dtype=np.intp)
    right = np.empty((len(us), npat), dtype=np.intp)
    sign = np.empty((len(us), npat))
    for u, U in enumerate(us):
        for a, pos in enumerate(itertools.combinations(range(p + r), r)):
            K = tuple(U[i] for i in pos)
            I = tuple(x for x in U if x not in K)
            left[u, a] = ip[I]
            right[u, a] = ir[K]
            sign[u, a] = _shuffle_sign(I, K)
    return left, right, sign


@lru_cache(maxsize=None)
def _insert_table(n: int, p: int, j: int):
    """For every (p-j)-subset I and every j-subset K: index of K u I among
    the p-subsets and eps(K, I); sign 0 marks overlapping pairs."""
    src = subsets(n, p - j)
    ks = subsets(n, j)
    ip = subset_index(n, p)
    idx = np.zeros((len(src), len(ks)), dtype=np.intp)
    sign = np.zeros((len(src), len(ks)))
    for a, I in enumerate(src):
        for b, K in enumerate(ks):
            if set(K) & set(I):
                continue
            idx[a, b] = ip[tuple(sorted(I + K))]
            sign[a, b] = _shuffle_sign(K, I)
    return idx, sign


@lru_cache(maxsize=None)
def _star_table(n: int, p: int):
    """For every (n-p)-subset I: index of its complement among the p-subsets
    and eps(I^c, I)."""
    src = subsets(n, n - p)
    ip = subset_index(n, p)
    idx = np.empty(len(src), dtype=np.intp)
    sign = np.empty(len(src))
    full = set(range(n))
    for a, I in enumerate(src):
        Ic = tuple(sorted(full - set(I)))
        idx[a] = ip[Ic]
        sign[a] = _shuffle_sign(Ic, I)
    return idx, sign


# ---------------------------------------------------------------------------
# the value type

class DoubleForm:
    """A (p, q) double form on R^n, possibly a batch of them.

    Instances are treated as immutable; the coefficient array is made
    read-only on construction.
    """

    __slots__ = ("n", "p", "q", "coeffs")

    def __init__(self, n: int, p: int, q: int, coeffs):
        if not 1 <= n <= MAX_DIM:
            raise DegreeError(f"dimension {n} outside 1..{MAX_DIM}")
        if not (0 <= p <= n and 0 <= q <= n):
            raise DegreeError(f"bidegree ({p},{q}) invalid for n={n}")
        coeffs = np.array(coeffs, dtype=float)
        shape = (math.comb(n, p), math.comb(n, q))
        if coeffs.ndim < 2 or coeffs.shape[-2:] != shape:
            raise ValueError(
                f"coefficient shape {coeffs.shape} does not end with {shape}")
        coeffs.flags.writeable = False
        self.n, self.p, self.q, self.coeffs = n, p, q, coeffs

    # construction helpers -------------------------------------------------
    @classmethod
    def scalar(cls, n: int, value=1.0) -> "DoubleForm":
        value = np.asarray(value, dtype=float)
        return cls(n, 0, 0, value[..., None, None])

    @classmethod
    def from_symmetric(cls, a) -> "DoubleForm":
        a = np.asarray(a, dtype=float)
        return cls(a.shape[-1], 1, 1, a)

    def _like(self, p: int, q: int, coeffs) -> "DoubleForm":
        if p == q == 2:
            return CurvatureStructure(self.n, coeffs)
        return DoubleForm(self.n, p, q, coeffs)

    @property
    def bidegree(self) -> tuple[int, int]:
        return self.p, self.q

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[:-2]

    def value(self):
        """The scalar value of a (0,0) form (array over the batch)."""
        if self.bidegree != (0, 0):
            raise DegreeError(f"bidegree {self.bidegree} is not scalar")
        v = self.coeffs[..., 0, 0]
        return float(v) if v.ndim == 0 else v

    def matrix(self) -> np.ndarray:
        """Coefficients of a (1,1) form as an n x n matrix."""
        if self.bidegree != (1, 1):
            raise DegreeError(f"bidegree {self.bidegree} is not (1,1)")
        return np.array(self.coeffs)

    def __getitem__(self, key) -> float:
        """Evaluate on arbitrary index tuples ``(I, J)``, applying signs."""
        I, J = key
        return float(self._eval_block(I, self.p, J, self.q))

    def _eval_block(self, I, p, J, q):
        if len(I) != p or len(J) != q:
            raise DegreeError("index lengths do not match the bidegree")
        si, ii = _sort_with_sign(I)
        sj, jj = _sort_with_sign(J)
        if si == 0 or sj == 0:
            return 0.0
        return si * sj * self.coeffs[..., subset_index(self.n, p)[ii],
                                     subset_index(self.n, q)[jj]]

    # arithmetic -----------------------------------------------------------
    def _check_same(self, other: "DoubleForm"):
        if self.n != other.n or self.bidegree != other.bidegree:
            raise DegreeError(
                f"cannot combine ({self.n}; {self.bidegree}) with "
                f"({other.n}; {other.bidegree})")

    def __add__(self, other):
        if not isinstance(other, DoubleForm):
            return NotImplemented
        self._check_same(other)
        return self._like(self.p, self.q, self.coeffs + other.coeffs)

    def __sub__(self, other):
        if not isinstance(other, DoubleForm):
            return NotImplemented
        self._check_same(other)
        return self._like(self.p, self.q, self.coeffs - other.coeffs)

    def __neg__(self):
        return self._like(self.p, self.q, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, DoubleForm):
            return exterior_product(self, other)
        if isinstance(other, (Real, np.ndarray)):
            s = np.asarray(other, dtype=float)
            return self._like(self.p, self.q, self.coeffs * s[..., None, None])
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (Real, np.ndarray)):
            return self.__mul__(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (Real, np.ndarray)):
            return self.__mul__(1.0 / np.asarray(other, dtype=float))
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = DoubleForm.scalar(self.n, np.ones(self.batch_shape))
        for _ in range(k):
            out = out * self
        return out

    def __repr__(self):
        batch = f", batch={self.batch_shape}" if self.batch_shape else ""
        return f"{type(self).__name__}(n={self.n}, bidegree={self.bidegree}{batch})"


def _sort_with_sign(idx):
    idx = tuple(int(i) for i in idx)
    if len(set(idx)) != len(idx):
        return 0, idx
    inv = sum(1 for a in range(len(idx)) for b in range(a + 1, len(idx))
              if idx[a] > idx[b])
    return (-1 if inv % 2 else 1), tuple(sorted(idx))


class CurvatureStructure(DoubleForm):
    """A (2,2) double form.  Pair symmetry and the first Bianchi identity are
    properties checked by :func:`symmetry_residual`, not enforced."""

    __slots__ = ()

    def __init__(self, n: int, coeffs):
        super().__init__(n, 2, 2, coeffs)

    @classmethod
    def from_tensor(cls, t) -> "CurvatureStructure":
        """Read the increasing-index components of a 4-index array
        ``t[..., i, j, k, l]``.  No symmetrization is applied."""
        t = np.asarray(t, dtype=float)
        n = t.shape[-1]
        pairs = np.array(subsets(n, 2), dtype=np.intp).reshape(-1, 2)
        c = t[..., pairs[:, 0][:, None], pairs[:, 1][:, None],
              pairs[:, 0][None, :], pairs[:, 1][None, :]]
        return cls(n, c)

    def tensor(self) -> np.ndarray:
        """Full 4-index array ``R[..., i, j, k, l]`` with all sign images."""
        n = self.n
        out = np.zeros(self.batch_shape + (n, n, n, n))
        pairs = np.array(subsets(n, 2), dtype=np.intp).reshape(-1, 2)
        i, j = pairs[:, 0][:, None], pairs[:, 1][:, None]
        k, l = pairs[:, 0][None, :], pairs[:, 1][None, :]
        c = self.coeffs
        out[..., i, j, k, l] = c
        out[..., j, i, k, l] = -c
        out[..., i, j, l, k] = -c
        out[..., j, i, l, k] = c
        return out

    def sectional(self, x, y):
        """R(x, y, x, y) / |x ^ y|^2 for vectors (or stacks of vectors)."""
        t = self.tensor()
        x, y = np.asarray(x, float), np.asarray(y, float)
        num = np.einsum("...ijkl,...i,...j,...k,...l->...", t, x, y, x, y, optimize=True)
        den = (np.einsum("...i,...i->...", x, x) * np.einsum("...i,...i->...", y, y)
               - np.einsum("...i,...i->...", x, y) ** 2)
        return num / den


# ---------------------------------------------------------------------------
# operations

def exterior_product(w: DoubleForm, th: DoubleForm) -> DoubleForm:
    """Exterior product of a (p,q) and an (r,s) double form."""
    if w.n != th.n:
        raise DegreeError(f"dimension mismatch {w.n} != {th.n}")
    n, p, q, r, s = w.n, w.p, w.q, th.p, th.q
    if p + r > n or q + s > n:
        raise DegreeError(
            f"bidegree ({p + r},{q + s}) exceeds dimension {n}")
    li, ri, rs = _split_table(n, p, r)
    lj, rj, cs = _split_table(n, q, s)
    batch = np.broadcast_shapes(w.batch_shape, th.batch_shape)
    a = np.broadcast_to(w.coeffs, batch + w.coeffs.shape[-2:])
    b = np.broadcast_to(th.coeffs, batch + th.coeffs.shape[-2:])
    out = np.zeros(batch + (li.shape[0], lj.shape[0]))
    for u in range(li.shape[1]):
        wa = np.take(a, li[:, u], axis=-2)
        ta = np.take(b, ri[:, u], axis=-2)
        for v in range(lj.shape[1]):
            term = np.take(wa, lj[:, v], axis=-1) * np.take(ta, rj[:, v], axis=-1)
            out += term * np.outer(rs[:, u], cs[:, v])
    return w._like(p + r, q + s, out)


def kulkarni_nomizu(a, b) -> CurvatureStructure:
    """Kulkarni-Nomizu product of two symmetric bilinear forms.

    ``(ab)(x,y,z,t) = a(x,z)b(y,t) + a(y,t)b(x,z) - a(x,t)b(y,z) - a(y,z)b(x,t)``
    """
    a = a if isinstance(a, DoubleForm) else DoubleForm.from_symmetric(a)
    b = b if isinstance(b, DoubleForm) else DoubleForm.from_symmetric(b)
    if a.bidegree != (1, 1) or b.bidegree != (1, 1):
        raise DegreeError("Kulkarni-Nomizu product needs (1,1) forms")
    if a.n != b.n:
        raise DegreeError(f"dimension mismatch {a.n} != {b.n}")
    return exterior_product(a, b)


def contraction(w: DoubleForm, times: int = 1) -> DoubleForm:
    """Contract the first slot of each block against an orthonormal frame,
    ``times`` times over.

    The j-fold contraction is evaluated in one pass as
    ``j! sum_K eps(K,I) eps(K,J) w(K u I, K u J)``.
    """
    n, p, q = w.n, w.p, w.q
    if times == 0:
        return w
    if times < 0 or p < times or q < times:
        raise DegreeError(f"cannot contract a ({p},{q}) form {times} times")
    ii, si = _insert_table(n, p, times)
    jj, sj = _insert_table(n, q, times)
    gathered = w.coeffs[..., ii[:, None, :], jj[None, :, :]]
    signs = si[:, None, :] * sj[None, :, :]
    out = math.factorial(times) * np.einsum("...abk,abk->...ab", gathered, signs)
    return w._like(p - times, q - times, out)


def hodge_star(w: DoubleForm) -> DoubleForm:
    n, p, q = w.n, w.p, w.q
    ii, si = _star_table(n, p)
    jj, sj = _star_table(n, q)
    c = np.take(np.take(w.coeffs, ii, axis=-2), jj, axis=-1) * np.outer(si, sj)
    return w._like(n - p, n - q, c)


def inner_product(w: DoubleForm, th: DoubleForm):
    w._check_same(th)
    v = np.einsum("...ij,...ij->...", w.coeffs, th.coeffs)
    return float(v) if v.ndim == 0 else v


def norm_sq(w: DoubleForm):
    return inner_product(w, w)


def metric(n: int) -> DoubleForm:
    return DoubleForm.from_symmetric(np.eye(n))


@lru_cache(maxsize=None)
def g_power(n: int, k: int) -> DoubleForm:
    """k-fold exterior power of the Euclidean metric on R^n."""
    if not 0 <= k <= n:
        raise DegreeError(f"power {k} outside 0..{n}")
    if k == 0:
        return DoubleForm.scalar(n, 1.0)
    return g_power(n, k - 1) * metric(n)


def times_g_power(w: DoubleForm, k: int) -> DoubleForm:
    """w * g^k, using the cached power of the metric."""
    if k == 0:
        return w
    return exterior_product(w, g_power(w.n, k))


# ---------------------------------------------------------------------------
# curvature-structure projection

@lru_cache(maxsize=None)
def _signed_perms4():
    out = []
    for perm in itertools.permutations(range(4)):
        out.append((perm, _sort_with_sign(perm)[0]))
    return tuple(out)


def bianchi_project(t) -> CurvatureStructure:
    """Orthogonal projection of a 4-index array onto algebraic curvature
    tensors (block antisymmetry, pair symmetry, first Bianchi identity).

    The symmetry average lands in a space containing the totally
    antisymmetric 4-tensors; removing that part leaves exactly the Bianchi
    solutions.
    """
    t = np.asarray(t, dtype=float)
    if t.ndim < 4 or len(set(t.shape[-4:])) != 1:
        raise ValueError(f"expected (..., n, n, n, n), got {t.shape}")
    ax = t.ndim - 4
    b = [ax, ax + 1, ax + 2, ax + 3]

    def tr(x, order):
        return np.transpose(x, list(range(ax)) + [b[o] for o in order])

    s = (t - tr(t, (1, 0, 2, 3)) - tr(t, (0, 1, 3, 2)) + tr(t, (1, 0, 3, 2))) / 4
    s = (s + tr(s, (2, 3, 0, 1))) / 2
    alt = sum(sign * tr(s, perm) for perm, sign in _signed_perms4()) / 24
    return CurvatureStructure.from_tensor(s - alt)


def symmetry_residual(R: CurvatureStructure):
    """Largest violation of pair symmetry or the first Bianchi identity."""
    t = R.tensor()
    pair = np.abs(t - np.swapaxes(np.swapaxes(t, -4, -2), -3, -1))
    cyc = np.abs(t + np.einsum("...yzxt->...xyzt", t) + np.einsum("...zxyt->...xyzt", t))
    axes = (-4, -3, -2, -1)
    v = np.maximum(pair.max(axis=axes), cyc.max(axis=axes))
    return float(v) if v.ndim == 0 else v


def random_curvature(n: int, rng: np.random.Generator, size=None) -> CurvatureStructure:
    shape = (() if size is None else tuple(np.atleast_1d(size))) + (n,) * 4
    return bianchi_project(rng.standard_normal(shape))
