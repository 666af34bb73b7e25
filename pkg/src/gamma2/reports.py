"""Report builders shared by the command line and the verification suite.

Every builder returns plain JSON-ready data (dicts of floats, ints, strings,
lists), deterministic for fixed inputs and seeds regardless of how many
worker threads are used.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .cone_geometry import (
    concavity_check,
    fundamental_group_status,
    h2r_product_value,
    h4_nonconvexity_witness,
    in_gamma_cone,
    one_surgery_bound,
    one_surgery_max_k,
    surgery_product,
    surgery_product_sigma2,
    verify_h4_witness,
)
from .double_forms import CurvatureStructure
from .invariants import (
    TOL_RELATIVE,
    TOL_STRUCTURAL,
    gauss_bonnet,
    identity_residuals,
    invariant_report,
    rel_err,
    schouten,
    sigma_k,
)
from .io import provenance, structure_to_dict
from .model_spaces import product_sign_table
from .sampling import random_gamma_positive, random_symmetric, random_weyl, structure_from_schouten

CHUNK = 2000


def worker_count() -> int:
    """Size of the worker pool: ``GAMMA2_THREADS`` if set, else the CPU count."""
    env = os.environ.get("GAMMA2_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def pool_map(fn, items) -> list:
    """``[fn(x) for x in items]`` on the worker pool, results in input order."""
    items = list(items)
    workers = min(worker_count(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def sign_char(x: float) -> str:
    return "+" if x > 0 else "-" if x < 0 else "0"


# ---------------------------------------------------------------------------
# invariants

def invariants_document(R, input_hash: str | None = None, check: bool = False,
                        tol_structural: float = TOL_STRUCTURAL,
                        tol_relative: float = TOL_RELATIVE) -> tuple[dict, bool]:
    """(document, all checks passed).  Checks are only run with ``check``."""
    doc = {"report": invariant_report(R).to_dict()}
    ok = True
    if check:
        checks = {}
        for name, (res, tol) in identity_residuals(R, tol_structural, tol_relative).items():
            passed = bool(res <= tol)
            ok &= passed
            checks[name] = {"residual": res, "tol": tol, "pass": passed}
        doc["checks"] = checks
    doc["provenance"] = provenance(
        input_hash, tolerances={"structural": tol_structural, "relative": tol_relative})
    return doc, ok


# ---------------------------------------------------------------------------
# sweeps

def sweep_product_signs(p_values, q: int = 4, r_values=(0.1,), base: str = "sphere") -> list[dict]:
    """(Scal, sigma_2) of S^p(r) x B^q.  Columns: p, q, base, r, scal,
    sigma2, scal_sign, sigma2_sign, expected (predicted small-r signs or
    empty), largest_r (largest tested r keeping the predicted signs)."""
    tables = pool_map(lambda p: product_sign_table(p, q, list(r_values), base=base), sorted(p_values))
    rows = []
    for t in tables:
        exp = "" if t.expected is None else "".join(sign_char(s) for s in t.expected)
        for row in t.rows:
            rows.append({
                "p": t.p, "q": t.q, "base": t.base, "r": row.r,
                "scal": row.scal, "sigma2": row.sigma2,
                "scal_sign": sign_char(row.scal), "sigma2_sign": sign_char(row.sigma2),
                "expected": exp,
                "largest_r": "" if t.largest_r is None else t.largest_r,
            })
    return rows


def _surgery_row(nc):
    n, c = nc
    closed = surgery_product_sigma2(n, c)
    direct = float(sigma_k(schouten(surgery_product(n, c)), 2))
    return {"n": n, "c": c, "closed_form": closed, "direct": direct,
            "rel_err": float(rel_err(closed, direct)), "sign": sign_char(closed)}


def sweep_surgery_sigma2(pairs) -> list[dict]:
    """sigma_2 of S^{c-1}(1) x R^{n-c+1}.  Columns: n, c, closed_form,
    direct (from the product tensor), rel_err, sign."""
    return pool_map(_surgery_row, sorted(pairs))


def _h2r_row(ncr):
    n, c, r = ncr
    closed = h2r_product_value(c, r)
    direct = float(gauss_bonnet(surgery_product(n, c), r))
    return {"n": n, "c": c, "r": r, "closed_form": closed, "direct": direct,
            "rel_err": float(rel_err(closed, direct))}


def sweep_h2r(triples) -> list[dict]:
    """h_{2r} of S^{c-1}(1) x R^{n-c+1}.  Columns: n, c, r, closed_form,
    direct, rel_err."""
    return pool_map(_h2r_row, sorted(triples))


def sweep_k_bound(n_values) -> list[dict]:
    """Columns: n, bound, max_k (empty if none), and the k values with each
    fundamental-group status, ';'-separated."""
    rows = []
    for n in sorted(n_values):
        status = {"unrestricted": [], "open": [], "finite_required": []}
        for k in range(1, n + 1):
            status[fundamental_group_status(n, k)].append(str(k))
        mk = one_surgery_max_k(n)
        rows.append({"n": n, "bound": one_surgery_bound(n),
                     "max_k": "" if mk is None else mk,
                     "unrestricted_k": ";".join(status["unrestricted"]),
                     "open_k": ";".join(status["open"]),
                     "finite_required_k": ";".join(status["finite_required"])})
    return rows


# ---------------------------------------------------------------------------
# cone experiments

def _chunks(total: int):
    return [(i, min(CHUNK, total - i * CHUNK)) for i in range((total + CHUNK - 1) // CHUNK)]


WEYL_POOL = 64


def weyl_noise(n: int, rng: np.random.Generator, m: int, scale: float = 1.0):
    """``m`` random Weyl tensors (None below dimension 4): Gaussian
    combinations of a small pool, which is much cheaper than projecting
    ``m`` independent tensors."""
    if n < 4:
        return None
    pool = random_weyl(n, rng, min(m, WEYL_POOL))
    mix = rng.standard_normal((m, pool.coeffs.shape[0])) / np.sqrt(pool.coeffs.shape[0])
    mix *= scale * rng.uniform(0.0, 2.0, (m, 1))
    return CurvatureStructure(n, np.einsum("mp,pij->mij", mix, pool.coeffs))


def cone_sample(n: int, k: int, trials: int, seed: int) -> dict:
    """Count Gamma_j membership (j = 1..n) of W + g A with A drawn with
    eigenvalues uniform in [-1, 2] and W random Weyl noise."""
    def run(chunk):
        i, m = chunk
        rng = np.random.default_rng([seed, n, i])
        A = random_symmetric(n, rng, m)
        R = structure_from_schouten(A, weyl_noise(n, rng, m))
        return np.array([np.sum(in_gamma_cone(R, j)) for j in range(1, n + 1)])
    counts = np.sum(pool_map(run, _chunks(trials)), axis=0)
    return {"action": "sample", "n": n, "k": k, "trials": trials,
            "in_cone": int(counts[k - 1]),
            "counts_by_k": [int(c) for c in counts]}


def concavity_trials(n: int, k: int, trials: int, seed: int) -> np.ndarray:
    """Concavity residuals on ``trials`` random pairs inside Gamma_k with
    Weyl noise and t uniform in [0, 1]."""
    def run(chunk):
        i, m = chunk
        rng = np.random.default_rng([seed, n, k, i])
        a = random_gamma_positive(n, k, rng, m)
        b = random_gamma_positive(n, k, rng, m)
        R = structure_from_schouten(a, weyl_noise(n, rng, m))
        Rbar = structure_from_schouten(b, weyl_noise(n, rng, m))
        t = rng.uniform(0.0, 1.0, m)
        return np.atleast_1d(concavity_check(R, Rbar, t, k))
    return np.concatenate(pool_map(run, _chunks(trials)))


def cone_concavity(n: int, k: int, trials: int, seed: int, tol: float = 1e-10) -> dict:
    res = concavity_trials(n, k, trials, seed)
    return {"action": "concavity", "n": n, "k": k, "trials": trials,
            "min_residual": float(res.min()),
            "violations": int(np.sum(res < -tol)), "tol": tol}


def cone_h4_witness(n: int, seed: int, budget: int) -> dict:
    w = h4_nonconvexity_witness(n, seed=seed, budget=budget)
    if w is None:
        return {"action": "h4-witness", "n": n, "found": False, "witness": "none",
                "budget": budget}
    return {"action": "h4-witness", "n": n, "found": True, "trial": w.trial,
            "budget": budget, "h4": list(w.h4),
            "verified": bool(verify_h4_witness(w.R, w.Rbar)),
            "R": structure_to_dict(w.R), "Rbar": structure_to_dict(w.Rbar)}
