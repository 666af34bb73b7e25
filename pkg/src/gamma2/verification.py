"""The full identity and property suite behind ``gamma2 verify``.

Each check returns ``(passed, detail)``; :func:`run_checks` times them and
turns exceptions into failures, so one broken check never hides the others.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass

import numpy as np

from .cone_geometry import (
    decompose,
    h4_nonconvexity_witness,
    in_gamma_cone,
    one_surgery_max_k,
    sigma2_split,
    sphere_cross_R2_sigma_k,
    verify_h4_witness,
)
from .double_forms import kulkarni_nomizu, norm_sq, random_curvature
from .invariants import (
    cns_margins,
    einstein_bound_check,
    elementary_symmetric,
    gauss_bonnet,
    h4_direct,
    h4_weyl_split,
    lovelock,
    newton,
    rel_err,
    schouten,
    sigma_k,
    sigmas,
    sigmas_double_form,
)
from .io import dumps_csv, dumps_json
from .model_spaces import (
    Factor,
    ProductSpec,
    leading_coefficient,
    product,
    product_sign_table,
    sigma2_scaled,
    sign_portfolio,
    sphere,
)
from .reports import (
    concavity_trials,
    cone_h4_witness,
    invariants_document,
    sweep_surgery_sigma2,
    weyl_noise,
)
from .sampling import random_gamma_positive, random_symmetric, structure_from_schouten

IDENTITY_TIME_LIMIT = 60.0


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<26} {self.detail}  [{self.seconds:.1f}s]"


def _rng(seed, *tag):
    return np.random.default_rng([seed, *tag])


def _abs_scale(A, k):
    return elementary_symmetric(np.abs(np.linalg.eigvalsh(A)))[..., k]


# ---------------------------------------------------------------------------
# checks

def check_identity_suite(seed: int, quick: bool):
    """sigma_1^2 - 2 sigma_2 = |A|^2 and eigen / Newton / contraction agreement."""
    start = time.perf_counter()
    count = 100 if quick else 1000
    worst_sq = worst_routes = 0.0
    for n in range(3, 9):
        A = random_symmetric(n, _rng(seed, 1, n), count)
        lam_abs = elementary_symmetric(np.abs(np.linalg.eigvalsh(A)))
        by_eigen = sigmas(A)
        by_forms = sigmas_double_form(A)
        sq = rel_err(by_forms[:, 1] ** 2, 2 * by_forms[:, 2] + np.sum(A ** 2, axis=(1, 2)),
                     lam_abs[:, 1] ** 2)
        worst_sq = max(worst_sq, float(sq.max()))
        for k in range(1, n + 1):
            by_newton = sigma_k(A, k, "newton")
            for other in (by_newton, by_forms[:, k]):
                worst_routes = max(worst_routes,
                                   float(rel_err(by_eigen[:, k], other, lam_abs[:, k]).max()))
    elapsed = time.perf_counter() - start
    ok = worst_sq <= 1e-10 and worst_routes <= 1e-9 and elapsed < IDENTITY_TIME_LIMIT
    return ok, (f"{count}/n, n=3..8: sigma1^2 identity {worst_sq:.1e} (tol 1e-10), "
                f"routes {worst_routes:.1e} (tol 1e-9), {elapsed:.1f}s (limit 60s)")


def check_h4_triangle(seed: int, quick: bool):
    count = 100 if quick else 1000
    worst = 0.0
    for n in range(4, 9):
        R = random_curvature(n, _rng(seed, 2, n), count)
        scale = norm_sq(R)
        direct = h4_direct(R)
        worst = max(worst,
                    float(rel_err(direct, gauss_bonnet(R, 2), scale).max()),
                    float(rel_err(direct, h4_weyl_split(R), scale).max()))
    return worst <= 1e-9, f"{count}/n, n=4..8: max rel {worst:.1e} (tol 1e-9)"


CONFORMAL_COUNTS = {4: 50, 5: 50, 6: 50, 7: 30, 8: 20, 9: 8, 10: 4}


def check_conformally_flat(seed: int, quick: bool):
    """h_{2k}(gA) and T_{2k}(gA) against sigma_k(A) and t_k(A)."""
    f = math.factorial
    worst_h = worst_t = 0.0
    for n, count in CONFORMAL_COUNTS.items():
        count = min(count, 4) if quick else count
        A = random_symmetric(n, _rng(seed, 3, n), count)
        R = kulkarni_nomizu(np.eye(n), A)
        s = sigmas(A)
        for k in range(1, n // 2 + 1):
            c = f(n - k) * f(k) / f(n - 2 * k)
            worst_h = max(worst_h, float(rel_err(s[:, k] * c, gauss_bonnet(R, k),
                                                 _abs_scale(A, k) * c).max()))
        for k in range(1, (n - 1) // 2 + 1):
            c = f(k) * f(n - k - 1) / f(n - 2 * k - 1)
            diff = np.abs(newton(A, k, "polynomial") * c - lovelock(R, k)).max(axis=(1, 2))
            worst_t = max(worst_t, float((diff / (_abs_scale(A, k) * c)).max()))
    ok = worst_h <= 1e-9 and worst_t <= 1e-9
    return ok, f"n=4..10: h_2k {worst_h:.1e}, T_2k {worst_t:.1e} (tol 1e-9)"


def check_einstein_bound(seed: int, quick: bool):
    count = 100 if quick else 1000
    worst = np.inf
    for n in range(3, 9):
        rng = _rng(seed, 4, n)
        A = random_gamma_positive(n, 2, rng, count)
        eb = einstein_bound_check(structure_from_schouten(A, weyl_noise(n, rng, count)))
        worst = min(worst, float(np.min(eb.margin)))
    violations = held_total = 0
    for n in range(3, 9):
        for k in range(1, n):
            A = random_gamma_positive(n, k + 1, _rng(seed, 5, n, k), count)
            held, lam = cns_margins(A, k)
            held_total += int(held.sum())
            violations += int(np.sum(held & (lam <= 0)))
    ok = worst >= -1e-10 and violations == 0
    return ok, (f"{count}/n: min lambda_min(S) - bound {worst:.2e} (tol -1e-10); "
                f"Newton positivity violations {violations}/{held_total}")


def check_surgery_sigma2(seed: int, quick: bool):
    rows = sweep_surgery_sigma2([(n, c) for n in range(5, 13) for c in range(3, n + 1)])
    worst = max(r["rel_err"] for r in rows)
    sign_ok = all((r["closed_form"] > 0) == (r["c"] >= 5) and (r["direct"] > 0) == (r["c"] >= 5)
                  for r in rows)
    spot = next(r for r in rows if (r["n"], r["c"]) == (6, 5))
    spot_ok = abs(spot["closed_form"] - 0.225) <= 1e-12 and abs(spot["direct"] - 0.225) <= 1e-9
    ok = worst <= 1e-9 and sign_ok and spot_ok
    return ok, (f"{len(rows)} (n,c): closed vs direct {worst:.1e} (tol 1e-9), "
                f"positive iff c>=5: {sign_ok}, (6,5) -> {spot['direct']:.12g}")


def check_one_surgery_bound(seed: int, quick: bool):
    table = tuple(one_surgery_max_k(n) for n in (6, 8, 11))
    worst = 0.0
    signs_ok = True
    for n in range(4, 13):
        S = product(sphere(n - 2, 1.0), 2)
        A = schouten(S) * (2 * (n - 1) * (n - 2) / (n - 3))
        lam_abs = elementary_symmetric(np.abs(np.linalg.eigvalsh(A)))
        for k in range(1, n + 1):
            sc = sphere_cross_R2_sigma_k(n, k)
            worst = max(worst, float(rel_err(sc.oracle, sigma_k(A, k), lam_abs[k])))
            if sc.closed_form is not None:
                worst = max(worst, float(rel_err(sc.oracle, sc.closed_form, lam_abs[k])))
            signs_ok &= bool(sc.sign_agrees)
    ok = table == (2, 3, 4) and worst <= 1e-9 and signs_ok
    return ok, (f"max k at n=6,8,11: {table}; tensor/spectrum/closed form {worst:.1e}; "
                f"quadratic sign agrees: {signs_ok}")


CONVERGENCE_TS = (1e-1, 1e-2, 1e-3)


def submersion_convergence(ts=CONVERGENCE_TS):
    """Residuals |2(n-2)^2 t^4 sigma_2(g_t) - leading| for S^4 fibers over S^5."""
    spec = ProductSpec(Factor(4, "sphere", 1.0), Factor(5, "sphere", 1.0))
    n, p = spec.n, spec.p
    lead = leading_coefficient(n, p, spec.fiber.scal)
    vals = [2 * (n - 2) ** 2 * sigma2_scaled(ProductSpec(spec.fiber, spec.base, t)) for t in ts]
    return lead, vals, [abs(v - lead) for v in vals]


def check_submersion_signs(seed: int, quick: bool):
    bullets = []
    for base in ("sphere", "flat"):
        for p in (2, 3, 4):
            t = product_sign_table(p, 4, [0.1], base=base, grid=20)
            bullets.append(t.rows[0].signs == t.expected and t.expected == ((1, -1) if p < 4 else (1, 1)))
    lead, _, res = submersion_convergence()
    ratios = [res[i + 1] / res[i] for i in range(len(res) - 1)]
    steps = [(CONVERGENCE_TS[i + 1] / CONVERGENCE_TS[i]) ** 2 for i in range(len(res) - 1)]
    decay_ok = all(0.5 * s <= r <= 2.0 * s for r, s in zip(ratios, steps))
    ok = all(bullets) and decay_ok
    return ok, (f"r=0.1 signs p=2,3,4 (sphere and flat base): {all(bullets)}; "
                f"residuals {', '.join(f'{x:.2e}' for x in res)} vs leading {lead:g}, "
                f"ratios {', '.join(f'{x:.3g}' for x in ratios)} (expect ~1e-2)")


def check_sign_portfolio(seed: int, quick: bool):
    sp = sign_portfolio(product(sphere(3, 0.1), sphere(4, 1.0)), _rng(seed, 8),
                        samples=2000 if quick else 10_000)
    ok = (sp.sectional_min >= -1e-10 and sp.ricci_min > 0 and sp.einstein_min > 0
          and sp.h4 > 0 and sp.sigma2 < 0)
    return ok, (f"sec min {sp.sectional_min:.2e}, Ric min {sp.ricci_min:g}, S min {sp.einstein_min:g}, "
                f"h4 {sp.h4:g}, sigma2 {sp.sigma2:g}")


def check_cone_geometry(seed: int, quick: bool):
    trials = 500 if quick else 10_000
    worst = np.inf
    for n in range(4, 9):
        for k in range(1, n + 1):
            worst = min(worst, float(concavity_trials(n, k, trials, seed).min()))
    found = []
    for n in range(4, 9):
        w = h4_nonconvexity_witness(n, seed=seed, budget=100_000)
        found.append(w is not None and verify_h4_witness(w.R, w.Rbar))
    count = 200 if quick else 1000
    flips = 0
    for n in range(4, 9):
        rng = _rng(seed, 9, n)
        A = random_symmetric(n, rng, count)
        bare = in_gamma_cone(structure_from_schouten(A), 2)
        noisy = in_gamma_cone(structure_from_schouten(A, weyl_noise(n, rng, count, scale=10.0)), 2)
        flips += int(np.sum(bare != noisy))
    ok = worst >= -1e-10 and all(found) and flips == 0
    return ok, (f"concavity min {worst:.2e} over {trials}/(n,k) (tol -1e-10); "
                f"h4 witnesses n=4..8: {sum(found)}/5 verified; Weyl-noise flips {flips}")


def check_sigma2_split_calibration(seed: int, quick: bool):
    """sigma_2 from the orthogonal splitting against the eigenvalue route."""
    count = 150 if quick else 1500
    worst = 0.0
    for n in range(4, 11):
        R = random_curvature(n, _rng(seed, 10, n), count)
        A = schouten(R)
        split = sigma2_split(decompose(R))
        worst = max(worst, float(rel_err(split, sigmas(A)[:, 2], _abs_scale(A, 2)).max()))
    return worst <= 1e-9, f"{count}/n, n=4..10: max rel {worst:.1e} (tol 1e-9)"


def check_determinism(seed: int, quick: bool):
    """Byte-identical reports for repeated runs and for 1 vs 4 worker threads."""
    def render():
        R = product(sphere(3, 0.1), sphere(4, 1.0))
        parts = [dumps_json(invariants_document(R, check=True)[0]),
                 dumps_json({"residuals": concavity_trials(5, 2, 3000, seed).tolist()}),
                 dumps_json(cone_h4_witness(5, seed, 10_000)),
                 dumps_csv(sweep_surgery_sigma2([(9, c) for c in range(3, 10)]))]
        return "".join(parts)

    old = os.environ.get("GAMMA2_THREADS")
    try:
        os.environ["GAMMA2_THREADS"] = "1"
        first, second = render(), render()
        os.environ["GAMMA2_THREADS"] = "4"
        threaded = render()
    finally:
        if old is None:
            os.environ.pop("GAMMA2_THREADS", None)
        else:
            os.environ["GAMMA2_THREADS"] = old
    ok = first == second == threaded
    return ok, f"repeat identical: {first == second}; 1 vs 4 threads identical: {first == threaded}"


CHECKS = {
    "identity-suite": check_identity_suite,
    "h4-triangle": check_h4_triangle,
    "conformally-flat": check_conformally_flat,
    "einstein-bound": check_einstein_bound,
    "surgery-sigma2": check_surgery_sigma2,
    "one-surgery-bound": check_one_surgery_bound,
    "submersion-signs": check_submersion_signs,
    "sign-portfolio": check_sign_portfolio,
    "cone-geometry": check_cone_geometry,
    "sigma2-split-calibration": check_sigma2_split_calibration,
    "determinism": check_determinism,
}


def run_check(name: str, seed: int = 0, quick: bool = False) -> CheckResult:
    start = time.perf_counter()
    try:
        passed, detail = CHECKS[name](seed, quick)
    except Exception as exc:  # a crash is a failure of that check only
        passed, detail = False, f"error: {type(exc).__name__}: {exc}"
    return CheckResult(name, bool(passed), detail, time.perf_counter() - start)


def run_checks(seed: int = 0, quick: bool = False, names=None, report=None) -> list[CheckResult]:
    """Run the named checks (all by default); ``report`` is called with each
    result as soon as it is available."""
    out = []
    for name in names or CHECKS:
        res = run_check(name, seed, quick)
        if report is not None:
            report(res)
        out.append(res)
    return out
