"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The full ``gamma2 verify`` run happens once, in a subprocess, so the
end-to-end criterion sees exactly what a user would.  Run with ``-s`` to
see the lines interleaved, or read the summary printed at the end.
"""
import subprocess
import sys
import time

import pytest

from gamma2.cone_geometry import one_surgery_max_k, surgery_product_sigma2
from gamma2.model_spaces import product, product_sign_table, sign_portfolio, sphere

TIME_LIMIT = 300.0
LINES = []


@pytest.fixture(scope="module")
def verify_run():
    start = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "gamma2", "verify", "--seed", "0"],
                          capture_output=True, text=True)
    elapsed = time.perf_counter() - start
    checks = {}
    for line in proc.stdout.splitlines():
        status, _, rest = line.partition("  ")
        if status in ("PASS", "FAIL"):
            name, _, detail = rest.partition("  ")
            checks[name.strip()] = (status == "PASS", detail.strip())
    return proc, elapsed, checks


@pytest.fixture
def report(capsys):
    def emit(number, title, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'}  criterion {number:>2}  {title}  {detail}"
        LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        assert passed, line
    return emit


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    tr = request.config.pluginmanager.get_plugin("terminalreporter")
    if tr is not None and LINES:
        tr.write_line("")
        for line in LINES:
            tr.write_line(line)


def check(checks, name):
    return checks.get(name, (False, "check did not report"))


def test_identity_suite(verify_run, report):
    ok, detail = check(verify_run[2], "identity-suite")
    report(1, "identity suite", ok, detail)


def test_h4_triangle(verify_run, report):
    ok, detail = check(verify_run[2], "h4-triangle")
    report(2, "h4 triangle", ok, detail)


def test_conformally_flat(verify_run, report):
    ok, detail = check(verify_run[2], "conformally-flat")
    report(3, "conformally flat", ok, detail)


def test_einstein_bound(verify_run, report):
    ok, detail = check(verify_run[2], "einstein-bound")
    report(4, "Einstein-tensor bound and CNS", ok, detail)


def test_surgery_sigma2(verify_run, report):
    ok, detail = check(verify_run[2], "surgery-sigma2")
    spot = surgery_product_sigma2(6, 5)
    ok = ok and abs(spot - 0.225) <= 1e-9 * 0.225
    report(5, "surgery sigma_2", ok, f"{detail}; (6,5) -> {spot!r}")


def test_one_surgery_bound(verify_run, report):
    ok, detail = check(verify_run[2], "one-surgery-bound")
    table = tuple(one_surgery_max_k(n) for n in (6, 8, 11))
    report(6, "one-surgery bound", ok and table == (2, 3, 4), f"{detail}; table {table}")


def test_submersion_signs(verify_run, report):
    ok, detail = check(verify_run[2], "submersion-signs")
    signs = {p: product_sign_table(p, 4, [0.1]).rows[0].signs for p in (2, 3, 4)}
    ok = ok and signs == {2: (1, -1), 3: (1, -1), 4: (1, 1)}
    report(7, "submersion signs", ok, detail)


def test_sign_portfolio(verify_run, report):
    ok, detail = check(verify_run[2], "sign-portfolio")
    sp = sign_portfolio(product(sphere(3, 0.1), sphere(4, 1.0)))
    ok = ok and (sp.sectional_min >= -1e-10 and sp.ricci_min > 0 and sp.einstein_min > 0
                 and sp.h4 > 0 and sp.sigma2 < 0)
    report(8, "sign portfolio", ok, detail)


def test_cone_geometry(verify_run, report):
    ok, detail = check(verify_run[2], "cone-geometry")
    report(9, "cone geometry", ok, detail)


def test_end_to_end(verify_run, report):
    proc, elapsed, checks = verify_run
    det_ok, det_detail = check(checks, "determinism")
    ok = proc.returncode == 0 and elapsed < TIME_LIMIT and det_ok
    tail = proc.stdout.strip().splitlines()[-1:] or [proc.stderr.strip()]
    report(10, "end to end", ok,
           f"exit {proc.returncode} in {elapsed:.1f}s (limit {TIME_LIMIT:.0f}s); "
           f"{det_detail}; {tail[0]}")
