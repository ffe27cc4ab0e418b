"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The statistical criteria share seeded runs through one ``Runs`` cache, the
same way ``hoppetree verify`` executes them.
"""

import time

import pytest

from hoppetree import verify

SEED = 11


@pytest.fixture(scope="module")
def runs():
    return verify.Runs(SEED, workers=1)


def report(capsys, number, checks, started):
    ok = all(c.passed for c in checks)
    with capsys.disabled():
        print()
        for c in checks:
            print("    " + c.line())
        print(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  ({time.perf_counter() - started:.1f}s)")
    return ok


def test_c01_depth_law_matches_enumeration(capsys):
    t = time.perf_counter()
    assert report(capsys, 1, verify.check_depth_law_equivalence(), t)


def test_c02_exact_moments_match_enumeration(capsys):
    t = time.perf_counter()
    assert report(capsys, 2, verify.check_moment_identities(), t)


def test_c03_martingale_residuals(capsys):
    t = time.perf_counter()
    assert report(capsys, 3, verify.check_martingales(), t)


def test_c04_leaf_variance_asymptotics(capsys):
    t = time.perf_counter()
    assert report(capsys, 4, verify.check_leaf_variance_asymptotics(), t)


def test_c05_clt_for_depth_and_leaves(capsys, runs):
    t = time.perf_counter()
    assert report(capsys, 5, verify.check_clt(runs), t)


def test_c06_poisson_distance_decay(capsys):
    t = time.perf_counter()
    assert report(capsys, 6, verify.check_poisson_decay(), t)


def test_c07_leaf_tail_bound(capsys, runs):
    t = time.perf_counter()
    assert report(capsys, 7, verify.check_azuma(runs), t)


def test_c08_subtree_beta_limit(capsys, runs):
    t = time.perf_counter()
    assert report(capsys, 8, verify.check_beta_limit(runs) + verify.check_subtree_uniform(), t)


def test_c09_small_subtree_bound(capsys, runs):
    t = time.perf_counter()
    assert report(capsys, 9, verify.check_small_subtree(runs), t)


def test_c10_height(capsys, runs):
    t = time.perf_counter()
    assert report(capsys, 10, verify.check_height(runs), t)


def test_c11_limit_law(capsys, runs):
    t = time.perf_counter()
    assert report(capsys, 11, verify.check_limit_law(runs) + verify.check_limit_mean_identity(), t)


def test_c12_special_functions(capsys):
    t = time.perf_counter()
    assert report(capsys, 12, verify.check_specfun(), t)


def test_c13_determinism(capsys, runs):
    t = time.perf_counter()
    assert report(capsys, 13, verify.check_determinism(runs), t)
