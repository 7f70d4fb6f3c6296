"""Acceptance criteria A1-A10, one summary line per criterion.

Run with pytest (lines appear in the "acceptance criteria" section) or as a
script: ``python3 tests/test_acceptance.py``. Expected failures are marked
strict, so they turn into errors the moment they start passing.
"""
import collections
import hashlib
import sys
import time
import warnings

import pytest

from skewprod import enumerate_skew_morphisms, parse_descriptor
from skewprod.classifier import family_skew_morphisms
from skewprod.group import build_cyclic
from skewprod.skew import brute_force_skew_morphisms, extract_skew, skew_product
from skewprod.structure import aut_order
from skewprod.theorems import (FAIL, PASS, verify_core_trichotomy, verify_cyclic_skew_orders,
                               verify_fitting_structure, verify_order_bound, verify_two_group)

from conftest import ORDER32, record

SMALL_ORACLE = ["cyclic:2", "cyclic:4", "cyclic:8", "dihedral:4", "dihedral:8", "quaternion:8"]
SMALL_CORPUS = SMALL_ORACLE + ["cyclic:16", "dihedral:16", "quaternion:16", "semidihedral:16"]
GTYPE = {"dihedral:32": "D", "quaternion:32": "Q", "semidihedral:32": "SD"}

# [DERIVED] sha256 of the certificate streams of an earlier full run (numba backend)
STREAM_SHA256 = {
    "dihedral:32": "237c081b02b5f52877c56b030f746da0c782c3454811eb4d66da2296fe25f28f",
    "quaternion:32": "4dde6258e6038ed5983a767059f445bd362d227e18fb9ea467479bfc7cc24a63",
    "semidihedral:32": "aac9489f9d77886b243d1f4c66c2410ca0a1737405c8b9118feb607d2bf56c4b",
}
# [DERIVED] |Aut(G)| for the three maximal class groups of order 32
AUT_ORDERS = {"dihedral:32": 128, "quaternion:32": 128, "semidihedral:32": 64}

SD32_KNOWN = pytest.mark.xfail(strict=True, reason="semidihedral:32 has skew products outside the stated "
                                                   "classification; analysed in the decisions ledger")


def _stream_sha(morphisms) -> str:
    return hashlib.sha256("\n".join(s.to_json() for s in morphisms).encode()).hexdigest()


@pytest.fixture(scope="module")
def small_corpus():
    return {d: enumerate_skew_morphisms(parse_descriptor(d)).skew_morphisms for d in SMALL_CORPUS}


@pytest.fixture(scope="module")
def cyclic_corpus():
    return {n: enumerate_skew_morphisms(build_cyclic(2 ** n)).skew_morphisms for n in range(1, 6)}


@pytest.fixture(scope="module")
def sweep32(corpus32):
    """One pass per order-32 group: per-check verdict counts and round-trip failures."""
    out = {}
    for d, (ms, _, _) in corpus32.items():
        verdicts = collections.defaultdict(collections.Counter)
        bad_round_trip = 0
        exceptions = collections.Counter()
        for s in ms:
            sp = skew_product(s)
            for name, check in (("two-group", verify_two_group), ("core-trichotomy", verify_core_trichotomy),
                                ("order-bound", verify_order_bound)):
                r = check(sp)
                verdicts[name][r.verdict] += 1
                if name == "core-trichotomy" and r.verdict == FAIL:
                    exceptions[len(r.witness["core"])] += 1
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                if extract_skew(sp.x, sp.g_part, sp.y, group=s.group) != s:
                    bad_round_trip += 1
        out[d] = {"verdicts": verdicts, "round_trip_failures": bad_round_trip, "core_exceptions": exceptions}
    return out


def test_a1_oracle_equivalence():
    t = time.perf_counter()
    mismatched = []
    total = 0
    for d in SMALL_ORACLE:
        G = parse_descriptor(d)
        got = enumerate_skew_morphisms(G).skew_morphisms
        ref = brute_force_skew_morphisms(G)
        total += len(ref)
        if got != ref:
            mismatched.append(d)
    dt = time.perf_counter() - t
    ok = not mismatched and dt < 60
    record("A1", ok, f"{len(SMALL_ORACLE)} groups, {total} morphisms equal to the factorial scan "
                     f"in {dt:.1f}s" + (f", mismatched {mismatched}" if mismatched else ""))
    assert ok


@pytest.mark.parametrize("desc", ORDER32)
def test_a2_two_group(desc, corpus32, sweep32):
    v = sweep32[desc]["verdicts"]["two-group"]
    secs = corpus32[desc][1]
    ok = set(v) == {PASS} and secs <= 1800
    record("A2", ok, f"{desc} {v[PASS]}/{sum(v.values())} pass, enumeration {secs:.0f}s")
    assert ok


@pytest.mark.parametrize("desc", [d if d != "semidihedral:32" else pytest.param(d, marks=SD32_KNOWN)
                                  for d in ORDER32])
def test_a3_core_trichotomy(desc, sweep32):
    v = sweep32[desc]["verdicts"]["core-trichotomy"]
    exc = sweep32[desc]["core_exceptions"]
    ok = set(v) == {PASS}
    detail = f"{desc} {v[PASS]}/{sum(v.values())} pass"
    if not ok:
        detail += f", {v[FAIL]} with core of order {sorted(exc)} outside the three shapes"
    record("A3", ok, detail)
    assert ok


def test_a4_fitting_mixed_orders():
    rows = []
    ok = True
    for d, order in (("dihedral:4", 12), ("dihedral:8", 24)):
        ms = [s for s in enumerate_skew_morphisms(parse_descriptor(d)).skew_morphisms if s.sigma_order == 3]
        for s in ms:
            sp = skew_product(s)
            r = verify_fitting_structure(sp)
            ok &= r.verdict == PASS and sp.x.order == order and r.detail["G1"] > 1
        rows.append(f"{d} {len(ms)} order-3 morphisms")
    ok &= len(rows) == 2
    record("A4", ok, ", ".join(rows) + ", F(X) = O_2(X) = G1 C1 with G1 C1 C2 normal")
    assert ok


@pytest.mark.parametrize("desc", [d if d != "semidihedral:32" else pytest.param(d, marks=SD32_KNOWN)
                                  for d in ORDER32])
def test_a5_classification_completeness(desc, corpus32):
    fam, stats = family_skew_morphisms(GTYPE[desc], 5)
    enum = corpus32[desc][0]
    a, b = {s.key() for s in fam}, {s.key() for s in enum}
    ok = a == b
    detail = f"{desc} families {len(a)} vs enumeration {len(b)}"
    if not ok:
        detail += f" (missing {len(b - a)}, extra {len(a - b)})"
    record("A5", ok, detail)
    assert ok


def test_a6_round_trip(small_corpus, sweep32):
    n = bad = 0
    for ms in small_corpus.values():
        for s in ms:
            sp = skew_product(s)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                bad += extract_skew(sp.x, sp.g_part, sp.y, group=s.group) != s
            n += 1
    for d in ORDER32:
        bad += sweep32[d]["round_trip_failures"]
        n += sum(sweep32[d]["verdicts"]["two-group"].values())
    ok = bad == 0
    record("A6", ok, f"{n - bad}/{n} morphisms round-trip through the skew product")
    assert ok


def test_a7_cyclic_orders(cyclic_corpus):
    parts = []
    ok = True
    for n in range(1, 6):
        r = verify_cyclic_skew_orders(n, cyclic_corpus[n])
        ok &= r.verdict == PASS
        parts.append(f"Z{2 ** n} {r.detail['orders']}")
    record("A7", ok, ", ".join(parts))
    assert ok


def test_a8_order_bound(small_corpus, sweep32):
    n = bad = 0
    for ms in small_corpus.values():
        for s in ms:
            r = verify_order_bound(skew_product(s))
            n += 1
            bad += r.verdict != PASS
    for d in ORDER32:
        v = sweep32[d]["verdicts"]["order-bound"]
        n += sum(v.values())
        bad += sum(v.values()) - v[PASS]
    ok = bad == 0
    record("A8", ok, f"|X| <= |G|(|G|-1) on {n - bad}/{n} core-free instances")
    assert ok


@pytest.mark.parametrize("desc", ORDER32)
def test_a9_aut_two_group(desc):
    t = time.perf_counter()
    k = aut_order(parse_descriptor(desc))
    dt = time.perf_counter() - t
    ok = k & (k - 1) == 0 and k == AUT_ORDERS[desc] and dt <= 300
    record("A9", ok, f"|Aut({desc})| = {k} in {dt:.2f}s")
    assert ok


def test_a10_determinism(small_corpus, corpus32):
    again = {d: enumerate_skew_morphisms(parse_descriptor(d)).skew_morphisms for d in SMALL_CORPUS}
    same_small = all(_stream_sha(small_corpus[d]) == _stream_sha(again[d]) for d in SMALL_CORPUS)
    same_32 = {d: _stream_sha(corpus32[d][0]) == STREAM_SHA256[d] for d in ORDER32}
    ok = same_small and all(same_32.values())
    record("A10", ok, f"{len(SMALL_CORPUS)} small groups identical across two runs; order-32 streams "
                      f"match the recorded sha256 for {sum(same_32.values())}/3 groups")
    assert ok


def test_cyclic_counts(cyclic_corpus):
    # [DERIVED] frozen counts; orders up to 16 match the factorial scan or the
    # independent prototype search, 32 the prototype search
    assert [len(cyclic_corpus[n]) for n in range(1, 6)] == [1, 2, 6, 20, 76]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
