import os
import tempfile
import time

import pytest

# keep CLI and cache tests away from the user's cache directory
os.environ.setdefault("SKEWPROD_CACHE_DIR", tempfile.mkdtemp(prefix="skewprod-test-cache-"))

ORDER32 = ("dihedral:32", "quaternion:32", "semidihedral:32")

ACCEPTANCE: dict[str, list[tuple[bool, str]]] = {}


def record(criterion: str, ok: bool, detail: str) -> None:
    """Add one result to a criterion; several results fold into one line."""
    ACCEPTANCE.setdefault(criterion, []).append((bool(ok), detail))
    print(acceptance_line(criterion))


def acceptance_line(criterion: str) -> str:
    parts = ACCEPTANCE[criterion]
    ok = all(p for p, _ in parts)
    return f"{criterion} {'PASS' if ok else 'FAIL'}: " + "; ".join(d for _, d in parts)


@pytest.fixture
def acceptance_record():
    return record


@pytest.fixture(scope="session")
def corpus32():
    """Order-32 enumerations, run once per session and written to the test cache
    so the CLI tests hit it. Maps descriptor -> (morphisms, seconds, stats)."""
    from skewprod import enumerate_skew_morphisms, parse_descriptor
    from skewprod.cache import ResultCache

    cache = ResultCache()
    out = {}
    for d in ORDER32:
        G = parse_descriptor(d)
        t = time.perf_counter()
        res = enumerate_skew_morphisms(G)
        out[d] = (res.skew_morphisms, time.perf_counter() - t, res.search_stats)
        cache.store_morphisms(G, res.skew_morphisms, {"order_cap": None})
    return out


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[1:])):
        terminalreporter.write_line(acceptance_line(key))


def pytest_collection_modifyitems(items):
    # anything touching the order-32 corpus is slow; `pytest -m "not slow"` skips it
    for item in items:
        if "corpus32" in getattr(item, "fixturenames", ()):
            item.add_marker(pytest.mark.slow)
