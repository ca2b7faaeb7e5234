import pytest

from hornlab.cfg import normalize_self_rules
from hornlab.parse import parse_grammar, parse_theory

PARTIAL_ORDER = "signature { lt/2 } clause lt(x,y), lt(y,z) -> lt(x,z); clause lt(x,x) -> false;"
ANBN = "start S; terminals a, b; S -> a S b; S -> a b;"
APLUS = "start S; terminals a; S -> a S; S -> a;"


@pytest.fixture
def po():
    return parse_theory(PARTIAL_ORDER)


@pytest.fixture
def anbn():
    return normalize_self_rules(parse_grammar(ANBN))


@pytest.fixture
def aplus():
    return normalize_self_rules(parse_grammar(APLUS))


# acceptance summary: one line per criterion number, failing if any part fails
_ACCEPTANCE: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("acceptance")
    if m is None or len(m.args) < 3:
        return
    number, title, limit = m.args[:3]
    entry = _ACCEPTANCE.setdefault(number, {"title": title, "limit": limit, "ok": True, "seconds": 0.0})
    if rep.failed or rep.skipped:
        entry["ok"] = False
    if rep.when == "call":
        entry["seconds"] += rep.duration


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[number]
        verdict = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(
            f"{verdict} criterion {number}: {e['title']} ({e['seconds']:.1f} s, expected < {e['limit']} s)"
        )
