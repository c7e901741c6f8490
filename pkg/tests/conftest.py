import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"
MOCK_BACKEND_ID = "mock:scripted"


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if results:
        terminalreporter.section("acceptance")
        for line in results:
            terminalreporter.write_line(line)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def llm_store():
    from eat.store import FixtureStore

    return FixtureStore(FIXTURES / "llm_store")


@pytest.fixture
def replay_backend(llm_store):
    from eat.llm import ReplayBackend

    return ReplayBackend(llm_store, MOCK_BACKEND_ID)


@pytest.fixture
def zh_split():
    from eat.corpus_io import parse_bio_file

    return parse_bio_file((FIXTURES / "zh_e2e.bio").read_bytes(), "zh")


@pytest.fixture
def ko_split():
    from eat.corpus_io import parse_bio_file

    return parse_bio_file((FIXTURES / "ko_e2e.bio").read_bytes(), "ko")
