import numpy as np
import pytest

from melrp import evaluation
from melrp.evaluation import AuditLog
from melrp.features import FrameStore
from melrp.synthetic import make_synthetic_corpus

# Every audit entry recorded anywhere in the session, so the leakage criterion
# can inspect all experiments the suite ran, not only its own.
AUDIT_ENTRIES = []
_MIRROR = {"on": True}

# "criterion N: PASS/FAIL ..." lines, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_configure(config):
    original = AuditLog.record

    def record(self, *args, **kwargs):
        try:
            entry = original(self, *args, **kwargs)
        except evaluation.LeakageError:
            if _MIRROR["on"]:
                AUDIT_ENTRIES.append(self.entries[-1])
            raise
        if _MIRROR["on"]:
            AUDIT_ENTRIES.append(entry)
        return entry

    AuditLog.record = record


def pytest_collection_modifyitems(session, config, items):
    # the leakage audit must see every other experiment first
    last = [i for i in items if i.name.startswith("test_criterion_8")]
    items[:] = [i for i in items if i not in last] + last


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(autouse=True)
def _audit_mirror(request):
    _MIRROR["on"] = request.node.get_closest_marker("deliberate_leak") is None
    yield
    _MIRROR["on"] = True


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def audit():
    return AuditLog()


@pytest.fixture(scope="session")
def synthetic_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("synthetic")
    manifest = make_synthetic_corpus(root, n_tracks=40, seed=0)
    return manifest, root


@pytest.fixture(scope="session")
def synthetic_store(synthetic_corpus):
    manifest, root = synthetic_corpus
    return FrameStore(manifest, root)
