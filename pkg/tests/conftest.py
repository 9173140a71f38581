import contextlib
import json
from importlib.resources import files

import pytest

from bcn_bisim.model import model_from_json
from bcn_bisim.network import assemble, parse, target_members

DATA = files("bcn_bisim.data")

# criterion number -> list of (item, passed, note)
_ACCEPTANCE = {}


def data_path(name):
    return DATA.joinpath(name)


def load_example(name):
    text = DATA.joinpath(name).read_text()
    if name.endswith(".json"):
        return model_from_json(json.loads(text))
    src = parse(text)
    return assemble(src), target_members(src)


@pytest.fixture
def record():
    """Context manager noting one acceptance item as passed or failed."""

    @contextlib.contextmanager
    def _record(criterion, item=""):
        try:
            yield
        except BaseException as exc:
            _ACCEPTANCE.setdefault(criterion, []).append((item, False, str(exc).splitlines()[0] if str(exc) else ""))
            raise
        _ACCEPTANCE.setdefault(criterion, []).append((item, True, ""))

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(_ACCEPTANCE):
        items = _ACCEPTANCE[criterion]
        ok = all(p for _, p, _ in items)
        failed = [f"{name}: {note}" if note else name for name, p, note in items if not p]
        line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}"
        if failed:
            line += "  [" + "; ".join(failed) + "]"
        terminalreporter.write_line(line)
