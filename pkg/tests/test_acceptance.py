"""One test per acceptance criterion; run with ``-s`` to see the table."""
import os

import pytest

from causalsum import acceptance

JOBS = max(1, int(os.environ.get("CAUSALSUM_JOBS", "1")))


@pytest.mark.parametrize("name", list(acceptance.SCENARIOS))
def test_criterion(name):
    kw = {"jobs": JOBS} if name == "fuzz" else {}
    o = acceptance.run(name, 0, **kw)
    print(o.line())
    assert o.ok, o.detail
    assert o.seconds <= o.limit, f"{name} took {o.seconds:.1f}s, limit {o.limit:g}s"
