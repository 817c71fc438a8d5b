import os
import sys

import pytest


TESTS_DIR = os.path.abspath(os.path.dirname(__file__))
SRC_DIR = os.path.abspath(os.path.join(TESTS_DIR, '..', 'src'))
for d in (SRC_DIR, TESTS_DIR):
    if d not in sys.path:
        sys.path.insert(0, d)

from adhoc_energy_routing.engine import Scheduler  # noqa: E402
from adhoc_energy_routing.simulation import Simulation  # noqa: E402
from testing_helpers import inline_config  # noqa: E402


@pytest.fixture
def scheduler():
    """Empty scheduler at time zero."""
    return Scheduler(keep_log=True)


@pytest.fixture
def network(request):
    """Simulation built but not started, from indirect config keywords.

    The default network is a three-node line ``1 - 2 - 3`` with 200 m hops.
    """
    def _network(positions=None, seed=1, **kwargs):
        if positions is None:
            positions = {1: (0, 0), 2: (200, 0), 3: (400, 0)}
        return Simulation(inline_config(positions, **kwargs), seed)

    params = getattr(request, 'param', None)
    if params is not None:
        return _network(**params)
    return _network
