"""Package logger."""

from __future__ import annotations

import logging


logger = logging.getLogger('adhoc_energy_routing')
