"""Entry point for ``python -m adhoc_energy_routing``."""

from __future__ import annotations

from adhoc_energy_routing.cli import main


if __name__ == '__main__':
    main()
