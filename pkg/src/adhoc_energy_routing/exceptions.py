"""Errors raised by the simulator.

All of them derive from the ``mkdocs.exceptions`` hierarchy, which in turn
builds on ``click.ClickException``, so the command line reports them with
their message and exits with their ``exit_code``.
"""

from __future__ import annotations

from mkdocs.exceptions import ConfigurationError, MkDocsException


class ScenarioError(ConfigurationError):
    """A scenario configuration is invalid.

    Carries every problem found as ``(line, message)`` tuples, ``line`` being
    ``None`` when the problem is not attached to a single line.
    """

    exit_code = 1

    def __init__(  # noqa: D107
            self,
            problems: list[tuple[int | None, str]],
            source: str = '<config>',
    ) -> None:
        self.problems = problems
        self.source = source
        lines = [
            f'{source}:{lineno}: {message}' if lineno is not None
            else f'{source}: {message}'
            for lineno, message in problems
        ]
        super().__init__(
            f'{len(problems)} error(s) in scenario configuration:\n'
            + '\n'.join(lines),
        )


class ContractViolation(MkDocsException):
    """A runtime precondition of the simulator has been broken."""

    exit_code = 2


class BatchError(ContractViolation):
    """At least one seed of a batch failed."""

    def __init__(self, statuses: dict[int, str]) -> None:  # noqa: D107
        self.statuses = statuses
        failed = {seed: st for seed, st in statuses.items() if st != 'ok'}
        super().__init__(
            f'{len(failed)} of {len(statuses)} seed(s) failed: '
            + ', '.join(f'seed {seed}: {st}' for seed, st in failed.items()),
        )
