"""Persistent cache of per-seed run reports."""

from __future__ import annotations

import hashlib
import os
import stat
import time
from importlib.util import find_spec


CACHE_APP_NAME = 'adhoc-energy-routing'


class ReportCache:
    """One file per report; the first line holds its creation time."""

    def __init__(  # noqa: D107
            self,
            cache_dir: str,
            expiration_seconds: int = 0,
    ) -> None:
        self.cache_dir = cache_dir
        self.expiration_seconds = expiration_seconds

    @staticmethod
    def run_key(
            config_text: str,
            protocol: str,
            seed: int,
            rate_kbps: float | None = None,
    ) -> str:
        """Digest identifying the report of one run."""
        digest = hashlib.blake2b(digest_size=16)
        for part in (config_text, protocol, str(seed), repr(rate_kbps)):
            digest.update(part.encode('utf-8'))
            digest.update(b'\0')
        return digest.hexdigest()

    def path_of(self, key: str) -> str:  # noqa: D102
        return os.path.join(self.cache_dir, key)

    def get_creation_time_from_fpath(self, fpath: str) -> int:
        """Creation time of an entry given its path."""
        with open(fpath, 'rb') as f:
            return int(f.readline())

    def read_file(self, fpath: str) -> str:  # noqa: D102
        with open(fpath, encoding='utf-8') as f:
            return f.read().split('\n', 1)[1]

    def get_(self, key: str) -> str | None:
        """Cached report for ``key``, unless missing or expired."""
        fpath = self.path_of(key)
        try:
            is_file = stat.S_ISREG(os.stat(fpath).st_mode)
        except OSError:
            return None
        if is_file:  # pragma: no branch
            creation_time = self.get_creation_time_from_fpath(fpath)
            if time.time() < creation_time + self.expiration_seconds:
                return self.read_file(fpath)
            os.remove(fpath)
        return None

    def set_(self, key: str, report: str) -> None:  # noqa: D102
        with open(self.path_of(key), 'w', encoding='utf-8') as f:
            f.write(f'{int(time.time())}\n')
            f.write(report)

    def clean(self) -> int:
        """Remove expired entries, returning how many were removed."""
        removed = 0
        for fname in os.listdir(self.cache_dir):
            if fname == '.gitignore':
                continue
            fpath = os.path.join(self.cache_dir, fname)
            creation_time = self.get_creation_time_from_fpath(fpath)
            if time.time() > creation_time + self.expiration_seconds:
                os.remove(fpath)
                removed += 1
        return removed


def get_cache_directory(cache_dir: str) -> str | None:
    """Explicit cache directory, else the user cache directory if known."""
    if cache_dir:
        return cache_dir

    if not is_platformdirs_installed():
        return None

    try:
        from platformdirs import user_cache_dir
    except ImportError:  # pragma: no cover
        return None
    else:
        return user_cache_dir(CACHE_APP_NAME)


def initialize_cache(
        expiration_seconds: int,
        cache_dir: str = '',
) -> ReportCache | None:
    """Create the cache directory and drop expired reports."""
    cache_directory = get_cache_directory(cache_dir)

    if cache_directory is None:
        return None

    os.makedirs(cache_directory, exist_ok=True)

    # the directory may be given relative to a working tree
    gitignore = os.path.join(cache_directory, '.gitignore')
    if not os.path.exists(gitignore):
        with open(gitignore, 'wb') as f:
            f.write(b'*\n')

    cache = ReportCache(cache_directory, expiration_seconds)
    cache.clean()
    return cache


def is_platformdirs_installed() -> bool:
    """Check if `platformdirs` package is installed without importing it."""
    return find_spec('platformdirs') is not None
