import os
import time

from adhoc_energy_routing.cache import (
    ReportCache,
    get_cache_directory,
    initialize_cache,
    is_platformdirs_installed,
)


def test_cache_round_trip(tmp_path):
    cache = ReportCache(str(tmp_path), 600)
    key = cache.run_key('[scenario]\n', 'aodv', 3)
    assert cache.get_(key) is None
    cache.set_(key, 'pdr=1.000000000\n')
    assert cache.get_(key) == 'pdr=1.000000000\n'


def test_cache_expiration_on_get(tmp_path):
    cache = ReportCache(str(tmp_path), 600)
    (tmp_path / 'foo').write_text(f'{int(time.time()) - 600 * 10}\nbar')
    assert cache.get_('foo') is None
    assert not (tmp_path / 'foo').exists()


def test_run_key_depends_on_every_input():
    keys = {
        ReportCache.run_key('text', 'aodv', 1),
        ReportCache.run_key('text', 'aodv', 2),
        ReportCache.run_key('text', 'mdr', 1),
        ReportCache.run_key('other', 'aodv', 1),
        ReportCache.run_key('text', 'aodv', 1, 15.0),
    }
    assert len(keys) == 5
    assert ReportCache.run_key('text', 'aodv', 1) == ReportCache.run_key(
        'text', 'aodv', 1,
    )


def test_cache_clean(tmp_path):
    now_ts = int(time.time())

    file1 = tmp_path / 'file1'
    file1.write_text(f'{now_ts - 10}\n')
    file2 = tmp_path / 'file2'
    file2.write_text(f'{now_ts - 10}\n')
    (tmp_path / '.gitignore').write_text('*\n')

    assert len(os.listdir(tmp_path)) == 3

    cache = ReportCache(str(tmp_path), 0)
    assert cache.clean() == 2

    assert os.listdir(tmp_path) == ['.gitignore']


def test_get_cache_directory_empty():
    if not is_platformdirs_installed():
        assert get_cache_directory('') is None
    else:
        assert isinstance(get_cache_directory(''), str)


def test_get_cache_directory_custom():
    assert get_cache_directory('foo') == 'foo'


def test_initialize_cache_not_cache_dir(monkeypatch, tmp_path):
    monkeypatch.setenv('XDG_CACHE_HOME', str(tmp_path))
    if not is_platformdirs_installed():
        assert initialize_cache(300, '') is None
    else:
        assert isinstance(initialize_cache(300, ''), ReportCache)


def test_initialize_cache_cache_dir(tmp_path):
    cache_dir = tmp_path / 'reports'
    cache = initialize_cache(300, str(cache_dir))
    assert isinstance(cache, ReportCache)
    assert (cache_dir / '.gitignore').read_text() == '*\n'
