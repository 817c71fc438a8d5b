import os
import subprocess
import sys

from adhoc_energy_routing.scenario import parse_config
from adhoc_energy_routing.simulation import run_scenario
from testing_helpers import SMALL_SCENARIO, rootdir


ENV = {**os.environ, 'PYTHONPATH': os.path.join(rootdir, 'src')}


def test_module_entry_point(tmp_path):
    path = tmp_path / 'small.scn'
    path.write_text(SMALL_SCENARIO)

    proc = subprocess.Popen(
        [sys.executable, '-m', 'adhoc_energy_routing', '-q', 'run',
         '-c', str(path), '-s', '2'],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        env=ENV,
    )
    stdout, stderr = proc.communicate()

    assert proc.returncode == 0, stderr.decode('utf-8')
    expected = run_scenario(parse_config(SMALL_SCENARIO, str(path)), 2)
    assert stdout.decode('utf-8') == expected.report


def test_module_entry_point_scenario_error(tmp_path):
    path = tmp_path / 'broken.scn'
    path.write_text('[scenario]\nname = x\n')

    proc = subprocess.Popen(
        [sys.executable, '-m', 'adhoc_energy_routing', 'run', '-c', str(path)],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        env=ENV,
    )
    _, stderr = proc.communicate()

    assert proc.returncode == 1
    assert 'missing section [topology]' in stderr.decode('utf-8')
