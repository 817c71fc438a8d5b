"""Trace line format and validation."""

import io

import pytest

from adhoc_energy_routing.packets import DataPacket, FlowKey, Hello
from adhoc_energy_routing.trace import (
    TRACE_LINE_RE,
    TraceRecord,
    Tracer,
    validate_trace,
)
from testing_helpers import parse_trace


FLOW = FlowKey(1, 3, 0)
SHORT_TIME = '0.1\tSEND\t1\tRREQ\t1\t-\t24\t-'
UNKNOWN_KIND = '0.100000000\tSEND\t2\tPING\t5\t-\t20\t-'


@pytest.mark.parametrize(
    ('record', 'expected'),
    (
        pytest.param(
            TraceRecord(0.5, 'SEND', 1, 'DATA', 7, FLOW, 532),
            '0.500000000\tSEND\t1\tDATA\t7\t1:3:0\t532\t-',
            id='data-send',
        ),
        pytest.param(
            TraceRecord(12.25, 'DIE', 4, aux='0.000000'),
            '12.250000000\tDIE\t4\t-\t-\t-\t-\t0.000000',
            id='death',
        ),
        pytest.param(
            TraceRecord(3.0, 'SESS_END', 1, flow=FLOW, aux='STOPPED'),
            '3.000000000\tSESS_END\t1\t-\t-\t1:3:0\t-\tSTOPPED',
            id='session-end',
        ),
    ),
)
def test_record_format(record, expected):
    assert record.format() == expected
    assert TRACE_LINE_RE.match(record.format())


def test_tracer_writes_packets():
    stream = io.StringIO()
    tracer = Tracer(stream)
    assert tracer.enabled
    tracer.packet('SEND', 0.0, 1, DataPacket(1, FLOW, 0.0))
    tracer.packet('RECV', 0.004256, 2, DataPacket(1, FLOW, 0.0), '1')
    tracer.packet('SEND', 0.01, 2, Hello(uid=2, node=2))
    tracer.die(1.0, 2, 0.0)

    records = parse_trace(stream.getvalue())
    assert [r['event'] for r in records] == ['SEND', 'RECV', 'SEND', 'DIE']
    assert records[1]['aux'] == '1'
    assert records[2]['kind'] == 'HELLO'
    assert records[2]['flow'] == '-'
    assert records[2]['size'] == '20'
    assert validate_trace(stream.getvalue().splitlines(keepends=True)) == []


def test_disabled_tracer():
    tracer = Tracer()
    assert not tracer.enabled
    tracer.packet('SEND', 0.0, 1, DataPacket(1, FLOW, 0.0))
    tracer.die(1.0, 2, 0.0)


@pytest.mark.parametrize(
    ('lines', 'expected'),
    (
        pytest.param(
            ['0.100000000\tSEND\t1\tRREQ\t1\t-\t24\t-'], [], id='valid',
        ),
        pytest.param(
            [SHORT_TIME],
            [(1, f'Malformed trace line: {SHORT_TIME!r}')],
            id='short-time',
        ),
        pytest.param(
            [
                '0.200000000\tSEND\t1\tRREQ\t1\t-\t24\t-',
                '0.100000000\tRECV\t2\tRREQ\t1\t-\t24\t-',
            ],
            [(2, 'Time goes backwards: 0.100000000 after 0.200000000')],
            id='backwards',
        ),
        pytest.param(
            ['0.100000000\tRECV\t2\tDATA\t5\t1:3:0\t532\t1'],
            [(1, 'Packet 5 first seen with RECV, expected SEND')],
            id='no-send',
        ),
        pytest.param(
            [UNKNOWN_KIND],
            [(1, f'Malformed trace line: {UNKNOWN_KIND!r}')],
            id='unknown-kind',
        ),
    ),
)
def test_validate_trace(lines, expected):
    assert validate_trace(lines) == expected
