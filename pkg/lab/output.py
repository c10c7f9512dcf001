'''
Deterministic result files.

Series are CSV with a fixed column order and floats written with 17
significant digits, which round-trips binary64 exactly. Summaries are JSON
with sorted keys. Both carry the manifest hash of their run.
'''
import json
import logging
import math
import os

import numpy as np
from django.conf import settings

logger = logging.getLogger(__name__)

MANIFEST_PREFIX = '# manifest: '


def resolve_path(path):
    '''
    Relative paths live under settings.BUBBLELAB_OUTPUT_DIR; parent
    directories are created.
    '''
    if not os.path.isabs(path):
        path = os.path.join(settings.BUBBLELAB_OUTPUT_DIR, path)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    return path


def format_value(value):
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return '%i' % value
    if isinstance(value, (float, np.floating)):
        return '%.17g' % value
    return str(value)


def write_series(path, columns, rows, manifest_hash=None):
    '''
    :param columns: column names, written as the header.
    :param rows: sequences of values in column order.
    '''
    with open(path, 'w', newline='\n') as stream:
        if manifest_hash:
            stream.write(MANIFEST_PREFIX + manifest_hash + '\n')
        stream.write(','.join(columns) + '\n')
        for row in rows:
            if len(row) != len(columns):
                raise ValueError('row has %i values for %i columns'
                                 % (len(row), len(columns)))
            stream.write(','.join(format_value(value) for value in row) + '\n')
    logger.info('wrote %s', path)


def _parse_value(text):
    try:
        return float(text)
    except ValueError:
        return text


def read_series(path):
    '''
    :returns: (columns, rows, manifest_hash), rows as dicts of floats, or
      strings where a value is not a number.
    '''
    manifest_hash = None
    columns = None
    rows = []
    with open(path) as stream:
        for line in stream:
            line = line.rstrip('\n')
            if line.startswith(MANIFEST_PREFIX):
                manifest_hash = line[len(MANIFEST_PREFIX):]
                continue
            if line.startswith('#') or not line:
                continue
            fields = line.split(',')
            if columns is None:
                columns = tuple(fields)
                continue
            if len(fields) != len(columns):
                raise ValueError('%s: row with %i fields for %i columns'
                                 % (path, len(fields), len(columns)))
            rows.append({name: _parse_value(text) for name, text in zip(columns, fields)})
    if columns is None:
        raise ValueError('%s has no header' % path)
    return columns, rows, manifest_hash


def sanitize(value):
    '''
    JSON-ready copy: numpy scalars and arrays become Python values, NaN and
    infinities become None.
    '''
    if isinstance(value, dict):
        return {str(key): sanitize(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [sanitize(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    return value


def dumps_summary(summary, manifest_hash=None):
    summary = sanitize(summary)
    if manifest_hash:
        summary['manifest'] = manifest_hash
    return json.dumps(summary, sort_keys=True, indent=2, allow_nan=False) + '\n'


def write_summary(path, summary, manifest_hash=None):
    with open(path, 'w', newline='\n') as stream:
        stream.write(dumps_summary(summary, manifest_hash))
    logger.info('wrote %s', path)
