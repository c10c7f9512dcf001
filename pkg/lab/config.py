'''
Run configs: flat key=value text, one key per line, '#' starts a comment.
'''
import hashlib
import json
import logging
import re

from django.core.exceptions import ValidationError

import bubblelab
from lab.forms import FORMS, KEY_ALIASES

logger = logging.getLogger(__name__)

DEFAULT_SUBCOMMAND = 'flow'
KEY_PATTERN = re.compile(r'^[A-Za-z_][A-Za-z0-9_]*$')
FLOATS_NOTE = 'IEEE-754 binary64; outputs are byte-identical on the same platform'


class ParseError(ValueError):
    def __init__(self, lineno, message):
        super().__init__('line %i: %s' % (lineno, message))
        self.lineno = lineno


def subcommand_name(name):
    '''
    Accept both greens-table and greens_table.
    '''
    name = name.strip().replace('-', '_')
    if name not in FORMS:
        raise ValidationError('unknown subcommand %r' % name)
    return name


def parse_lines(text):
    '''
    :returns: a dict of raw string values in file order.
    :raises ParseError: on a line without '=', a bad key or a repeated key.
    '''
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ParseError(lineno, 'expected key=value, got %r' % line)
        key, value = (part.strip() for part in line.split('=', 1))
        if not KEY_PATTERN.match(key):
            raise ParseError(lineno, 'invalid key %r' % key)
        if key in values:
            raise ParseError(lineno, 'duplicate key %r' % key)
        values[key] = value
    return values


def _jsonable(value):
    if isinstance(value, tuple):
        return [_jsonable(item) for item in value]
    return value


class RunConfig():
    '''
    A validated config.

    :param str subcommand: one of lab.forms.FORMS.
    :param dict values: cleaned values, defaults filled in.
    :param str text: the config text it was parsed from.
    '''
    def __init__(self, subcommand, values, text=''):
        self.subcommand = subcommand
        self.values = values
        self.text = text

    def __getitem__(self, key):
        return self.values[KEY_ALIASES.get(key, key)]

    def get(self, key, default=None):
        return self.values.get(KEY_ALIASES.get(key, key), default)

    def manifest(self):
        '''
        Everything needed to reproduce the run: the effective config, the
        code version and a note on float handling.
        '''
        aliases = {field: key for key, field in KEY_ALIASES.items()}
        return {
            'subcommand': self.subcommand,
            'config': {aliases.get(key, key): _jsonable(value)
                       for key, value in sorted(self.values.items())},
            'version': bubblelab.__version__,
            'floats': FLOATS_NOTE,
        }

    @property
    def manifest_hash(self):
        encoded = json.dumps(self.manifest(), sort_keys=True).encode('utf8')
        return hashlib.sha256(encoded).hexdigest()

    def __repr__(self):
        return 'RunConfig(%s, %s)' % (self.subcommand, self.manifest_hash[:12])


def _messages(form):
    messages = []
    for field, errors in form.errors.items():
        for error in errors:
            messages.append(error if field == '__all__' else '%s: %s' % (field, error))
    return messages


def parse_config(text, subcommand=None, overrides=None):
    '''
    Parse and validate a run config.

    The subcommand comes from a `subcommand=` line or from the argument,
    defaulting to 'flow'. `overrides` (command-line flags) replace config
    values before validation.

    :raises ParseError: on malformed lines.
    :raises ValidationError: on unknown keys or violated preconditions.
    '''
    raw = parse_lines(text)
    named = raw.pop('subcommand', None)
    if named and subcommand and subcommand_name(named) != subcommand_name(subcommand):
        raise ValidationError('config is for %s, not %s' % (named, subcommand))
    subcommand = subcommand_name(named or subcommand or DEFAULT_SUBCOMMAND)

    raw.update({key: value for key, value in (overrides or {}).items()
                if value is not None})
    data = {KEY_ALIASES.get(key, key): value for key, value in raw.items()}
    form = FORMS[subcommand](data=data)
    unknown = sorted(key for key, field in zip(raw, data) if field not in form.fields)
    if unknown:
        raise ValidationError('unknown key%s for %s: %s' % (
            's' if len(unknown) > 1 else '', subcommand, ', '.join(unknown)))
    if not form.is_valid():
        raise ValidationError(_messages(form))
    config = RunConfig(subcommand, dict(form.cleaned_data), text)
    logger.debug('parsed %r', config)
    return config
