"""Process-wide configuration

Settings are declared where they are used::

    class Mixing(Experiment):
        horizon = config.Setting('mixing.horizon', 1e5, positive=True)

and filled from a flat or namespaced mapping with :func:`load`. Every
declared setting is known to :func:`validate`, which rejects keys nobody
declared.

"""

import hashlib
import json
import numbers
import re

_registry = {}
_declared = {}

class Namespace(dict): pass

class ConfigError(ValueError):
    """Invalid configuration; ``key`` and ``line`` locate the culprit"""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = ''
        if key is not None:
            where = "%s: " % key
        if line is not None:
            where = "line %d: %s" % (line, where)
        super(ConfigError, self).__init__(where + message)

def flatten(context, basepath=''):
    out = {}
    for k in context:
        if isinstance(context[k], Namespace):
            out.update(flatten(context[k], '%s%s.' % (basepath, k)))
        else:
            out[''.join([basepath, k]).lower()] = context[k]
    return out

def load(context, basepath=''):
    _registry.update(flatten(context, basepath))

def reset():
    _registry.clear()

def line_of(key, source):
    """First line of ``source`` assigning the last component of ``key``"""
    if not source:
        return None
    name = re.escape(key.split('.')[-1])
    pattern = re.compile(r'(^|[\s,(])%s\s*=(?!=)' % name, re.IGNORECASE)
    for number, line in enumerate(source.splitlines(), 1):
        if pattern.search(line.split('#', 1)[0]):
            return number
    return None

def validate(context, source=None, ignore=()):
    """Check a loaded mapping against the declared settings

    Unknown keys, values of the wrong type and non-positive values of
    positive settings raise :class:`ConfigError`.

    """
    for key, value in sorted(flatten(context).items()):
        if key.startswith('_') or key in ignore:
            continue
        setting = _declared.get(key)
        if setting is None:
            raise ConfigError("unknown setting", key, line_of(key, source))
        try:
            setting.check(value)
        except ValueError as e:
            raise ConfigError(str(e), key, line_of(key, source))

def declared():
    return dict(_declared)

def snapshot():
    """Resolved values of all declared settings, JSON-ready"""
    out = {}
    for path, setting in sorted(_declared.items()):
        if not setting.recorded:
            continue
        value = setting.value
        if isinstance(value, tuple):
            value = list(value)
        out[path] = value
    return out

def digest():
    """Short SHA-256 of the canonical JSON snapshot"""
    text = json.dumps(snapshot(), sort_keys=True, default=repr)
    return hashlib.sha256(text.encode('utf-8')).hexdigest()[:16]

class Setting(object):
    """Descriptor reading one configuration path

    ``type`` restricts values (ints are accepted for floats), ``positive``
    demands a value > 0 and ``choices`` a member of a fixed set. Settings
    with ``recorded=False`` stay out of :func:`snapshot`.

    """

    def __init__(self, path, default=None, doc='', type=None, positive=False, choices=None,
                 recorded=True):
        self.path = path.lower()
        self.default = default
        self.__doc__ = doc
        self.type = type
        self.positive = positive
        self.choices = choices
        self.recorded = recorded
        _declared.setdefault(self.path, self)

    def __get__(self, instance, type):
        return self.value

    def __set__(self, instance, value):
        raise AttributeError("can't set attribute")

    def check(self, value):
        if value is None:
            return
        if self.type is not None:
            allowed = (numbers.Real,) if self.type is float else self.type
            if isinstance(value, bool) and self.type is not bool or not isinstance(value, allowed):
                raise ValueError("expected %s, got %r" % (getattr(self.type, '__name__', self.type),
                                                          value))
        if self.positive and not value > 0:
            raise ValueError("must be positive, got %r" % (value,))
        if self.choices is not None and value not in self.choices:
            raise ValueError("must be one of %s, got %r" % (', '.join(map(str, self.choices)), value))

    @property
    def value(self):
        return _registry.get(self.path, self.default)
