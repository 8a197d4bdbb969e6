"""Utility module

Some useful functions.

"""

import csv
import io
import json
import os.path
import subprocess

import numpy as np

def line_protocol(fileobj, strip=True):
    """Generator looping over a line-based text file

    Yields every line, blank ones included, and ends at end of file or on a
    read error.

    """
    while True:
        try:
            line = fileobj.readline()
        except IOError:
            break
        if not line:
            break
        yield line.strip() if strip else line

def describe_version(fallback, path=None):
    """``git describe`` of the checkout holding ``path``, else v<fallback>"""
    path = path or os.path.dirname(os.path.abspath(__file__))
    try:
        out = subprocess.run(['git', 'describe', '--tags', '--always', '--dirty'],
                             cwd=path, capture_output=True, text=True, timeout=10)
    except (OSError, subprocess.SubprocessError):
        return 'v%s' % fallback
    described = out.stdout.strip()
    if out.returncode != 0 or not described:
        return 'v%s' % fallback
    return described

def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, dict):
        return dict((str(k), _plain(v)) for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value

def dumps(document):
    return json.dumps(_plain(document), sort_keys=True, indent=2) + '\n'

def write_json(path, document, opener=io.open):
    with opener(path, 'w') as f:
        f.write(dumps(document))

def write_csv(path, header, columns, rows, opener=io.open):
    """CSV with one ``# header`` comment line before the column names

    Floats are written with repr, so equal values give equal files.

    """
    with opener(path, 'w') as f:
        f.write('# %s\n' % header)
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                             for v in row])

class defaultproperty(object):
    """
    Allow for default-valued properties to be added to classes.

    Example usage:

    class Foo(object):
        bar = defaultproperty(list)
    """
    def __init__(self, default_factory, *args, **kwargs):
        self.default_factory = default_factory
        self.args = args
        self.kwargs = kwargs

    def __get__(self, instance, owner):
        if instance is None:
            return None
        for kls in owner.__mro__:
            for key, value in kls.__dict__.items():
                if value is self:
                    newval = self.default_factory(*self.args, **self.kwargs)
                    instance.__dict__[key] = newval
                    return newval
