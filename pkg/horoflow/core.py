import collections
import functools
import logging
import math
import os
import time

import gevent.threadpool

from horoflow import config
from horoflow.util import defaultproperty

log = logging.getLogger(__name__)

class Refused(Exception):
    """An experiment declines to run; the message says why"""

Check = collections.namedtuple('Check', 'name value bound passed detail')


class Report(object):
    """Verdicts, tables and documents produced by one experiment

    ``tables`` maps a name to ``(columns, rows)`` and ``documents`` a name to
    a JSON-ready dictionary. A suite report keeps its members in ``parts``.

    """

    def __init__(self, name, refused=None):
        self.name = name
        self.refused = refused
        self.checks = []
        self.messages = []
        self.tables = collections.OrderedDict()
        self.documents = collections.OrderedDict()
        self.parts = []
        self.runtime = None

    def check(self, name, value, bound, passed=None, detail=''):
        value = float(value)
        if passed is None:
            passed = math.isfinite(value) and value <= bound
        self.checks.append(Check(name, value, bound, bool(passed), detail))
        log.info("%s: %s %s = %.4g (bound %.4g)", self.name, 'PASS' if passed else 'FAIL',
                 name, value, bound)
        return passed

    def fail(self, name, exception):
        self.checks.append(Check(name, math.nan, math.nan, False,
                                 '%s: %s' % (type(exception).__name__, exception)))

    def note(self, message):
        log.info("%s: %s", self.name, message)
        self.messages.append(message)

    @property
    def passed(self):
        if self.refused is not None:
            return False
        return all(c.passed for c in self.checks) and all(p.passed for p in self.parts)

    def summary(self):
        return {
            'experiment': self.name,
            'pass': self.passed,
            'refused': self.refused,
            'messages': list(self.messages),
            'checks': [dict(c._asdict(), value=None if math.isnan(c.value) else c.value,
                            bound=None if math.isnan(c.bound) else c.bound)
                       for c in self.checks],
        }


class Experiment(object):
    """Base class for experiments run alone or composed into a suite

    An experiment is a container of child experiments and a thread pool. It
    provides a common interface for starting and stopping them, and routes
    exceptions raised by sweep tasks to handlers registered with
    :meth:`catch` instead of aborting the whole run.

    Subclasses implement :meth:`execute`, which returns a :class:`Report`,
    and spread their sweeps with :meth:`map`.

    """
    name = 'experiment'

    threads = config.Setting('threads', None, doc="Worker threads for sweeps",
                             type=int, positive=True, recorded=False)

    started = defaultproperty(bool, False)

    _children = defaultproperty(list)
    _error_handlers = defaultproperty(collections.OrderedDict)
    _pool = None

    @property
    def workers(self):
        return self.threads or os.cpu_count() or 1

    def add_service(self, experiment):
        """Add a child experiment, started before and stopped after this one"""
        self._children.append(experiment)

    def _wrap_errors(self, func):
        """Wrap a task callable for triggering error handlers

        A handled exception becomes the task's result, so the other tasks of
        the sweep still run.

        """
        @functools.wraps(func)
        def wrapped_f(item):
            exceptions = tuple(self._error_handlers.keys())
            try:
                return func(item)
            except exceptions as exception:
                for type in self._error_handlers:
                    if isinstance(exception, type):
                        self._error_handlers[type](exception, item)
                        break
                return exception
        return wrapped_f

    def catch(self, type, handler):
        """Set an error handler for exceptions.

        ``handler(exception, item)`` is called for exceptions of `type` raised
        by tasks of this experiment and recursively any child experiments.
        """
        self._error_handlers[type] = handler
        for child in self._children:
            child.catch(type, handler)

    def map(self, func, items):
        """Results of ``func`` over ``items`` in input order"""
        wrapped = self._wrap_errors(func)
        items = list(items)
        if self._pool is None or self.workers == 1 or len(items) < 2:
            return [wrapped(item) for item in items]
        return list(self._pool.map(wrapped, items))

    def start(self):
        """Start the children, then this experiment"""
        if self.started:
            raise RuntimeWarning("{} already started".format(self.__class__.__name__))
        try:
            for child in self._children:
                if not child.started:
                    child.start()
            self._pool = gevent.threadpool.ThreadPool(self.workers)
            self.do_start()
            self.started = True
        except:
            self.stop()
            raise

    def do_start(self):
        """Empty implementation of experiment start. Implement me!"""
        return

    def stop(self):
        """Stop this experiment and child experiments"""
        self.started = False
        try:
            for child in reversed(self._children):
                if child.started:
                    child.stop()
            self.do_stop()
        finally:
            if self._pool is not None:
                self._pool.kill()
                self._pool = None

    def do_stop(self):
        """Empty implementation of experiment stop. Implement me!"""
        return

    def execute(self):
        raise NotImplementedError

    def report(self):
        """Execute, folding a refusal into the report"""
        began = time.monotonic()
        try:
            report = self.execute()
        except Refused as e:
            log.warning("%s refused: %s", self.name, e)
            report = Report(self.name, refused=str(e))
        report.runtime = time.monotonic() - began
        return report

    def run(self):
        """Start, execute and stop; returns the :class:`Report`"""
        self.start()
        try:
            return self.report()
        finally:
            self.stop()

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, type, value, traceback):
        self.stop()
