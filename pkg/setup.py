#!/usr/bin/env python
import os
from setuptools import Command
from setuptools import setup, find_packages

from horoflow import __version__

def command(fn):
    def wrapped():
        class cmdclass(Command):
            def initialize_options(self): pass
            def finalize_options(self): pass
            user_options = []
            description = fn.__doc__
            def run(self): fn()
        return cmdclass
    return wrapped

@command
def test():
    """run tests with nose"""
    os.execlp("nosetests", "nosetests", "horoflow")

@command
def coverage():
    """run test coverage report with nose"""
    os.execlp("nosetests", "nosetests", "--with-coverage", "--cover-package=horoflow", "horoflow")

setup(
    name='horoflow',
    version=__version__,
    description='Numerical laboratory for time-changed horocycle-type flows',
    packages=find_packages(),
    python_requires='>=3.8',
    install_requires=['numpy', 'scipy', 'gevent', 'setproctitle'],
    tests_require=['pynose'],
    extras_require={'test': ['pynose', 'coverage']},
    data_files=[],
    entry_points={
        'console_scripts': [
            'horoflow = horoflow.runner:main',]},
    cmdclass={
        'test': test(),
        'coverage': coverage(),}
)
