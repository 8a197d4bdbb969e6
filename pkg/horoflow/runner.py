import io
import argparse
import logging
import logging.config
import os.path
import sys
import traceback
import types

import setproctitle

from horoflow import __version__
from horoflow import config
from horoflow import experiments
from horoflow import util

log = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2

DEFAULT_LOG_CONFIG = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {'format': '%(asctime)s %(levelname)s %(name)s: %(message)s'},
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
            'stream': 'ext://sys.stderr',
        },
    },
    'root': {'level': 'INFO', 'handlers': ['console']},
}

class RunnerStartException(Exception): pass

def main():
    """Entry point for the horoflow console script"""
    try:
        runner = Runner()
    except config.ConfigError as e:
        sys.stderr.write("configuration error: %s\n" % e)
        sys.exit(EXIT_CONFIG)
    sys.exit(runner.do_action())

def runner_options():
    parser = argparse.ArgumentParser(prog='horoflow',
                                     description="Numerical experiments on time-changed W^u flows")
    parser.add_argument("experiment", choices=list(experiments.EXPERIMENTS) + ["all"],
                    help="Experiment to run")
    parser.add_argument("-C", "--config", dest="config", metavar="<file>",
                    help="Python script setting the experiment configuration")
    parser.add_argument("-X", "--extend", dest="extensions", metavar="<file/python>", action="append",
                    help="Python code or script path to extend over the config script", default=[])
    parser.add_argument("--seed", dest="seed", metavar="<n>", type=int,
                    help="Seed of every random draw (default: 0)")
    parser.add_argument("--threads", dest="threads", metavar="<n>", type=int,
                    help="Worker threads for sweeps (default: available cores)")
    parser.add_argument("--out", dest="out", metavar="<directory>",
                    help="Directory receiving CSV and JSON outputs (default: out)")
    parser.add_argument("-l", "--logfile", dest="logfile", metavar="<logfile>",
                    help="Log to a specified file (default: stderr)")
    parser.add_argument("-N", "--name", dest="name", metavar="<name>",
                    help="Name of the process using setprocname. (default: don't change)")
    return parser

def _settings(namespace):
    """Values of an executed config script that are configuration"""
    return dict((k, v) for k, v in namespace.items()
                if not k.startswith('_')
                and not isinstance(v, (types.ModuleType, types.FunctionType, type)))

class Runner(object):
    _args = sys.argv[1:]
    _opener = io.open

    experiment_name =   config.Setting('experiment', recorded=False)
    config_path =       config.Setting('config', type=str, recorded=False)
    extensions =        config.Setting('extensions', [], type=list, recorded=False)
    logfile_path =      config.Setting('logfile', type=str, recorded=False)
    proc_name =         config.Setting('name', type=str, recorded=False)
    out_dir =           config.Setting('out', 'out', type=str, recorded=False)
    log_config =        config.Setting('log_config', type=dict, recorded=False)
    seed =              experiments.ModelExperiment.__dict__['seed']

    def __init__(self):
        self.experiment = None
        self.load_config(runner_options())
        self._log_config()

    def load_config(self, parser):
        options = parser.parse_args(self._args)

        if options.config is not None:
            parser.set_defaults(**self.load_file(options.config))

        for ex in options.extensions:
            try:
                parser.set_defaults(**self.load_file(ex))
            except IOError:
                # couldn't open the file try to interpret as python
                parser.set_defaults(**self.load_source(ex, "<extend>"))

        # Now we parse args again with the config file settings as defaults
        options = parser.parse_args(self._args)
        config.load(dict((k, v) for k, v in vars(options).items() if v is not None))

    def load_file(self, filename):
        with self._open(filename, 'r') as f:
            source = f.read()
        return self.load_source(source, filename)

    def load_source(self, source, filename):
        d = {'__file__': filename, 'Namespace': config.Namespace}
        try:
            exec(compile(source, filename, 'exec'), d, d)
        except SyntaxError as e:
            raise config.ConfigError("syntax error: %s" % e.msg, line=e.lineno)
        except Exception as e:
            line = None
            for frame in traceback.extract_tb(e.__traceback__):
                if frame.filename == filename:
                    line = frame.lineno
            raise config.ConfigError("%s: %s" % (type(e).__name__, e), line=line)
        settings = _settings(d)
        config.validate(settings, source)
        return settings

    def _log_config(self):
        if self.log_config:
            logging.config.dictConfig(self.log_config)
            return
        log_config = dict(DEFAULT_LOG_CONFIG)
        if self.logfile_path:
            log_config['handlers'] = {'file': {'class': 'logging.FileHandler',
                                               'formatter': 'plain',
                                               'filename': self.logfile_path}}
            log_config['root'] = {'level': 'INFO', 'handlers': ['file']}
        logging.config.dictConfig(log_config)

    @property
    def version(self):
        return util.describe_version(__version__)

    def run(self):
        """Run the configured experiment and write its outputs; returns the report"""
        if self.proc_name:
            setproctitle.setproctitle(self.proc_name)
        self.experiment = experiments.build(self.experiment_name)
        report = self.experiment.run()
        self.emit(report)
        return report

    def emit(self, report):
        """CSV tables, one JSON report per experiment and the run manifest"""
        out = self.out_dir
        os.makedirs(out, exist_ok=True)
        version, digest, seed = self.version, config.digest(), self.seed
        stamp = {'version': version, 'config_hash': digest, 'seed': seed}
        written, runtimes = [], {}
        for part in report.parts or [report]:
            header = 'horoflow %s experiment=%s config=%s seed=%d' % (version, part.name, digest,
                                                                       seed)
            for table, (columns, rows) in part.tables.items():
                filename = '%s-%s.csv' % (part.name, table)
                util.write_csv(os.path.join(out, filename), header, columns, rows)
                written.append(filename)
            document = dict(part.summary(), **stamp)
            document.update(part.documents)
            filename = '%s.json' % part.name
            util.write_json(os.path.join(out, filename), document)
            written.append(filename)
            runtimes[part.name] = part.runtime
        manifest = dict(stamp, experiment=report.name, files=written, runtime=runtimes,
                        config=config.snapshot(), **{'pass': report.passed})
        util.write_json(os.path.join(out, 'manifest.json'), manifest)
        log.info("wrote %d files to %s", len(written) + 1, out)

    def do_action(self):
        """Run and map the outcome onto the exit code"""
        try:
            report = self.run()
        except config.ConfigError as e:
            log.error("configuration error: %s", e)
            return EXIT_CONFIG
        if report.refused is not None:
            log.error("%s refused: %s", report.name, report.refused)
        for part in report.parts:
            if part.refused is not None:
                log.error("%s refused: %s", part.name, part.refused)
        log.info("%s: %s", report.name, 'PASS' if report.passed else 'FAIL')
        return EXIT_PASS if report.passed else EXIT_FAIL

    def _open(self, *args, **kwargs):
        for kls in type(self).__mro__:
            if '_opener' in kls.__dict__:
                return kls.__dict__['_opener'](*args, **kwargs)
        raise RunnerStartException("no opener configured")
