from horoflow import core

class Suite(core.Experiment):
    """
    Suite is the experiment behind the `all` subcommand.

    It is the parent of the experiments it runs: they are started with the
    suite, executed one after the other in the given order and stopped when
    the suite stops. Its report passes only when every member's report does.
    """
    name = 'all'

    def __init__(self, experiments):
        self._children = list(experiments)

    @property
    def experiments(self):
        return list(self._children)

    def execute(self):
        report = core.Report(self.name)
        for experiment in self._children:
            part = experiment.report()
            report.parts.append(part)
            if not part.passed:
                report.note("%s did not pass" % part.name)
        return report
