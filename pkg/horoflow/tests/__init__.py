import io
import sys

class silencer:
    """Swap stdout and stderr for buffers; the captured text stays readable
    as ``stdout`` and ``stderr`` after the block"""

    def __enter__(self):
        self.saved = sys.stdout, sys.stderr
        sys.stdout, sys.stderr = self.stdout, self.stderr = io.StringIO(), io.StringIO()
        return self

    def __exit__(self, type, value, traceback):
        sys.stdout, sys.stderr = self.saved

class _WrittenFile(io.StringIO):
    def __init__(self, file_map, path):
        super(_WrittenFile, self).__init__()
        self._file_map = file_map
        self._path = path

    def close(self):
        if not self.closed:
            self._file_map[self._path] = self.getvalue()
        super(_WrittenFile, self).close()

def mock_open(file_map, default=None):
    """Replacement for `open` backed by ``file_map``

    Reading a missing path raises IOError; files opened for writing land in
    ``file_map`` when closed.

    """
    def open_mock(path, mode='r', *args, **kwargs):
        if 'w' in mode:
            return _WrittenFile(file_map, path)
        contents = file_map.get(path, default)
        if contents is None:
            raise IOError("File not found: %s" % path)
        return io.StringIO(contents)
    return open_mock
