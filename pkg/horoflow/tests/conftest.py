import pytest

@pytest.fixture(autouse=True)
def _nose_with_setup(request):
    """Honor nose's ``@with_setup`` per-test hooks, which pytest no longer runs"""
    func = getattr(request.node, 'function', None)
    setup = getattr(func, 'setup', None)
    teardown = getattr(func, 'teardown', None)
    if setup is not None:
        setup()
    yield
    if teardown is not None:
        teardown()
