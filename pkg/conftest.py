"""
Lets pytest collect the proboscis test suite in fuelgen/test.

The tests are plain functions registered with proboscis' ``@test``
decorator in ``*_tests.py`` modules; pytest's default naming rules
find none of them. This collects exactly the registered functions,
and mirrors the setup in ``fuelgen.test.run_tests``.
"""

import inspect
import logging
import warnings

import pytest

from fuelgen.exceptions import FuelgenWarning
from fuelgen.test.utils import NoticeLogging


def pytest_collect_file(file_path, parent):
    if (file_path.suffix == '.py' and file_path.name.endswith('_tests.py')
            and file_path.parent.name == 'test' and file_path.parent.parent.name == 'fuelgen'):
        return pytest.Module.from_parent(parent, path=file_path)


def pytest_pycollect_makeitem(collector, name, obj):
    if isinstance(collector, pytest.Module) and inspect.isfunction(obj):
        if getattr(obj, '_proboscis_entry_', None) is not None:
            return pytest.Function.from_parent(collector, name=name)
        # helpers in the proboscis modules are not tests
        return []


@pytest.fixture(autouse=True)
def _run_tests_environment():
    # resolution and small-sample caveats are expected in tests
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', FuelgenWarning)

        # anything >= error logged signals a broken numerical path
        noticer = NoticeLogging()
        noticer.setLevel(logging.ERROR)
        root_logger = logging.getLogger('fuelgen')
        root_logger.addHandler(noticer)
        try:
            yield
        finally:
            root_logger.removeHandler(noticer)
        assert not noticer.seen_message, 'error logged by fuelgen'
