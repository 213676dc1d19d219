"""
Sessions run independent, seeded jobs, optionally on a pool of worker threads.
"""

from concurrent.futures import ThreadPoolExecutor

from fuelgen.exceptions import ParameterError
from fuelgen.utils import utils

log = utils.DynamicClientLogger(__name__)


class Session:
    """Maps functions over work items, preserving order.

    Each job must derive its randomness from its own seed; results are then
    the same for any number of workers. numpy and scipy release the GIL in
    the linear algebra and KD-tree work that dominates a job.
    """

    def __init__(self, workers=1):
        """
        :param workers: maximum number of concurrent jobs; 1 runs everything
          inline on the calling thread.
        """
        if workers < 1:
            raise ParameterError("workers must be at least 1; received %r" % workers)

        self.workers = int(workers)
        self._executor = None

    def _pool(self):
        if self._executor is None:
            self._executor = ThreadPoolExecutor(max_workers=self.workers,
                                                thread_name_prefix='fuelgen')
            log.debug("started a pool of %d workers", self.workers)
        return self._executor

    def map(self, fn, items):
        """Return ``[fn(item) for item in items]``.

        The first exception raised by a job is re-raised here.
        """
        items = list(items)
        if self.workers == 1 or len(items) < 2:
            return [fn(item) for item in items]

        return list(self._pool().map(fn, items))

    def close(self):
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False
