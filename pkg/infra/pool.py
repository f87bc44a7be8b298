import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from infra.config import DEFAULT_JOBS

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class WorkerPool:
    executor: Optional[ProcessPoolExecutor] = None
    jobs: int = 1

    @staticmethod
    def map(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """
        Order-preserving map; runs in-process when no executor is started
        """
        items = list(items)
        if WorkerPool.executor is None or WorkerPool.jobs <= 1 or len(items) < 2:
            return [fn(item) for item in items]
        chunksize = max(1, len(items) // (4 * WorkerPool.jobs))
        return list(WorkerPool.executor.map(fn, items, chunksize=chunksize))


def start_worker_pool(jobs: int = DEFAULT_JOBS):
    close_worker_pool()
    WorkerPool.jobs = max(1, jobs)
    if WorkerPool.jobs > 1:
        WorkerPool.executor = ProcessPoolExecutor(max_workers=WorkerPool.jobs)
        logger.info("Started worker pool with %d processes", WorkerPool.jobs)


def close_worker_pool():
    if WorkerPool.executor is not None:
        WorkerPool.executor.shutdown(wait=True, cancel_futures=True)
        logger.info("Closed worker pool")
    WorkerPool.executor = None
    WorkerPool.jobs = 1
