"""
Fan-out of independent tasks (one spectral projector per index, one eigenfunction per record) over worker processes.
"""
import time
from multiprocessing import Pool

import psutil
from pympler import asizeof

from .error_handling import print_debug
from .settings import GLOBAL_DEBUG, max_workers


def _task_worker(method_with_args):
    """
    Runs a method with its arguments inside a worker process. Exceptions are returned instead of raised so that the
    parent can re-raise them in input order.
    :param method_with_args: Method and its arguments to be executed
    :type method_with_args: tuple[callable, tuple]
    """
    method, args = method_with_args
    try:
        return method(*args)
    except Exception as e:
        return e


def parallel_map(method, argument_tuples, workers: int | None = None, debug: bool = GLOBAL_DEBUG) -> list:
    """
    Applies method to every argument tuple and returns the results in input order. With more than one worker the
    calls run on a process pool; the first failing call is re-raised in the parent.
    :param method: Module-level function
    :type method: callable
    :param argument_tuples: One tuple of positional arguments per call
    :type argument_tuples: Iterable[tuple]
    :param workers: Number of processes, DIRAC_THREADS if omitted
    :type workers: int | None
    :param debug: True if debug information should be printed
    :type debug: bool
    :return: Results in input order
    :rtype: list
    """
    tasks = [(method, tuple(args)) for args in argument_tuples]
    workers = max_workers() if workers is None else max(1, int(workers))
    workers = min(workers, len(tasks)) if tasks else 1
    if debug:
        start_time = time.perf_counter()
    if workers == 1:
        results = [method(*args) for _, args in tasks]
    else:
        with Pool(processes=workers) as pool:
            try:
                results = pool.map(_task_worker, tasks)
            except BaseException:
                kill_process_and_children(pool_pids(pool))
                raise
        for result in results:
            if isinstance(result, Exception):
                raise result
    if debug:
        print_debug(f"{len(tasks)} calls of {method.__name__} on {workers} worker(s) took "
                    f"{(time.perf_counter() - start_time):.6f} seconds, results use {asizeof.asizeof(results)} bytes")
    return results


def pool_pids(pool) -> list[int]:
    return [p.pid for p in getattr(pool, "_pool", []) if p.pid is not None]


def kill_process_and_children(pids) -> None:
    """
    Kills processes and all their child processes.
    :param pids: Process ID or list of process IDs
    :type pids: int | list[int]
    """
    for pid in ([pids] if isinstance(pids, int) else pids):
        try:
            parent = psutil.Process(pid)
            for child in parent.children(recursive=True):
                child.kill()
            parent.kill()
        except psutil.NoSuchProcess:
            pass
