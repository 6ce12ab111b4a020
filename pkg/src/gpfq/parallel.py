"""Worker-count policy and an order-preserving parallel map."""
import os
from concurrent.futures import ProcessPoolExecutor


def thread_count(requested=None) -> int:
    """Workers to use: ``requested`` (or the CPU count), capped by GPFQ_THREADS."""
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("GPFQ_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"GPFQ_THREADS must be a positive integer, got {cap!r}")
    return max(1, n)


def pmap(fn, items, workers=None):
    """``[fn(x) for x in items]``, possibly across processes; output order is input order."""
    items = list(items)
    n = min(thread_count(workers), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * n))))
