"""Peak-allocation tracking built on :mod:`tracemalloc`.

numpy reports its data buffers to tracemalloc, so the traced peak covers
every tensor and matrix allocated inside the tracked block.
"""

import tracemalloc
from contextlib import contextmanager


class PeakUsage:
    """Result holder filled in when the tracking block exits."""

    def __init__(self, resident=0):
        self.resident = int(resident)
        self.allocated = 0

    @property
    def peak_bytes(self):
        """Bytes held by operands passed in plus the allocation high-water mark."""
        return self.resident + self.allocated


@contextmanager
def track_peak(*resident, enabled=True):
    """Measure the allocation high-water mark of the enclosed block.

    Arrays passed as `resident` already live in memory when the block starts;
    their ``nbytes`` are added to the reported peak so that, for example, the
    batch compressor is charged for holding its whole input.
    """
    usage = PeakUsage(sum(getattr(a, "nbytes", 0) for a in resident))
    if not enabled:
        yield usage
        return
    started = not tracemalloc.is_tracing()
    if started:
        tracemalloc.start()
    base, _ = tracemalloc.get_traced_memory()
    tracemalloc.reset_peak()
    try:
        yield usage
    finally:
        _, peak = tracemalloc.get_traced_memory()
        usage.allocated = max(peak - base, 0)
        if started:
            tracemalloc.stop()
