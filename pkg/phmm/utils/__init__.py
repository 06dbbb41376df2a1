from .iterate import batched, contiguous_ranges
from .debug import post_mortem
from .threads import resolve_workers, worker_cap
from .timing import PhaseTimer
