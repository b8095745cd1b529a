"""Deterministic discrete-event engine: virtual clock, event queue, seeded PRNG streams.

Time is an integer count of microseconds since simulation start.  Events are
dispatched in (time, seq) order where seq is the scheduling order, so ties are
broken deterministically.  The PRNG is an explicit xorshift64* generator seeded
through a splitmix64 mix of (seed, stream_id); it does not depend on the
standard library generator, so sequences are identical across platforms.
"""

from heapq import heappush, heappop

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SchedulingError(Exception):
    """Raised when an event is scheduled into the past or a draw range is invalid."""


def _splitmix64(z):
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class RandomStream:
    """One independent deterministic random sequence per (seed, stream_id)."""

    __slots__ = ("seed", "stream_id", "_state")

    def __init__(self, seed, stream_id=0):
        self.seed = seed & _MASK64
        self.stream_id = stream_id
        state = _splitmix64(_splitmix64(self.seed) ^ _splitmix64((stream_id + 1) * _GOLDEN))
        if state == 0:
            state = _GOLDEN
        self._state = state

    def next_u64(self):
        x = self._state
        x ^= x >> 12
        x = (x ^ (x << 25)) & _MASK64
        x ^= x >> 27
        self._state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK64

    def uniform_int(self, lo, hi):
        """Uniform integer in [lo, hi], unbiased via bounded rejection."""
        if lo > hi:
            raise SchedulingError("uniform_int: lo=%r > hi=%r" % (lo, hi))
        n = hi - lo + 1
        if n == 1:
            return lo
        limit = (1 << 64) - ((1 << 64) % n)
        u = self.next_u64()
        while u >= limit:
            u = self.next_u64()
        return lo + (u % n)

    def random(self):
        """Uniform float in [0, 1)."""
        return self.next_u64() / 18446744073709551616.0


class Engine:
    """Single-threaded event loop.  A run owns all mutable state."""

    def __init__(self):
        self.now = 0
        self._queue = []
        self._seq = 0
        self.processed = 0

    def schedule(self, time, fn, *args):
        if time < self.now:
            raise SchedulingError(
                "event scheduled at t=%d before current clock t=%d" % (time, self.now)
            )
        self._seq += 1
        heappush(self._queue, (time, self._seq, fn, args))

    def run_until(self, limit):
        """Process every event with time <= limit; returns the number processed."""
        q = self._queue
        count = 0
        while q and q[0][0] <= limit:
            time, _seq, fn, args = heappop(q)
            self.now = time
            fn(*args)
            count += 1
        self.now = limit
        self.processed += count
        return count

    def pending(self):
        return len(self._queue)
