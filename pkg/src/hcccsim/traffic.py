"""Traffic bookkeeping, per-node energy accounting and the end-to-end AIMD baseline.

Energy is stored in integer nanojoules so the conservation identity
(total consumed == per-packet cost x transmission attempts) holds exactly.
A node whose remaining energy drops below the per-packet cost is dead: it
stops generating, forwarding and responding.
"""

# Terminal outcomes of a generated data packet.
DELIVERED = "delivered"
BUFFER_OVERFLOW = "buffer_overflow"
MAC_RETRY_EXHAUSTED = "mac_retry_exhausted"
IN_FLIGHT = "in_flight"


def joules_to_nj(j):
    return int(round(j * 1e9))


class EnergyBook:
    __slots__ = ("initial_nj", "remaining_nj", "per_packet_nj", "control_nj")

    def __init__(self, initial_j, per_packet_j, control_j=0.0):
        self.initial_nj = joules_to_nj(initial_j)
        self.remaining_nj = self.initial_nj
        self.per_packet_nj = joules_to_nj(per_packet_j)
        self.control_nj = joules_to_nj(control_j)

    def charge_data(self):
        self.remaining_nj -= self.per_packet_nj
        return self.remaining_nj

    def charge_control(self):
        if self.control_nj:
            self.remaining_nj -= self.control_nj
        return self.remaining_nj

    @property
    def exhausted(self):
        return self.remaining_nj < self.per_packet_nj

    @property
    def consumed_nj(self):
        return self.initial_nj - self.remaining_nj


class Packet:
    """One data packet travelling toward the sink."""

    __slots__ = ("id", "origin", "seq", "created_us", "hops")

    def __init__(self, pkt_id, origin, seq, created_us):
        self.id = pkt_id
        self.origin = origin
        self.seq = seq
        self.created_us = created_us
        self.hops = 0


class PacketRecord:
    """Terminal accounting for one generated packet."""

    __slots__ = ("id", "origin", "seq", "created_us", "outcome", "end_us", "hops")

    def __init__(self, pkt_id, origin, seq, created_us):
        self.id = pkt_id
        self.origin = origin
        self.seq = seq
        self.created_us = created_us
        self.outcome = IN_FLIGHT
        self.end_us = None
        self.hops = 0

    def finish(self, outcome, end_us, hops=None):
        """Assign the terminal outcome; returns False if one was already set."""
        if self.outcome != IN_FLIGHT:
            return False
        self.outcome = outcome
        self.end_us = end_us
        if hops is not None:
            self.hops = hops
        return True


class AimdSource:
    """Source-only additive-increase / multiplicative-decrease rate controller.

    The sink notifies the origin source out of band when it observes a gap in
    that source's sequence numbers; the source halves its rate.  In every
    quiet second the rate grows by alpha.
    """

    __slots__ = ("rate", "alpha", "r_min", "r_cap", "last_halve_us")

    def __init__(self, rate, alpha, r_min, r_cap):
        self.rate = rate
        self.alpha = alpha
        self.r_min = r_min
        self.r_cap = r_cap
        self.last_halve_us = None

    def on_loss_signal(self, now_us):
        self.rate = max(self.r_min, 0.5 * self.rate)
        self.last_halve_us = now_us

    def on_second_tick(self, now_us):
        if self.last_halve_us is not None and now_us - self.last_halve_us < 1_000_000:
            return
        self.rate = min(self.r_cap, self.rate + self.alpha)
