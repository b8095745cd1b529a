"""MAC-layer data types: frames, timing, backoff draws and error probabilities.

The contention MAC itself (carrier sense, RTS/CTS/DATA/ACK exchange,
collisions) is driven by the event handlers in :mod:`hcccsim.simulation`;
this module holds the frame/timing plumbing shared with tests.
"""

RTS = "RTS"
CTS = "CTS"
DATA = "DATA"
ACK = "ACK"


class Frame:
    __slots__ = ("kind", "src", "dst", "size", "feedback", "data_id", "packet")

    def __init__(self, kind, src, dst, size, feedback=None, data_id=None, packet=None):
        self.kind = kind
        self.src = src
        self.dst = dst
        self.size = size
        self.feedback = feedback  # only RTS carries feedback
        self.data_id = data_id
        self.packet = packet


def airtime_us(size_bytes, bit_rate):
    return int(round(size_bytes * 8 * 1_000_000 / bit_rate))


def frame_error_probability(flat_rate, bit_error_rate, size_bytes):
    """Per-frame corruption probability combining a flat rate with a bit error rate."""
    ber_part = 1.0 - (1.0 - bit_error_rate) ** (8 * size_bytes)
    return 1.0 - (1.0 - flat_rate) * (1.0 - ber_part)


class MacTiming:
    """All MAC timing quantities, precomputed in integer microseconds."""

    __slots__ = ("slot", "sifs", "difs", "retry_limit", "jitter_max",
                 "ctrl_air", "data_air", "cts_timeout", "ack_timeout",
                 "ctrl_fer", "data_fer", "exchange_us")

    def __init__(self, cfg):
        self.slot = cfg.slot_us
        self.sifs = cfg.sifs_us
        self.difs = cfg.difs_us
        self.retry_limit = cfg.retry_limit
        self.jitter_max = cfg.access_jitter_us
        self.ctrl_air = airtime_us(cfg.control_size, cfg.bit_rate)
        self.data_air = airtime_us(cfg.packet_size, cfg.bit_rate)
        # Timeouts cover the expected response plus one slot of guard time.
        self.cts_timeout = self.ctrl_air + self.sifs + self.ctrl_air + self.slot
        self.ack_timeout = self.data_air + self.sifs + self.ctrl_air + self.slot
        self.ctrl_fer = frame_error_probability(cfg.frame_error_rate,
                                                cfg.bit_error_rate, cfg.control_size)
        self.data_fer = frame_error_probability(cfg.frame_error_rate,
                                                cfg.bit_error_rate, cfg.packet_size)
        # Full uncontended RTS/CTS/DATA/ACK exchange with SIFS gaps.
        self.exchange_us = 3 * self.sifs + 3 * self.ctrl_air + self.data_air

    def airtime(self, kind):
        return self.data_air if kind == DATA else self.ctrl_air

    def error_rate(self, kind):
        return self.data_fer if kind == DATA else self.ctrl_fer


def effective_window(w):
    """Integer window used for a draw: round half up, never below 1."""
    eff = int(w + 0.5)
    return 1 if eff < 1 else eff


def draw_backoff(w, stream):
    """Uniform backoff slot count in [0, round(w) - 1]."""
    eff = effective_window(w)
    if eff == 1:
        return 0
    return stream.uniform_int(0, eff - 1)
