"""Per-node hop-by-hop congestion control state and transition rules.

The four building blocks are kept side-effect free so they can be tested
against table-driven fixtures: inter-arrival / service-time averaging,
congestion classification, the four-case window/rate adjustment applied when
downstream buffer feedback arrives, and the relay-suppression rule.

The averaging formulas are implemented in two modes.  ``legacy_ewma=True``
(default) keeps them exactly as the scheme defines them: the inter-arrival
average T_a mixes the current service average T_s with the latest arrival gap,
and the service average T_s mixes the latest inter-departure gap with the frame
airtime.  ``legacy_ewma=False`` switches both to conventional self-referential
exponential averages.
"""

import math
from collections import deque
from dataclasses import dataclass


class CongestionLogicError(Exception):
    """Contract violation in congestion bookkeeping (e.g. departure from an empty buffer)."""


# Classification outcomes.
DECLARE_CONGESTION = "declare_congestion"
DAMP_LOCAL_RATE = "damp_local_rate"
CLEAR_CONGESTION = "clear_congestion"
NO_CHANGE = "no_change"

# Origin of the last feedback signal this node put on the air.
ORIGIN_NONE = "none"
ORIGIN_LOCAL = "local"
ORIGIN_RELAYED = "relayed"


@dataclass
class HcccParams:
    p: float = 0.3
    b_max: float = 0.4
    w_min: int = 1
    w_max: int = 63
    r_min: float = 0.1
    r_cap: float = 200.0
    legacy_ewma: bool = True


@dataclass
class FeedbackInfo:
    """Buffer state piggybacked on an RTS frame."""
    b_r: float
    congested: bool
    origin: int


class CongestionState:
    """Congestion variables of one node.

    T_a and T_s are seeded with the nominal service time of a single data
    frame so the congestion degree is well defined before traffic has been
    observed; the first classification is deferred until both averages have
    been updated at least once.
    """

    __slots__ = (
        "T_a", "T_s", "last_arrival", "last_departure", "C_d",
        "buffer", "capacity", "R", "R_max", "last_feedback_origin",
        "congested_flag", "arrivals_updated", "departures_updated",
    )

    def __init__(self, capacity, nominal_service_us, r_init):
        self.T_a = float(nominal_service_us)
        self.T_s = float(nominal_service_us)
        self.last_arrival = None
        self.last_departure = None
        self.C_d = None
        self.buffer = deque()
        self.capacity = capacity
        self.R = r_init
        self.R_max = r_init
        self.last_feedback_origin = ORIGIN_NONE
        self.congested_flag = False
        self.arrivals_updated = False
        self.departures_updated = False

    @property
    def b_r(self):
        return len(self.buffer) / self.capacity

    @property
    def ready(self):
        return self.arrivals_updated and self.departures_updated


def on_packet_arrival(state, t, params, item):
    """Register a packet arrival at time t; returns True if admitted to the buffer.

    The inter-arrival average is updated even when the packet is dropped for a
    full buffer: the arrival itself happened on the medium.
    """
    if state.last_arrival is None:
        state.last_arrival = t
    else:
        if t < state.last_arrival:
            raise CongestionLogicError("arrival time moved backwards")
        gap = t - state.last_arrival
        base = state.T_s if params.legacy_ewma else state.T_a
        state.T_a = (1.0 - params.p) * base + params.p * gap
        state.last_arrival = t
        state.arrivals_updated = True
    if len(state.buffer) >= state.capacity:
        return False
    state.buffer.append(item)
    return True


def on_packet_departure(state, t, t_s, params):
    """Register a successful transmission at time t with airtime t_s; pops the head packet."""
    if not state.buffer:
        raise CongestionLogicError("departure with empty buffer")
    if state.last_departure is None:
        state.last_departure = t
    else:
        if t < state.last_departure:
            raise CongestionLogicError("departure time moved backwards")
        gap = t - state.last_departure
        base = gap if params.legacy_ewma else state.T_s
        state.T_s = (1.0 - params.p) * base + params.p * t_s
        state.last_departure = t
        state.departures_updated = True
    return state.buffer.popleft()


def congestion_degree(state):
    """T_s / T_a, or None until both averages have been updated once."""
    if not state.ready:
        return None
    return state.T_s / state.T_a


def detect(state, params):
    """Classify the node's congestion condition.  Pure: does not mutate state.

    Strict inequalities throughout; equality falls to the less aggressive
    branch.  A draining buffer (C_d <= 1 with occupancy still above threshold)
    yields no state change: the congested flag persists until the clear
    condition fires.
    """
    c_d = congestion_degree(state)
    if c_d is None:
        return NO_CHANGE
    b_r = state.b_r
    if c_d > 1.0:
        if b_r > params.b_max:
            return DECLARE_CONGESTION
        return DAMP_LOCAL_RATE
    if b_r <= params.b_max:
        return CLEAR_CONGESTION
    return NO_CHANGE


def apply_detect(state, params):
    """Recompute C_d, classify, and apply the resulting state change."""
    state.C_d = congestion_degree(state)
    action = detect(state, params)
    if action == DECLARE_CONGESTION:
        state.congested_flag = True
    elif action == CLEAR_CONGESTION:
        state.congested_flag = False
    elif action == DAMP_LOCAL_RATE:
        # Restores the arrival/departure balance implied by the degree definition.
        state.R = max(params.r_min, state.R / state.C_d)
        state.R_max = state.R
    return action


def feedback_update(b_local, b_down, r, w, r_max, params):
    """Four-case window/rate adjustment, unclamped.

    b_local is this node's buffer occupancy ratio, b_down the downstream one
    from the feedback signal.  The boundary b_local == b_max with
    b_down <= b_max falls into the additive-increase case so exactly one case
    applies for every occupancy pair.
    """
    b_max = params.b_max
    inv_down = math.inf if b_down == 0.0 else 1.0 / b_down
    if b_down > b_max:
        if b_local > b_max:
            return 0.25 * r, 0.5 * (5.0 * w * b_local + 0.1 * w * inv_down)
        return 0.5 * r, 5.0 * w * b_down
    delta_r = 0.5 * (r_max - r)
    if b_local > b_max:
        return min(0.5 * r, r + delta_r), min(10.0 * w * b_down, 0.1 * w * inv_down)
    return r + delta_r, 10.0 * w * b_down


def process_feedback(state, w, b_r_down, params):
    """Compute the clamped (R', W') response to downstream feedback.  Pure.

    w is the node's current (real-valued) contention window, which lives in
    the MAC state.  Raises ValueError for a malformed occupancy ratio; callers
    count and ignore such signals.
    """
    if not 0.0 <= b_r_down <= 1.0:
        raise ValueError("malformed feedback occupancy ratio %r" % (b_r_down,))
    r_new, w_new = feedback_update(state.b_r, b_r_down, state.R, w, state.R_max, params)
    return clamp_rate(r_new, params), clamp_window(w_new, params)


def apply_feedback(state, w, b_r_down, params):
    """Apply downstream feedback to the node state; returns the new window.

    A congestion-triggered decrease (either side above threshold) resets the
    rate high-water mark to the new rate; otherwise the mark tracks the
    running maximum.
    """
    r_new, w_new = process_feedback(state, w, b_r_down, params)
    state.R = r_new
    if b_r_down > params.b_max or state.b_r > params.b_max:
        state.R_max = r_new
    elif r_new > state.R_max:
        state.R_max = r_new
    return w_new


def should_relay(state, incoming, params):
    """Whether to relay a downstream feedback signal upstream.

    Local congestion takes precedence: a congested node always sends its own
    signal.  A non-congested node relays a congested downstream signal only if
    the last signal it sent out was its own, which rate-limits relaying.
    """
    if state.b_r > params.b_max:
        return False
    if incoming.congested:
        return state.last_feedback_origin == ORIGIN_LOCAL
    return False


def generate_feedback(state, params, origin_id):
    """Feedback describing the local buffer, attached to an outgoing RTS."""
    b_r = state.b_r
    return FeedbackInfo(b_r=b_r, congested=b_r > params.b_max, origin=origin_id)


def clamp_window(w, params):
    if w < params.w_min:
        return float(params.w_min)
    if w > params.w_max:
        return float(params.w_max)
    return w


def clamp_rate(r, params):
    if r < params.r_min:
        return params.r_min
    if r > params.r_cap:
        return params.r_cap
    return r
