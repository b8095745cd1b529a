"""Event-driven multi-hop network simulation.

One Simulation owns one run: the event engine, per-node MAC and congestion
state, the unit-disk channel and the traffic/energy lifecycle.  The channel
model is physical-overlap based: a reception fails iff a second in-range
transmission overlaps it in time, or the receiver is itself transmitting.
A transmission that starts at the current instant is not carrier-sensed
(detection takes nonzero time), which is what makes simultaneous
equal-backoff transmissions collide.

Channel access works without per-slot polling: a node counts its backoff down
in one scheduled wake-up and is frozen by any transmission it hears, resuming
one DIFS (plus a small desynchronisation jitter) after the medium clears.
The DIFS-after-busy rule is also what protects SIFS-separated frames of an
ongoing exchange from being trampled by waiting contenders.
"""

import math
from dataclasses import dataclass, field

from . import congestion
from .config import ScenarioConfig
from .congestion import CongestionState, HcccParams
from .engine import Engine, RandomStream
from .mac import RTS, CTS, DATA, ACK, Frame, MacTiming, draw_backoff
from .topology import build_topology
from .traffic import (AimdSource, EnergyBook, Packet, PacketRecord,
                      DELIVERED, BUFFER_OVERFLOW, MAC_RETRY_EXHAUSTED)

# MAC phases
IDLE = 0
BACKOFF = 1
AWAIT_CTS = 2
SENDING = 3
AWAIT_ACK = 4


class Node:
    __slots__ = (
        "id", "role", "x", "y", "neighbors", "next_hop", "hop_count",
        "stream", "energy", "alive", "death_time",
        "cc", "w", "aimd",
        "phase", "counting", "remaining", "count_since", "wake_time",
        "epoch", "retries", "access_pending", "access_started_at",
        "next_access_time",
        "tx_end", "busy_until", "rx_list", "responding_until",
        "pending_feedback", "relay_fb", "last_accepted", "gen_seq",
        "delivered_fwd", "access_delay_sum", "access_delay_n",
        "data_attempts", "admitted", "removed",
    )

    def __init__(self, spec, stream, energy, cc, w):
        self.id = spec.id
        self.role = spec.role
        self.x = spec.x
        self.y = spec.y
        self.neighbors = []
        self.next_hop = None
        self.hop_count = None
        self.stream = stream
        self.energy = energy
        self.alive = True
        self.death_time = None
        self.cc = cc
        self.w = w
        self.aimd = None
        self.phase = IDLE
        self.counting = False
        self.remaining = 0
        self.count_since = 0
        self.wake_time = 0
        self.epoch = 0
        self.retries = 0
        self.access_pending = False
        self.access_started_at = 0
        self.next_access_time = 0
        self.tx_end = 0
        self.busy_until = 0
        self.rx_list = []
        self.responding_until = 0
        self.pending_feedback = None
        self.relay_fb = None
        self.last_accepted = {}
        self.gen_seq = 0
        self.delivered_fwd = 0
        self.access_delay_sum = 0
        self.access_delay_n = 0
        self.data_attempts = 0
        self.admitted = 0
        self.removed = 0


@dataclass
class RunResult:
    config: ScenarioConfig
    topology: object
    records: list
    generated: int
    delivered: int
    overflow_drops: int
    mac_drops: int
    data_attempts: int
    ctrl_attempts: int
    energy_initial_nj: int
    energy_remaining_nj: int
    malformed_feedback: int
    source_ids: list
    rate_samples: list          # (t_us, tuple of per-source rates)
    nodes: list
    events_processed: int
    mac_trace: list = field(default_factory=list)
    hccc_trace: list = field(default_factory=list)

    @property
    def in_flight(self):
        return self.generated - self.delivered - self.overflow_drops - self.mac_drops


class Simulation:
    """One deterministic run of a scenario.

    topology may be supplied explicitly (tests build hand-crafted fixtures);
    w_override pins per-node contention windows, which the baseline schemes
    never touch.
    """

    def __init__(self, cfg, topology=None, w_override=None, check_carrier=False):
        self.cfg = cfg
        self.engine = Engine()
        self.timing = MacTiming(cfg)
        self.params = HcccParams(p=cfg.p, b_max=cfg.b_max, w_min=cfg.w_min,
                                 w_max=cfg.w_max, r_min=cfg.r_min, r_cap=cfg.r_cap,
                                 legacy_ewma=cfg.legacy_ewma)
        self.is_hccc = cfg.scheme == "hccc"
        self.is_aimd = cfg.scheme == "aimd_e2e"
        self.check_carrier = check_carrier
        self.topology = topology if topology is not None else build_topology(
            cfg, RandomStream(cfg.seed, 0))

        nominal_service = self.timing.data_air + self.timing.slot
        nodes = []
        for spec in self.topology.nodes:
            stream = RandomStream(cfg.seed, spec.id + 1)
            energy = EnergyBook(cfg.energy_initial, cfg.energy_per_packet,
                                cfg.energy_control)
            if spec.role == "source":
                r_init = min(max(cfg.offered_load, cfg.r_min), cfg.r_cap)
            else:
                r_init = cfg.r_cap
            cc = CongestionState(cfg.buffer_capacity, nominal_service, r_init)
            w = float(cfg.w_max)
            if w_override and spec.id in w_override:
                w = float(w_override[spec.id])
            node = Node(spec, stream, energy, cc, w)
            nodes.append(node)
        for node in nodes:
            node.neighbors = [nodes[j] for j in self.topology.adjacency[node.id]]
            nh = self.topology.next_hop[node.id]
            node.next_hop = nodes[nh] if nh is not None else None
            node.hop_count = self.topology.hop_count[node.id]
        self.nodes = nodes
        self.sink = nodes[0]

        self.sources = [n for n in nodes if n.role == "source"
                        and self.topology.reachable(n.id)]
        if self.is_aimd:
            for src in self.sources:
                src.aimd = AimdSource(max(cfg.offered_load, cfg.r_min),
                                      cfg.aimd_alpha, cfg.r_min, cfg.r_cap)
        self.sink_expected = {}

        self.records = {}
        self.next_pkt_id = 0
        self.generated = 0
        self.delivered = 0
        self.overflow_drops = 0
        self.mac_drops = 0
        self.data_attempts = 0
        self.ctrl_attempts = 0
        self.malformed_feedback = 0
        self.rate_samples = []
        self.mac_trace = []
        self.hccc_trace = []
        self.limit_us = 0

    # ---- rates ----------------------------------------------------------

    def _source_rate(self, node):
        if self.is_hccc:
            return node.cc.R
        if self.is_aimd:
            return node.aimd.rate
        return self.cfg.offered_load

    def _pacing_rate(self, node):
        if self.is_hccc:
            return node.cc.R
        if node.role == "source":
            return max(self._source_rate(node), self.cfg.r_min)
        return self.cfg.r_cap

    def _gen_interval(self, node, rate):
        mean_us = 1_000_000.0 / rate
        if self.cfg.traffic == "poisson":
            u = node.stream.random()
            return max(1, int(-math.log(1.0 - u) * mean_us))
        return max(1, int(mean_us))

    # ---- channel --------------------------------------------------------

    def _jitter(self, node):
        jmax = self.timing.jitter_max
        if jmax <= 0:
            return 0
        return node.stream.uniform_int(0, jmax - 1)

    def _sensed_busy(self, node, now):
        if node.tx_end > now:
            return True
        for r in node.rx_list:
            if r[1] < now < r[2]:
                return True
        return False

    def _start_tx(self, node, frame):
        now = self.engine.now
        air = self.timing.airtime(frame.kind)
        end = now + air
        if frame.kind == DATA:
            node.energy.charge_data()
            node.data_attempts += 1
            self.data_attempts += 1
            if node.alive and node.energy.exhausted:
                node.alive = False
                node.death_time = now
        else:
            self.ctrl_attempts += 1
            node.energy.charge_control()
            if node.energy.control_nj and node.alive and node.energy.exhausted:
                node.alive = False
                node.death_time = now
        node.tx_end = end
        if node.phase == BACKOFF and node.counting and node.wake_time > now:
            self._freeze(node, now)
        for n in node.neighbors:
            if not n.alive:
                continue
            rx = [frame, now, end, True]
            if n.tx_end > now:
                rx[3] = False
            for other in n.rx_list:
                if other[2] > now:
                    other[3] = False
                    rx[3] = False
            n.rx_list.append(rx)
            if end > n.busy_until:
                n.busy_until = end
            if n.phase == BACKOFF and n.counting and n.wake_time > now:
                self._freeze(n, now)
        if self.cfg.trace_mac:
            self.mac_trace.append((now, node.id, frame.kind, frame.dst, "tx_start"))
        self.engine.schedule(end, self._tx_end, node, frame)

    def _tx_end(self, node, frame):
        timing = self.timing
        fer = timing.error_rate(frame.kind)
        dst_outcome = "no_receiver"
        for n in node.neighbors:
            lst = n.rx_list
            for i, entry in enumerate(lst):
                if entry[0] is frame:
                    del lst[i]
                    if entry[3] and n.alive:
                        if fer == 0.0 or n.stream.random() >= fer:
                            if n.id == frame.dst:
                                dst_outcome = "ok"
                            self._on_frame(n, frame)
                        elif n.id == frame.dst:
                            dst_outcome = "corrupted"
                    elif n.id == frame.dst:
                        dst_outcome = "collided" if n.alive else "dead_receiver"
                    break
        if self.cfg.trace_mac:
            self.mac_trace.append((self.engine.now, node.id, frame.kind,
                                   frame.dst, dst_outcome))

    # ---- backoff --------------------------------------------------------

    def _schedule_wake(self, node, at):
        node.epoch += 1
        self.engine.schedule(at, self._backoff_wake, node, node.epoch)

    def _freeze(self, node, now):
        slot = self.timing.slot
        node.remaining -= (now - node.count_since) // slot
        node.counting = False
        wake = max(node.busy_until, node.tx_end) + self.timing.difs + self._jitter(node)
        self._schedule_wake(node, wake)

    def _backoff_wake(self, node, epoch):
        if epoch != node.epoch or not node.alive or node.phase != BACKOFF:
            return
        now = self.engine.now
        if node.counting:
            node.counting = False
            node.remaining = 0
        if self._sensed_busy(node, now):
            wake = max(node.busy_until, node.tx_end) + self.timing.difs + self._jitter(node)
            self._schedule_wake(node, wake)
            return
        if now < node.responding_until:
            self._schedule_wake(node, node.responding_until + self.timing.difs
                                + self._jitter(node))
            return
        if node.remaining <= 0:
            self._tx_rts(node)
            return
        # A transmission starting at this exact instant is not sensed, but the
        # medium is occupied for the rest of the countdown; defer instead.
        for r in node.rx_list:
            if r[2] > now:
                wake = max(node.busy_until, node.tx_end) + self.timing.difs \
                    + self._jitter(node)
                self._schedule_wake(node, wake)
                return
        node.counting = True
        node.count_since = now
        node.wake_time = now + node.remaining * self.timing.slot
        self._schedule_wake(node, node.wake_time)

    # ---- channel access / exchange --------------------------------------

    def _start_access(self, node):
        if (node.access_pending or not node.alive or node.phase != IDLE
                or not node.cc.buffer or node.next_hop is None):
            return
        node.access_pending = True
        at = max(self.engine.now, node.next_access_time)
        self.engine.schedule(at, self._access_begin, node)

    def _access_begin(self, node):
        node.access_pending = False
        if not node.alive or node.phase != IDLE or not node.cc.buffer \
                or node.next_hop is None:
            return
        now = self.engine.now
        if self.is_hccc:
            if node.pending_feedback is not None:
                self._consume_feedback(node)
            action = congestion.apply_detect(node.cc, self.params)
            if self.cfg.trace_hccc:
                cc = node.cc
                self.hccc_trace.append((now, node.id, cc.b_r, cc.C_d, cc.R,
                                        node.w, "detect:%s" % action))
        rate = self._pacing_rate(node)
        node.next_access_time = now + max(1, int(1_000_000.0 / rate))
        node.phase = BACKOFF
        node.retries = 0
        node.counting = False
        node.access_started_at = now
        node.remaining = draw_backoff(node.w, node.stream)
        self._schedule_wake(node, now + self.timing.difs + self._jitter(node))

    def _consume_feedback(self, node):
        fb = node.pending_feedback
        node.pending_feedback = None
        if not 0.0 <= fb.b_r <= 1.0:
            self.malformed_feedback += 1
            return
        if congestion.should_relay(node.cc, fb, self.params):
            node.relay_fb = fb
        node.w = congestion.apply_feedback(node.cc, node.w, fb.b_r, self.params)
        if self.cfg.trace_hccc:
            cc = node.cc
            self.hccc_trace.append((self.engine.now, node.id, cc.b_r, cc.C_d,
                                    cc.R, node.w, "feedback"))

    def _build_feedback(self, node):
        cc = node.cc
        b_r = cc.b_r
        if b_r > self.params.b_max:
            cc.last_feedback_origin = congestion.ORIGIN_LOCAL
            return congestion.FeedbackInfo(b_r, True, node.id)
        if node.relay_fb is not None:
            fb = node.relay_fb
            node.relay_fb = None
            cc.last_feedback_origin = congestion.ORIGIN_RELAYED
            return fb
        return congestion.FeedbackInfo(b_r, False, node.id)

    def _tx_rts(self, node):
        now = self.engine.now
        if self.check_carrier:
            assert not self._sensed_busy(node, now), \
                "node %d transmitting into a busy medium at t=%d" % (node.id, now)
        head = node.cc.buffer[0]
        feedback = self._build_feedback(node) if self.is_hccc else None
        frame = Frame(RTS, node.id, node.next_hop.id, self.cfg.control_size,
                      feedback, head.id, head)
        node.phase = AWAIT_CTS
        self._start_tx(node, frame)
        node.epoch += 1
        self.engine.schedule(now + self.timing.cts_timeout,
                             self._cts_timeout, node, node.epoch)

    def _tx_cts(self, node, rts_frame):
        if not node.alive or node.tx_end > self.engine.now:
            return
        self._start_tx(node, Frame(CTS, node.id, rts_frame.src,
                                   self.cfg.control_size, None, rts_frame.data_id))

    def _tx_data(self, node):
        if node.phase != SENDING or not node.alive:
            return
        now = self.engine.now
        if node.tx_end > now:
            self._retry(node)
            return
        head = node.cc.buffer[0]
        frame = Frame(DATA, node.id, node.next_hop.id, self.cfg.packet_size,
                      None, head.id, head)
        node.phase = AWAIT_ACK
        self._start_tx(node, frame)
        node.epoch += 1
        self.engine.schedule(now + self.timing.ack_timeout,
                             self._ack_timeout, node, node.epoch)

    def _tx_ack(self, node, data_frame):
        if not node.alive or node.tx_end > self.engine.now:
            return
        self._start_tx(node, Frame(ACK, node.id, data_frame.src,
                                   self.cfg.control_size, None, data_frame.data_id))

    def _cts_timeout(self, node, epoch):
        if epoch != node.epoch or node.phase != AWAIT_CTS:
            return
        self._retry(node)

    def _ack_timeout(self, node, epoch):
        if epoch != node.epoch or node.phase != AWAIT_ACK:
            return
        self._retry(node)

    def _retry(self, node):
        node.epoch += 1
        if not node.alive:
            node.phase = IDLE
            return
        node.retries += 1
        if node.retries > self.timing.retry_limit:
            pkt = node.cc.buffer.popleft()
            node.removed += 1
            if self.records[pkt.id].finish(MAC_RETRY_EXHAUSTED, self.engine.now,
                                           pkt.hops):
                self.mac_drops += 1
            node.phase = IDLE
            self._start_access(node)
            return
        node.phase = BACKOFF
        node.counting = False
        node.remaining = draw_backoff(node.w, node.stream)
        self._schedule_wake(node, self.engine.now + self.timing.difs
                            + self._jitter(node))

    def _complete_send(self, node):
        now = self.engine.now
        if self.is_hccc:
            congestion.on_packet_departure(node.cc, now, self.timing.data_air,
                                           self.params)
        else:
            node.cc.buffer.popleft()
        node.removed += 1
        node.delivered_fwd += 1
        node.access_delay_sum += now - node.access_started_at
        node.access_delay_n += 1
        node.phase = IDLE
        if node.alive:
            self._start_access(node)

    # ---- reception ------------------------------------------------------

    def _on_frame(self, node, frame):
        now = self.engine.now
        kind = frame.kind
        if kind == RTS:
            fb = frame.feedback
            if (fb is not None and self.is_hccc and node.next_hop is not None
                    and frame.src == node.next_hop.id):
                node.pending_feedback = fb
            if (frame.dst == node.id and node.alive and node.tx_end <= now
                    and now >= node.responding_until
                    and node.phase in (IDLE, BACKOFF)):
                t = self.timing
                node.responding_until = (now + 3 * t.sifs + 2 * t.ctrl_air
                                         + t.data_air)
                self.engine.schedule(now + t.sifs, self._tx_cts, node, frame)
        elif kind == CTS:
            if (frame.dst == node.id and node.phase == AWAIT_CTS
                    and node.cc.buffer and frame.data_id == node.cc.buffer[0].id):
                node.epoch += 1
                node.phase = SENDING
                self.engine.schedule(now + self.timing.sifs, self._tx_data, node)
        elif kind == DATA:
            if frame.dst == node.id and node.alive:
                self.engine.schedule(now + self.timing.sifs, self._tx_ack,
                                     node, frame)
                if node.last_accepted.get(frame.src) == frame.data_id:
                    return
                node.last_accepted[frame.src] = frame.data_id
                pkt = frame.packet
                pkt.hops += 1
                if node.id == 0:
                    self._deliver_at_sink(pkt, now)
                else:
                    self._admit(node, pkt)
        elif kind == ACK:
            if (frame.dst == node.id and node.phase == AWAIT_ACK
                    and node.cc.buffer and frame.data_id == node.cc.buffer[0].id):
                node.epoch += 1
                self._complete_send(node)

    def _deliver_at_sink(self, pkt, now):
        if self.records[pkt.id].finish(DELIVERED, now, pkt.hops):
            self.delivered += 1
        if self.is_aimd:
            expected = self.sink_expected.get(pkt.origin, 0)
            if pkt.seq > expected:
                src = self.nodes[pkt.origin]
                if src.aimd is not None and src.alive:
                    src.aimd.on_loss_signal(now)
            if pkt.seq >= expected:
                self.sink_expected[pkt.origin] = pkt.seq + 1

    def _admit(self, node, pkt):
        now = self.engine.now
        if self.is_hccc:
            ok = congestion.on_packet_arrival(node.cc, now, self.params, pkt)
        else:
            cc = node.cc
            if len(cc.buffer) >= cc.capacity:
                ok = False
            else:
                cc.buffer.append(pkt)
                ok = True
        if ok:
            node.admitted += 1
            self._start_access(node)
        else:
            if self.records[pkt.id].finish(BUFFER_OVERFLOW, now, pkt.hops):
                self.overflow_drops += 1

    # ---- traffic --------------------------------------------------------

    def _on_generate(self, node):
        if not node.alive:
            return
        now = self.engine.now
        pkt = Packet(self.next_pkt_id, node.id, node.gen_seq, now)
        node.gen_seq += 1
        self.records[pkt.id] = PacketRecord(pkt.id, node.id, pkt.seq, now)
        self.next_pkt_id += 1
        self.generated += 1
        self._admit(node, pkt)
        rate = self._source_rate(node)
        self.engine.schedule(now + self._gen_interval(node, rate),
                             self._on_generate, node)

    def _on_sample(self):
        now = self.engine.now
        self.rate_samples.append((now, tuple(self._source_rate(s)
                                             for s in self.sources)))
        if now + 1_000_000 <= self.limit_us:
            self.engine.schedule(now + 1_000_000, self._on_sample)

    def _on_aimd_tick(self, node):
        if not node.alive:
            return
        now = self.engine.now
        node.aimd.on_second_tick(now)
        if now + 1_000_000 <= self.limit_us:
            self.engine.schedule(now + 1_000_000, self._on_aimd_tick, node)

    # ---- public ---------------------------------------------------------

    def carrier_busy(self, node_id):
        """True iff any in-range transmission is audible at this node right now."""
        return self._sensed_busy(self.nodes[node_id], self.engine.now)

    def run(self):
        cfg = self.cfg
        self.limit_us = int(round(cfg.duration * 1_000_000))
        if cfg.offered_load > 0:
            for src in self.sources:
                interval = self._gen_interval(src, self._source_rate(src))
                offset = 1 + src.stream.uniform_int(0, max(0, interval - 1))
                self.engine.schedule(offset, self._on_generate, src)
        self.engine.schedule(0, self._on_sample)
        if self.is_aimd:
            for src in self.sources:
                if 1_000_000 <= self.limit_us:
                    self.engine.schedule(1_000_000, self._on_aimd_tick, src)
        self.engine.run_until(self.limit_us)

        records = [self.records[i] for i in range(self.next_pkt_id)]
        total_initial = sum(n.energy.initial_nj for n in self.nodes)
        total_remaining = sum(n.energy.remaining_nj for n in self.nodes)
        return RunResult(
            config=cfg,
            topology=self.topology,
            records=records,
            generated=self.generated,
            delivered=self.delivered,
            overflow_drops=self.overflow_drops,
            mac_drops=self.mac_drops,
            data_attempts=self.data_attempts,
            ctrl_attempts=self.ctrl_attempts,
            energy_initial_nj=total_initial,
            energy_remaining_nj=total_remaining,
            malformed_feedback=self.malformed_feedback,
            source_ids=[s.id for s in self.sources],
            rate_samples=self.rate_samples,
            nodes=self.nodes,
            events_processed=self.engine.processed,
            mac_trace=self.mac_trace,
            hccc_trace=self.hccc_trace,
        )


def run_scenario(cfg, topology=None, w_override=None, check_carrier=False):
    return Simulation(cfg, topology=topology, w_override=w_override,
                      check_carrier=check_carrier).run()
