"""Evaluation metrics computed from run records: loss ratio, throughput,
average source rate, energy efficiency and the fairness degree.

Steady-state means exclude a configurable warmup interval; full time series
are retained so transient behaviour stays plottable from the CSV output.
"""

import math
from dataclasses import dataclass, field

from .traffic import DELIVERED, BUFFER_OVERFLOW, MAC_RETRY_EXHAUSTED, IN_FLIGHT


@dataclass
class MetricsReport:
    scheme: str
    seed: int
    node_count: int
    duration_s: float
    generated: int
    delivered: int
    overflow_drops: int
    mac_drops: int
    in_flight: int
    packet_loss_ratio: float
    throughput_mean: float          # pps at sink, post warmup
    avg_source_rate_mean: float     # pps, post warmup
    source_rate_cov: float          # coefficient of variation, post warmup
    energy_efficiency: float
    fairness: float                 # None when not applicable
    data_attempts: int
    energy_consumed_j: float
    # series: list of rows (t_start_s, t_end_s, generated, delivered, drops,
    #                       loss_ratio, throughput_pps)
    windows: list = field(default_factory=list)
    rate_series: list = field(default_factory=list)  # (t_s, mean source rate)


def packet_loss_ratio(records):
    """Dropped / generated, with packets still in flight at run end excluded
    from both numerator and denominator."""
    terminal = 0
    drops = 0
    for r in records:
        if r.outcome == IN_FLIGHT:
            continue
        terminal += 1
        if r.outcome in (BUFFER_OVERFLOW, MAC_RETRY_EXHAUSTED):
            drops += 1
    if terminal == 0:
        return 0.0
    return drops / terminal


def window_series(records, window_us, duration_us):
    """Per-window generation, delivery and drop counts."""
    if duration_us <= 0 or window_us <= 0:
        return []
    n_windows = max(1, math.ceil(duration_us / window_us))
    gen = [0] * n_windows
    dlv = [0] * n_windows
    drp = [0] * n_windows
    for r in records:
        w = min(int(r.created_us // window_us), n_windows - 1)
        gen[w] += 1
        if r.outcome == DELIVERED:
            w2 = min(int(r.end_us // window_us), n_windows - 1)
            dlv[w2] += 1
        elif r.outcome in (BUFFER_OVERFLOW, MAC_RETRY_EXHAUSTED):
            w2 = min(int(r.end_us // window_us), n_windows - 1)
            drp[w2] += 1
    rows = []
    for w in range(n_windows):
        t0 = w * window_us / 1e6
        t1 = min((w + 1) * window_us, duration_us) / 1e6
        span = t1 - t0
        loss = drp[w] / gen[w] if gen[w] else 0.0
        tput = dlv[w] / span if span > 0 else 0.0
        rows.append((t0, t1, gen[w], dlv[w], drp[w], loss, tput))
    return rows


def throughput_mean(records, warmup_us, duration_us):
    """Mean sink delivery rate (pps) over the post-warmup interval."""
    span_us = duration_us - warmup_us
    if span_us <= 0:
        return 0.0
    count = sum(1 for r in records
                if r.outcome == DELIVERED and r.end_us >= warmup_us)
    return count / (span_us / 1e6)


def fairness(rates, squared=True):
    """Fairness degree of a per-source rate vector.

    The squared form (sum r)^2 / (N sum r^2) is the standard dimensionless
    index: 1 for equal rates, 1/N when a single source is active.  The
    non-squared numerator variant is available behind the flag for
    completeness; it is not dimensionless.  Returns None for an all-zero or
    empty vector.
    """
    n = len(rates)
    if n == 0:
        return None
    total = sum(rates)
    sq = sum(r * r for r in rates)
    if sq == 0:
        return None
    if squared:
        return (total * total) / (n * sq)
    return total / (n * sq)


def mean_std(values):
    n = len(values)
    if n == 0:
        return 0.0, 0.0
    m = sum(values) / n
    var = sum((v - m) ** 2 for v in values) / n
    return m, math.sqrt(var)


def aggregate(reports):
    """Cross-seed mean/stddev/min/max for every scalar metric."""
    if not reports:
        raise ValueError("aggregate requires at least one report")
    out = {}
    for name in ("packet_loss_ratio", "throughput_mean", "avg_source_rate_mean",
                 "source_rate_cov", "energy_efficiency", "fairness"):
        values = [getattr(r, name) for r in reports]
        values = [v for v in values if v is not None]
        if not values:
            out[name] = None
            continue
        m, s = mean_std(values)
        out[name] = {"mean": m, "stddev": s, "min": min(values), "max": max(values)}
    return out


def build_report(result):
    """Assemble the full metrics report for one run."""
    cfg = result.config
    duration_us = int(round(cfg.duration * 1e6))
    warmup_us = int(round(cfg.warmup * 1e6))
    window_us = int(round(cfg.window * 1e6))

    post = [(t, sum(rates) / len(rates)) for t, rates in result.rate_samples
            if rates]
    post_warm = [m for t, m in post if t >= warmup_us]
    rate_mean, rate_std = mean_std(post_warm)
    cov = rate_std / rate_mean if rate_mean > 0 else 0.0

    # Per-source mean rate over the post-warmup samples, for the fairness degree.
    per_source = []
    if result.rate_samples and result.rate_samples[0][1]:
        n_src = len(result.rate_samples[0][1])
        sums = [0.0] * n_src
        count = 0
        for t, rates in result.rate_samples:
            if t >= warmup_us:
                count += 1
                for i, r in enumerate(rates):
                    sums[i] += r
        if count:
            per_source = [s / count for s in sums]
    phi = fairness(per_source, squared=not cfg.printed_fairness) \
        if per_source else None

    efficiency = (result.energy_remaining_nj / result.energy_initial_nj
                  if result.energy_initial_nj else 1.0)

    return MetricsReport(
        scheme=cfg.scheme,
        seed=cfg.seed,
        node_count=cfg.node_count,
        duration_s=cfg.duration,
        generated=result.generated,
        delivered=result.delivered,
        overflow_drops=result.overflow_drops,
        mac_drops=result.mac_drops,
        in_flight=result.in_flight,
        packet_loss_ratio=packet_loss_ratio(result.records),
        throughput_mean=throughput_mean(result.records, warmup_us, duration_us),
        avg_source_rate_mean=rate_mean,
        source_rate_cov=cov,
        energy_efficiency=efficiency,
        fairness=phi,
        data_attempts=result.data_attempts,
        energy_consumed_j=(result.energy_initial_nj - result.energy_remaining_nj)
        / 1e9,
        windows=window_series(result.records, window_us, duration_us),
        rate_series=[(t / 1e6, m) for t, m in post],
    )


# ---- CSV emission -------------------------------------------------------

SUMMARY_COLUMNS = (
    "scheme", "seed", "node_count", "duration_s", "generated", "delivered",
    "overflow_drops", "mac_drops", "in_flight", "packet_loss_ratio",
    "throughput_mean_pps", "avg_source_rate_mean_pps", "source_rate_cov",
    "energy_efficiency", "fairness", "data_attempts", "energy_consumed_j",
)


def _fmt(value):
    if value is None:
        return "na"
    if isinstance(value, float):
        return "%.10g" % value
    return str(value)


def summary_row(report):
    return [report.scheme, report.seed, report.node_count, report.duration_s,
            report.generated, report.delivered, report.overflow_drops,
            report.mac_drops, report.in_flight, report.packet_loss_ratio,
            report.throughput_mean, report.avg_source_rate_mean,
            report.source_rate_cov, report.energy_efficiency, report.fairness,
            report.data_attempts, report.energy_consumed_j]


def write_summary_csv(path, reports):
    with open(path, "w") as f:
        f.write(",".join(SUMMARY_COLUMNS) + "\n")
        for report in reports:
            f.write(",".join(_fmt(v) for v in summary_row(report)) + "\n")


def write_series_csv(path, report):
    with open(path, "w") as f:
        f.write("window_start_s,window_end_s,generated,delivered,dropped,"
                "loss_ratio,throughput_pps\n")
        for row in report.windows:
            f.write(",".join(_fmt(v) for v in row) + "\n")
        f.write("\n")
        f.write("t_s,mean_source_rate_pps\n")
        for t, m in report.rate_series:
            f.write("%s,%s\n" % (_fmt(t), _fmt(m)))


def write_packets_csv(path, records):
    with open(path, "w") as f:
        f.write("id,origin,seq,created_us,outcome,end_us,hops\n")
        for r in records:
            f.write("%d,%d,%d,%d,%s,%s,%d\n" % (
                r.id, r.origin, r.seq, r.created_us, r.outcome,
                "" if r.end_us is None else r.end_us, r.hops))
