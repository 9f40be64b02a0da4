"""Proxy quotas with meta-monitor reversion, and partition gates."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from abase_lite.admission import (PARTITION_QUOTA_EXCEEDED, PROXY_QUOTA_EXCEEDED, MetaMonitor,
                                  PartitionGate, ProxyState, TokenBucket, apply_directive, meta_tick,
                                  partition_admit, proxy_admit)


def offer(admit, target, rate, seconds, ru=1.0, start=0.0):
    """Offer ``rate`` requests/s of ``ru`` each on an even grid; return admitted count."""
    n = int(rate * seconds)
    return sum(admit(target, ru, start + i / rate).admitted for i in range(n))


def bucket_oracle(rate, capacity, times, amounts):
    """Independent token-bucket replay in exact arithmetic order."""
    tokens, last, out = capacity, 0.0, []
    for t, a in zip(times, amounts):
        tokens = min(capacity, tokens + (t - last) * rate)
        last = t
        ok = a <= 0 or tokens >= a
        if ok and a > 0:
            tokens -= a
        out.append(ok)
    return out


class TestTokenBucket:
    @settings(max_examples=50)
    @given(st.floats(0.5, 500), st.lists(st.tuples(st.floats(0, 0.5), st.floats(0, 20)), max_size=80))
    def test_matches_oracle(self, rate, steps):
        times = np.cumsum([s[0] for s in steps]).tolist()
        amounts = [s[1] for s in steps]
        b = TokenBucket.full(rate)
        got = [b.take(a, t) for t, a in zip(times, amounts)]
        assert got == bucket_oracle(rate, rate, times, amounts)
        assert b.tokens <= b.capacity


class TestProxyAdmit:
    def test_burst_admits_up_to_double(self):
        p = ProxyState("px", "t", 100.0, burst_mode=True)
        assert offer(proxy_admit, p, 150, 60) == 9000

    def test_zero_cost_always_admitted(self):
        p = ProxyState("px", "t", 1.0, burst_mode=False)
        p.bucket.tokens = 0.0
        assert all(proxy_admit(p, 0.0, 0.0).admitted for _ in range(10))

    def test_standard_quota_enforced(self):
        p = ProxyState("px", "t", 100.0, burst_mode=False)
        seconds = 60
        admitted = offer(proxy_admit, p, 150, seconds)
        # steady rate 100/s plus at most one window of stored tokens
        assert abs(admitted - 100 * seconds) <= 100 + 1

    def test_reject_reason(self):
        p = ProxyState("px", "t", 1.0, burst_mode=False)
        assert proxy_admit(p, 1.0, 0.0).admitted
        v = proxy_admit(p, 1.0, 0.0)
        assert not v.admitted and v.reason == PROXY_QUOTA_EXCEEDED

    def test_capacity_is_ceiling_times_window(self):
        p = ProxyState("px", "t", 100.0, burst_mode=True)
        assert p.bucket.capacity == 200.0
        p.set_burst(False, 0.0)
        assert p.bucket.capacity == 100.0 and p.bucket.tokens <= 100.0


class TestMetaTick:
    def proxies(self, n=4, quota=400.0):
        return [ProxyState(f"px{i}", "t", quota / n) for i in range(n)]

    def test_overshoot_reverts_all(self):
        ps = self.proxies()
        m = MetaMonitor(poll_period=5.0)
        for p in ps:
            m.record(p, 0.4 * 400 * 5.0)  # each proxy offers 0.4 Q_T
        d = meta_tick(m, ps, 5.0)
        assert sorted(x.proxy_id for x in d if x.action == "revert") == [p.proxy_id for p in ps]

    def test_idle_tenant_no_directive(self):
        ps = self.proxies()
        assert meta_tick(MetaMonitor(), ps, 5.0) == []

    def test_idle_tenant_restores_burst(self):
        ps = self.proxies()
        for p in ps:
            p.set_burst(False, 0.0)
        d = meta_tick(MetaMonitor(), ps, 5.0)
        assert {x.action for x in d} == {"restore"} and len(d) == 4

    def test_exactly_quota_not_reverted(self):
        ps = self.proxies()
        m = MetaMonitor()
        for p in ps:
            m.record(p, 100.0 * 5.0)
        assert meta_tick(m, ps, 5.0) == []

    def test_directives_idempotent(self):
        p = ProxyState("px", "t", 10.0)
        m = MetaMonitor()
        m.record(p, 1000.0)
        (d,) = meta_tick(m, [p], 5.0)
        assert apply_directive(p, d, 6.0) is True
        assert apply_directive(p, d, 6.0) is False
        assert p.burst_mode is False

    def test_admitted_converges_to_quota(self):
        """Closed loop: 4 proxies offered 3x Q_T; meta polls every 5 s with 1 s directive delay."""
        q_t, poll, delay, horizon = 400.0, 5.0, 1.0, 200.0
        ps = self.proxies(4, q_t)
        m = MetaMonitor(poll, delay)
        rate = 3 * q_t / 4
        pending, admitted_at = [], []
        t_next_poll = poll
        n = int(rate * horizon)
        for i in range(n):
            t = i / rate
            while pending and pending[0][0] <= t:
                _, d = pending.pop(0)
                apply_directive(next(p for p in ps if p.proxy_id == d.proxy_id), d, t)
            if t >= t_next_poll:
                pending += [(t_next_poll + delay, d) for d in meta_tick(m, ps, t_next_poll)]
                t_next_poll += poll
            for p in ps:
                m.record(p, 1.0)
                if proxy_admit(p, 1.0, t).admitted:
                    admitted_at.append(t)
        total = len(admitted_at)
        assert total <= 2 * q_t * horizon
        # one poll period plus delay of burst, plus the initial bucket contents
        assert total <= q_t * horizon + 2 * q_t * (poll + delay) + 2 * q_t
        assert all(not p.burst_mode for p in ps)


class TestPartitionAdmit:
    def test_at_three_times_quota_all_admitted(self):
        g = PartitionGate("p", 1000.0)
        assert offer(partition_admit, g, 3000, 20) == 60_000

    def test_excess_rejected(self):
        g = PartitionGate("p", 1000.0)
        seconds = 20
        admitted = offer(partition_admit, g, 5000, seconds)
        assert abs(admitted - 3000 * seconds) <= 3000 + 1
        assert g.rejected == 5000 * seconds - admitted

    def test_zero_quota_rejects_everything(self):
        g = PartitionGate("p", 0.0)
        v = partition_admit(g, 1.0, 0.0)
        assert not v.admitted and v.reason == PARTITION_QUOTA_EXCEEDED

    def test_reconfigured_rate(self):
        g = PartitionGate("p", 100.0)
        g.set_quota(200.0, 0.0)
        assert g.bucket.rate == 600.0

    @settings(max_examples=40, deadline=None)
    @given(st.floats(1, 200), st.lists(st.tuples(st.floats(0, 0.05), st.floats(0.1, 5)), min_size=1, max_size=150))
    def test_window_bound(self, q_p, steps):
        g = PartitionGate("p", q_p)
        t, log = 0.0, []
        for dt, ru in steps:
            t += dt
            if partition_admit(g, ru, t).admitted:
                log.append((t, ru))
        times = np.array([x[0] for x in log])
        amounts = np.array([x[1] for x in log])
        cap = 3 * q_p
        for i in range(len(log)):
            for j in range(i, len(log)):
                window = times[j] - times[i]
                assert amounts[i:j + 1].sum() <= cap * window + cap + 1e-6
