# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

"""Latency and reconfiguration downtime, measured in simulated time
units while the simulator runs.
"""

from collections import OrderedDict

from .errors import UnknownEpoch
from .history import Broadcast, Deliver


class Metrics(object):
    """Observer fed by the nodes through the simulator.

    sim must expose now(), cs, nodes and crashed.
    """

    def __init__(self, sim):
        self.sim = sim
        # message -> (leader, epoch, time it was handed to the leader)
        self.received = {}
        self.latencies = []
        # epoch -> set of processes that joined it
        self.joined = {}
        self.activation = {}
        # new epoch -> (time, old configuration was functional)
        self.disabled = {}
        self.ready = {}
        # new epoch -> history length at the first PROBE / at NEW_CONFIG
        self.first_probe = {}
        self.disable_index = {}
        self.rejected = 0

    def on_broadcast_received(self, node, m):
        self.received[m] = (node.pid, node.epoch, self.sim.now())

    def on_deliver(self, node, m):
        leader, epoch, t0 = self.received.get(m, (None, None, None))
        if leader != node.pid or epoch != node.epoch:
            return
        if self.is_stable(epoch):
            self.latencies.append(self.sim.now() - t0)

    def on_conf_changed(self, proc, config):
        joined = self.joined.setdefault(config.epoch, set())
        joined.add(proc)
        if config.epoch not in self.activation and config.members <= joined:
            self.activation[config.epoch] = self.sim.now()

    def on_probe_sent(self, e_new, history):
        self.first_probe.setdefault(e_new, len(history))

    def on_disable(self, node, e_new):
        self.disable_index[e_new] = len(self.sim.history)
        self.disabled[e_new] = (self.sim.now(), self.is_functional(e_new - 1))

    def on_ready(self, node, e):
        self.ready.setdefault(e, self.sim.now())

    def is_functional(self, epoch):
        """Configuration is activated and none of its members crashed"""
        if epoch not in self.activation:
            return False
        try:
            config = self.sim.cs.get_config(epoch)
        except UnknownEpoch:
            return False
        return not (config.members & set(self.sim.crashed))

    def is_stable(self, epoch):
        return (epoch == self.sim.cs.get_last_epoch()
                and self.is_functional(epoch))

    def steady_latency(self):
        """Worst observed broadcast-to-delivery latency at the leader in
        a stable configuration, None if nothing was sampled.
        """
        return max(self.latencies) if self.latencies else None

    def downtime(self, epoch):
        """Time between the new leader disabling the old configuration
        and broadcasting in the new one, None when not applicable.
        """
        if epoch not in self.disabled or epoch not in self.ready:
            return None
        t, functional = self.disabled[epoch]
        if not functional:
            return None
        return self.ready[epoch] - t

    def window_commits(self, history, epochs):
        """Per reconfiguration, how many messages broadcast between the
        first PROBE and the new leader's NEW_CONFIG were delivered in the
        old configuration.
        """
        out = OrderedDict()
        delivered_in = {}
        for idx, action in history.actions(Deliver):
            delivered_in.setdefault(action.msg, set()).add(epochs[idx])
        for e_new in sorted(self.disable_index):
            if e_new not in self.first_probe:
                continue
            lo, hi = self.first_probe[e_new], self.disable_index[e_new]
            count = 0
            for idx, action in history.actions(Broadcast):
                if lo < idx <= hi and \
                        (e_new - 1) in delivered_in.get(action.msg, ()):
                    count += 1
            out[e_new] = count
        return out

    def summary(self, history=None, epochs=None):
        downtime = OrderedDict()
        for e in sorted(self.disabled):
            value = self.downtime(e)
            downtime[str(e)] = value if value is not None else "n/a"
        out = OrderedDict([
            ("steady_latency", self.steady_latency()),
            ("latency_samples", len(self.latencies)),
            ("downtime", downtime),
            ("activation", OrderedDict(
                (str(e), t) for e, t in sorted(self.activation.items()))),
            ("rejected_broadcasts", self.rejected),
        ])
        if history is not None:
            out["window_commits"] = OrderedDict(
                (str(e), n) for e, n in
                self.window_commits(history, epochs).items())
        return out
