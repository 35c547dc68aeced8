# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

"""Online checks of protocol state invariants.

The simulator hands the monitor to every node, which reports the state
transitions the invariants talk about: ACCEPT and COMMIT sends, epoch
changes, state transfer and delivery. Each violation is kept once,
keyed by property and position.
"""

import logging

from .checker import Violation
from .node import Status


class StateMonitor(object):

    def __init__(self, log=None):
        self.log = log or logging.getLogger(__name__)
        self.nodes = {}
        self.now = lambda: 0
        self.violations = []
        self.seen = set()

        # position -> {message: lowest epoch it was committed in}
        self.commits = {}
        self.commit_msg = {}
        self.commit_pos = {}
        # (epoch, position) -> (message, leader's msg[0..k])
        self.accepts = {}
        # message -> [(epoch, position)] it was sent in ACCEPT with
        self.accepted_at = {}
        # epoch -> processes that set epoch to it
        self.epoch_set = {}
        self.members = {}
        # process -> [(epoch, position)] it acknowledged in its epoch
        self.acked = {}
        # process -> (epoch, new_epoch) seen last
        self.last = {}
        self.delivered = {}
        self.theta = {}

    def violate(self, prop, key, message, **witness):
        if (prop, key) in self.seen:
            return
        self.seen.add((prop, key))
        witness.setdefault("t", self.now())
        v = Violation(prop, witness, message)
        self.log.warning("{} violated: {}".format(prop, message))
        self.violations.append(v)

    # configuration service and transitions

    def on_introduction(self, config):
        self.members[config.epoch] = config.members

    def on_epoch_set(self, node, e):
        self.epoch_set.setdefault(e, set()).add(node.pid)
        self.acked[node.pid] = []

    def on_before_new_config(self, node, e_new):
        for e, procs in self.epoch_set.items():
            members = self.members.get(e)
            if e < e_new and members and members <= procs and node.epoch < e:
                self.violate(
                    "Inv3", (node.pid, e_new),
                    "p{} leads epoch {} with epoch {} although epoch {} was "
                    "joined by all of its members".format(
                        node.pid, e_new, node.epoch, e),
                    procs=[node.pid], epoch=e_new)

    def on_accept_sent(self, node, accept):
        e, k, m = accept
        previous = self.accepts.get((e, k))
        if previous is not None and previous[0] != m:
            self.violate(
                "Inv7", (e, k),
                "ACCEPT({}, {}) sent with {} and {}".format(
                    e, k, previous[0], m),
                procs=[node.pid], epoch=e, pos=k)
            return
        self.accepts[(e, k)] = (m, tuple(node.msg[:k + 1]))
        self.accepted_at.setdefault(m, []).append((e, k))

    def on_accept_handled(self, node, e, k, m):
        self.acked.setdefault(node.pid, []).append((e, k))
        for (ae, ak) in self.acked[node.pid]:
            expected = self.accepts.get((ae, ak))
            if expected is not None and \
                    tuple(node.msg[:ak + 1]) != expected[1]:
                self.violate(
                    "Inv6", (node.pid, ae, ak),
                    "p{} acknowledged ({}, {}) but its log prefix "
                    "differs from the leader's".format(node.pid, ae, ak),
                    procs=[node.pid], epoch=ae, pos=ak)
        self._check_accepted_prefixes(node)
        self._check_committed(node, positions=[k])

    def on_new_state_sent(self, node, new_state):
        for k, m in enumerate(new_state.log):
            if m is None:
                continue
            earlier = [ek for ek in self.accepted_at.get(m, [])
                       if ek[0] < new_state.epoch and ek[1] == k]
            if not earlier:
                self.violate(
                    "Inv4", (new_state.epoch, k),
                    "NEW_STATE({}) carries {} at {} which was never "
                    "accepted there in an earlier epoch".format(
                        new_state.epoch, m, k),
                    procs=[node.pid], epoch=new_state.epoch, pos=k)

    def on_epoch_entered(self, node):
        self._check_accepted_prefixes(node)
        self._check_committed(node)
        self._check_delivered_prefix(node)

    on_new_state_handled = on_epoch_entered

    def on_commit_sent(self, node, e, k, m):
        known = self.commit_msg.setdefault(k, m)
        if known != m:
            self.violate(
                "CommitMsg", k,
                "Position {} committed with {} and {}".format(k, known, m),
                procs=[node.pid], epoch=e, pos=k)
        pos = self.commit_pos.setdefault(m, k)
        if pos != k:
            self.violate(
                "CommitPos", m.ident,
                "{} committed at positions {} and {}".format(m, pos, k),
                procs=[node.pid], epoch=e, pos=k)

        by_msg = self.commits.setdefault(k, {})
        if m not in by_msg or e < by_msg[m]:
            by_msg[m] = e
        for other in self.nodes.values():
            if other.epoch > e:
                self._check_committed(other, positions=[k])

    def on_delivered(self, node, k, m):
        for (e, ak) in self.accepted_at.get(m, []):
            if e <= node.epoch and ak != k:
                self.violate(
                    "Inv8", (node.pid, m.ident),
                    "p{} delivered {} at {} but it was accepted at {} in "
                    "epoch {}".format(node.pid, m, k, ak, e),
                    procs=[node.pid], epoch=node.epoch, pos=k)

        delivered = self.delivered.setdefault(node.pid, [])
        delivered.append(m)
        self._check_delivered_prefix(node)

        if node.app is not None and m in self.theta:
            now = node.app.machine.snapshot(node.app.committed)
            if now != self.theta[m]:
                self.violate(
                    "Inv2", (node.pid, m.ident),
                    "p{} applies {} to state {} but it was built on "
                    "{}".format(node.pid, m, now, self.theta[m]),
                    procs=[node.pid], epoch=node.epoch, pos=k)

    def on_app_broadcast(self, m, snapshot):
        self.theta[m] = snapshot

    def after_step(self, node):
        pid = node.pid
        if node.epoch > node.new_epoch:
            self.violate("Local", (pid, "epoch", node.epoch),
                         "p{} has epoch {} above new_epoch {}".format(
                             pid, node.epoch, node.new_epoch),
                         procs=[pid], epoch=node.epoch)
        epoch, new_epoch = self.last.get(pid, (0, 0))
        if node.epoch < epoch or node.new_epoch < new_epoch:
            self.violate("Local", (pid, "monotone", node.new_epoch),
                         "p{} moved back from ({}, {}) to ({}, {})".format(
                             pid, epoch, new_epoch, node.epoch,
                             node.new_epoch),
                         procs=[pid], epoch=node.epoch)
        self.last[pid] = (node.epoch, node.new_epoch)
        if node.status is Status.LEADER and \
                node.last_delivered >= node.next:
            self.violate("Local", (pid, "next", node.epoch),
                         "leader p{} delivered {} but next is {}".format(
                             pid, node.last_delivered, node.next),
                         procs=[pid], epoch=node.epoch)

    # helpers

    def _check_committed(self, node, positions=None):
        if positions is None:
            positions = list(self.commits)
        for k in positions:
            for m, e in self.commits.get(k, {}).items():
                if e >= node.epoch:
                    continue
                if k >= len(node.msg) or node.msg[k] != m:
                    self.violate(
                        "Inv1", (node.pid, k, node.epoch),
                        "{} committed at {} in epoch {} is missing at p{} "
                        "in epoch {}".format(m, k, e, node.pid, node.epoch),
                        procs=[node.pid], epoch=node.epoch, pos=k)

    def _check_accepted_prefixes(self, node):
        for (e, k), (m, prefix) in self.accepts.items():
            if e >= node.epoch or k >= len(node.msg) or node.msg[k] != m:
                continue
            if tuple(node.msg[:k + 1]) != prefix:
                self.violate(
                    "Inv5", (node.pid, e, k, node.epoch),
                    "p{} holds {} at {} in epoch {} with a prefix other "
                    "than the one accepted in epoch {}".format(
                        node.pid, m, k, node.epoch, e),
                    procs=[node.pid], epoch=node.epoch, pos=k)

    def _check_delivered_prefix(self, node):
        delivered = self.delivered.get(node.pid, [])
        if len(delivered) != node.last_delivered + 1:
            self.violate("Local", (node.pid, "delivered", len(delivered)),
                         "p{} delivered {} messages but last_delivered is "
                         "{}".format(node.pid, len(delivered),
                                     node.last_delivered),
                         procs=[node.pid], epoch=node.epoch)
            return
        if tuple(node.msg[:len(delivered)]) != tuple(delivered):
            self.violate("Local", (node.pid, "prefix", node.epoch),
                         "p{} log prefix differs from what it "
                         "delivered".format(node.pid),
                         procs=[node.pid], epoch=node.epoch)
