# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

"""Per-process broadcast state machine: normal-path broadcast/commit,
state transfer on reconfiguration and the primary-order mode hooks.

Every handler is a guard plus a body. A message whose guard is false is
buffered and re-evaluated after each local transition, and dropped once
its guard can never become true again.
"""

import logging
from collections import deque
from enum import Enum

from .errors import NotLeaderError, ProtocolError
from .history import Broadcast, ConfChanged, Deliver
from .messages import (Forward, Accept, AcceptAck, Commit, Probe, ProbeAck,
                       NewConfig, NewState, NewStateAck, ReplayDone, Execute,
                       Result, name_of)
from .model import Configuration
from .reconfig import ReconfigTask, Start, ProbeAckEvent


class Status(Enum):
    LEADER = "leader"
    FOLLOWER = "follower"
    FRESH = "fresh"


class Mode(Enum):
    VAB = "vab"
    PO = "po"
    SPO = "spo"


class AckTracker(object):
    """Collects ACCEPT_ACK and NEW_STATE_ACK senders until the
    'from all members' guards fire. Cleared on every epoch change.
    """

    def __init__(self):
        self.accept = {}
        self.new_state = {}
        self.fired = set()

    def ack_accept(self, epoch, pos, proc):
        self.accept.setdefault((epoch, pos), set()).add(proc)

    def accepters(self, epoch, pos):
        return self.accept.get((epoch, pos), set())

    def ack_new_state(self, epoch, proc):
        self.new_state.setdefault(epoch, set()).add(proc)

    def new_state_ackers(self, epoch):
        return self.new_state.get(epoch, set())

    def clear(self):
        self.accept.clear()
        self.new_state.clear()
        self.fired.clear()


class Node(object):
    """Protocol variables and handlers of one simulated process.

    env is the simulator: it owns the clock, transport, history and the
    metric/monitor observers.
    """

    def __init__(self, pid, env, mode=Mode.VAB, initial=None, mutant=None,
                 log=None):
        self.pid = pid
        self.env = env
        self.mode = mode
        self.mutant = mutant
        self.log = log or logging.getLogger(__name__)

        self.epoch = 0
        self.new_epoch = 0
        self.next = 0
        self.init_len = -1
        self.last_delivered = -1
        self.members = frozenset()
        self.leader = None
        self.msg = []
        self.status = Status.FRESH

        self.acks = AckTracker()
        self.pending = []
        self.crashed = False
        # leader may broadcast in its current epoch
        self.ready = False
        # commit replay already sent for the current epoch
        self.replayed = False
        # PO mode: configuration whose conf_changed is deferred
        self.activation = None
        # PO mode: last position of the announced commit replay
        self.replay_upto = None

        self.app = None
        self.reconfig = None
        self.reconfig_queue = deque()

        if initial is not None and pid in initial.members:
            self.members = initial.members
            self.leader = initial.leader
            if initial.leader == pid:
                self.status = Status.LEADER
                self.ready = True
                self.replayed = True
            else:
                self.status = Status.FOLLOWER

    def __repr__(self):
        return "Node(p{}, {}, epoch={}, new_epoch={})".format(
            self.pid, self.status.value, self.epoch, self.new_epoch)

    def bootstrap(self):
        """Emits conf_changed for the initial configuration"""
        if self.status is Status.FRESH:
            return
        config = Configuration(self.epoch, self.members, self.leader)
        spec = None
        if self.mode is Mode.SPO and self.status is Status.LEADER:
            spec = ()
        self._conf_changed(config, spec)

    def can_broadcast(self):
        return (not self.crashed and self.status is Status.LEADER
                and self.ready)

    # client interface

    def broadcast(self, m):
        """Entry point of the broadcast call in all modes"""
        if self.mode is Mode.VAB:
            self.on_broadcast_request(m)
        else:
            self.leader_broadcast(m)

    def on_broadcast_request(self, m):
        if self.leader is None:
            raise NotLeaderError(
                "p{} knows no leader to forward {} to".format(self.pid, m))
        self.env.emit(self.pid, Broadcast(self.pid, m))
        self.env.send(self.pid, self.leader, Forward(m))

    def leader_broadcast(self, m):
        if self.mode is Mode.VAB:
            raise NotLeaderError("Leader broadcast is only used in PO/SPO")
        if not self.can_broadcast():
            raise NotLeaderError(
                "p{} is not a broadcast-ready leader".format(self.pid))
        self.env.emit(self.pid, Broadcast(self.pid, m))
        self._append(m)
        self.env.monitor.after_step(self)

    def reconfigure(self, desired_members, desired_leader=None):
        """Starts (or queues) a reconfigure call at this process"""
        task = ReconfigTask(self, desired_members, desired_leader,
                            mutant=self.mutant)
        self.reconfig_queue.append(task)
        if self.reconfig is None:
            self._next_task()
        return task

    def task_done(self, task):
        if self.reconfig is task:
            self.reconfig = None
            self._next_task()

    def _next_task(self):
        if self.reconfig_queue and not self.crashed:
            self.reconfig = self.reconfig_queue.popleft()
            self.reconfig.step(Start())

    # transport

    def receive(self, src, message):
        if self.crashed:
            return

        if isinstance(message, ProbeAck):
            if self.reconfig is not None:
                self.reconfig.step(ProbeAckEvent(
                    src, message.flag, message.new_epoch))
            return

        if isinstance(message, (Execute, Result)):
            if self.app is not None:
                self.app.receive(src, message)
            return

        if self._discardable(message):
            self.log.debug("p{} discards {} from p{}".format(
                self.pid, name_of(message), src))
        elif self._enabled(message):
            self._handle(src, message)
        else:
            self.log.debug("p{} buffers {} from p{}".format(
                self.pid, name_of(message), src))
            self.pending.append((src, message))

        self._drain()
        self.env.monitor.after_step(self)

    def _drain(self):
        progress = True
        while progress:
            progress = False
            for item in list(self.pending):
                src, message = item
                if self._discardable(message):
                    self.pending.remove(item)
                elif self._enabled(message):
                    self.pending.remove(item)
                    self._handle(src, message)
                    progress = True
                    break
        if self.app is not None:
            self.app.drain()

    def _discardable(self, m):
        if isinstance(m, (Accept, AcceptAck, NewStateAck, ReplayDone)):
            return m.epoch < self.epoch
        if isinstance(m, Commit):
            return m.epoch < self.epoch or (
                m.epoch == self.epoch and self.status is not Status.FRESH
                and m.pos <= self.last_delivered)
        if isinstance(m, Probe):
            return m.new_epoch < self.new_epoch
        if isinstance(m, (NewConfig, NewState)):
            return m.epoch < self.new_epoch
        return False

    def _enabled(self, m):
        if isinstance(m, Forward):
            return self.status is Status.LEADER
        if isinstance(m, (Accept, ReplayDone)):
            return self.status is Status.FOLLOWER and self.epoch == m.epoch
        if isinstance(m, (AcceptAck, NewStateAck)):
            return self.epoch == m.epoch
        if isinstance(m, Commit):
            return (self.status in (Status.LEADER, Status.FOLLOWER)
                    and self.epoch == m.epoch
                    and m.pos == self.last_delivered + 1)
        if isinstance(m, Probe):
            return m.new_epoch >= self.new_epoch
        if isinstance(m, NewConfig):
            return self.new_epoch == m.epoch
        if isinstance(m, NewState):
            return self.new_epoch <= m.epoch
        return False

    def _handle(self, src, m):
        if isinstance(m, Forward):
            self.on_forward(m.msg)
        elif isinstance(m, Accept):
            self.on_accept(src, m.epoch, m.pos, m.msg)
        elif isinstance(m, AcceptAck):
            self.on_accept_ack(m.epoch, m.pos, src)
        elif isinstance(m, Commit):
            self.on_commit(m.epoch, m.pos)
        elif isinstance(m, Probe):
            self.on_probe(m.new_epoch, m.epoch, src)
        elif isinstance(m, NewConfig):
            self.on_new_config(m.epoch, m.members)
        elif isinstance(m, NewState):
            self.on_new_state(m.epoch, m.log, m.members, src)
        elif isinstance(m, NewStateAck):
            self.on_new_state_ack(m.epoch, src)
        elif isinstance(m, ReplayDone):
            self.on_replay_done(m.epoch, m.upto)

    # normal operation

    def on_forward(self, m):
        self._append(m)

    def _append(self, m):
        k = self.next
        self._set_msg(k, m)
        self.env.metrics.on_broadcast_received(self, m)
        accept = Accept(self.epoch, k, m)
        self.env.monitor.on_accept_sent(self, accept)
        self.env.multicast(self.pid, self.members - {self.pid}, accept)
        self.next = k + 1
        self._check_accept_quorum(self.epoch, k)

    def on_accept(self, src, e, k, m):
        self._set_msg(k, m)
        self.env.send(self.pid, src, AcceptAck(e, k))
        self.env.monitor.on_accept_handled(self, e, k, m)

    def on_accept_ack(self, e, k, src):
        self.acks.ack_accept(e, k, src)
        self._check_accept_quorum(e, k)

    def _check_accept_quorum(self, e, k):
        if self.status is not Status.LEADER or self.epoch != e:
            return
        if (e, k) in self.acks.fired:
            return
        if not (self.members - {self.pid}) <= self.acks.accepters(e, k):
            return
        self.acks.fired.add((e, k))
        self._send_commit(e, k)

    def _send_commit(self, e, k):
        self.env.monitor.on_commit_sent(self, e, k, self.msg[k])
        self.env.multicast(self.pid, self.members, Commit(e, k))

    def on_commit(self, e, k):
        m = self.msg[k] if k < len(self.msg) else None
        if m is None:
            raise ProtocolError(
                "p{} got COMMIT({}, {}) for an empty slot".format(
                    self.pid, e, k))
        self.last_delivered = k
        self.env.emit(self.pid, Deliver(self.pid, m))
        self.env.monitor.on_delivered(self, k, m)
        self.env.metrics.on_deliver(self, m)
        if self.app is not None:
            self.app.on_app_deliver(m)
        self._maybe_activate()

    # reconfiguration

    def on_probe(self, e_new, e, src):
        self.new_epoch = e_new
        self.env.send(self.pid, src, ProbeAck(self.epoch >= e, e_new))

    def on_new_config(self, e, members):
        self.env.monitor.on_before_new_config(self, e)
        self.status = Status.LEADER
        self._set_epoch(e)
        self.members = frozenset(members)
        self.leader = self.pid
        self.next = _filled_length(self.msg)
        self.init_len = self.next - 1
        del self.msg[self.next:]
        self.replayed = False
        self.replay_upto = None
        self.env.metrics.on_disable(self, e)

        config = Configuration(e, self.members, self.pid)
        if self.mode is Mode.VAB:
            self.ready = True
            self._conf_changed(config, None)
        elif self.mode is Mode.SPO:
            self.spo_conf_changed_leader(config)
        else:
            self.po_deferred_activation(config)

        new_state = NewState(e, tuple(self.msg), self.members)
        self.env.monitor.on_new_state_sent(self, new_state)
        self.env.multicast(self.pid, self.members - {self.pid}, new_state)
        self.env.monitor.on_epoch_entered(self)
        self._check_replay_quorum()

    def on_new_state(self, e, log, members, src):
        self.status = Status.FOLLOWER
        self._set_epoch(e)
        self.new_epoch = e
        self.msg = list(log)
        self.leader = src
        self.members = frozenset(members)
        self.init_len = _filled_length(self.msg) - 1
        self.ready = False
        self.replay_upto = None

        config = Configuration(e, self.members, src)
        if self.mode is Mode.VAB:
            self._conf_changed(config, None)
        elif self.mode is Mode.SPO:
            self.spo_conf_changed_follower(config)
        else:
            self.po_deferred_activation(config)

        self.env.monitor.on_new_state_handled(self)
        self.env.send(self.pid, src, NewStateAck(e))
        self._maybe_activate()

    def on_new_state_ack(self, e, src):
        self.acks.ack_new_state(e, src)
        self._check_replay_quorum()

    def _check_replay_quorum(self):
        e = self.epoch
        if self.status is not Status.LEADER or self.replayed:
            return
        if self.new_epoch != e:
            return
        if not (self.members - {self.pid}) <= self.acks.new_state_ackers(e):
            return
        self.replayed = True
        upto = self.init_len
        if self.mutant == "no-commit-replay":
            upto = -1
        for k in range(0, upto + 1):
            self._send_commit(e, k)
        if self.mode is Mode.PO:
            self.replay_upto = upto
            self.env.multicast(self.pid, self.members - {self.pid},
                               ReplayDone(e, upto))
        self._maybe_activate()

    def on_replay_done(self, e, upto):
        self.replay_upto = upto
        self._maybe_activate()

    def _set_epoch(self, e):
        self.epoch = e
        self.acks.clear()
        self.env.monitor.on_epoch_set(self, e)

    def _set_msg(self, k, m):
        if k >= len(self.msg):
            self.msg.extend([None] * (k + 1 - len(self.msg)))
        self.msg[k] = m

    # mode hooks

    def spo_conf_changed_leader(self, config):
        """New leader speculatively delivers the inherited messages it has
        not delivered yet and is ready to broadcast at once.
        """
        spec = tuple(m for m in
                     self.msg[self.last_delivered + 1:self.init_len + 1]
                     if m is not None)
        self.ready = True
        self._conf_changed(config, spec)

    def spo_conf_changed_follower(self, config):
        self._conf_changed(config, None)

    def po_deferred_activation(self, config):
        """conf_changed waits for the commit replay of the new leader,
        which only starts once every member acknowledged NEW_STATE, and
        until every replayed position is delivered. Followers learn the
        end of the replay from REPLAY_DONE, which FIFO channels order
        after the replayed COMMITs.
        """
        self.ready = False
        self.activation = config

    def _maybe_activate(self):
        if self.activation is None or self.replay_upto is None:
            return
        if self.last_delivered < self.replay_upto:
            return
        config, self.activation = self.activation, None
        if self.status is Status.LEADER:
            self.ready = True
        self._conf_changed(config, None)

    def _conf_changed(self, config, spec):
        self.env.emit(self.pid, ConfChanged(self.pid, config, spec))
        if self.ready and config.leader == self.pid:
            self.env.metrics.on_ready(self, config.epoch)
        if self.app is not None:
            self.app.on_app_conf_changed(config, spec)


def _filled_length(msg):
    """Highest non-empty position plus one"""
    for k in range(len(msg) - 1, -1, -1):
        if msg[k] is not None:
            return k + 1
    return 0
