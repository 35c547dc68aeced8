# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

"""reconfigure() as an explicit, resumable state machine.

A task walks down the epochs from the last introduced one, probing each
configuration until some member of the probed configuration answers that
it has joined it. That member becomes the new leader and the new
configuration is proposed to the configuration service.
"""

import functools
import logging
from collections import namedtuple, deque

from .errors import ProtocolError
from .history import ReconfigReq, ReconfigResp
from .messages import Probe, NewConfig
from .model import Configuration

FETCH_EPOCH = "fetch-epoch"
PROBING = "probing"
AWAIT_CAS = "await-cas"
DONE = "done"

# events fed to ReconfigTask.step
Start = namedtuple("Start", "")
LastEpoch = namedtuple("LastEpoch", "epoch")
Members = namedtuple("Members", "members")
ProbeAckEvent = namedtuple("ProbeAckEvent", "src flag new_epoch")
SwapResult = namedtuple("SwapResult", "ok")

MUTANTS = ("skip-probing", "no-commit-replay", "leader-any")


def choose_leader(true_ackers, desired_leader=None):
    """Desired leader if it has answered positively, otherwise the
    first process that did.
    """
    if desired_leader is not None and desired_leader in true_ackers:
        return desired_leader
    return true_ackers[0]


def compute_membership(desired_members, leader):
    return frozenset(desired_members) | {leader}


class ReconfigTask(object):
    """One reconfigure() invocation at one process"""

    def __init__(self, node, desired_members, desired_leader=None,
                 mutant=None, log=None):
        self.node = node
        self.pid = node.pid
        self.env = node.env
        self.desired_members = frozenset(desired_members)
        self.desired_leader = desired_leader
        self.mutant = mutant
        self.log = log or logging.getLogger(__name__)

        self.phase = None
        self.e = None
        self.e_new = None
        self.members = None
        self.true_ackers = []
        self.any_ackers = []
        # per process, epochs of the probe rounds still waiting for an ack
        self.outstanding = {}
        self.config = None
        self.result = None

    def __repr__(self):
        return "ReconfigTask(p{}, {}, e={}, e_new={})".format(
            self.pid, self.phase, self.e, self.e_new)

    @property
    def done(self):
        return self.phase == DONE

    def step(self, event):
        if self.phase == DONE:
            return
        if isinstance(event, Start):
            self._start()
        elif isinstance(event, LastEpoch):
            self._on_last_epoch(event.epoch)
        elif isinstance(event, Members):
            self._on_members(event.members)
        elif isinstance(event, ProbeAckEvent):
            self._on_probe_ack(event.src, event.flag, event.new_epoch)
        elif isinstance(event, SwapResult):
            self._on_swap(event.ok)
        else:
            raise ProtocolError("Unexpected reconfiguration event {}".format(
                event))

    def _start(self):
        self.env.emit(self.pid, ReconfigReq(self.pid))
        self.phase = FETCH_EPOCH
        self.env.call_cs(self.pid, self.env.cs.get_last_epoch, (),
                         lambda e: self.step(LastEpoch(e)))

    def _on_last_epoch(self, e):
        self.e = e
        self.e_new = e + 1
        self.log.info("p{} reconfigures to epoch {} with {}".format(
            self.pid, self.e_new, sorted(self.desired_members)))
        if self.mutant == "skip-probing":
            self._skip_probing()
        else:
            self._probe_round()

    def _probe_round(self):
        if self.e < 0:
            raise ProtocolError(
                "p{} probed every epoch down to 0 without a positive "
                "answer".format(self.pid))
        self.phase = PROBING
        self.members = None
        self.env.call_cs(self.pid, self.env.cs.get_members, (self.e,),
                         lambda members: self.step(Members(members)))

    def _on_members(self, members):
        self.members = frozenset(members)
        self.env.metrics.on_probe_sent(self.e_new, self.env.history)
        for q in sorted(self.members):
            self.outstanding.setdefault(q, deque()).append(self.e)
            self.env.send(self.pid, q, Probe(self.e_new, self.e))

    def _on_probe_ack(self, src, flag, e_new):
        if e_new != self.e_new:
            return
        rounds = self.outstanding.get(src)
        answered = rounds.popleft() if rounds else None
        if flag and src not in self.true_ackers:
            self.true_ackers.append(src)
        if src not in self.any_ackers:
            self.any_ackers.append(src)

        if self.phase != PROBING or self.members is None:
            return
        if answered != self.e or src not in self.members:
            return

        if self.mutant == "skip-probing":
            self._swap(self.desired_leader_or_first())
        elif self.mutant == "leader-any":
            self._swap(choose_leader(self.any_ackers, self.desired_leader))
        elif self.true_ackers:
            self._swap(choose_leader(self.true_ackers, self.desired_leader))
        else:
            self.log.debug("p{} found no joined member of epoch {}".format(
                self.pid, self.e))
            self.e -= 1
            self._probe_round()

    def desired_leader_or_first(self):
        if self.desired_leader is not None:
            return self.desired_leader
        return min(self.desired_members)

    def _skip_probing(self):
        # only the chosen leader is told about the new epoch
        self.phase = PROBING
        leader = self.desired_leader_or_first()
        self.members = frozenset([leader])
        self.e = self.e_new - 1
        self.outstanding.setdefault(leader, deque()).append(self.e)
        self.env.send(self.pid, leader, Probe(self.e_new, self.e))

    def _swap(self, leader):
        self.phase = AWAIT_CAS
        members = compute_membership(self.desired_members, leader)
        self.config = Configuration(self.e_new, members, leader)
        swap = functools.partial(self.env.cs.compare_and_swap, proc=self.pid)
        self.env.call_cs(self.pid, swap, (self.e_new - 1, self.config),
                         lambda ok: self.step(SwapResult(ok)))

    def _on_swap(self, ok):
        if ok:
            self.env.send(self.pid, self.config.leader,
                          NewConfig(self.e_new, self.config.members))
            self._finish(self.config)
        else:
            self.log.info("p{} lost the race for epoch {}".format(
                self.pid, self.e_new))
            self._finish(None)

    def _finish(self, result):
        self.phase = DONE
        self.result = result
        self.env.emit(self.pid, ReconfigResp(self.pid, result))
        self.node.task_done(self)
