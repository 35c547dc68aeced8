# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

"""Passive replication on top of the broadcast layer.

The leader executes a client command speculatively, broadcasts the
resulting state update and answers the client once the update is
delivered. Followers only apply updates.
"""

import json
import logging

from twisted.internet import defer

from .errors import NotLeaderError, ScenarioError
from .messages import Execute, Result


class StateMachine(object):
    """Deterministic update application, possibly nondeterministic
    execution. States and updates are JSON values.
    """
    name = None
    commands = ()

    def initial(self):
        raise NotImplementedError()

    def execute(self, state, command, rng):
        """Returns (result, update) for command run against state"""
        raise NotImplementedError()

    def apply(self, state, delta):
        if delta is None:
            return state
        op, value = delta
        if op != "set":
            raise ValueError("Unsupported update {}".format(delta))
        return value

    def step_spec(self, state, command, result):
        """Sequential specification used by the linearizability check:
        next state if command may return result in state, else None
        """
        raise NotImplementedError()

    def pending_states(self, state, command):
        """States a command that never returned may have left behind"""
        raise NotImplementedError()

    def snapshot(self, state):
        return json.dumps(state, sort_keys=True)


class Counter(StateMachine):
    name = "counter"
    commands = ("inc", "read")

    def initial(self):
        return 0

    def execute(self, state, command, rng):
        if command == "inc":
            return "ok", ["set", state + 1]
        if command == "read":
            return state, None
        raise ValueError("Unknown counter command {}".format(command))

    def step_spec(self, state, command, result):
        if command == "inc":
            return state + 1 if result == "ok" else None
        if command == "read":
            return state if result == state else None
        return None

    def pending_states(self, state, command):
        return [state + 1] if command == "inc" else [state]


class RandomRegister(StateMachine):
    """Register whose assign picks a random value at the leader, the
    choice travels in the update so replicas never re-draw it.
    """
    name = "register"
    commands = ("assign", "read")
    low, high = 0, 99

    def initial(self):
        return 0

    def execute(self, state, command, rng):
        if command == "assign":
            value = rng.randint(self.low, self.high)
            return value, ["set", value]
        if command == "read":
            return state, None
        raise ValueError("Unknown register command {}".format(command))

    def step_spec(self, state, command, result):
        if command == "assign":
            if isinstance(result, int) and self.low <= result <= self.high:
                return result
            return None
        if command == "read":
            return state if result == state else None
        return None

    def pending_states(self, state, command):
        if command == "assign":
            return list(range(self.low, self.high + 1))
        return [state]


MACHINES = {
    Counter.name: Counter,
    RandomRegister.name: RandomRegister,
}


def machine_by_name(name):
    try:
        return MACHINES[name]()
    except KeyError:
        raise ScenarioError("Unknown state machine {}, use one of {}".format(
            name, sorted(MACHINES)))


def encode_update(cid, result, delta):
    return json.dumps({"id": cid, "r": result, "delta": delta},
                      sort_keys=True)


def decode_update(payload):
    value = json.loads(payload)
    return value["id"], value["r"], value["delta"]


def origin_of(cid):
    return int(cid.split(".", 1)[0])


class Replica(object):
    """Replication state of one process: committed state Σ, the leader's
    speculative state Θ and the configuration it last joined.
    """

    def __init__(self, node, machine, rng, log=None):
        self.node = node
        self.pid = node.pid
        self.env = node.env
        self.machine = machine
        self.rng = rng
        self.log = log or logging.getLogger(__name__)

        self.cur_epoch = None
        self.cur_leader = None
        self.committed = machine.initial()
        self.speculative = machine.initial()
        self.pending = []
        self.waiting = {}
        self.counter = 0

    def client_execute(self, command, leader=None):
        """Submits command to the leader, returns (id, Deferred) firing
        with the first result that comes back.
        """
        target = leader if leader is not None else self.cur_leader
        if target is None:
            raise NotLeaderError("p{} knows no leader".format(self.pid))
        cid = "{}.{}".format(self.pid, self.counter)
        self.counter += 1
        d = defer.Deferred()
        self.waiting[cid] = d
        self.env.send(self.pid, target, Execute(cid, command))
        return cid, d

    def receive(self, src, message):
        if isinstance(message, Execute):
            self.pending.append(message)
            self.drain()
        elif isinstance(message, Result):
            d = self.waiting.pop(message.id, None)
            # later duplicates are ignored
            if d is not None:
                d.callback(message.result)

    def is_ready(self):
        return self.cur_leader == self.pid and self.node.can_broadcast()

    def drain(self):
        while self.pending and self.is_ready():
            message = self.pending.pop(0)
            self.leader_on_execute(message.id, message.command)

    def leader_on_execute(self, cid, command):
        before = self.speculative
        result, delta = self.machine.execute(before, command, self.rng)
        self.speculative = self.machine.apply(before, delta)
        m = self.env.messages.fresh_message(
            self.pid, encode_update(cid, result, delta))
        self.env.monitor.on_app_broadcast(m, self.machine.snapshot(before))
        self.node.broadcast(m)

    def on_app_deliver(self, m):
        cid, result, delta = decode_update(m.payload)
        self.committed = self.machine.apply(self.committed, delta)
        self.env.send(self.pid, origin_of(cid), Result(cid, result))

    def on_app_conf_changed(self, config, spec):
        self.cur_epoch = config.epoch
        self.cur_leader = config.leader
        if config.leader == self.pid:
            state = self.committed
            for m in (spec or ()):
                delta = decode_update(m.payload)[2]
                state = self.machine.apply(state, delta)
            self.speculative = state
