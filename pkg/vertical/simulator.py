# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

"""Deterministic discrete-event simulator.

Simulated processes exchange messages over reliable FIFO channels with
seeded integer delays. Every delivery, directive and configuration
service call is one scheduler step on a twisted Clock, so a scenario
with a given seed always produces the same history.
"""

import random
import logging
import logging.handlers
import socket
import threading
from collections import namedtuple, OrderedDict

from twisted.internet import task

from .checker import Violation, verdicts
from .config_service import ConfigService
from .errors import ProtocolError, NotLeaderError, StepCapExceeded
from .history import History, ConfChanged, Introduction, epochs
from .linearizability import ClientOp, check_linearizable
from .messages import name_of, epoch_of_message
from .metrics import Metrics
from .model import MessageFactory
from .monitors import StateMonitor
from .node import Node, Mode
from .replication import Replica, machine_by_name

SentMessage = namedtuple("SentMessage", "t src dst message")

RunResult = namedtuple("RunResult", "history metrics report ops quiescent")

# clock of the run in progress, per thread
_running = threading.local()


class Simulator(object):
    """Runs one scenario to quiescence or to the step cap.

    A Simulator is the environment of its nodes: they send, emit history
    actions and call the configuration service through it.
    """

    log = None

    @classmethod
    def startup(cls, debug=False):
        """Sets up logging for the process"""
        cls._init_logging(debug)

    def __init__(self, scenario, mutant=None, clock=None):
        self.log = self.log or logging.getLogger(__name__)
        self.scenario = scenario
        self.mode = Mode(scenario.mode)
        self.mutant = mutant
        self.clock = clock or task.Clock()
        self.rng = random.Random(scenario.seed)
        self.app_rng = random.Random("app:{}".format(scenario.seed))
        self.delay_min, self.delay_max = scenario.delays
        self.links = scenario.links

        self.history = History()
        self.messages = MessageFactory()
        self.monitor = StateMonitor()
        self.monitor.now = self.now
        self.metrics = Metrics(self)

        self.initial = scenario.initial_config
        self.cs = ConfigService(
            self.initial, on_introduction=self._on_introduction)

        self.nodes = OrderedDict()
        for pid in sorted(scenario.processes):
            self.nodes[pid] = Node(pid, self, self.mode, self.initial,
                                   mutant=mutant)
        self.monitor.nodes = self.nodes

        self.machine = None
        if scenario.machine is not None:
            self.machine = machine_by_name(scenario.machine)
            for node in self.nodes.values():
                node.app = Replica(node, self.machine, self.app_rng)

        # channel (src, dst) -> time of the last scheduled delivery
        self.floors = {}
        self.crashed = OrderedDict()
        self.triggers = {}
        self.sent = []
        self.ops = OrderedDict()
        self.op_seq = 0
        self.steps = 0
        self.internal = []

    def now(self):
        return int(self.clock.seconds())

    # environment of the nodes

    def send(self, src, dst, message):
        now = self.now()
        self.sent.append(SentMessage(now, src, dst, message))
        if src == dst:
            delay = 0
        else:
            delay = self.links.get((src, dst))
            if delay is None:
                delay = self.rng.randint(self.delay_min, self.delay_max)
            at = max(self.floors.get((src, dst), 0), now + delay)
            self.floors[(src, dst)] = at
            delay = at - now
        self._schedule(delay, self._receive, src, dst, message)

    def multicast(self, src, dsts, message):
        for dst in sorted(dsts):
            self.send(src, dst, message)

    def emit(self, proc, action):
        entry = self.history.append(action, self.now())
        if isinstance(action, ConfChanged):
            self.metrics.on_conf_changed(proc, action.config)
        return entry

    def call_cs(self, proc, fn, args, callback):
        """Performs a configuration service call on behalf of proc after
        the configured latency, the result goes to callback
        """
        def call():
            if proc in self.crashed:
                return
            callback(fn(*args))
        self._schedule(self.scenario.cs_latency, call)

    def _on_introduction(self, proc, config):
        self.emit(proc, Introduction(proc, config))
        self.monitor.on_introduction(config)

    # scheduler

    def _schedule(self, delay, fn, *args):
        self.clock.callLater(delay, self._step, fn, args)

    def _step(self, fn, args):
        self.steps += 1
        if self.steps > self.scenario.step_cap:
            raise StepCapExceeded(
                "Step cap {} reached at t={}".format(
                    self.scenario.step_cap, self.now()))
        try:
            fn(*args)
        except ProtocolError as e:
            self.log.error("Internal error: {}".format(e))
            self.internal.append(
                Violation("Internal", {"t": self.now()}, str(e)))

    def _receive(self, src, dst, message):
        if dst in self.crashed:
            return
        trigger = self.triggers.get(dst)
        if trigger is not None and _matches(trigger, message):
            self.log.info("p{} crashes on receipt of {}".format(
                dst, name_of(message)))
            self.crash(dst)
            return
        self.nodes[dst].receive(src, message)

    def run(self):
        """Runs the scenario, returns :class:`RunResult`"""
        outer = getattr(_running, "clock", None)
        _running.clock = self.clock
        try:
            quiescent = self._loop()
        finally:
            _running.clock = outer
        return self._result(quiescent)

    def _loop(self):
        self.log.info("Running {} (mutant: {})".format(
            self.scenario, self.mutant))
        self._bootstrap()
        self._schedule_directives()

        quiescent = True
        try:
            calls = self.clock.getDelayedCalls()
            while calls:
                self.clock.advance(
                    max(0, calls[0].getTime() - self.clock.seconds()))
                calls = self.clock.getDelayedCalls()
        except StepCapExceeded as e:
            self.log.warning(str(e))
            quiescent = False

        self.log.info("Run ended after {} steps with {} actions".format(
            self.steps, len(self.history)))
        return quiescent

    def _bootstrap(self):
        self._on_introduction(self.initial.leader, self.initial)
        for pid in sorted(self.initial.members):
            node = self.nodes[pid]
            self.monitor.on_epoch_set(node, 0)
            node.bootstrap()

    def _schedule_directives(self):
        for d in self.scenario.schedule:
            if d["type"] == "crash" and "on" in d:
                on = d["on"]
                self.triggers[d["proc"]] = (on["message"], on.get("epoch"))
            else:
                self._schedule(d.get("at", 0), self._directive, d)

    def _result(self, quiescent):
        ops = list(self.ops.values())
        lin = None
        if self.machine is not None:
            lin = check_linearizable(ops, self.machine)
        report = verdicts(
            self.history, self.scenario.mode,
            monitor=self.monitor.violations + self.internal,
            premise=self.scenario.premise(), quiescent=quiescent,
            crashes=dict(self.crashed), lin=lin, machine=self.machine)

        metrics = self.metrics.summary(self.history, epochs(self.history))
        metrics["quiescent"] = quiescent
        metrics["steps"] = self.steps
        metrics["end_time"] = self.now()
        return RunResult(self.history, metrics, report, ops, quiescent)

    # directives

    def _directive(self, d):
        getattr(self, "_do_{}".format(d["type"]))(d)

    def current_leader(self):
        """Live broadcast-ready leader of the highest epoch, or None"""
        ready = [n for n in self.nodes.values()
                 if n.pid not in self.crashed and n.can_broadcast()]
        if not ready:
            return None
        return max(ready, key=lambda n: (n.epoch, -n.pid)).pid

    def _do_broadcast(self, d):
        proc = d.get("proc")
        if proc is None:
            proc = self.current_leader()
        if proc is None or proc in self.crashed:
            self._reject("No process to broadcast {!r}".format(
                d.get("payload", "")))
            return
        m = self.messages.fresh_message(proc, d.get("payload", ""))
        try:
            self.nodes[proc].broadcast(m)
        except NotLeaderError as e:
            self._reject(str(e))

    def _do_execute(self, d):
        client = d["client"]
        if client in self.crashed:
            self._reject("Client p{} crashed".format(client))
            return
        replica = self.nodes[client].app
        leader = None
        if replica.cur_leader is None:
            leader = self.current_leader()
        try:
            cid, deferred = replica.client_execute(d["command"], leader)
        except NotLeaderError as e:
            self._reject(str(e))
            return
        self.op_seq += 1
        self.ops[cid] = ClientOp(cid, client, d["command"], self.op_seq,
                                 None, None)
        deferred.addCallback(self._op_done, cid)

    def _op_done(self, result, cid):
        self.op_seq += 1
        self.ops[cid] = self.ops[cid]._replace(ret=self.op_seq, result=result)
        return result

    def _do_crash(self, d):
        self.crash(d["proc"])

    def _do_reconfigure(self, d):
        by = d["by"]
        if by in self.crashed:
            self._reject("Reconfiguring process p{} crashed".format(by))
            return
        self.nodes[by].reconfigure(d["desired_members"],
                                   d.get("desired_leader"))

    def _reject(self, reason):
        self.metrics.rejected += 1
        self.log.info("Directive rejected: {}".format(reason))

    def crash(self, pid):
        if pid in self.crashed:
            return
        self.crashed[pid] = self.now()
        self.nodes[pid].crashed = True
        self.log.info("p{} crashed".format(pid))

    @classmethod
    def _init_logging(cls, debug=False):
        cls.log = logging.getLogger(__name__)
        package = logging.getLogger("vertical")
        package.setLevel(logging.DEBUG if debug else logging.INFO)

        formatter = logging.Formatter(
            "t=%(t)-4s %(levelname)-5.5s [%(name)s] %(message)s")
        console = logging.StreamHandler()
        console.setLevel(logging.DEBUG)
        handlers = [console]
        try:
            syslog = logging.handlers.SysLogHandler(address="/dev/log")
            syslog.setLevel(logging.INFO)
            handlers.append(syslog)
        except socket.error:
            pass
        for h in handlers:
            h.setFormatter(formatter)
            h.addFilter(SimulatedTime())
            package.addHandler(h)
        if len(handlers) == 1:
            cls.log.debug("No syslog socket, logging to the console only")


class SimulatedTime(logging.Filter):
    """Stamps records with the clock of the run going on in the logging
    thread, as `t`. Outside of a run the stamp is "-".
    """

    def filter(self, record):
        clock = getattr(_running, "clock", None)
        record.t = "-" if clock is None else int(clock.seconds())
        return True


def _matches(trigger, message):
    name, epoch = trigger
    if name_of(message) != name:
        return False
    return epoch is None or epoch_of_message(message) == epoch
