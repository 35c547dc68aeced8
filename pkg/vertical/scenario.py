# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

"""Scenario files: what to simulate, with which delays and faults.

A scenario is a JSON object; :class:`Scenario` fills in the defaults
and gives property access to the fields the simulator needs.
"""

import json
import copy
from collections import namedtuple

from .errors import ScenarioError, assert_scenario
from .messages import NAMES
from .model import parse_configuration
from .replication import MACHINES
from .utils import to_int, resolve_scenario

MODES = ("vab", "po", "spo")
DIRECTIVES = ("broadcast", "execute", "crash", "reconfigure")

# timed: {proc: at}, triggered: {proc: (message name, epoch or None)}
FaultPlan = namedtuple("FaultPlan", "timed triggered")

LivenessPremise = namedtuple(
    "LivenessPremise",
    "requester at requester_correct isolation crash_free reason")

DEFAULTS = {
    "mode": "vab",
    "delays": {"min": 1, "max": 1},
    "seed": 0,
    "step_cap": 200000,
    "cs_latency": 0,
    "links": [],
    "machine": None,
    "schedule": [],
}


class Scenario(dict):
    """Scenario dictionary with defaults and accessors"""

    def __init__(self, values=None, **kwargs):
        dict.__init__(self)
        self.update(copy.deepcopy(DEFAULTS))
        self.update(copy.deepcopy(values or {}))
        self.update(kwargs)

    def __str__(self):
        return "Scenario(mode={}, seed={}, processes={})".format(
            self.mode, self.seed, self.processes)

    @property
    def mode(self):
        return self["mode"]

    @property
    def seed(self):
        return self["seed"]

    @property
    def processes(self):
        return list(self.get("processes") or [])

    @property
    def initial_config(self):
        return parse_configuration(self.get("initial_config"))

    @property
    def schedule(self):
        return list(self["schedule"])

    @property
    def delays(self):
        return self["delays"]["min"], self["delays"]["max"]

    @property
    def links(self):
        return dict(((link["src"], link["dst"]), link["delay"])
                    for link in self["links"])

    @property
    def step_cap(self):
        return self["step_cap"]

    @property
    def cs_latency(self):
        return self["cs_latency"]

    @property
    def machine(self):
        return self["machine"]

    def with_overrides(self, mode=None, seed=None):
        out = Scenario(self)
        if mode is not None:
            out["mode"] = mode
        if seed is not None:
            out["seed"] = to_int(seed, "seed")
        return out

    def to_json(self):
        return dict(self)

    def validate(self):
        """Raises ScenarioError unless the scenario is well-formed and
        its fault plan admissible. Returns self.
        """
        assert_scenario(self.mode in MODES,
                        "Unknown mode {!r}, use one of {}", self.mode, MODES)
        try:
            self["seed"] = to_int(self["seed"], "seed")
            self["step_cap"] = to_int(self["step_cap"], "step_cap")
            self["cs_latency"] = to_int(self["cs_latency"], "cs_latency")
        except ValueError as e:
            raise ScenarioError(str(e))

        processes = self.processes
        assert_scenario(processes, "Scenario declares no processes")
        assert_scenario(
            all(isinstance(p, int) and not isinstance(p, bool) and p >= 0
                for p in processes),
            "Process ids should be non-negative integers: {}", processes)
        assert_scenario(len(set(processes)) == len(processes),
                        "Process ids are not unique: {}", processes)
        declared = set(processes)

        assert_scenario(self.get("initial_config") is not None,
                        "Scenario has no initial_config")
        initial = self.initial_config
        assert_scenario(initial.epoch == 0,
                        "Initial configuration should have epoch 0, got {}",
                        initial.epoch)
        assert_scenario(initial.members <= declared,
                        "Initial members {} are not declared",
                        sorted(initial.members - declared))

        delays = self["delays"]
        assert_scenario(isinstance(delays, dict) and "min" in delays and
                        "max" in delays, "delays should be {{min, max}}")
        lo, hi = delays["min"], delays["max"]
        assert_scenario(isinstance(lo, int) and isinstance(hi, int) and
                        1 <= lo <= hi,
                        "Delays should satisfy 1 <= min <= max, got {}",
                        delays)
        assert_scenario(self.step_cap > 0, "step_cap should be positive")
        assert_scenario(self.cs_latency >= 0,
                        "cs_latency should not be negative")

        for link in self["links"]:
            assert_scenario(isinstance(link, dict) and
                            set(link) == {"src", "dst", "delay"},
                            "Link should be {{src, dst, delay}}: {}", link)
            assert_scenario(link["src"] in declared and
                            link["dst"] in declared,
                            "Link {} references undeclared processes", link)
            assert_scenario(isinstance(link["delay"], int) and
                            link["delay"] >= 1,
                            "Link delay should be a positive integer: {}",
                            link)

        assert_scenario(self.machine is None or self.machine in MACHINES,
                        "Unknown state machine {!r}, use one of {}",
                        self.machine, sorted(MACHINES))

        for d in self.schedule:
            self._validate_directive(d, declared)

        self._validate_fault_plan(initial)
        return self

    def _validate_directive(self, d, declared):
        assert_scenario(isinstance(d, dict) and d.get("type") in DIRECTIVES,
                        "Unknown directive {}", d)
        kind = d["type"]
        if "at" in d or kind != "crash":
            at = d.get("at", 0)
            assert_scenario(isinstance(at, int) and at >= 0,
                            "Directive time should be a non-negative "
                            "integer: {}", d)

        if kind == "broadcast":
            assert_scenario(self.machine is None,
                            "Use execute directives with a state machine")
            proc = d.get("proc")
            assert_scenario(proc is None or proc in declared,
                            "Broadcast by undeclared process {}", proc)
            assert_scenario(isinstance(d.get("payload", ""), str),
                            "Payload should be a string: {}", d)
        elif kind == "execute":
            assert_scenario(self.machine is not None,
                            "execute directives need a state machine")
            assert_scenario(d.get("client") in declared,
                            "Execute by undeclared client {}", d.get("client"))
            commands = MACHINES[self.machine].commands
            assert_scenario(d.get("command") in commands,
                            "Command {!r} is not one of {}",
                            d.get("command"), commands)
        elif kind == "crash":
            assert_scenario(d.get("proc") in declared,
                            "Crash of undeclared process {}", d.get("proc"))
            assert_scenario(("at" in d) != ("on" in d),
                            "Crash needs exactly one of 'at' and 'on': {}", d)
            if "on" in d:
                trigger = d["on"]
                assert_scenario(
                    isinstance(trigger, dict) and
                    trigger.get("message") in NAMES.values(),
                    "Crash trigger should name a protocol message: {}", d)
        elif kind == "reconfigure":
            assert_scenario(d.get("by") in declared,
                            "Reconfigure by undeclared process {}",
                            d.get("by"))
            desired = d.get("desired_members") or []
            assert_scenario(desired and set(desired) <= declared,
                            "Desired members {} should be a non-empty set "
                            "of declared processes", desired)
            leader = d.get("desired_leader")
            assert_scenario(leader is None or leader in desired,
                            "Desired leader {} is not a desired member",
                            leader)

    def fault_plan(self):
        timed, triggered = {}, {}
        for d in self.schedule:
            if d["type"] != "crash":
                continue
            if "at" in d:
                timed[d["proc"]] = min(d["at"], timed.get(d["proc"], d["at"]))
            else:
                on = d["on"]
                triggered[d["proc"]] = (on["message"], on.get("epoch"))
        return FaultPlan(timed, triggered)

    def crash_free(self):
        plan = self.fault_plan()
        crashing = set(plan.timed) | set(plan.triggered)
        return frozenset(p for p in self.processes if p not in crashing)

    def _validate_fault_plan(self, initial):
        # every configuration that may be introduced keeps a member alive
        safe = self.crash_free()
        planned = [("initial configuration", initial.members)]
        for d in self.schedule:
            if d["type"] == "reconfigure":
                planned.append(("reconfiguration at {}".format(
                    d.get("at", 0)), frozenset(d["desired_members"])))
        for name, members in planned:
            assert_scenario(members & safe,
                            "Fault plan is not admissible: every member of "
                            "the {} {} may crash", name, sorted(members))

    def reconfigure_bound(self, rounds):
        """Upper bound on the duration of a reconfigure call that
        probes at most rounds configurations
        """
        worst = max([self.delays[1]] + list(self.links.values()))
        cs = self.cs_latency
        return cs + rounds * (cs + 2 * worst) + cs

    def premise(self):
        """Liveness premise for the last reconfigure directive, derived
        from the schedule and the fault plan. None without reconfigures.
        """
        calls = [(d.get("at", 0), n, d) for n, d in enumerate(self.schedule)
                 if d["type"] == "reconfigure"]
        if not calls:
            return None
        calls.sort(key=lambda c: (c[0], c[1]))
        last_at, _, last = calls[-1]
        safe = self.crash_free()
        plan = self.fault_plan()

        busy = {}
        isolation = True
        reason = None
        for rank, (at, _, d) in enumerate(calls):
            start = max(at, busy.get(d["by"], at))
            if d is last:
                if start > at:
                    isolation, reason = False, "last request is queued"
                break
            if at == last_at:
                isolation = False
                reason = "another request is invoked with the last one"
                break
            crashed_at = plan.timed.get(d["by"])
            end = start + self.reconfigure_bound(rank + 1)
            busy[d["by"]] = end
            if crashed_at is not None and crashed_at <= start:
                continue
            if end > last_at:
                isolation = False
                reason = "request at {} may still run at {}".format(
                    at, last_at)
                break

        correct = last["by"] in safe
        if not correct and reason is None:
            reason = "p{} may crash".format(last["by"])
        return LivenessPremise(last["by"], last_at, correct, isolation, safe,
                               reason)


def parse_scenario(text):
    try:
        values = json.loads(text)
    except ValueError as e:
        raise ScenarioError("Scenario is not valid JSON: {}".format(e))
    if not isinstance(values, dict):
        raise ScenarioError("Scenario should be a JSON object")
    return Scenario(values).validate()


def load_scenario(value):
    """Loads and validates a scenario from a path or bundled name"""
    path = resolve_scenario(value)
    try:
        with open(path) as f:
            text = f.read()
    except (IOError, OSError) as e:
        raise ScenarioError("Can not read scenario {}: {}".format(value, e))
    return parse_scenario(text)
