# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

"""Randomised campaigns: generate admissible scenarios from seeds, run
them and collect what failed.

Runs can be fanned out over reactor threads. Each worker owns its own
simulator, the only shared state is the list of results.
"""

import random
import logging
from collections import namedtuple, Counter

from twisted.internet import reactor, threads, defer

from .checker import SAFETY, LIVENESS, NOT_EVALUATED, brute_force_safety, \
    failed
from .errors import ScenarioError
from .history import Deliver
from .replication import MACHINES
from .scenario import Scenario
from .simulator import Simulator

log = logging.getLogger(__name__)

MISMATCH = "BruteForce"
HORIZON = 60
# largest history the brute-force evaluator is run on
BRUTE_FORCE_DELIVERIES = 8

# cross_checked: the brute-force evaluator ran on this history
CampaignRun = namedtuple(
    "CampaignRun",
    "seed failed quiescent liveness_evaluated scenario cross_checked")


class Campaign(object):
    """Results of a campaign in seed order"""

    def __init__(self, runs):
        self.runs = sorted(runs, key=lambda r: r.seed)

    @property
    def clean(self):
        return sum(1 for r in self.runs if not r.failed)

    @property
    def ok(self):
        return self.clean == len(self.runs)

    @property
    def cross_checked(self):
        return sum(1 for r in self.runs if r.cross_checked)

    def by_property(self):
        counts = Counter()
        for r in self.runs:
            counts.update(r.failed)
        return counts

    def first_failure(self):
        for r in self.runs:
            if r.failed:
                return r
        return None


def generate_scenario(seed, mode="spo", max_processes=7, max_reconfigs=5,
                      liveness=False, machine=None, max_ops=12):
    """Random scenario whose fault plan is admissible: one process of
    the initial configuration never crashes and every reconfiguration
    asks for it.

    With liveness=True the last reconfiguration is requested by a
    process that never crashes, for processes that never crash, after
    every crash and after every earlier reconfiguration has settled.
    """
    rng = random.Random(seed)
    n = rng.randint(3, max(3, max_processes))
    processes = list(range(1, n + 1))
    initial_members = sorted(rng.sample(processes, rng.randint(1, min(3, n))))
    anchor = rng.choice(initial_members)
    leader = rng.choice(initial_members)
    others = [p for p in processes if p != anchor]
    crashing = sorted(rng.sample(others, rng.randint(0, len(others) // 2)))
    safe = [p for p in processes if p not in crashing]

    scenario = Scenario({
        "mode": mode,
        "seed": seed,
        "processes": processes,
        "initial_config": {"epoch": 0, "members": initial_members,
                           "leader": leader},
        "delays": {"min": 1, "max": rng.randint(1, 3)},
        "machine": machine,
    })

    schedule = []
    count = rng.randint(1 if liveness else 0, max_reconfigs)
    earlier = count - 1 if liveness else count
    for at in sorted(rng.randint(1, HORIZON) for _ in range(earlier)):
        schedule.append(_reconfigure(rng, at, rng.choice(processes),
                                     anchor, others))

    crash_until = HORIZON + 20
    last_at = None
    if liveness:
        last_at = HORIZON + 1 + sum(
            scenario.reconfigure_bound(rank + 1) for rank in range(earlier))
        crash_until = last_at - 1
        desired = sorted(set([anchor] + rng.sample(
            safe, rng.randint(0, min(3, len(safe))))))
        schedule.append({"type": "reconfigure", "at": last_at,
                         "by": rng.choice(safe),
                         "desired_members": desired,
                         "desired_leader": rng.choice(desired + [None])})

    for p in crashing:
        schedule.append({"type": "crash", "proc": p,
                         "at": rng.randint(1, crash_until)})

    until = HORIZON + 20
    if liveness:
        until = last_at + 2 * scenario.reconfigure_bound(count) + 20
    if machine is not None:
        commands = MACHINES[machine].commands
        for _ in range(rng.randint(1, max_ops)):
            schedule.append({"type": "execute",
                             "client": rng.choice(processes),
                             "command": rng.choice(commands),
                             "at": rng.randint(1, until)})
    else:
        for i in range(rng.randint(0, 15)):
            proc = None
            if mode == "vab":
                proc = rng.choice(processes + [None])
            schedule.append({"type": "broadcast", "proc": proc,
                             "payload": "v{}".format(i),
                             "at": rng.randint(1, until)})

    schedule.sort(key=lambda d: d["at"])
    scenario["schedule"] = schedule
    return scenario.validate()


def _reconfigure(rng, at, by, anchor, others):
    extra = rng.sample(others, rng.randint(0, min(3, len(others))))
    desired = sorted(set([anchor] + extra))
    return {"type": "reconfigure", "at": at, "by": by,
            "desired_members": desired,
            "desired_leader": rng.choice(desired + [None])}


def run_scenario(seed, scenario, mutant=None):
    """Runs one scenario, cross-checks small histories against the
    brute-force evaluator and returns a :class:`CampaignRun`
    """
    result = Simulator(scenario, mutant=mutant).run()
    failures = failed(result.report)

    deliveries = sum(1 for _ in result.history.actions(Deliver))
    cross_checked = deliveries <= BRUTE_FORCE_DELIVERIES
    if cross_checked:
        expected = brute_force_safety(result.history)
        if expected != set(failures) & set(SAFETY):
            log.error("Seed {}: brute-force safety {} disagrees with {}".format(
                seed, sorted(expected), failures))
            failures.append(MISMATCH)

    evaluated = all(result.report[p].status != NOT_EVALUATED
                    for p in LIVENESS)
    return CampaignRun(seed, failures, result.quiescent, evaluated, scenario,
                       cross_checked)


def run_campaign(seeds, mode="spo", mutant=None, workers=1, **bounds):
    """Runs generate_scenario(seed) for every seed in seeds.
    With workers > 1 runs are spread over reactor threads, which
    requires a running reactor in another thread.
    """
    def one(seed):
        return run_scenario(seed, generate_scenario(seed, mode, **bounds),
                            mutant)

    seeds = list(seeds)
    if workers > 1 and seeds:
        runs = parallel(one, seeds, workers)
    else:
        runs = [one(seed) for seed in seeds]
    campaign = Campaign(runs)
    log.info("Campaign of {} runs in {} mode{}: {} clean".format(
        len(seeds), mode, " against {}".format(mutant) if mutant else "",
        campaign.clean))
    return campaign


def parallel(fn, args, workers):
    def call():
        reactor.suggestThreadPoolSize(workers)
        deferreds = [threads.deferToThread(fn, a) for a in args]
        return defer.gatherResults(deferreds, consumeErrors=True)
    return threads.blockingCallFromThread(reactor, call)


def minimize(scenario, mutant=None, failing=None):
    """Greedily drops schedule directives while the run keeps failing one
    of the failing property ids. Returns the smallest scenario found.
    """
    failing = set(failing or [])
    current = Scenario(scenario)

    def still_fails(candidate):
        try:
            candidate.validate()
        except ScenarioError:
            return False
        report = Simulator(candidate, mutant=mutant).run().report
        return bool(set(failed(report)) & failing)

    changed = True
    while changed:
        changed = False
        for i in range(len(current["schedule"])):
            candidate = Scenario(current)
            del candidate["schedule"][i]
            if still_fails(candidate):
                current = candidate
                changed = True
                break
    return current
