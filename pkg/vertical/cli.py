# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

"""Command line entry point.

    vertical run --scenario fig4_reconfig --mode spo --out /tmp/fig4
    vertical check /tmp/fig4/trace.jsonl --scenario fig4_reconfig
    vertical fuzz --seeds 1000 --mode spo --workers 4
    vertical metrics --scenario zero_downtime --mode po

Exit status is 0 when nothing failed, 1 when a property or monitor was
violated and 2 on usage errors, malformed scenarios or traces.
"""

import os
import logging

from . import runner
from .checker import failed, report_to_json, verdicts
from .errors import ScenarioError, TraceError
from .fuzz import run_campaign, minimize
from .linearizability import check_linearizable
from .pretty import (verdicts_to_ascii_table, metrics_to_ascii_table,
                     campaign_to_ascii_table)
from .reconfig import MUTANTS
from .replication import machine_by_name
from .scenario import load_scenario, MODES
from .simulator import Simulator
from .trace import dump_history, dump_ops, load_history, load_ops
from .utils import ensure_dir, write_json, dump_json

log = logging.getLogger(__name__)

VIOLATION = 1

TRACE = "trace.jsonl"
OPS = "ops.jsonl"
METRICS = "metrics.json"
VERDICTS = "verdicts.json"


@runner.command
def run(scenario=None, out=".", mode=None, seed=None, mutant=None):
    """Runs a scenario and writes its trace, client ops, metrics and
    verdicts to the output directory
    """
    s = _scenario(scenario, mode, seed)
    result = Simulator(s, mutant=_mutant(mutant)).run()

    ensure_dir(out)
    with open(os.path.join(out, TRACE), "w") as f:
        dump_history(result.history, f)
    if s.machine is not None:
        with open(os.path.join(out, OPS), "w") as f:
            dump_ops(result.ops, f)
    write_json(os.path.join(out, METRICS), result.metrics)
    write_json(os.path.join(out, VERDICTS), report_to_json(result.report))

    print(verdicts_to_ascii_table(result.report))
    return VIOLATION if failed(result.report) else 0


@runner.command
def check(trace, ops=None, scenario=None, mode=None):
    """Re-checks a trace file offline. A scenario supplies the mode,
    the state machine and the liveness premise.
    """
    s = None
    if scenario is not None:
        s = _scenario(scenario, mode, None)
        mode = s.mode
    mode = mode or "vab"
    if mode not in MODES:
        raise ScenarioError("Unknown mode {!r}, use one of {}".format(
            mode, MODES))

    if ops is not None and (s is None or s.machine is None):
        raise ScenarioError("Checking client ops needs a scenario with a "
                            "state machine")

    h = _read(trace, load_history)
    machine = lin = None
    if ops is not None:
        machine = machine_by_name(s.machine)
        lin = check_linearizable(_read(ops, load_ops), machine)

    report = verdicts(h, mode, premise=s.premise() if s else None,
                      lin=lin, machine=machine)
    print(verdicts_to_ascii_table(report))
    return VIOLATION if failed(report) else 0


@runner.command
def fuzz(seeds=100, mode="spo", mutant=None, processes=7, reconfigs=5,
         workers=1, seed=0, liveness=False, machine=None):
    """Runs a campaign over seeds seed .. seed + seeds - 1 and prints the
    first failing seed with a minimized scenario
    """
    if mode not in MODES:
        raise ScenarioError("Unknown mode {!r}, use one of {}".format(
            mode, MODES))
    if machine is not None:
        machine_by_name(machine)
    mutant = _mutant(mutant)

    campaign = run_campaign(
        range(seed, seed + seeds), mode, mutant=mutant, workers=workers,
        max_processes=processes, max_reconfigs=reconfigs,
        liveness=liveness, machine=machine)
    print(campaign_to_ascii_table(campaign))

    if liveness:
        skipped = [r.seed for r in campaign.runs
                   if not r.liveness_evaluated]
        if skipped:
            log.warning("Liveness was not evaluated for seeds {}".format(
                skipped))

    counts = campaign.by_property()
    if counts:
        print("Violated: {}".format(", ".join(
            "{} x{}".format(prop, n) for prop, n in sorted(counts.items()))))

    first = campaign.first_failure()
    if first is None:
        return 0
    witness = minimize(first.scenario, mutant=mutant, failing=first.failed)
    print("Seed {} failed {}, minimized scenario:".format(
        first.seed, ", ".join(first.failed)))
    print(dump_json(witness.to_json()))
    return VIOLATION


@runner.command
def metrics(scenario=None, mode=None, seed=None, mutant=None):
    """Runs a scenario and prints its latency and downtime metrics"""
    s = _scenario(scenario, mode, seed)
    result = Simulator(s, mutant=_mutant(mutant)).run()
    print(metrics_to_ascii_table(result.metrics))
    return 0


def _scenario(value, mode, seed):
    if value is None:
        raise ScenarioError("Missing --scenario, give a path or one of the "
                            "bundled scenarios")
    s = load_scenario(value)
    try:
        return s.with_overrides(mode=mode, seed=seed).validate()
    except ValueError as e:
        raise ScenarioError(str(e))


def _mutant(value):
    if value is None:
        return None
    if value not in MUTANTS:
        raise ScenarioError("Unknown mutant {!r}, use one of {}".format(
            value, MUTANTS))
    log.warning("Running the unsafe {} mutant".format(value))
    return value


def _read(path, loader):
    try:
        with open(path) as f:
            return loader(f)
    except (IOError, OSError) as e:
        raise TraceError("Can not read {}: {}".format(path, e))


def main(argv=None):
    runner.run(description="Vertical atomic broadcast simulator and "
               "checker", argv=argv)
