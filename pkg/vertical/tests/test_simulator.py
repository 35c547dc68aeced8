# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

import logging

from twisted.trial import unittest

from vertical.checker import PASS, FAIL, NOT_EVALUATED, failed
from vertical.history import ConfChanged
from vertical.messages import ProbeAck, NewStateAck, Commit
from vertical.model import Configuration
from vertical.scenario import Scenario, load_scenario
from vertical.simulator import Simulator, SimulatedTime
from vertical.trace import dumps_history, dump_history
from vertical.utils import golden_trace


def scenario(members, leader=1, processes=None, schedule=(), **extra):
    values = {
        "processes": processes or sorted(members),
        "initial_config": {"epoch": 0, "members": members,
                           "leader": leader},
        "schedule": list(schedule),
    }
    values.update(extra)
    return Scenario(values).validate()


def broadcasts(proc, *times):
    return [{"type": "broadcast", "at": t, "proc": proc,
             "payload": "m{}".format(t)} for t in times]


def run(s, mutant=None):
    sim = Simulator(s, mutant=mutant)
    return sim, sim.run()


class SteadyLatencyTestCase(unittest.TestCase):

    def test_three_members(self):
        """
        ACCEPT out, ACCEPT_ACK back: two delay units at the leader
        """
        _, result = run(load_scenario("steady_latency"))
        self.assertEqual(2, result.metrics["steady_latency"])
        self.assertEqual(3, result.metrics["latency_samples"])
        self.assertEqual([], failed(result.report))

    def test_singleton(self):
        _, result = run(scenario([1], schedule=broadcasts(1, 1, 2)))
        self.assertEqual(0, result.metrics["steady_latency"])

    def test_five_members(self):
        _, result = run(scenario([1, 2, 3, 4, 5], leader=3,
                                 schedule=broadcasts(3, 1, 5)))
        self.assertEqual(2, result.metrics["steady_latency"])

    def test_spo_leader(self):
        _, result = run(scenario([1, 2, 3], mode="spo",
                                 schedule=broadcasts(None, 1, 5)))
        self.assertEqual(2, result.metrics["steady_latency"])


class DowntimeTestCase(unittest.TestCase):

    def downtime(self, mode, **overrides):
        s = load_scenario("zero_downtime").with_overrides(mode=mode)
        s.update(overrides)
        _, result = run(s.validate())
        self.assertEqual([], failed(result.report))
        return result

    def test_vab_and_spo(self):
        """
        Reconfiguring a functional configuration costs nothing and the
        old configuration keeps committing while probes are in flight
        """
        for mode in ("vab", "spo"):
            result = self.downtime(mode)
            self.assertEqual({"1": 0}, result.metrics["downtime"])
            self.assertTrue(result.metrics["window_commits"]["1"] >= 1)

    def test_po(self):
        """
        The PO leader waits for NEW_STATE and its acknowledgements
        """
        result = self.downtime("po")
        self.assertEqual({"1": 2}, result.metrics["downtime"])

    def test_po_with_empty_log(self):
        s = load_scenario("zero_downtime")
        schedule = [d for d in s.schedule if d["type"] == "reconfigure"]
        result = self.downtime("po", schedule=schedule)
        self.assertEqual({"1": 2}, result.metrics["downtime"])


class WalkthroughTestCase(unittest.TestCase):
    """
    Epoch 2 is introduced but its leader crashes before activating it,
    the next reconfiguration has to skip it
    """

    def setUp(self):
        self.sim, self.result = run(load_scenario("fig4_reconfig"))

    def test_configurations(self):
        self.assertEqual([Configuration(1, [1, 2, 3], 3),
                          Configuration(2, [1, 2, 4], 2),
                          Configuration(3, [1, 4, 5], 1)],
                         self.sim.cs.configurations()[1:])
        self.assertEqual([3, 2], sorted(self.sim.crashed, reverse=True))

    def test_probe_answers(self):
        acks = [(s.src, s.message) for s in self.sim.sent
                if isinstance(s.message, ProbeAck)]
        self.assertIn((4, ProbeAck(False, 3)), acks)
        self.assertIn((1, ProbeAck(True, 3)), acks)

    def test_commits_follow_state_transfer(self):
        sent = self.sim.sent
        acked = [i for i, s in enumerate(sent)
                 if isinstance(s.message, NewStateAck) and
                 s.message.epoch == 3]
        commits = [i for i, s in enumerate(sent)
                   if isinstance(s.message, Commit) and s.message.epoch == 3]
        self.assertEqual(2, len(acked))
        self.assertTrue(commits)
        self.assertTrue(min(commits) > max(acked))
        self.assertEqual(set([0, 1]),
                         set(sent[i].message.pos for i in commits))

    def test_survivors_deliver_everything(self):
        deliveries = self.result.history.deliveries()
        for p in (1, 4, 5):
            self.assertEqual(["a", "b"],
                             [m.payload for _, m in deliveries[p]])

    def test_verdicts(self):
        report = self.result.report
        self.assertEqual([], failed(report))
        for prop in ("P5", "P5a", "P5b", "P5c", "P9", "A1", "Inv1"):
            self.assertEqual(PASS, report[prop].status)
        self.assertEqual(0, self.result.metrics["downtime"]["1"])

    def test_po_downtime(self):
        _, result = run(load_scenario("fig4_reconfig").with_overrides(
            mode="po"))
        self.assertEqual(2, result.metrics["downtime"]["1"])
        self.assertEqual([], failed(result.report))

    def test_golden_trace(self):
        """
        The run written out as trace.jsonl is byte for byte the
        recorded trace shipped with the scenario
        """
        path = self.mktemp()
        with open(path, "w") as f:
            dump_history(self.result.history, f)
        with open(path, "rb") as f:
            written = f.read()
        with open(golden_trace("fig4_reconfig"), "rb") as f:
            recorded = f.read()
        self.assertEqual(31, len(recorded.splitlines()))
        self.assertEqual(recorded, written)

    def test_determinism(self):
        """
        Same scenario and seed, byte-identical trace
        """
        _, again = run(load_scenario("fig4_reconfig"))
        self.assertEqual(dumps_history(self.result.history),
                         dumps_history(again.history))


class DirectivesTestCase(unittest.TestCase):

    def test_rejected_broadcast(self):
        """
        A process that never joined has no leader to forward to
        """
        _, result = run(scenario([1, 2], processes=[1, 2, 3],
                                 schedule=broadcasts(3, 1)))
        self.assertEqual(1, result.metrics["rejected_broadcasts"])
        self.assertEqual([], failed(result.report))

    def test_step_cap(self):
        s = load_scenario("steady_latency")
        s["step_cap"] = 3
        _, result = run(s)
        self.assertFalse(result.quiescent)
        self.assertEqual(NOT_EVALUATED, result.report["P5"].status)

    def test_crash_drops_messages(self):
        s = scenario([1, 2, 3], schedule=[
            {"type": "crash", "at": 1, "proc": 3}] + broadcasts(1, 2))
        sim, result = run(s)
        self.assertEqual({3: 1}, dict(sim.crashed))
        # the leader waits for p3's ACCEPT_ACK forever
        self.assertEqual({}, result.history.deliveries())


class PrimaryOrderRaceTestCase(unittest.TestCase):
    """
    Epoch 1 is introduced with leader p2, but p4 is probed for epoch 2
    before NEW_STATE(1) reaches it and epoch 1 is never activated.
    Meanwhile p1 still leads epoch 0 and accepts m12, which epoch 2
    inherits from p1.
    """

    def setUp(self):
        s = scenario([1, 2, 3], processes=[1, 2, 3, 4, 5, 6], mode="po",
                     links=[{"src": 1, "dst": 5, "delay": 5},
                            {"src": 2, "dst": 4, "delay": 20},
                            {"src": 2, "dst": 6, "delay": 10},
                            {"src": 3, "dst": 6, "delay": 10}],
                     schedule=(
                         broadcasts(1, 1) +
                         [{"type": "reconfigure", "at": 5, "by": 5,
                           "desired_members": [2, 3, 4],
                           "desired_leader": 2}] +
                         broadcasts(1, 12) +
                         [{"type": "reconfigure", "at": 14, "by": 6,
                           "desired_members": [1, 3],
                           "desired_leader": 1}]))
        self.sim, self.result = run(s)

    def test_configurations(self):
        self.assertEqual([Configuration(1, [2, 3, 4], 2),
                          Configuration(2, [1, 3], 1)],
                         self.sim.cs.configurations()[1:])

    def test_nobody_joins_the_unfinished_epoch(self):
        """
        p3 got NEW_STATE(1) after delivering all of its log, it still
        waits for the replay of p2, which never gets p4's
        acknowledgement
        """
        joins = [(a.proc, a.config.epoch)
                 for _, a in self.result.history.actions(ConfChanged)]
        self.assertEqual([(1, 0), (2, 0), (3, 0), (1, 2), (3, 2)], joins)
        self.assertEqual(1, self.sim.nodes[2].epoch)
        self.assertFalse(self.sim.nodes[2].can_broadcast())

    def test_old_epoch_message_delivered_before_joining(self):
        deliveries = self.result.history.deliveries()
        for p in (1, 3):
            self.assertEqual(["m1", "m12"],
                             [m.payload for _, m in deliveries[p]])
        self.assertEqual(["m1"], [m.payload for _, m in deliveries[2]])

    def test_verdicts(self):
        report = self.result.report
        self.assertEqual(PASS, report["P8"].status)
        self.assertEqual([], failed(report))


class ReplicationTestCase(unittest.TestCase):

    def test_counter(self):
        sim, result = run(load_scenario("replication"))
        self.assertEqual(PASS, result.report["LIN"].status)
        self.assertEqual(PASS, result.report["Inv2"].status)
        self.assertEqual([3, 3, 3],
                         [n.app.committed for n in sim.nodes.values()])
        reads = [op for op in result.ops if op.command == "read"]
        self.assertEqual([2], [op.result for op in reads])
        self.assertTrue(all(op.ret is not None for op in result.ops))


class MutantTestCase(unittest.TestCase):
    """
    Each unsafe variant breaks a property on a hand-picked schedule
    """

    def test_skip_probing(self):
        """
        p4 leads epoch 1 with an empty log because nobody else was told
        about the new epoch
        """
        s = scenario([1, 2, 3], processes=[1, 2, 3, 4], schedule=(
            broadcasts(1, 1, 2) +
            [{"type": "reconfigure", "at": 5, "by": 4,
              "desired_members": [1, 4], "desired_leader": 4}] +
            broadcasts(None, 10)))
        _, result = run(s, mutant="skip-probing")
        self.assertIn("P4", failed(result.report))
        self.assertEqual(FAIL, result.report["Inv1"].status)

    def test_no_commit_replay(self):
        """
        p3 got m only through state transfer and nobody commits it again
        """
        s = scenario([1, 2, 3], processes=[1, 2, 3, 4], links=[
            {"src": 1, "dst": 3, "delay": 10},
            {"src": 4, "dst": 1, "delay": 5}], schedule=(
            broadcasts(1, 1) +
            [{"type": "reconfigure", "at": 13, "by": 4,
              "desired_members": [1, 2, 3], "desired_leader": 2}]))
        _, result = run(s)
        self.assertEqual([], failed(result.report))
        self.assertEqual(PASS, result.report["P5c"].status)

        _, result = run(s, mutant="no-commit-replay")
        self.assertEqual(["P5c"], failed(result.report))

    def test_no_commit_replay_in_po_mode(self):
        """
        Without the replay p3 joins epoch 1 with m still undelivered
        although p1 and p2 delivered it in epoch 0
        """
        s = scenario([1, 2, 3], processes=[1, 2, 3, 4], mode="po", links=[
            {"src": 1, "dst": 3, "delay": 10},
            {"src": 4, "dst": 1, "delay": 5}], schedule=(
            broadcasts(1, 1) +
            [{"type": "reconfigure", "at": 13, "by": 4,
              "desired_members": [1, 2, 3], "desired_leader": 2}]))
        _, result = run(s)
        self.assertEqual([], failed(result.report))

        _, result = run(s, mutant="no-commit-replay")
        self.assertIn("P8", failed(result.report))
        self.assertEqual([[3]], [v.witness["procs"]
                                 for v in result.report["P8"].violations])

    def test_leader_any(self):
        """
        p4 never joined epoch 2 but its negative answer makes it the
        leader of epoch 3
        """
        s = scenario([1, 2, 3], processes=[1, 2, 3, 4, 5, 6], links=[
            {"src": 6, "dst": 2, "delay": 3}], schedule=(
            broadcasts(1, 1, 2) + [
                {"type": "reconfigure", "at": 5, "by": 6,
                 "desired_members": [2, 4], "desired_leader": None},
                {"type": "crash", "proc": 1,
                 "on": {"message": "NEW_CONFIG", "epoch": 1}},
                {"type": "reconfigure", "at": 20, "by": 6,
                 "desired_members": [4, 5], "desired_leader": 4}] +
            broadcasts(None, 40)))
        _, result = run(s, mutant="leader-any")
        self.assertIn("P4", failed(result.report))


class StaleLeaderStateTestCase(unittest.TestCase):
    """
    p2 takes over while p1's increment is accepted but not committed
    and executes a second increment right away
    """

    def scenario(self, mode):
        return scenario([1, 2, 3], processes=[1, 2, 3, 4], mode=mode,
                        machine="counter", links=[
                            {"src": 1, "dst": 3, "delay": 10},
                            {"src": 4, "dst": 1, "delay": 5}],
                        schedule=[
                            {"type": "execute", "at": 1, "client": 2,
                             "command": "inc"},
                            {"type": "reconfigure", "at": 5, "by": 4,
                             "desired_members": [1, 2, 3],
                             "desired_leader": 2},
                            {"type": "execute", "at": 9, "client": 2,
                             "command": "inc"},
                            {"type": "execute", "at": 20, "client": 1,
                             "command": "read"}])

    def test_vab_loses_update(self):
        """
        Without the inherited suffix the new leader builds on state 0
        """
        sim, result = run(self.scenario("vab"))
        self.assertEqual(FAIL, result.report["Inv2"].status)
        self.assertEqual(FAIL, result.report["LIN"].status)
        self.assertEqual([1, 1, 1],
                         [n.app.committed for n in sim.nodes.values()
                          if n.pid != 4])
        self.assertEqual(1, sim.ops["1.0"].result)

    def test_spo_keeps_update(self):
        sim, result = run(self.scenario("spo"))
        self.assertEqual([], failed(result.report))
        self.assertEqual(PASS, result.report["LIN"].status)
        self.assertEqual(2, sim.ops["1.0"].result)


class Records(logging.Handler):

    def __init__(self):
        logging.Handler.__init__(self)
        self.addFilter(SimulatedTime())
        self.stamped = {}

    def emit(self, record):
        self.stamped[record.getMessage()] = record.t


class SimulatedTimeTestCase(unittest.TestCase):

    def setUp(self):
        self.records = Records()
        log = logging.getLogger("vertical")
        level = log.level
        log.setLevel(logging.INFO)
        log.addHandler(self.records)
        self.addCleanup(log.setLevel, level)
        self.addCleanup(log.removeHandler, self.records)

    def test_records_carry_the_step_time(self):
        """
        Log lines of a run are stamped with the simulated time of the
        step that wrote them
        """
        run(load_scenario("fig4_reconfig"))
        stamped = self.records.stamped
        self.assertEqual(0, stamped["Running {} (mutant: None)".format(
            load_scenario("fig4_reconfig"))])
        self.assertEqual(14, stamped["p3 crashed"])
        self.assertEqual(
            15, stamped["p6 reconfigures to epoch 2 with [1, 2, 4]"])
        self.assertEqual(20, stamped["p2 crashes on receipt of NEW_CONFIG"])

    def test_outside_a_run(self):
        run(load_scenario("steady_latency"))
        logging.getLogger("vertical.tests").info("after the run")
        self.assertEqual("-", self.records.stamped["after the run"])
