# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

import mock

from twisted.trial import unittest

from vertical.config_service import ConfigService
from vertical.errors import ProtocolError
from vertical.history import History, ReconfigReq, ReconfigResp
from vertical.messages import Probe, NewConfig
from vertical.model import Configuration
from vertical.reconfig import (ReconfigTask, Start, ProbeAckEvent, PROBING,
                               choose_leader, compute_membership)


class FakeEnv(object):
    """Configuration service calls complete at once, sends are recorded"""

    def __init__(self, initial):
        self.cs = ConfigService(initial)
        self.history = History()
        self.metrics = mock.Mock()
        self.sent = []

    def call_cs(self, proc, fn, args, callback):
        callback(fn(*args))

    def send(self, src, dst, message):
        self.sent.append((dst, message))

    def emit(self, proc, action):
        return self.history.append(action)


class PolicyTestCase(unittest.TestCase):

    def test_choose_leader(self):
        self.assertEqual(2, choose_leader([1, 2], desired_leader=2))
        self.assertEqual(1, choose_leader([1, 2], desired_leader=3))
        self.assertEqual(1, choose_leader([1, 2]))

    def test_compute_membership(self):
        self.assertEqual(frozenset([1, 4, 5]),
                         compute_membership([4, 5], 1))
        self.assertEqual(frozenset([4, 5]), compute_membership([4, 5], 4))


class ReconfigTaskTestCase(unittest.TestCase):

    def setUp(self):
        self.env = FakeEnv(Configuration(0, [1, 2, 3], 1))
        self.node = mock.Mock()
        self.node.pid = 6
        self.node.env = self.env

    def task(self, members, leader=None, mutant=None):
        t = ReconfigTask(self.node, members, leader, mutant=mutant)
        t.step(Start())
        return t

    def test_functional_configuration(self):
        """
        Every member of a functional configuration answers true, the
        desired leader is picked as soon as it answered
        """
        t = self.task([1, 2, 3], leader=2)
        self.assertEqual(PROBING, t.phase)
        self.assertEqual([(1, Probe(1, 0)), (2, Probe(1, 0)),
                          (3, Probe(1, 0))], self.env.sent)
        self.env.metrics.on_probe_sent.assert_called_once_with(
            1, self.env.history)

        del self.env.sent[:]
        t.step(ProbeAckEvent(2, True, 1))
        self.assertTrue(t.done)
        config = Configuration(1, [1, 2, 3], 2)
        self.assertEqual(config, t.result)
        self.assertEqual([(2, NewConfig(1, config.members))], self.env.sent)
        self.assertEqual([ReconfigReq(6), ReconfigResp(6, config)],
                         [a for _, a in self.env.history.actions()])
        self.node.task_done.assert_called_once_with(t)

        # late answers change nothing
        t.step(ProbeAckEvent(1, True, 1))
        self.assertEqual(1, len(self.env.sent))

    def test_first_true_acker_when_desired_is_absent(self):
        t = self.task([1, 2, 4], leader=4)
        t.step(ProbeAckEvent(3, True, 1))
        self.assertEqual(Configuration(1, [1, 2, 3, 4], 3), t.result)

    def test_walks_down_unactivated_epochs(self):
        """
        Epoch 1 was introduced but never activated: PROBE_ACK(false)
        from p4 moves the probe to epoch 0, where p1 answers true
        """
        self.env.cs.compare_and_swap(0, Configuration(1, [1, 2, 4], 2))
        t = self.task([1, 4, 5], leader=1)
        self.assertEqual(1, t.e)
        self.assertEqual(2, t.e_new)

        del self.env.sent[:]
        t.step(ProbeAckEvent(4, False, 2))
        self.assertEqual(0, t.e)
        self.assertEqual([(1, Probe(2, 0)), (2, Probe(2, 0)),
                          (3, Probe(2, 0))], self.env.sent)

        # p1 answers the epoch 1 round first, which is stale by now
        t.step(ProbeAckEvent(1, False, 2))
        self.assertEqual(PROBING, t.phase)
        t.step(ProbeAckEvent(1, True, 2))
        self.assertEqual(Configuration(2, [1, 4, 5], 1), t.result)

    def test_other_reconfiguration_acks_are_ignored(self):
        t = self.task([1, 2])
        t.step(ProbeAckEvent(1, True, 7))
        self.assertEqual(PROBING, t.phase)
        self.assertEqual([], t.true_ackers)

    def test_lost_race(self):
        """
        Another process introduced epoch 1 first: the call returns
        without a configuration
        """
        t = self.task([1, 2])
        self.env.cs.compare_and_swap(0, Configuration(1, [3], 3))
        t.step(ProbeAckEvent(1, True, 1))
        self.assertTrue(t.done)
        self.assertIsNone(t.result)
        self.assertEqual(ReconfigResp(6, None), self.env.history.at(2))
        self.assertEqual([], [m for _, m in self.env.sent
                              if isinstance(m, NewConfig)])

    def test_probing_below_zero(self):
        t = self.task([1, 2])
        self.assertRaises(ProtocolError, t.step, ProbeAckEvent(1, False, 1))

    def test_skip_probing_mutant(self):
        """
        Only the desired leader is probed, with the last epoch
        """
        t = self.task([4, 5], leader=4, mutant="skip-probing")
        self.assertEqual([(4, Probe(1, 0))], self.env.sent)
        t.step(ProbeAckEvent(4, True, 1))
        self.assertEqual(Configuration(1, [4, 5], 4), t.result)

    def test_leader_any_mutant(self):
        """
        A negative answer from a process that never joined is enough to
        make it the leader
        """
        self.env.cs.compare_and_swap(0, Configuration(1, [1, 2, 4], 1))
        t = self.task([4, 5], leader=4, mutant="leader-any")
        t.step(ProbeAckEvent(4, False, 2))
        self.assertTrue(t.done)
        self.assertEqual(Configuration(2, [4, 5], 4), t.result)
