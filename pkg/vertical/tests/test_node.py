# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

import mock

from twisted.trial import unittest

from vertical.errors import NotLeaderError, ProtocolError
from vertical.history import History, Broadcast, Deliver, ConfChanged
from vertical.messages import (Forward, Accept, AcceptAck, Commit, Probe,
                               ProbeAck, NewConfig, NewState, NewStateAck,
                               ReplayDone)
from vertical.model import AppMessage, Configuration
from vertical.node import Node, Mode, Status

C0 = Configuration(0, [1, 2, 3], 1)
M0 = AppMessage(1, 0, "a")
M1 = AppMessage(1, 1, "b")


class FakeEnv(object):
    """Records what nodes send and emit, delivers nothing"""

    def __init__(self):
        self.sent = []
        self.history = History()
        self.monitor = mock.Mock()
        self.metrics = mock.Mock()
        self.call_cs = mock.Mock()
        self.cs = mock.Mock()

    def send(self, src, dst, message):
        self.sent.append((src, dst, message))

    def multicast(self, src, dsts, message):
        for dst in sorted(dsts):
            self.send(src, dst, message)

    def emit(self, proc, action):
        return self.history.append(action)

    def actions(self, kind):
        return [a for _, a in self.history.actions(kind)]


class NodeTestCase(unittest.TestCase):

    def setUp(self):
        self.env = FakeEnv()

    def node(self, pid, mode=Mode.VAB, initial=C0):
        return Node(pid, self.env, mode, initial)

    def follower_with_log(self, mode=Mode.VAB):
        n = self.node(2, mode)
        n.receive(1, Accept(0, 0, M0))
        n.receive(1, Accept(0, 1, M1))
        del self.env.sent[:]
        return n

    def test_bootstrap(self):
        """
        Members of the initial configuration start as leader or
        follower, everybody else is fresh
        """
        self.assertEqual(Status.LEADER, self.node(1).status)
        self.assertEqual(Status.FOLLOWER, self.node(2).status)
        self.assertEqual(Status.FRESH, self.node(4).status)
        self.assertTrue(self.node(1).can_broadcast())
        self.assertFalse(self.node(2).can_broadcast())

    def test_bootstrap_spec_at_spo_leader(self):
        self.node(1, Mode.SPO).bootstrap()
        self.node(2, Mode.SPO).bootstrap()
        self.node(4, Mode.SPO).bootstrap()
        self.assertEqual([ConfChanged(1, C0, ()), ConfChanged(2, C0, None)],
                         self.env.actions(ConfChanged))

    def test_accept(self):
        n = self.node(2)
        n.receive(1, Accept(0, 0, M0))
        self.assertEqual([M0], n.msg)
        self.assertEqual([(2, 1, AcceptAck(0, 0))], self.env.sent)

    def test_stale_accept_is_discarded(self):
        """
        Follower epoch=2 gets ACCEPT(1, 4, m): dropped, no ack
        """
        n = self.node(2)
        n.receive(3, NewState(2, (), frozenset([1, 2, 3])))
        del self.env.sent[:]
        n.receive(1, Accept(1, 4, M0))
        self.assertEqual([], self.env.sent)
        self.assertEqual([], n.pending)
        self.assertEqual(2, n.epoch)

    def test_commits_wait_for_their_turn(self):
        """
        COMMIT(0, 1) is buffered until COMMIT(0, 0) was applied
        """
        n = self.follower_with_log()
        n.receive(1, Commit(0, 1))
        self.assertEqual(-1, n.last_delivered)
        self.assertEqual(1, len(n.pending))

        n.receive(1, Commit(0, 0))
        self.assertEqual(1, n.last_delivered)
        self.assertEqual([Deliver(2, M0), Deliver(2, M1)],
                         self.env.actions(Deliver))
        self.assertEqual([], n.pending)

    def test_commit_of_empty_slot(self):
        n = self.node(2)
        self.assertRaises(ProtocolError, n.receive, 1, Commit(0, 0))

    def test_forward_and_commit_quorum(self):
        """
        Leader commits (0, 0) once every follower acknowledged it
        """
        n = self.node(1)
        n.broadcast(M0)
        self.assertEqual([Broadcast(1, M0)], self.env.actions(Broadcast))
        self.assertEqual([(1, 1, Forward(M0))], self.env.sent)

        del self.env.sent[:]
        n.receive(1, Forward(M0))
        self.assertEqual([(1, 2, Accept(0, 0, M0)), (1, 3, Accept(0, 0, M0))],
                         self.env.sent)
        self.assertEqual(1, n.next)

        del self.env.sent[:]
        n.receive(2, AcceptAck(0, 0))
        self.assertEqual([], self.env.sent)
        n.receive(3, AcceptAck(0, 0))
        self.assertEqual([(1, 1, Commit(0, 0)), (1, 2, Commit(0, 0)),
                          (1, 3, Commit(0, 0))], self.env.sent)

    def test_singleton_commits_at_once(self):
        n = self.node(1, initial=Configuration(0, [1], 1))
        n.receive(1, Forward(M0))
        self.assertEqual([(1, 1, Commit(0, 0))], self.env.sent)

    def test_forward_waits_for_leadership(self):
        n = self.node(2)
        n.receive(3, Forward(M0))
        self.assertEqual([], self.env.sent)
        self.assertEqual([(3, Forward(M0))], n.pending)

    def test_probe(self):
        """
        Probes raise new_epoch and answer whether the epoch was joined,
        stale probes are dropped
        """
        n = self.node(4)
        n.receive(6, Probe(3, 2))
        self.assertEqual(3, n.new_epoch)
        self.assertEqual([(4, 6, ProbeAck(False, 3))], self.env.sent)

        del self.env.sent[:]
        n.receive(6, Probe(2, 1))
        self.assertEqual([], self.env.sent)
        self.assertEqual(3, n.new_epoch)

        self.node(2).receive(6, Probe(1, 0))
        self.assertEqual([(2, 6, ProbeAck(True, 1))], self.env.sent)

    def test_new_config(self):
        """
        p2 with msg=[m0, m1] and new_epoch=2 becomes leader of epoch 2,
        transfers its log and replays commits once everybody acked
        """
        n = self.follower_with_log()
        n.receive(5, Probe(2, 0))
        del self.env.sent[:]
        members = frozenset([1, 2, 4])
        n.receive(5, NewConfig(2, members))

        self.assertEqual(Status.LEADER, n.status)
        self.assertEqual((2, 2, 1), (n.epoch, n.next, n.init_len))
        self.assertEqual([(2, 1, NewState(2, (M0, M1), members)),
                          (2, 4, NewState(2, (M0, M1), members))],
                         self.env.sent)
        self.assertEqual([ConfChanged(2, Configuration(2, members, 2), None)],
                         self.env.actions(ConfChanged))

        del self.env.sent[:]
        n.receive(1, NewStateAck(2))
        self.assertEqual([], self.env.sent)
        n.receive(4, NewStateAck(2))
        commits = [m for _, _, m in self.env.sent]
        self.assertEqual([Commit(2, 0)] * 3 + [Commit(2, 1)] * 3, commits)

    def test_new_config_needs_probe(self):
        n = self.follower_with_log()
        n.receive(5, NewConfig(2, frozenset([1, 2])))
        self.assertEqual(Status.FOLLOWER, n.status)
        self.assertEqual(1, len(n.pending))

    def test_new_state(self):
        """
        A fresh process adopts the transferred log and acknowledges it
        """
        n = self.node(4)
        members = frozenset([1, 2, 4])
        n.receive(2, NewState(2, (M0, M1), members))
        self.assertEqual(Status.FOLLOWER, n.status)
        self.assertEqual((2, 2, 2), (n.epoch, n.new_epoch, n.leader))
        self.assertEqual([M0, M1], n.msg)
        self.assertEqual([(4, 2, NewStateAck(2))], self.env.sent)

    def test_overtaken_new_state_is_discarded(self):
        n = self.node(1)
        n.receive(6, Probe(3, 0))
        n.receive(2, NewState(2, (M0,), frozenset([1, 2])))
        self.assertEqual(0, n.epoch)
        self.assertEqual([], n.pending)

    def test_spo_leader_delivers_speculatively(self):
        """
        The new SPO leader hands the undelivered inherited suffix to
        conf_changed and may broadcast right away
        """
        n = self.follower_with_log(Mode.SPO)
        n.receive(5, Probe(2, 0))
        n.receive(5, NewConfig(2, frozenset([1, 2, 4])))
        joined = self.env.actions(ConfChanged)[-1]
        self.assertEqual((M0, M1), joined.spec)
        self.assertTrue(n.can_broadcast())

    def test_po_leader_waits_for_the_inherited_log(self):
        """
        In PO mode conf_changed and broadcasting wait for the commit
        replay and the delivery of the inherited messages
        """
        n = self.follower_with_log(Mode.PO)
        n.receive(5, Probe(2, 0))
        n.receive(5, NewConfig(2, frozenset([1, 2, 4])))
        self.assertEqual([], self.env.actions(ConfChanged))
        self.assertFalse(n.can_broadcast())
        self.assertRaises(NotLeaderError, n.broadcast, M0)

        n.receive(1, NewStateAck(2))
        n.receive(4, NewStateAck(2))
        self.assertEqual([], self.env.actions(ConfChanged))
        self.assertEqual([(2, 1, ReplayDone(2, 1)), (2, 4, ReplayDone(2, 1))],
                         self.env.sent[-2:])
        n.receive(2, Commit(2, 0))
        n.receive(2, Commit(2, 1))
        self.assertEqual(1, len(self.env.actions(ConfChanged)))
        self.assertTrue(n.can_broadcast())

    def test_po_follower_waits_for_the_replay(self):
        """
        A follower that delivered its whole inherited log before
        NEW_STATE still joins only once the leader's replay is over
        """
        n = self.node(2, Mode.PO)
        n.receive(1, Accept(0, 0, M0))
        n.receive(1, Commit(0, 0))
        n.receive(4, Probe(1, 0))
        n.receive(4, NewState(1, (M0,), frozenset([2, 3, 4])))
        self.assertEqual([], self.env.actions(ConfChanged))

        n.receive(4, Commit(1, 0))
        self.assertEqual([], self.env.actions(ConfChanged))
        n.receive(4, ReplayDone(1, 0))
        self.assertEqual(
            [ConfChanged(2, Configuration(1, [2, 3, 4], 4), None)],
            self.env.actions(ConfChanged))
        self.assertEqual([M0], [a.msg for a in self.env.actions(Deliver)])

    def test_po_overtaken_replay_is_discarded(self):
        """
        NEW_STATE of a higher epoch arrives before the end of the replay
        of the lower one: the lower epoch is never joined
        """
        n = self.node(2, Mode.PO)
        n.receive(4, Probe(1, 0))
        n.receive(4, NewState(1, (), frozenset([2, 4])))
        n.receive(5, Probe(2, 1))
        n.receive(5, NewState(2, (), frozenset([2, 5])))
        n.receive(4, ReplayDone(1, -1))
        self.assertEqual([], self.env.actions(ConfChanged))
        self.assertEqual([], n.pending)

        n.receive(5, ReplayDone(2, -1))
        self.assertEqual(
            [ConfChanged(2, Configuration(2, [2, 5], 5), None)],
            self.env.actions(ConfChanged))

    def test_po_empty_log(self):
        """
        With nothing inherited the replay is only the REPLAY_DONE marker
        """
        n = self.node(4, Mode.PO)
        n.receive(5, Probe(1, 0))
        n.receive(5, NewConfig(1, frozenset([3, 4])))
        del self.env.sent[:]
        n.receive(3, NewStateAck(1))
        self.assertEqual([(4, 3, ReplayDone(1, -1))], self.env.sent)
        self.assertEqual(
            [ConfChanged(4, Configuration(1, [3, 4], 4), None)],
            self.env.actions(ConfChanged))
        self.assertTrue(n.can_broadcast())

    def test_po_leader_without_replay(self):
        """
        The no-commit-replay variant announces an empty replay, so the
        inherited messages are never delivered before joining
        """
        n = Node(2, self.env, Mode.PO, C0, mutant="no-commit-replay")
        n.receive(1, Accept(0, 0, M0))
        n.receive(5, Probe(2, 0))
        n.receive(5, NewConfig(2, frozenset([1, 2])))
        del self.env.sent[:]
        n.receive(1, NewStateAck(2))
        self.assertEqual([(2, 1, ReplayDone(2, -1))], self.env.sent)
        self.assertEqual(1, len(self.env.actions(ConfChanged)))
        self.assertEqual([], self.env.actions(Deliver))

    def test_broadcast_restrictions(self):
        self.assertRaises(NotLeaderError, self.node(2, Mode.SPO).broadcast, M0)
        self.assertRaises(NotLeaderError, self.node(4).broadcast, M0)

    def test_reconfigure_calls_are_queued(self):
        n = self.node(1)
        first = n.reconfigure([1, 2])
        second = n.reconfigure([2, 3])
        self.assertIs(first, n.reconfig)
        self.assertEqual([second], list(n.reconfig_queue))
        self.assertEqual(1, self.env.call_cs.call_count)
