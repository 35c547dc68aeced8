# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

import mock

from twisted.trial import unittest

from vertical.config_service import ConfigService
from vertical.errors import InvalidSwap, UnknownEpoch
from vertical.model import Configuration


class ConfigServiceTestCase(unittest.TestCase):

    def setUp(self):
        self.initial = Configuration(0, [1, 2, 3], 1)
        self.introduced = mock.Mock()
        self.cs = ConfigService(self.initial,
                                on_introduction=self.introduced)

    def test_initial_state(self):
        self.assertEqual(0, self.cs.get_last_epoch())
        self.assertEqual(frozenset([1, 2, 3]), self.cs.get_members(0))
        self.assertEqual([self.initial], self.cs.configurations())

    def test_swap_succeeds_on_expected_epoch(self):
        """
        CAS stores the configuration and reports the introduction on
        behalf of the caller
        """
        c = Configuration(1, [2, 3, 4], 2)
        self.assertTrue(self.cs.compare_and_swap(0, c, proc=4))
        self.assertEqual(1, self.cs.get_last_epoch())
        self.assertEqual(frozenset([2, 3, 4]), self.cs.get_members(1))
        self.introduced.assert_called_once_with(4, c)

    def test_swap_fails_on_stale_epoch(self):
        """
        A racing introduction makes the second CAS fail without side
        effects
        """
        self.assertTrue(self.cs.compare_and_swap(
            0, Configuration(1, [1, 2], 1), proc=4))
        self.assertFalse(self.cs.compare_and_swap(
            0, Configuration(1, [3], 3), proc=5))
        self.assertEqual(frozenset([1, 2]), self.cs.get_members(1))
        self.assertEqual(1, self.introduced.call_count)

    def test_swap_needs_higher_epoch(self):
        self.assertRaises(InvalidSwap, self.cs.compare_and_swap,
                          0, Configuration(0, [1], 1))

    def test_skipped_epoch(self):
        """
        Epochs may be skipped, asking for a skipped one is an error
        """
        self.assertTrue(self.cs.compare_and_swap(
            0, Configuration(2, [1], 1)))
        self.assertEqual(2, self.cs.get_last_epoch())
        self.assertRaises(UnknownEpoch, self.cs.get_members, 1)
        self.assertRaises(UnknownEpoch, self.cs.get_config, 7)
