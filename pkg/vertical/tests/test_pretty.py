# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

from collections import OrderedDict

from twisted.trial import unittest

from vertical import pretty
from vertical.checker import FAIL, PASS, Verdict, Violation, verdicts
from vertical.fuzz import Campaign, CampaignRun
from vertical.history import History


class PrettyTestCase(unittest.TestCase):

    def test_verdicts(self):
        text = pretty.verdicts_to_ascii_table(verdicts(History()))
        self.assertIn("NOT-EVALUATED", text)
        self.assertIn("no scenario premise", text)

    def test_first_violation_shown(self):
        report = OrderedDict([
            ("P2", Verdict(FAIL, [Violation("P2", {}, "twice"),
                                  Violation("P2", {}, "again")], None)),
            ("P3", Verdict(PASS, [], None))])
        text = pretty.verdicts_to_ascii_table(report)
        self.assertIn("twice (+1 more)", text)
        self.assertIn("Integrity", text)

    def test_metrics(self):
        text = pretty.metrics_to_ascii_table(OrderedDict([
            ("steady_latency", None),
            ("downtime", OrderedDict([("1", 0), ("2", "n/a")]))]))
        lines = text.splitlines()
        self.assertIn("n/a", lines[2])
        self.assertIn("downtime [1]", lines[3])
        self.assertIn("downtime [2]", lines[4])

    def test_campaign(self):
        campaign = Campaign([CampaignRun(1, [], True, False, None, True),
                             CampaignRun(2, ["P4", "Inv1"], False, False,
                                         None, False)])
        text = pretty.campaign_to_ascii_table(campaign)
        self.assertIn("P4, Inv1", text)
        self.assertIn("1 of 2 runs clean, 1 cross-checked", text)
        self.assertEqual(4, len(text.strip().splitlines()))
