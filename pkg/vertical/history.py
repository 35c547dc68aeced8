# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

"""Histories: the global, append-only sequence of externally visible
actions of a run.
"""

from collections import namedtuple

Broadcast = namedtuple("Broadcast", "proc msg")
Deliver = namedtuple("Deliver", "proc msg")
# spec is None when absent, a tuple of AppMessage otherwise
ConfChanged = namedtuple("ConfChanged", "proc config spec")
ReconfigReq = namedtuple("ReconfigReq", "proc")
# config is None for a failed reconfiguration
ReconfigResp = namedtuple("ReconfigResp", "proc config")
Introduction = namedtuple("Introduction", "proc config")

ACTION_NAMES = {
    Broadcast: "broadcast",
    Deliver: "deliver",
    ConfChanged: "conf_changed",
    ReconfigReq: "reconfig_req",
    ReconfigResp: "reconfig_resp",
    Introduction: "introduction",
}

# idx is 1-based, t is the simulated clock
Entry = namedtuple("Entry", "idx t action")


def action_name(action):
    return ACTION_NAMES[type(action)]


class History(object):
    """Append-only list of entries with dense 1-based indices"""

    def __init__(self, entries=None):
        self.entries = []
        for entry in (entries or []):
            self.append(entry.action, entry.t)

    def append(self, action, t=0):
        entry = Entry(len(self.entries) + 1, t, action)
        self.entries.append(entry)
        return entry

    def at(self, k):
        """Returns the k-th action (1-based)"""
        if not 1 <= k <= len(self.entries):
            raise IndexError("History index {} out of range".format(k))
        return self.entries[k - 1].action

    def actions(self, kind=None):
        """Yields (idx, action) pairs, optionally of one kind only"""
        for entry in self.entries:
            if kind is None or isinstance(entry.action, kind):
                yield entry.idx, entry.action

    def deliveries(self):
        """Returns {proc: [(idx, msg), ...]} in delivery order"""
        out = {}
        for idx, a in self.actions(Deliver):
            out.setdefault(a.proc, []).append((idx, a.msg))
        return out

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other):
        return isinstance(other, History) and self.entries == other.entries

    def __ne__(self, other):
        return not self.__eq__(other)


def epoch_of(h, k):
    """Epoch of the latest conf_changed at the same process strictly
    before index k, or None if there is none.
    """
    if not 1 <= k <= len(h):
        raise IndexError("History index {} out of range".format(k))
    proc = h.at(k).proc
    for l in range(k - 1, 0, -1):
        a = h.at(l)
        if isinstance(a, ConfChanged) and a.proc == proc:
            return a.config.epoch
    return None


def epochs(h):
    """Computes epoch_of for every index in one pass.
    Returns a list indexed by history index (slot 0 unused).
    """
    current = {}
    out = [None]
    for entry in h:
        a = entry.action
        out.append(current.get(a.proc))
        if isinstance(a, ConfChanged):
            current[a.proc] = a.config.epoch
    return out
