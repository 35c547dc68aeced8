# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

"""Wire messages exchanged by simulated processes.

Positions are 0-based. NewState.log is a tuple of AppMessage or None
for holes.
"""

from collections import namedtuple

Forward = namedtuple("Forward", "msg")
Accept = namedtuple("Accept", "epoch pos msg")
AcceptAck = namedtuple("AcceptAck", "epoch pos")
Commit = namedtuple("Commit", "epoch pos")
Probe = namedtuple("Probe", "new_epoch epoch")
ProbeAck = namedtuple("ProbeAck", "flag new_epoch")
NewConfig = namedtuple("NewConfig", "epoch members")
NewState = namedtuple("NewState", "epoch log members")
NewStateAck = namedtuple("NewStateAck", "epoch")
# PO mode: the commit replay of an epoch went out up to position upto
ReplayDone = namedtuple("ReplayDone", "epoch upto")
Execute = namedtuple("Execute", "id command")
Result = namedtuple("Result", "id result")


NAMES = {
    Forward: "FORWARD",
    Accept: "ACCEPT",
    AcceptAck: "ACCEPT_ACK",
    Commit: "COMMIT",
    Probe: "PROBE",
    ProbeAck: "PROBE_ACK",
    NewConfig: "NEW_CONFIG",
    NewState: "NEW_STATE",
    NewStateAck: "NEW_STATE_ACK",
    ReplayDone: "REPLAY_DONE",
    Execute: "EXECUTE",
    Result: "RESULT",
}


def name_of(message):
    return NAMES[type(message)]


def epoch_of_message(message):
    """Returns the epoch a message is tagged with or None"""
    if isinstance(message, (Probe, ProbeAck)):
        return message.new_epoch
    return getattr(message, "epoch", None)
