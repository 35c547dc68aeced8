# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

"""Shared vocabulary: processes, epochs, configurations and application
messages. Process ids and epochs are plain integers.
"""

from collections import namedtuple

from .errors import ScenarioError


class Configuration(namedtuple("Configuration", "epoch members leader")):
    """Configuration triple <epoch, members, leader>.
    Is hashable, members are kept as a frozenset.
    """
    __slots__ = ()

    def __new__(cls, epoch, members, leader):
        members = frozenset(members)
        if epoch < 0:
            raise ScenarioError(
                "Configuration epoch must be >= 0, got {}".format(epoch))
        if not members:
            raise ScenarioError(
                "Configuration {} has no members".format(epoch))
        if leader not in members:
            raise ScenarioError(
                "Leader {} is not a member of {}".format(
                    leader, sorted(members)))
        return super(Configuration, cls).__new__(cls, epoch, members, leader)

    def to_json(self):
        return {"epoch": self.epoch,
                "members": sorted(self.members),
                "leader": self.leader}

    def __repr__(self):
        return "<{}, {}, p{}>".format(
            self.epoch, "{" + ",".join(
                "p{}".format(p) for p in sorted(self.members)) + "}",
            self.leader)


def parse_configuration(value):
    """Converts configuration in free form to :class:`Configuration`:
    * a dict {"epoch": 0, "members": [1, 2], "leader": 1}
    * a tuple/list (epoch, members, leader)
    """
    if value is None:
        return None
    if isinstance(value, Configuration):
        return value
    if isinstance(value, dict):
        try:
            return Configuration(
                int(value["epoch"]),
                [int(p) for p in value["members"]],
                int(value["leader"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ScenarioError("Invalid configuration {}: {}".format(
                value, e))
    if isinstance(value, (tuple, list)):
        if len(value) != 3:
            raise ScenarioError("Configuration should be (epoch, members, "
                                "leader)")
        return Configuration(*value)
    raise ScenarioError(
        "Unsupported configuration type: {}".format(type(value)))


class AppMessage(namedtuple("AppMessage", "origin seq payload")):
    """Application message. Identity is (origin, seq), the payload
    does not take part in comparisons.
    """
    __slots__ = ()

    @property
    def ident(self):
        return (self.origin, self.seq)

    def __eq__(self, other):
        if not isinstance(other, AppMessage):
            return NotImplemented
        return self.ident == other.ident

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash(self.ident)

    def __repr__(self):
        return "m({}.{})".format(self.origin, self.seq)

    def to_json(self):
        return {"origin": self.origin, "seq": self.seq,
                "payload": self.payload}


class MessageFactory(object):
    """Hands out application messages with per-origin sequence numbers,
    so that no two broadcasts of one run share an identity.
    """
    def __init__(self):
        self.counters = {}

    def fresh_message(self, origin, payload):
        seq = self.counters.get(origin, 0)
        self.counters[origin] = seq + 1
        return AppMessage(origin, seq, payload)
