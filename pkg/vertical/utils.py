# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

import os
import os.path
import json
from collections import OrderedDict


SCENARIOS_DIR = os.path.join(os.path.dirname(__file__), "scenarios")


def bundled_scenarios():
    """Names of the scenarios shipped with the package"""
    if not os.path.isdir(SCENARIOS_DIR):
        return []
    return sorted(name[:-len(".json")] for name in os.listdir(SCENARIOS_DIR)
                  if name.endswith(".json"))


def resolve_scenario(value):
    """Returns a path for a scenario given as a path or as the
    name of a bundled scenario, e.g. "fig4_reconfig"
    """
    if os.path.exists(value):
        return value
    path = os.path.join(SCENARIOS_DIR, "{}.json".format(value))
    if os.path.exists(path):
        return path
    return value


def golden_trace(name):
    """Path of the recorded trace.jsonl shipped next to a bundled
    scenario
    """
    return os.path.join(SCENARIOS_DIR, "{}.trace.jsonl".format(name))


def to_int(value, name):
    """Parses value as integer, bool is refused

    >>> to_int("3", "seed")
    3
    """
    if isinstance(value, bool):
        raise ValueError("{} should be an integer, got {!r}".format(
            name, value))
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ValueError("{} should be an integer, got {!r}".format(
            name, value))


def dump_json(value):
    """Stable JSON rendering: sorted plain dicts, kept order for
    OrderedDict, fixed separators
    """
    sort = not isinstance(value, OrderedDict)
    return json.dumps(value, indent=2, sort_keys=sort,
                      separators=(",", ": "))


def write_json(path, value):
    with open(path, "w") as f:
        f.write(dump_json(value) + "\n")


def ensure_dir(path):
    if not os.path.isdir(path):
        os.makedirs(path)
    return path
