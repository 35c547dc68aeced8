# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

"""JSON-lines trace files.

One history entry per line, keys in a fixed order:
idx, proc, t, action, then msg, config and spec as the action needs.
Client operations go to a separate file with execute/result records.
"""

import json
from collections import OrderedDict

from .errors import TraceError, ScenarioError, assert_trace
from .history import (History, Broadcast, Deliver, ConfChanged, ReconfigReq,
                      ReconfigResp, Introduction, action_name)
from .linearizability import ClientOp
from .model import AppMessage, parse_configuration

FIELDS = {
    "broadcast": ("msg",),
    "deliver": ("msg",),
    "conf_changed": ("config", "spec"),
    "reconfig_req": (),
    "reconfig_resp": ("config",),
    "introduction": ("config",),
}

HEAD = ("idx", "proc", "t", "action")


class TraceRecord(OrderedDict):
    """One parsed trace line"""

    @property
    def idx(self):
        return self["idx"]

    @property
    def proc(self):
        return self["proc"]

    @property
    def t(self):
        return self["t"]

    @property
    def action(self):
        return self["action"]


def _msg_to_json(m):
    return OrderedDict([("origin", m.origin), ("seq", m.seq),
                        ("payload", m.payload)])


def _config_to_json(c):
    if c is None:
        return None
    return OrderedDict([("epoch", c.epoch),
                        ("members", sorted(c.members)),
                        ("leader", c.leader)])


def record_of(entry):
    a = entry.action
    out = TraceRecord([("idx", entry.idx), ("proc", a.proc),
                       ("t", entry.t), ("action", action_name(a))])
    if isinstance(a, (Broadcast, Deliver)):
        out["msg"] = _msg_to_json(a.msg)
    elif isinstance(a, ConfChanged):
        out["config"] = _config_to_json(a.config)
        out["spec"] = None if a.spec is None else \
            [_msg_to_json(m) for m in a.spec]
    elif isinstance(a, (ReconfigResp, Introduction)):
        out["config"] = _config_to_json(a.config)
    return out


def dumps_history(h):
    return "".join(json.dumps(record_of(entry)) + "\n" for entry in h)


def dump_history(h, fobj):
    fobj.write(dumps_history(h))


def _int(value, what, n):
    assert_trace(isinstance(value, int) and not isinstance(value, bool),
                 "Line {}: {} should be an integer, got {!r}", n, what, value)
    return value


def _msg(value, n):
    assert_trace(isinstance(value, dict) and
                 list(value) == ["origin", "seq", "payload"],
                 "Line {}: msg should be {{origin, seq, payload}}", n)
    assert_trace(isinstance(value["payload"], str),
                 "Line {}: payload should be a string", n)
    return AppMessage(_int(value["origin"], "origin", n),
                      _int(value["seq"], "seq", n), value["payload"])


def _config(value, n, optional=False):
    if value is None and optional:
        return None
    assert_trace(isinstance(value, dict) and
                 list(value) == ["epoch", "members", "leader"],
                 "Line {}: config should be {{epoch, members, leader}}", n)
    try:
        return parse_configuration(value)
    except ScenarioError as e:
        raise TraceError("Line {}: {}".format(n, e))


def parse_record(line, n):
    try:
        value = json.loads(line, object_pairs_hook=TraceRecord)
    except ValueError as e:
        raise TraceError("Line {}: not JSON: {}".format(n, e))
    assert_trace(isinstance(value, dict), "Line {}: not an object", n)
    name = value.get("action")
    assert_trace(name in FIELDS, "Line {}: unknown action {!r}", n, name)
    expected = list(HEAD) + list(FIELDS[name])
    assert_trace(list(value) == expected,
                 "Line {}: fields should be {}, got {}", n, expected,
                 list(value))
    for key in ("idx", "proc", "t"):
        _int(value[key], key, n)
    return value


def action_of(record, n):
    name, proc = record.action, record.proc
    if name == "broadcast":
        return Broadcast(proc, _msg(record["msg"], n))
    if name == "deliver":
        return Deliver(proc, _msg(record["msg"], n))
    if name == "conf_changed":
        spec = record["spec"]
        if spec is not None:
            assert_trace(isinstance(spec, list),
                         "Line {}: spec should be a list or null", n)
            spec = tuple(_msg(m, n) for m in spec)
        return ConfChanged(proc, _config(record["config"], n), spec)
    if name == "reconfig_req":
        return ReconfigReq(proc)
    if name == "reconfig_resp":
        return ReconfigResp(proc, _config(record["config"], n, optional=True))
    return Introduction(proc, _config(record["config"], n))


def load_history(fobj):
    """Parses a trace file into a :class:`History`, raising TraceError
    on any schema violation
    """
    h = History()
    for n, line in enumerate(fobj, 1):
        if not line.strip():
            continue
        record = parse_record(line, n)
        assert_trace(record.idx == len(h) + 1,
                     "Line {}: idx should be {}, got {}", n, len(h) + 1,
                     record.idx)
        h.append(action_of(record, n), record.t)
    return h


def dump_ops(ops, fobj):
    events = []
    for op in ops:
        events.append((op.call, OrderedDict([
            ("type", "execute"), ("id", op.id), ("client", op.client),
            ("command", op.command), ("seq", op.call)])))
        if op.ret is not None:
            events.append((op.ret, OrderedDict([
                ("type", "result"), ("id", op.id), ("result", op.result),
                ("seq", op.ret)])))
    for _, record in sorted(events, key=lambda e: e[0]):
        fobj.write(json.dumps(record) + "\n")


def load_ops(fobj):
    ops = OrderedDict()
    for n, line in enumerate(fobj, 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except ValueError as e:
            raise TraceError("Line {}: not JSON: {}".format(n, e))
        assert_trace(isinstance(record, dict) and
                     record.get("type") in ("execute", "result"),
                     "Line {}: unknown client record", n)
        if record["type"] == "execute":
            ops[record["id"]] = ClientOp(
                record["id"], record["client"], record["command"],
                _int(record["seq"], "seq", n), None, None)
        else:
            assert_trace(record["id"] in ops,
                         "Line {}: result for unknown operation {}", n,
                         record["id"])
            ops[record["id"]] = ops[record["id"]]._replace(
                ret=_int(record["seq"], "seq", n), result=record["result"])
    return list(ops.values())
