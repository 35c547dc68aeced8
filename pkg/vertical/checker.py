# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

"""Offline checks of recorded histories.

Each check takes a :class:`History` and returns a list of
:class:`Violation`. :func:`verdicts` runs all of them (plus the online
monitor results, when there are any) and produces the report that is
printed and written to verdicts.json.
"""

from collections import namedtuple, OrderedDict

from .history import (Broadcast, Deliver, ConfChanged, ReconfigReq,
                      ReconfigResp, Introduction, epochs)

PASS = "PASS"
FAIL = "FAIL"
NOT_EVALUATED = "NOT-EVALUATED"


class Violation(namedtuple("Violation", "prop witness message")):
    """prop is the property id, witness a dict with the history indices
    (idx), process ids (procs) and any other coordinates needed to
    re-derive the failure by hand.
    """
    __slots__ = ()

    def to_json(self):
        return OrderedDict([("property", self.prop),
                            ("witness", _jsonable(self.witness)),
                            ("message", self.message)])


Verdict = namedtuple("Verdict", "status violations reason")

PROPERTIES = OrderedDict([
    ("U", "Unique broadcasts"),
    ("WF", "Well-formed reconfiguration calls"),
    ("P1a", "Unique membership and leader per epoch"),
    ("P1b", "Joiner is a member"),
    ("P1c", "Increasing join epochs"),
    ("P1d", "Joined configurations are introduced once"),
    ("P2", "Integrity"),
    ("P3", "Total Order"),
    ("P4", "Agreement"),
    ("P5", "Last reconfiguration terminates"),
    ("P5a", "Members join the last configuration"),
    ("P5b", "Member broadcasts are delivered"),
    ("P5c", "Delivered messages reach all members"),
    ("P6", "Local Order"),
    ("P7", "Global Order"),
    ("P8", "Primary Integrity"),
    ("P9", "Basic speculative delivery"),
    ("P10a", "Prefix consistency of broadcasts"),
    ("P10b", "Prefix consistency of speculative deliveries"),
    ("A1", "Availability assumption"),
    ("Inv1", "Committed messages survive epochs"),
    ("Inv2", "Updates applied to the state they were built on"),
    ("Inv3", "New leader joined every activated epoch"),
    ("Inv4", "State transfer carries accepted messages"),
    ("Inv5", "Accepted prefixes survive epochs"),
    ("Inv6", "Acknowledged prefixes match the leader"),
    ("Inv7", "One message per epoch and position"),
    ("Inv8", "Delivered where accepted"),
    ("CommitMsg", "One committed message per position"),
    ("CommitPos", "One committed position per message"),
    ("Local", "Node-local state"),
    ("Internal", "Internal protocol errors"),
    ("LIN", "Linearizable client operations"),
])

SAFETY = ("P2", "P3", "P4")
LIVENESS = ("P5", "P5a", "P5b", "P5c")
MONITORED = ("Inv1", "Inv2", "Inv3", "Inv4", "Inv5", "Inv6", "Inv7",
             "Inv8", "CommitMsg", "CommitPos", "Local", "Internal")


def _jsonable(value):
    if isinstance(value, dict):
        return OrderedDict((k, _jsonable(value[k])) for k in sorted(value))
    if isinstance(value, (list, tuple, set, frozenset)):
        items = [_jsonable(v) for v in value]
        return sorted(items) if isinstance(value, (set, frozenset)) else items
    if hasattr(value, "ident"):
        return list(value.ident)
    return value


def _violation(prop, message, idx=(), procs=(), **extra):
    witness = dict(extra)
    witness["idx"] = sorted(idx)
    witness["procs"] = sorted(set(procs))
    return Violation(prop, witness, message)


class _Index(object):
    """Per-process views of a history computed in one pass"""

    def __init__(self, h):
        self.h = h
        self.epoch = epochs(h)
        # proc -> [(idx, msg)]
        self.delivered = {}
        # msg -> [(idx, proc)]
        self.broadcasts = {}
        # proc -> [(idx, config, spec)]
        self.joins = {}
        for idx, a in h.actions():
            if isinstance(a, Deliver):
                self.delivered.setdefault(a.proc, []).append((idx, a.msg))
            elif isinstance(a, Broadcast):
                self.broadcasts.setdefault(a.msg, []).append((idx, a.proc))
            elif isinstance(a, ConfChanged):
                self.joins.setdefault(a.proc, []).append(
                    (idx, a.config, a.spec))

    def first_broadcast(self, m):
        found = self.broadcasts.get(m)
        return found[0] if found else (None, None)

    def broadcast_epoch(self, m):
        idx, _ = self.first_broadcast(m)
        return None if idx is None else self.epoch[idx]

    def sequence(self, proc):
        return [m for _, m in self.delivered.get(proc, [])]

    def delivered_before(self, proc, idx):
        return set(m for k, m in self.delivered.get(proc, []) if k < idx)

    def join_of(self, proc, epoch):
        for idx, config, spec in self.joins.get(proc, []):
            if config.epoch == epoch:
                return idx, config, spec
        return None


def check_unique_broadcasts(h):
    out = []
    seen = {}
    for idx, a in h.actions(Broadcast):
        if a.msg in seen:
            out.append(_violation(
                "U", "{} broadcast twice".format(a.msg),
                idx=[seen[a.msg], idx], procs=[a.proc]))
        else:
            seen[a.msg] = idx
    return out


def check_well_formed(h):
    """reconfig_req/reconfig_resp alternate at every process and each
    call introduces at most one configuration
    """
    out = []
    open_calls = {}
    introduced = {}
    for idx, a in h.actions():
        if isinstance(a, ReconfigReq):
            if a.proc in open_calls:
                out.append(_violation(
                    "WF", "p{} requested a reconfiguration while one was "
                    "in progress".format(a.proc),
                    idx=[open_calls[a.proc], idx], procs=[a.proc]))
            open_calls[a.proc] = idx
            introduced[a.proc] = 0
        elif isinstance(a, ReconfigResp):
            if a.proc not in open_calls:
                out.append(_violation(
                    "WF", "p{} responded without a request".format(a.proc),
                    idx=[idx], procs=[a.proc]))
            open_calls.pop(a.proc, None)
        elif isinstance(a, Introduction):
            if a.config.epoch == 0:
                continue
            if a.proc not in open_calls:
                out.append(_violation(
                    "WF", "p{} introduced {} outside of a reconfigure "
                    "call".format(a.proc, a.config),
                    idx=[idx], procs=[a.proc]))
                continue
            introduced[a.proc] += 1
            if introduced[a.proc] > 1:
                out.append(_violation(
                    "WF", "p{} introduced two configurations in one "
                    "call".format(a.proc),
                    idx=[open_calls[a.proc], idx], procs=[a.proc]))
    return out


def check_basic_config(h):
    out = []
    by_epoch = {}
    last_join = {}
    introductions = {}
    for idx, a in h.actions(Introduction):
        if a.config in introductions:
            out.append(_violation(
                "P1d", "{} introduced twice".format(a.config),
                idx=[introductions[a.config], idx], procs=[a.proc],
                epoch=a.config.epoch))
        else:
            introductions[a.config] = idx

    for idx, a in h.actions(ConfChanged):
        config = a.config
        first = by_epoch.setdefault(config.epoch, (idx, config))
        if first[1] != config:
            out.append(_violation(
                "P1a", "Epoch {} joined as {} and as {}".format(
                    config.epoch, first[1], config),
                idx=[first[0], idx], procs=[a.proc], epoch=config.epoch))
        if a.proc not in config.members:
            out.append(_violation(
                "P1b", "p{} joined {} without being a member".format(
                    a.proc, config),
                idx=[idx], procs=[a.proc], epoch=config.epoch))
        previous = last_join.get(a.proc)
        if previous is not None and previous[1] >= config.epoch:
            out.append(_violation(
                "P1c", "p{} joined epoch {} after epoch {}".format(
                    a.proc, config.epoch, previous[1]),
                idx=[previous[0], idx], procs=[a.proc], epoch=config.epoch))
        last_join[a.proc] = (idx, config.epoch)
        if config not in introductions:
            out.append(_violation(
                "P1d", "p{} joined {} which was never introduced".format(
                    a.proc, config),
                idx=[idx], procs=[a.proc], epoch=config.epoch))
    return out


def check_integrity(h, index=None):
    index = index or _Index(h)
    out = []
    for proc, items in sorted(index.delivered.items()):
        seen = {}
        for idx, m in items:
            if m in seen:
                out.append(_violation(
                    "P2", "p{} delivered {} twice".format(proc, m),
                    idx=[seen[m], idx], procs=[proc]))
            else:
                seen[m] = idx
            first, _ = index.first_broadcast(m)
            if first is None or first > idx:
                out.append(_violation(
                    "P2", "p{} delivered {} before it was broadcast".format(
                        proc, m),
                    idx=[idx], procs=[proc]))
    return out


def _positions(items):
    first, last = {}, {}
    for pos, (_, m) in enumerate(items):
        first.setdefault(m, pos)
        last[m] = pos
    return first, last


def check_total_order(h, index=None):
    index = index or _Index(h)
    out = []
    procs = sorted(index.delivered)
    duplicates = any(len(set(index.sequence(p))) != len(index.sequence(p))
                     for p in procs)
    for i in procs:
        for j in procs:
            if i == j:
                continue
            if duplicates:
                found = _total_order_exact(index, i, j)
            else:
                found = _total_order_linear(index, i, j)
            if found is not None:
                m1, m2 = found
                out.append(_violation(
                    "P3", "p{} delivered {} before {} but p{} delivered {} "
                    "without {} before it".format(i, m1, m2, j, m2, m1),
                    idx=_deliver_indices(index, [(i, m1), (i, m2), (j, m2)]),
                    procs=[i, j]))
                return out
    return out


def _total_order_linear(index, i, j):
    items_j = index.delivered.get(j, [])
    pos_j = dict((m, pos) for pos, (_, m) in enumerate(items_j))
    missing = len(items_j)
    worst, worst_msg = -1, None
    for _, m in index.delivered.get(i, []):
        if m in pos_j and worst > pos_j[m]:
            return worst_msg, m
        p = pos_j.get(m, missing)
        if p > worst:
            worst, worst_msg = p, m
    return None


def _total_order_exact(index, i, j):
    items_i = index.delivered.get(i, [])
    first_i, last_i = _positions(items_i)
    first_j, _ = _positions(index.delivered.get(j, []))
    for m2 in sorted(last_i, key=last_i.get):
        if m2 not in first_j:
            continue
        for m1 in sorted(first_i, key=first_i.get):
            if m1 == m2 or first_i[m1] >= last_i[m2]:
                continue
            if m1 not in first_j or first_j[m1] >= first_j[m2]:
                return m1, m2
    return None


def _deliver_indices(index, pairs):
    out = []
    for proc, m in pairs:
        for idx, d in index.delivered.get(proc, []):
            if d == m:
                out.append(idx)
                break
    return out


def check_agreement(h, index=None, prefix=True):
    """With Integrity and Total Order intact every delivery sequence is a
    prefix of the longest one. Otherwise delivered sets are compared as
    a chain.
    """
    index = index or _Index(h)
    procs = sorted(index.delivered)
    if not procs:
        return []
    if prefix:
        longest = max(procs, key=lambda p: (len(index.delivered[p]), -p))
        reference = index.sequence(longest)
        for p in procs:
            seq = index.sequence(p)
            if seq != reference[:len(seq)]:
                return [_agreement_violation(index, p, longest)]
        return []
    ordered = sorted(procs, key=lambda p: (len(set(index.sequence(p))), p))
    for a, b in zip(ordered, ordered[1:]):
        if not set(index.sequence(a)) <= set(index.sequence(b)):
            return [_agreement_violation(index, a, b)]
    return []


def _agreement_violation(index, i, j):
    d_i, d_j = set(index.sequence(i)), set(index.sequence(j))
    only_i = sorted(d_i - d_j, key=lambda m: m.ident)
    only_j = sorted(d_j - d_i, key=lambda m: m.ident)
    if only_i and only_j:
        m1, m2 = only_i[0], only_j[0]
        return _violation(
            "P4", "p{} delivered {} and p{} delivered {} but neither "
            "delivered the other".format(i, m1, j, m2),
            idx=_deliver_indices(index, [(i, m1), (j, m2)]), procs=[i, j])
    return _violation(
        "P4", "Delivery sequences of p{} and p{} diverge".format(i, j),
        procs=[i, j])


def check_safety(h):
    """Integrity, Total Order and Agreement"""
    index = _Index(h)
    out = check_integrity(h, index)
    total = check_total_order(h, index)
    out.extend(total)
    out.extend(check_agreement(h, index, prefix=not out))
    return out


def brute_force_safety(h):
    """Evaluates Integrity, Total Order and Agreement by enumerating
    every quantifier instantiation. Returns the set of failing ids.
    Only usable on small histories.
    """
    entries = list(h.actions())
    delivers = [(k, a.proc, a.msg) for k, a in entries
                if isinstance(a, Deliver)]
    broadcasts = [(k, a.msg) for k, a in entries if isinstance(a, Broadcast)]
    procs = set(p for _, p, _ in delivers)
    failing = set()

    for k, i, m in delivers:
        for l, j, m_ in delivers:
            if i == j and m == m_ and k != l:
                failing.add("P2")
        if not any(b == m and bk < k for bk, b in broadcasts):
            failing.add("P2")

    for k, i, m1 in delivers:
        for l, i_, m2 in delivers:
            if i_ != i or not k < l or m1 == m2:
                continue
            for l2, j, m2_ in delivers:
                if m2_ != m2:
                    continue
                if not any(j_ == j and m == m1 and k2 < l2
                           for k2, j_, m in delivers):
                    failing.add("P3")

    sets = dict((p, set(m for _, q, m in delivers if q == p)) for p in procs)
    for i in procs:
        for j in procs:
            for m1 in sets[i]:
                for m2 in sets[j]:
                    if m2 not in sets[i] and m1 not in sets[j]:
                        failing.add("P4")
    return failing


def check_liveness(h, premise):
    """Returns (violations, reason). reason is set when the premise does
    not hold and nothing was evaluated.
    """
    reqs = [(idx, a) for idx, a in h.actions(ReconfigReq)]
    if premise is None:
        return [], "no scenario premise"
    if not reqs:
        return [], "no reconfiguration was requested"
    if not premise.requester_correct:
        return [], "last requester may crash"
    if not premise.isolation:
        return [], "reconfigurations may overlap the last one"

    r_idx, r = reqs[-1]
    if r.proc != premise.requester:
        return [], "last request came from p{}, expected p{}".format(
            r.proc, premise.requester)
    for idx, a in h.actions():
        if idx > r_idx and isinstance(a, (ReconfigResp, Introduction)) \
                and a.proc != r.proc:
            return [], "p{} took reconfiguration steps after the last " \
                       "request".format(a.proc)

    out = []
    response = None
    for idx, a in h.actions(ReconfigResp):
        if idx > r_idx and a.proc == r.proc:
            response = (idx, a)
            break
    if response is None or response[1].config is None:
        out.append(_violation(
            "P5", "Last reconfiguration by p{} did not introduce a "
            "configuration".format(r.proc),
            idx=[r_idx] + ([response[0]] if response else []),
            procs=[r.proc]))
        return out, None

    config = response[1].config
    introduced = [idx for idx, a in h.actions(Introduction)
                  if a.config == config]
    if not introduced:
        out.append(_violation(
            "P5", "{} returned but never introduced".format(config),
            idx=[response[0]], procs=[r.proc], epoch=config.epoch))
    if not config.members <= premise.crash_free:
        return out, "members {} of {} may crash".format(
            sorted(config.members - premise.crash_free), config)

    index = _Index(h)
    for p in sorted(config.members):
        if index.join_of(p, config.epoch) is None:
            out.append(_violation(
                "P5a", "p{} never joined {}".format(p, config),
                procs=[p], epoch=config.epoch))

    for m, items in index.broadcasts.items():
        for idx, p in items:
            if p in config.members and index.epoch[idx] == config.epoch:
                for q in sorted(config.members):
                    if m not in set(index.sequence(q)):
                        out.append(_violation(
                            "P5b", "{} broadcast by p{} in epoch {} not "
                            "delivered by p{}".format(
                                m, p, config.epoch, q),
                            idx=[idx], procs=[p, q], epoch=config.epoch))

    everywhere = set()
    for proc in index.delivered:
        everywhere.update(index.sequence(proc))
    for m in sorted(everywhere, key=lambda m: m.ident):
        for q in sorted(config.members):
            if m not in set(index.sequence(q)):
                out.append(_violation(
                    "P5c", "{} was delivered but not by p{}".format(m, q),
                    procs=[q], epoch=config.epoch))
    return out, None


def check_primary_order(h, mode):
    """Local Order and Global Order, plus Primary Integrity in PO mode"""
    index = _Index(h)
    out = []

    groups = {}
    for idx, a in h.actions(Broadcast):
        groups.setdefault((a.proc, index.epoch[idx]), []).append((idx, a.msg))
    for (proc, epoch), items in sorted(groups.items(), key=_group_key):
        for j in sorted(index.delivered):
            first_j, _ = _positions(index.delivered[j])
            for pos, (l, m2) in enumerate(items):
                if m2 not in first_j:
                    continue
                for k, m1 in items[:pos]:
                    if m1 not in first_j or first_j[m1] >= first_j[m2]:
                        out.append(_violation(
                            "P6", "p{} broadcast {} before {} in epoch {} "
                            "but p{} delivered {} without {} before "
                            "it".format(proc, m1, m2, epoch, j, m2, m1),
                            idx=[k, l], procs=[proc, j], epoch=epoch))
                        break

    for i in sorted(index.delivered):
        worst = None
        for idx, m in index.delivered[i]:
            e = index.broadcast_epoch(m)
            if e is None:
                continue
            if worst is not None and e < worst[0]:
                out.append(_violation(
                    "P7", "p{} delivered {} from epoch {} before {} from "
                    "epoch {}".format(i, worst[1], worst[0], m, e),
                    idx=[worst[2], idx], procs=[i], epoch=e))
            if worst is None or e > worst[0]:
                worst = (e, m, idx)

    if mode == "po":
        delivered_anywhere = set()
        for proc in index.delivered:
            delivered_anywhere.update(index.sequence(proc))
        for m in sorted(delivered_anywhere, key=lambda m: m.ident):
            e = index.broadcast_epoch(m)
            if e is None:
                continue
            for i in sorted(index.joins):
                for idx, config, _ in index.joins[i]:
                    if config.epoch > e and \
                            m not in index.delivered_before(i, idx):
                        out.append(_violation(
                            "P8", "p{} joined epoch {} without delivering "
                            "{} from epoch {}".format(
                                i, config.epoch, m, e),
                            idx=[idx], procs=[i], epoch=config.epoch))
    return out


def _group_key(item):
    (proc, epoch), _ = item
    return (proc, -1 if epoch is None else epoch)


def check_speculative(h):
    """Basic speculative delivery and both prefix consistency clauses"""
    index = _Index(h)
    out = []

    for i in sorted(index.joins):
        for k, config, spec in index.joins[i]:
            if spec is None:
                continue
            if config.leader != i:
                out.append(_violation(
                    "P9", "p{} speculatively delivers in {} without being "
                    "its leader".format(i, config),
                    idx=[k], procs=[i], epoch=config.epoch))
            if len(set(spec)) != len(spec):
                out.append(_violation(
                    "P9", "p{} speculatively delivers a message twice when "
                    "joining {}".format(i, config),
                    idx=[k], procs=[i], epoch=config.epoch))
            before = index.delivered_before(i, k)
            for m in spec:
                first, _ = index.first_broadcast(m)
                if first is None or first > k:
                    out.append(_violation(
                        "P9", "p{} speculatively delivers {} which was not "
                        "broadcast".format(i, m),
                        idx=[k], procs=[i], epoch=config.epoch))
                if m in before:
                    out.append(_violation(
                        "P9", "p{} speculatively delivers {} which it "
                        "delivered already".format(i, m),
                        idx=[k], procs=[i], epoch=config.epoch))

    broadcast_epochs = {}
    for m, items in index.broadcasts.items():
        broadcast_epochs[m] = set(index.epoch[idx] for idx, _ in items)

    def other_epoch(m2):
        # messages with some broadcast in an epoch other than one of m2's
        mine = broadcast_epochs.get(m2)
        if not mine:
            return set()
        return set(m1 for m1, es in broadcast_epochs.items()
                   if not (es == mine and len(es) == 1))

    for i in sorted(index.delivered):
        for k, m2 in index.delivered[i]:
            candidates = other_epoch(m2)
            if not candidates:
                continue
            left = index.delivered_before(i, k) & candidates

            for l, j in index.broadcasts.get(m2, []):
                join = index.join_of(j, index.epoch[l])
                if join is None or join[1].leader != j:
                    continue
                l_, config, spec = join
                right = (index.delivered_before(j, l_) |
                         set(spec or ())) & candidates
                diff = left ^ right
                if diff:
                    m1 = sorted(diff, key=lambda m: m.ident)[0]
                    out.append(_violation(
                        "P10a", "p{} {} {} before {} but the broadcaster "
                        "p{} {} it when joining epoch {}".format(
                            i, "delivered" if m1 in left else "did not "
                            "deliver", m1, m2, j,
                            "had not" if m1 in left else "had",
                            config.epoch),
                        idx=[k, l, l_], procs=[i, j], epoch=config.epoch))

            for j in sorted(index.joins):
                for l, config, spec in index.joins[j]:
                    if not spec or config.leader != j or m2 not in spec:
                        continue
                    order = list(spec)
                    ahead = set(order[:order.index(m2)])
                    right = (index.delivered_before(j, l) | ahead) & \
                        candidates
                    diff = left ^ right
                    if diff:
                        m1 = sorted(diff, key=lambda m: m.ident)[0]
                        out.append(_violation(
                            "P10b", "p{} delivery of {} before {} disagrees "
                            "with what p{} held when joining epoch "
                            "{}".format(i, m1, m2, j, config.epoch),
                            idx=[k, l], procs=[i, j], epoch=config.epoch))
    return out


def check_assumption(h, crashes):
    """Some member of every introduced configuration survives until a
    higher epoch is activated. crashes maps process to crash time.
    """
    if crashes is None:
        return None
    introduced = [(idx, a.config) for idx, a in h.actions(Introduction)]
    joined = {}
    activated = {}
    for entry in h:
        a = entry.action
        if isinstance(a, ConfChanged):
            procs = joined.setdefault(a.config.epoch, set())
            procs.add(a.proc)
            if a.config.epoch not in activated and \
                    a.config.members <= procs:
                activated[a.config.epoch] = entry.t

    out = []
    for idx, config in introduced:
        later = [t for e, t in activated.items() if e > config.epoch]
        until = min(later) if later else None
        survivors = [p for p in config.members if p not in crashes or
                     (until is not None and crashes[p] >= until)]
        if not survivors:
            out.append(_violation(
                "A1", "Every member of {} crashed before a later epoch was "
                "activated".format(config),
                idx=[idx], procs=config.members, epoch=config.epoch))
    return out


def verdicts(h, mode="vab", monitor=None, premise=None, quiescent=True,
             crashes=None, lin=None, machine=None):
    """Evaluates every property and returns an ordered
    {id: Verdict(status, violations, reason)} report.

    monitor is the list of online violations or None when the history
    was not produced by a run in this process. lin is the result of
    :func:`check_linearizable` or None.
    """
    found = {}
    reasons = {}

    def add(violations):
        for v in violations:
            found.setdefault(v.prop, []).append(v)

    add(check_unique_broadcasts(h))
    add(check_well_formed(h))
    add(check_basic_config(h))
    add(check_safety(h))

    if not quiescent:
        for prop in LIVENESS:
            reasons[prop] = "run did not quiesce"
    else:
        violations, reason = check_liveness(h, premise)
        add(violations)
        if reason is not None:
            for prop in LIVENESS:
                if prop not in found:
                    reasons[prop] = reason

    if mode in ("po", "spo"):
        add(check_primary_order(h, mode))
    else:
        reasons.update({"P6": "only in po/spo mode",
                        "P7": "only in po/spo mode"})
    if mode != "po":
        reasons["P8"] = "only in po mode"
    if mode == "spo":
        add(check_speculative(h))
    else:
        for prop in ("P9", "P10a", "P10b"):
            reasons[prop] = "only in spo mode"

    assumption = check_assumption(h, crashes)
    if assumption is None:
        reasons["A1"] = "crash times unknown"
    else:
        add(assumption)

    if monitor is None:
        for prop in MONITORED:
            reasons[prop] = "online check, needs a simulator run"
    else:
        add(monitor)
    if machine is None:
        reasons["Inv2"] = "no replicated state machine"
        reasons["LIN"] = "no replicated state machine"
    elif lin is not None:
        if lin.ok is None:
            reasons["LIN"] = lin.reason
        elif not lin.ok:
            add([_violation("LIN", lin.reason, ops=lin.witness or [])])

    report = OrderedDict()
    for prop in PROPERTIES:
        if prop in found:
            report[prop] = Verdict(FAIL, found[prop], None)
        elif prop in reasons:
            report[prop] = Verdict(NOT_EVALUATED, [], reasons[prop])
        else:
            report[prop] = Verdict(PASS, [], None)
    return report


def failed(report):
    """Ids of the properties that failed"""
    return [prop for prop, v in report.items() if v.status == FAIL]


def report_to_json(report):
    out = OrderedDict()
    for prop, v in report.items():
        entry = OrderedDict([("name", PROPERTIES[prop]),
                             ("status", v.status)])
        if v.reason:
            entry["reason"] = v.reason
        if v.violations:
            entry["violations"] = [x.to_json() for x in v.violations]
        out[prop] = entry
    return out
