# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

"""Brute-force linearizability check of client operation histories
against a sequential state machine specification.
"""

from collections import namedtuple

# call and ret are positions in one global sequence of client events,
# ret is None while the operation is pending
ClientOp = namedtuple("ClientOp", "id client command call ret result")

LinResult = namedtuple("LinResult", "ok witness reason")

LIMIT = 12


def check_linearizable(ops, machine, limit=LIMIT):
    """Searches for a sequential order of ops that respects real-time
    order and is legal for machine. Pending operations may be left out
    or linearized with any outcome.

    Returns LinResult(ok, witness, reason): ok is True with the witness
    order of op ids, False when no order exists and None when the
    history is too large to search.
    """
    ops = sorted(ops, key=lambda op: op.call)
    completed = [op for op in ops if op.ret is not None]
    if len(completed) > limit or len(ops) > 2 * limit:
        return LinResult(None, None, "{} operations, search is capped at "
                         "{}".format(len(completed), limit))

    required = 0
    for i, op in enumerate(ops):
        if op.ret is not None:
            required |= 1 << i
    seen = set()

    def candidates(done):
        # an op may go next unless some unplaced op returned before it
        # was called
        rets = [op.ret for i, op in enumerate(ops)
                if op.ret is not None and not done & (1 << i)]
        deadline = min(rets) if rets else None
        for i, op in enumerate(ops):
            if done & (1 << i):
                continue
            if deadline is not None and op.call > deadline:
                continue
            yield i, op

    def outcomes(state, op):
        if op.ret is not None:
            nxt = machine.step_spec(state, op.command, op.result)
            return [] if nxt is None else [nxt]
        return machine.pending_states(state, op.command)

    def search(done, state, order):
        if done & required == required:
            return order
        key = (done, machine.snapshot(state))
        if key in seen:
            return None
        seen.add(key)
        for i, op in candidates(done):
            for nxt in outcomes(state, op):
                found = search(done | (1 << i), nxt, order + [op.id])
                if found is not None:
                    return found
        return None

    order = search(0, machine.initial(), [])
    if order is None:
        return LinResult(False, [op.id for op in completed],
                         "no legal sequential order of {} operations".format(
                             len(completed)))
    return LinResult(True, order, None)

