# coding: utf-8
# Licensed under the Apache License, Version 2.0 (the "License")
# See LICENSE for details

"""In-process configuration service: a linearizable store of
configurations indexed by epoch. Every call is one atomic step of the
simulator, the same three operations could be served by a remote client.
"""

import logging

from .errors import InvalidSwap, UnknownEpoch


class ConfigService(object):
    """Reliable, wait-free store deciding which configuration
    follows which via compare-and-swap on epochs.
    """

    def __init__(self, initial, on_introduction=None, log=None):
        self.entries = {initial.epoch: initial}
        self.last_epoch = initial.epoch
        self.on_introduction = on_introduction
        self.log = log or logging.getLogger(__name__)

    def compare_and_swap(self, expected, config, proc=None):
        """Stores config iff the last stored epoch equals expected.
        The caller (proc) gets an introduction action on success.
        """
        if config.epoch <= expected:
            raise InvalidSwap(
                "Epoch {} must be higher than expected epoch {}".format(
                    config.epoch, expected))

        if self.last_epoch != expected:
            self.log.debug("CAS({}, {}) by p{} failed, last epoch is {}".format(
                expected, config, proc, self.last_epoch))
            return False

        self.entries[config.epoch] = config
        self.last_epoch = config.epoch
        self.log.debug("CAS({}, {}) by p{} succeeded".format(
            expected, config, proc))
        if self.on_introduction:
            self.on_introduction(proc, config)
        return True

    def get_last_epoch(self):
        return self.last_epoch

    def get_members(self, epoch):
        try:
            return self.entries[epoch].members
        except KeyError:
            raise UnknownEpoch("Epoch {} was never introduced".format(epoch))

    def get_config(self, epoch):
        try:
            return self.entries[epoch]
        except KeyError:
            raise UnknownEpoch("Epoch {} was never introduced".format(epoch))

    def configurations(self):
        return [self.entries[e] for e in sorted(self.entries)]
