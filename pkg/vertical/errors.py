"""
Copyright [2026] [Vertical authors]

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""


class VerticalError(Exception):
    """Base class for everything this package raises on purpose"""


class ScenarioError(VerticalError):
    """Scenario file is malformed or its fault plan is not admissible"""


class TraceError(VerticalError):
    """Trace file does not follow the record schema"""


class ProtocolError(VerticalError):
    """A protocol precondition that can never be false was false"""


class NotLeaderError(VerticalError):
    """Broadcast requested at a process that may not broadcast now"""


class ConfigServiceError(VerticalError):
    pass


class InvalidSwap(ConfigServiceError):
    """compare_and_swap called with c.epoch <= expected"""


class UnknownEpoch(ConfigServiceError):
    """get_members called for an epoch that was never introduced"""


class StepCapExceeded(VerticalError):
    """Raised from inside the event loop to abort a run"""


def assert_scenario(condition, message, *args):
    """Raises :class:`ScenarioError` with a formatted message
    unless the condition holds.
    """
    if not condition:
        raise ScenarioError(message.format(*args))


def assert_trace(condition, message, *args):
    """Same as :func:`assert_scenario` for trace files"""
    if not condition:
        raise TraceError(message.format(*args))
