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

import sys
import argparse
import inspect
import logging
from threading import Thread

from twisted.internet import reactor

from .errors import VerticalError
from .simulator import Simulator

USAGE = 2

functions = []


def command(fn):
    """Decorator that just register the function
    as the command for the runner
    """
    functions.append(fn)
    return fn


def build_parser(commands, description=None):
    """One sub-command per function, read off its signature: a parameter
    without default is positional, False turns into a flag, an int default
    into an integer option and anything else into a string option.
    """
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("--verbose", action="store_true",
                        help="log protocol steps")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for fn in commands:
        _add_command(sub, fn)
    return parser


def _add_command(sub, fn):
    doc = fn.__doc__ or ""
    parser = sub.add_parser(fn.__name__, description=doc,
                            help=doc.strip().split("\n")[0])
    params = inspect.signature(fn).parameters.values()
    for p in params:
        option = "--{}".format(p.name)
        if p.default is p.empty:
            parser.add_argument(p.name)
        elif p.default is False:
            parser.add_argument(option, action="store_true")
        elif isinstance(p.default, int):
            parser.add_argument(option, type=int, default=p.default)
        else:
            parser.add_argument(option, default=p.default)

    names = [p.name for p in params]
    parser.set_defaults(
        fn=lambda args: fn(**dict((n, getattr(args, n)) for n in names)))


def run(*args, **kwargs):
    """Builds the command line from the registered commands, runs the
    chosen one in a thread while the reactor spins and exits with the
    status it returned.
    """
    global functions
    functions = functions + list(args)

    parser = build_parser(functions, kwargs.get("description"))

    args = parser.parse_args(kwargs.get("argv"))
    function = args.fn

    Simulator.startup(debug=args.verbose)
    log = logging.getLogger(__name__)
    status = []

    def call(*args, **kwargs):
        try:
            status.append(function(*args, **kwargs) or 0)
        except VerticalError as e:
            log.error(str(e))
            status.append(USAGE)
        except Exception:
            log.exception("Exception calling {}!".format(args[0].command))
            status.append(USAGE)

    t = Thread(target=call, args=(args,))
    t.daemon = True
    t.start()

    def waiter(th):
        th.join()
        reactor.callFromThread(reactor.stop)

    w = Thread(target=waiter, args=(t,))
    w.daemon = True
    w.start()

    reactor.run(installSignalHandlers=False)

    code = status[0] if status else USAGE
    if code:
        log.info("{} resulted in failure ({})".format(args.command, code))
    else:
        log.info("{} executed successfully".format(args.command))
    sys.exit(code)
