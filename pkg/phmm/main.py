"""Access phmm via the command line"""

from json import dumps
from typing import Optional, Sequence

import phmm
import phmm.log
from phmm.definitions import Action
from phmm.errors import PhmmError


def select_action(argv: Optional[Sequence[str]] = None) -> None:
    """Select an action and forward the arguments to that action"""

    args = phmm.args.parse(argv)

    with phmm.utils.post_mortem(args.pdb):
        _select_action(args)


def _select_action(args) -> None:
    if args.version:
        print(phmm.__version__)
        raise SystemExit(0)

    if args.print_args:
        print(dumps(vars(args), indent=2, default=str))

    if args.action is None:
        phmm.args.print_help()
        raise SystemExit(0)

    phmm.log.initialise(args.loglevel)

    try:
        with phmm.profile.output(args.profile):
            if args.action == Action.SIMULATE:
                phmm.project.simulate_dataset(args)
            elif args.action == Action.FIT:
                phmm.project.fit_dataset(args)
            elif args.action == Action.BENCHMARK:
                phmm.project.run_benchmark(args)
            elif args.action == Action.PREDICT:
                phmm.project.predict_from_trace(args)
            elif args.action == Action.REPORT:
                phmm.project.report_trace(args)
            else:
                print(f"unknown action: {args.action}")
                phmm.args.print_help()
                raise SystemExit(2)
    except (PhmmError, OSError) as err:
        if args.pdb:
            raise
        phmm.log.error(f"{type(err).__name__}: {err}")
        raise SystemExit(1)

    raise SystemExit(0)
