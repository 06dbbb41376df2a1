from __future__ import annotations

from abc import ABC, abstractmethod
from argparse import Namespace
from pathlib import Path
from typing import Any, Dict, Optional

import phmm
from phmm.io import OutputSet
from phmm.log import Loggable

# flags that only steer this run, not its outputs
_UNECHOED = ("config", "loglevel", "overwrite", "pdb", "print_args", "profile", "version")


class ExperimentBase(ABC, Loggable):
    """One run of a CLI workflow: its flags, seed and output directory"""

    def __init__(self, args: Namespace, /) -> None:
        self.args = args
        self.seed: int = args.seed
        self.log_debug("using experiment: %s", self)
        self._out: Optional[Path] = None
        if getattr(args, "out", None) is not None:
            self._out = Path(args.out).expanduser().resolve()
            if self._out.exists() and not self._out.is_dir():
                self.log_error("not a directory: %s", self._out)
                raise NotADirectoryError(str(self._out))
            self.log_info("output directory: %s", self._out)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(seed={self.args.seed})"

    @property
    def out_dir(self) -> Optional[Path]:
        return self._out

    @property
    def flags(self) -> Dict[str, Any]:
        return {key: value for key, value in sorted(vars(self.args).items()) if key not in _UNECHOED}

    @property
    def meta(self) -> Dict[str, Any]:
        """Header written at the top of every output table"""
        return {"phmm": phmm.__version__, "seed": self.seed, "flags": self.flags}

    def outputs(self) -> OutputSet:
        if self._out is None:
            raise NotADirectoryError("no output directory given")
        return OutputSet(self._out, overwrite=self.args.overwrite)

    @abstractmethod
    def run(self) -> None: ...
