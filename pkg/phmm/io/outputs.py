"""A set of output files that is written completely or not at all"""

from __future__ import annotations

from pathlib import Path
from typing import List

from phmm.log import Loggable


class OutputSet(Loggable):
    """Registers the files a command writes under one directory.

    On leaving the context because of an exception, every registered file that exists is
    removed and the exception propagates.
    """

    def __init__(self, root: Path, /, *, overwrite: bool = False) -> None:
        self.root = Path(root).expanduser().resolve()
        self.overwrite = overwrite
        self._paths: List[Path] = []

    def __repr__(self) -> str:
        return f"{type(self).__name__}(root={self.root}, files={len(self._paths)})"

    def __enter__(self) -> OutputSet:
        self.root.mkdir(parents=True, exist_ok=True)
        self.log_debug("writing outputs to %s", self.root)
        return self

    def path(self, name: str) -> Path:
        """Reserve a file name; refuses existing files unless overwriting"""
        path = self.root / name
        if path.exists():
            if not self.overwrite:
                raise FileExistsError(path)
            self.log_warning("overwriting %s", path)
        self._paths.append(path)
        return path

    @property
    def paths(self) -> List[Path]:
        return list(self._paths)

    def __exit__(self, ex_type, ex, tb) -> bool:
        if ex_type is None:
            for path in self._paths:
                self.log_info("wrote %s", path)
            return False
        self.log_error(f"outputs not written due to unhandled {ex_type.__name__} exception")
        for path in self._paths:
            if path.exists():
                path.unlink()
                self.log_debug("removed partial output %s", path)
        return False
