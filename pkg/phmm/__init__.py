from importlib import metadata  # since 3.8

try:
    __version__ = metadata.version("phmm")
except metadata.PackageNotFoundError:
    __version__ = "0+unknown"

from . import (
    args,
    core,
    definitions,
    diagnostics,
    io,
    log,
    main,
    prediction,
    profile,
    project,
    samplers,
    simulation,
    utils,
)
