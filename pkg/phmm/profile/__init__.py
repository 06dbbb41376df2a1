from .output import output
