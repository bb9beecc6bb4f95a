"""2D Coulomb gas sampling, microscopic scales and spacing statistics."""

import json

from ._betagas import *  # noqa: F401,F403
from ._betagas import __version__, _run_config, scale_info as _scale_info


def scale_info(model, p, n):
    return json.loads(_scale_info(model, p, n))


def run_experiment(config, kind="", out_dir=""):
    """Run an experiment config (dict) and return the output document."""
    return json.loads(_run_config(json.dumps(config), kind, str(out_dir)))
