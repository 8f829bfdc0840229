"""Beam-splitter coincidence simulator and analyzer.

Thin wrappers over the C++ core; reports come back as plain dicts.
"""

import json

from ._anticorr import (
    ConfigError,
    EventStreams,
    FormatError,
    conjunction_bound,
    count_coincidences,
    expected_overlap_probability,
    simulate,
)
from . import _anticorr

__all__ = [
    "ConfigError",
    "EventStreams",
    "FormatError",
    "analyze",
    "check_feasibility",
    "conjunction_bound",
    "count_coincidences",
    "expected_overlap_probability",
    "metadata",
    "poisson_check",
    "run",
    "shape_scan",
    "simulate",
]


def metadata(streams):
    return json.loads(streams.metadata_json())


def analyze(streams, alpha=None):
    """Report document {"report": ..., "run": ...} for a stream."""
    return json.loads(_anticorr.analyze_json(streams, alpha))


def run(config_yaml="", seed=None, model=None):
    streams = simulate(config_yaml, seed=seed, model=model)
    return streams, analyze(streams)


def shape_scan(config_yaml, shifts, seed=None):
    return json.loads(_anticorr.shape_scan_json(config_yaml, list(shifts), seed))


def check_feasibility(marginals, agreements):
    return json.loads(_anticorr.check_feasibility_json(list(marginals), list(agreements)))


def poisson_check(lam, replications=100000, seed=1, absorbers=4096, width=1e-9):
    return json.loads(_anticorr.poisson_check_json(lam, replications, seed, absorbers, width))
