"""relsep: an executable workbench for relational separation-logic checking.

Interprets a small heap language, runs indexed program products over
hyper-heaps, decides assertion satisfaction at desk scale, checks
hyper-triples by randomized and bounded-exhaustive trials, and replays
proof derivations rule by rule with mechanical side-condition checks.
"""

__version__ = "0.1.0"
