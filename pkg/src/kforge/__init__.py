"""
kforge: exact, finite-stage constructions behind reducing every sequence to
one that passes a Martin-Löf test.

Modules, bottom-up: cantor (dyadics, clopen sets), semimeasure (staged
distributions, semimeasures, mixtures, round-up), pct (interval allocations),
mltest (the concatenation test), reduction (witnesses and decoding), checks
(the verify suite) and cli.
"""

__version__ = "0.1.0"
