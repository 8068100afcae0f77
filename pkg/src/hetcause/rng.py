"""Deterministic random streams for bootstrap replicates and Monte Carlo.

Every source of randomness in the package goes through :func:`stream`, which
builds a Philox (counter-based) generator keyed by a ``SeedSequence`` over an
integer tuple.  Two properties follow:

* the same key tuple reproduces the same draws on any platform, and
* distinct key tuples give statistically independent streams, so callers can
  hand out ``(seed, i)`` keys to parallel workers and obtain results that do
  not depend on scheduling or worker count.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream", "derive_seed"]


def stream(*key: int) -> np.random.Generator:
    """Return a fresh Philox generator keyed by the integer tuple ``key``.

    Parameters
    ----------
    *key : int
        Nonnegative integers identifying the stream, e.g. ``(seed, i)`` for
        bootstrap replicate ``i``.

    Returns
    -------
    numpy.random.Generator
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def derive_seed(*key: int) -> int:
    """Derive a plain integer seed from a key tuple, deterministically.

    Used by the Monte Carlo driver to hand each replication its own
    bootstrap seed that can be recorded in results and replayed in
    isolation.
    """
    return int(np.random.SeedSequence(key).generate_state(1, np.uint64)[0])
