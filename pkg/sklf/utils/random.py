from typing import Optional

import numpy as np

STREAM_NAMES = ("init", "sampling")


def named_streams(seed: Optional[int]) -> dict[str, np.random.Generator]:
    """
    Split a single root seed into independent named random streams.

    All randomness of a run flows from one seed: ``"init"`` is used for network
    initialization, ``"sampling"`` for ray batch sampling. The streams are
    spawned from ``numpy.random.SeedSequence``, so adding a consumer to one
    stream never changes the values drawn from another.

    Examples
    --------
    >>> from sklf.utils import named_streams
    >>> streams = named_streams(0)
    >>> sorted(streams)
    ['init', 'sampling']
    """
    children = np.random.SeedSequence(seed).spawn(len(STREAM_NAMES))
    return {
        name: np.random.default_rng(child)
        for name, child in zip(STREAM_NAMES, children)
    }
