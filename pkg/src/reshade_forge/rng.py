"""Stateless counter-based random streams for the renderer.

Every (seed, pixel, sample, stream) tuple owns its own splitmix64 sequence,
so a sample's random numbers never depend on tile order, worker count, or
how many samples ran before it.  All helpers are numba-compiled and callable
both from kernels and from plain Python (tests, oracles).
"""

import numpy as np
from numba import njit

U64 = np.uint64

_GOLDEN = U64(0x9E3779B97F4A7C15)
_MUL_A = U64(0xBF58476D1CE4E5B9)
_MUL_B = U64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53

# stream ids used by the render kernel
STREAM_JITTER = 0
STREAM_SHADE = 1


@njit(cache=True, inline="always")
def mix64(z):
    # re-coerce: calls from Python may pass plain ints, which numba types as
    # int64; mixed int64/uint64 arithmetic would promote to float64
    z = U64(z)
    z = (z ^ (z >> U64(30))) * _MUL_A
    z = (z ^ (z >> U64(27))) * _MUL_B
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def stream_state(seed, pixel, sample, stream):
    """Initial state of the (pixel, sample, stream) sequence under `seed`."""
    s = mix64(U64(seed) + _GOLDEN)
    s = mix64(s ^ (U64(pixel) + _GOLDEN))
    s = mix64(s ^ (U64(sample) + _GOLDEN))
    return mix64(s ^ (U64(stream) + _GOLDEN))


@njit(cache=True, inline="always")
def next_uniform(state):
    """Advance the sequence: returns (u, new_state) with u in [0, 1)."""
    s = U64(state) + _GOLDEN
    return (mix64(s) >> U64(11)) * _INV_2_53, s


def uniform_stream(seed, pixel=0, sample=0, stream=0):
    """Python-side generator over the same sequence the kernels consume.
    (numba hands uint64 results back as plain ints, so re-wrap the state.)"""
    state = stream_state(U64(seed), pixel, sample, stream)
    while True:
        u, state = next_uniform(U64(state))
        yield u


@njit(cache=True, inline="always")
def hash_cell(ix, iy, iz):
    """Deterministic [0, 1) value for an integer lattice cell (value noise)."""
    h = mix64(U64(ix) * _MUL_A ^ U64(iy) * _MUL_B ^ U64(iz) + _GOLDEN)
    return (h >> U64(11)) * _INV_2_53
