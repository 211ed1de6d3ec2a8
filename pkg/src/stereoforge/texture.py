"""Seeded value-noise textures sampled in world coordinates.

Texture values are a pure function of (seed, position): there is no RNG
state, so any two cameras looking at the same surface point see exactly the
same color, and evaluation order never matters.  Lattice values come from an
integer hash (splitmix64 finalizer) and are blended with a quintic fade, the
classic value-noise construction.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_X_STRIDE = np.uint64(0x8DA6B343FD91D1D5)  # odd constants decorrelate axes
_Y_STRIDE = np.uint64(0xD8163841FDE6A8F9)


def _mix_seed(seed: int) -> np.uint64:
    """splitmix64 finalizer on a plain int (numpy warns on scalar wrap)."""
    v = (seed + _GOLDEN) & _MASK64
    v = ((v ^ (v >> 30)) * _MIX1) & _MASK64
    v = ((v ^ (v >> 27)) * _MIX2) & _MASK64
    return np.uint64(v ^ (v >> 31))


def lattice_hash01(seed: int, ix: np.ndarray, iy: np.ndarray) -> np.ndarray:
    """Hash integer lattice coordinates to floats in [0, 1).

    Args:
        seed: texture seed; different seeds give independent lattices.
        ix: integer lattice x coordinates (any int dtype, may be negative).
        iy: integer lattice y coordinates, broadcastable against ix.

    Returns:
        float64 array in [0, 1), a pure function of (seed, ix, iy).
    """
    with np.errstate(over="ignore"):
        ux = np.atleast_1d(np.asarray(ix, dtype=np.int64)).view(np.uint64) * _X_STRIDE
        uy = np.atleast_1d(np.asarray(iy, dtype=np.int64)).view(np.uint64) * _Y_STRIDE
        v = (ux + uy + _mix_seed(seed & _MASK64)).astype(np.uint64)
        v = (v + np.uint64(_GOLDEN)).astype(np.uint64)
        v = ((v ^ (v >> np.uint64(30))) * np.uint64(_MIX1)).astype(np.uint64)
        v = ((v ^ (v >> np.uint64(27))) * np.uint64(_MIX2)).astype(np.uint64)
        h = v ^ (v >> np.uint64(31))
    out = (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
    return out.reshape(np.broadcast(np.asarray(ix), np.asarray(iy)).shape)


def _fade(t: np.ndarray) -> np.ndarray:
    """Quintic smoothstep; zero first and second derivative at 0 and 1."""
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


def value_noise(seed: int, x: np.ndarray, y: np.ndarray,
                wavelength: float) -> np.ndarray:
    """Smooth noise at world positions (x, y).

    Args:
        seed: lattice seed.
        x: world x coordinates (float array).
        y: world y coordinates, broadcastable against x.
        wavelength: lattice cell size in world units.

    Returns:
        float64 array in [0, 1], C1-smooth in x and y.
    """
    gx = np.asarray(x, dtype=np.float64) / wavelength
    gy = np.asarray(y, dtype=np.float64) / wavelength
    ix0 = np.floor(gx).astype(np.int64)
    iy0 = np.floor(gy).astype(np.int64)
    fx = gx - ix0
    fy = gy - iy0
    n00 = lattice_hash01(seed, ix0, iy0)
    n10 = lattice_hash01(seed, ix0 + 1, iy0)
    n01 = lattice_hash01(seed, ix0, iy0 + 1)
    n11 = lattice_hash01(seed, ix0 + 1, iy0 + 1)
    u = _fade(fx)
    v = _fade(fy)
    top = n00 + (n10 - n00) * u
    bot = n01 + (n11 - n01) * u
    return top + (bot - top) * v


def fbm(seed: int, x: np.ndarray, y: np.ndarray, base_wavelength: float,
        octaves: int = 3, gain: float = 0.5,
        lacunarity: float = 2.0) -> np.ndarray:
    """Fractal sum of value-noise octaves, renormalized to [0, 1].

    Args:
        seed: base seed; each octave derives its own lattice seed from it.
        x: world x coordinates.
        y: world y coordinates.
        base_wavelength: cell size of the coarsest octave, world units.
        octaves: number of octaves (>= 1).
        gain: amplitude falloff per octave.
        lacunarity: frequency growth per octave.

    Returns:
        float64 array in [0, 1].
    """
    total = np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
    amplitude = 1.0
    wavelength = base_wavelength
    norm = 0.0
    for octave in range(octaves):
        total = total + amplitude * value_noise(
            seed + 0x10001 * (octave + 1), x, y, wavelength
        )
        norm += amplitude
        amplitude *= gain
        wavelength /= lacunarity
    return total / norm


def shade_rgb(seed: int, x: np.ndarray, y: np.ndarray, base_wavelength: float,
              octaves: int, low: int, high: int) -> np.ndarray:
    """Evaluate an RGB texture at world positions.

    Each channel is an independent fbm field mapped onto [low, high].

    Args:
        seed: texture seed; channels use fixed offsets of it.
        x: world x coordinates, shape S.
        y: world y coordinates, shape S.
        base_wavelength: coarsest detail size in world units.
        octaves: fbm octave count.
        low: darkest channel value (inclusive).
        high: brightest channel value (inclusive).

    Returns:
        uint8 array of shape S + (3,).
    """
    span = float(high - low)
    channels = []
    for c in range(3):
        field = fbm(seed + 7919 * c, x, y, base_wavelength, octaves)
        channels.append(np.floor(low + field * span + 0.5))
    rgb = np.stack(channels, axis=-1)
    return np.clip(rgb, 0, 255).astype(np.uint8)
