"""Uniform linear array geometry, rotation and steering vectors.

All steering functions accept either a scalar angle or an array of angles.
A scalar angle returns a length-M vector; an array of shape ``(N,)`` returns
an ``(M, N)`` matrix whose columns are the steering vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ArrayGeometry",
    "element_offsets",
    "effective_angle",
    "steering_vector",
    "steering_derivative",
    "derivative_norm_sq",
]


def element_offsets(num_elements: int, spacing: float = 0.5) -> np.ndarray:
    """Signed distance of each element from the array centre.

    Parameters
    ----------
    num_elements : int
        Number of elements M (at least 2).
    spacing : float
        Inter-element spacing, in the same length unit as the result.

    Returns
    -------
    numpy.ndarray
        ``d_m = (m-1) D/(M-1) - D/2`` for ``m = 1..M`` with ``D = (M-1) spacing``.
    """
    num_elements = int(num_elements)
    if num_elements < 2:
        raise ValueError(f"num_elements must be >= 2, got {num_elements}")
    if not spacing > 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    aperture = (num_elements - 1) * spacing
    m = np.arange(num_elements)
    return m * aperture / (num_elements - 1) - aperture / 2


@dataclass(frozen=True)
class ArrayGeometry:
    """Centred uniform linear array.

    ``spacing`` and ``wavelength`` share a length unit; with the defaults the
    spacing is half a wavelength.
    """

    num_elements: int
    spacing: float = 0.5
    wavelength: float = 1.0
    offsets: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        offsets = element_offsets(self.num_elements, self.spacing)
        offsets.setflags(write=False)
        object.__setattr__(self, "offsets", offsets)

    @property
    def aperture(self) -> float:
        return (self.num_elements - 1) * self.spacing

    @property
    def wavenumber(self) -> float:
        return 2 * np.pi / self.wavelength


def effective_angle(nominal, rotation):
    """Angle seen by the rotated array: ``nominal + rotation`` (no wrapping)."""
    return np.add(nominal, rotation)


def _phase(geometry: ArrayGeometry, angle) -> np.ndarray:
    angle = np.asarray(angle, dtype=float)
    return geometry.wavenumber * np.multiply.outer(geometry.offsets, np.sin(angle))


def steering_vector(geometry: ArrayGeometry, angle) -> np.ndarray:
    """``exp(j k d_m sin(angle))`` for every element."""
    return np.exp(1j * _phase(geometry, angle))


def steering_derivative(geometry: ArrayGeometry, angle) -> np.ndarray:
    """Derivative of :func:`steering_vector` with respect to the angle."""
    angle = np.asarray(angle, dtype=float)
    scale = 1j * geometry.wavenumber * np.multiply.outer(geometry.offsets, np.cos(angle))
    return scale * steering_vector(geometry, angle)


def derivative_norm_sq(geometry: ArrayGeometry, angle):
    """Closed form of ``||steering_derivative||^2``.

    Uses ``sum_m d_m^2 = D^2 M (M+1) / (12 (M-1))`` for the centred layout.
    """
    m = geometry.num_elements
    d = geometry.aperture
    sum_sq = d**2 * m * (m + 1) / (12 * (m - 1))
    return geometry.wavenumber**2 * np.cos(angle) ** 2 * sum_sq
