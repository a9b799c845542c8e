"""Object, detector geometry and deterministic forward maps of the dual-arm scheme.

The object is a per-pixel transmittance map f with values in [0, 1]. Both arms
carry identical pixelated detectors whose pixels are bin_factor x bin_factor
blocks of object pixels; the binning operator A0 sums each block. With mean
illumination n photons per object pixel and detector quantum efficiencies
eta0 (object arm) and eta1 (restoring arm), the expected counts are

    E[xi0] = eta0 * n * A0 f + noise-photon background   (object-arm image)
    E[xi1] = eta0 * eta1 * n * A0 f                      (coincidence ghost image)

The factor n is absorbed into the stacked forward operator, so estimators
downstream recover f itself (the ideal operator is the identity on object
pixels). Everything here is a pure function of immutable inputs and is safe
to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonDivisibleGeometry
from . import io


def _values(f) -> np.ndarray:
    """Accept a TransmittanceMap or a bare vector of per-pixel values."""
    return np.asarray(getattr(f, "values", f), dtype=float)


@dataclass(frozen=True)
class TransmittanceMap:
    """Per-pixel object transmittance, row-major, each value in [0, 1]."""

    width: int
    height: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).ravel()
        object.__setattr__(self, "values", vals)
        if self.width <= 0 or self.height <= 0:
            raise ValueError("map dimensions must be positive")
        if vals.size != self.width * self.height:
            raise DimensionMismatch(
                f"expected {self.width * self.height} values, got {vals.size}"
            )
        if np.any(vals < 0.0) or np.any(vals > 1.0):
            raise ValueError("transmittance values must lie in [0, 1]")

    @property
    def num_pixels(self) -> int:
        return self.width * self.height

    def as_grid(self) -> np.ndarray:
        """Return the map as a (height, width) array."""
        return self.values.reshape(self.height, self.width)

    @classmethod
    def from_grid(cls, grid: np.ndarray) -> "TransmittanceMap":
        grid = np.asarray(grid, dtype=float)
        if grid.ndim != 2:
            raise DimensionMismatch(f"expected a 2-D grid, got shape {grid.shape}")
        return cls(width=grid.shape[1], height=grid.shape[0], values=grid.ravel())

    @classmethod
    def constant(cls, width: int, height: int, value: float = 1.0) -> "TransmittanceMap":
        return cls(width, height, np.full(width * height, float(value)))

    @classmethod
    def from_pgm(cls, path) -> "TransmittanceMap":
        """Load from binary PGM; 8-bit levels map linearly 0 -> 0.0, 255 -> 1.0."""
        return cls.from_grid(io.read_unit_pgm(path))

    def to_pgm(self, path) -> None:
        io.write_unit_pgm(path, self.as_grid())


@dataclass(frozen=True)
class DetectorGeometry:
    """Detector pixel grid; each detector pixel covers bin_factor^2 object pixels."""

    bin_factor: int
    detector_width: int
    detector_height: int

    def __post_init__(self):
        if self.bin_factor < 1:
            raise ValueError("bin_factor must be >= 1")
        if self.detector_width <= 0 or self.detector_height <= 0:
            raise ValueError("detector dimensions must be positive")

    @property
    def object_width(self) -> int:
        return self.detector_width * self.bin_factor

    @property
    def object_height(self) -> int:
        return self.detector_height * self.bin_factor

    @property
    def num_pixels(self) -> int:
        return self.detector_width * self.detector_height

    @classmethod
    def for_object(cls, object_width: int, object_height: int, bin_factor: int) -> "DetectorGeometry":
        if bin_factor < 1:
            raise ValueError("bin_factor must be >= 1")
        if object_width % bin_factor or object_height % bin_factor:
            raise NonDivisibleGeometry(
                f"object {object_width}x{object_height} not divisible by bin factor {bin_factor}"
            )
        return cls(bin_factor, object_width // bin_factor, object_height // bin_factor)


@dataclass(frozen=True)
class AcquisitionParams:
    """Illumination level and detector imperfections for one acquisition.

    n      mean illuminating photons per object pixel
    eta0   quantum efficiency of the object-arm detector
    eta1   quantum efficiency of the restoring-arm detector
    n_eps  mean noise photons per object pixel reaching the object-arm detector
    """

    n: float
    eta0: float
    eta1: float
    n_eps: float = 0.0

    def __post_init__(self):
        if self.n < 0 or self.n_eps < 0:
            raise ValueError("photon numbers must be non-negative")
        for name in ("eta0", "eta1"):
            eta = getattr(self, name)
            if not 0.0 <= eta <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {eta}")

    def scaled(self, factor: float) -> "AcquisitionParams":
        """Params for `factor` identical exposures summed into one measurement."""
        return AcquisitionParams(self.n * factor, self.eta0, self.eta1, self.n_eps * factor)


def build_binning_operator(object_width: int, object_height: int, bin_factor: int) -> np.ndarray:
    """Build the geometric binning operator A0.

    Detector pixel d accumulates the sum of the bin_factor x bin_factor block
    of object pixels it covers; the result is a dense (m, N) 0/1 matrix with
    m = (object_width/bin_factor) * (object_height/bin_factor) rows. Each
    column holds exactly one 1; each row holds exactly bin_factor^2 of them.

    Raises NonDivisibleGeometry if the object dimensions do not divide evenly.
    """
    geom = DetectorGeometry.for_object(object_width, object_height, bin_factor)
    n_pixels = object_width * object_height
    j = np.arange(n_pixels)
    obj_row, obj_col = j // object_width, j % object_width
    det_index = (obj_row // bin_factor) * geom.detector_width + obj_col // bin_factor
    a0 = np.zeros((geom.num_pixels, n_pixels))
    a0[det_index, j] = 1.0
    return a0


def bin_counts(counts_grid: np.ndarray, bin_factor: int) -> np.ndarray:
    """Sum an (H, W) object-pixel grid into detector pixels; fast path for A0 @ x."""
    h, w = counts_grid.shape
    if h % bin_factor or w % bin_factor:
        raise NonDivisibleGeometry(f"grid {w}x{h} not divisible by bin factor {bin_factor}")
    return (
        counts_grid.reshape(h // bin_factor, bin_factor, w // bin_factor, bin_factor)
        .sum(axis=(1, 3))
    )


def stacked_forward_operator(a0: np.ndarray, params: AcquisitionParams) -> np.ndarray:
    """Stack the two arms into one forward operator acting directly on f.

    Top block: n * eta0 * A0 (object-arm image); bottom block:
    n * eta0 * eta1 * A0 (ghost image). The illumination level n is absorbed
    here so that the ideal operator downstream is the identity.
    """
    a0 = np.asarray(a0, dtype=float)
    return np.vstack([params.n * params.eta0 * a0, params.n * params.eta0 * params.eta1 * a0])


def forward_mean(a0: np.ndarray, f, params: AcquisitionParams) -> tuple[np.ndarray, np.ndarray]:
    """Expected counts (object arm, restoring arm) for object f.

    Noise photons contribute only to the object arm. Their per-detector-pixel
    mean is eta0^2 * n_eps * bin_factor^2, matching the covariance convention
    of the noise module (the bin_factor^2 appears as the row sum of A0).
    """
    a0 = np.asarray(a0, dtype=float)
    vals = _values(f)
    if a0.shape[1] != vals.size:
        raise DimensionMismatch(f"A0 has {a0.shape[1]} columns but f has {vals.size} pixels")
    binned = a0 @ vals
    noise_mean = params.eta0**2 * params.n_eps * (a0 @ np.ones(vals.size))
    mean0 = params.eta0 * params.n * binned + noise_mean
    mean1 = params.eta0 * params.eta1 * params.n * binned
    return mean0, mean1
