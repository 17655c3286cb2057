"""Score oracles: cached hyperparameter landscapes with Gaussian noise.

A landscape maps every point of a discretized hyperparameter grid to a
mean score and a noise level; querying it returns mean + std * z. This is
the stand-in for real training runs: benchmarks draw noisy scores but are
judged on the true means. Synthetic generators (gaussian bumps, needle)
cover desk-scale experiments.
"""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DimSpec:
    """One grid axis: linear or log (multiplicative) spacing."""

    name: str
    scale: str
    min: float
    max: float
    count: int

    def __post_init__(self):
        if self.scale not in ("linear", "log"):
            raise ValueError(f"scale must be linear or log, got {self.scale!r}")
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.count > 1 and not self.min < self.max:
            raise ValueError("min must be < max")
        if self.scale == "log" and self.min <= 0:
            raise ValueError("log scale requires min > 0")

    def coordinates(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.min])
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class GridSpec:
    """A product grid over several axes, enumerated row-major."""

    dims: tuple

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(self.dims))
        if not self.dims:
            raise ValueError("grid needs at least one dimension")

    @property
    def size(self) -> int:
        return int(np.prod([d.count for d in self.dims]))

    @property
    def shape(self) -> tuple:
        return tuple(d.count for d in self.dims)

    def points(self) -> np.ndarray:
        """All grid points as a (size, ndim) array, row-major in dim order."""
        axes = [d.coordinates() for d in self.dims]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def index_to_coords(self, index: int) -> np.ndarray:
        multi = np.unravel_index(index, self.shape)
        return np.array([d.coordinates()[i] for d, i in zip(self.dims, multi)])

    def coords_to_index(self, coords) -> int:
        multi = []
        for d, c in zip(self.dims, coords):
            axis = d.coordinates()
            i = int(np.argmin(np.abs(axis - c)))
            if not math.isclose(axis[i], c, rel_tol=1e-9, abs_tol=1e-12):
                raise ValueError(f"{c} is not on axis {d.name}")
            multi.append(i)
        return int(np.ravel_multi_index(multi, self.shape))

    def log_mask(self) -> np.ndarray:
        """Which axes are log-scaled (used for GP coordinate transforms)."""
        return np.array([d.scale == "log" for d in self.dims])


@dataclass(frozen=True)
class Landscape:
    """Per-grid-point score mean and noise std."""

    grid: GridSpec
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        std = np.asarray(self.std, dtype=float)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)
        if mean.shape != (self.grid.size,) or std.shape != (self.grid.size,):
            raise ValueError("mean/std length must equal the grid size")
        if np.any(std < 0):
            raise ValueError("std must be nonnegative")

    def sample_score(self, index: int, rng: np.random.Generator) -> float:
        """Noisy score mean + std * z at a grid point; one normal draw."""
        if not 0 <= index < self.grid.size:
            raise IndexError(f"grid index {index} out of range")
        return float(self.mean[index] + self.std[index] * rng.standard_normal())

    def true_score(self, index: int) -> float:
        """The noiseless mean; for evaluation only, never shown to strategies."""
        return float(self.mean[index])


def save_landscape(landscape: Landscape, path: str):
    with open(path, "w", newline="") as fh:
        fh.write(dumps_landscape(landscape))


def dumps_landscape(landscape: Landscape) -> str:
    """Landscape CSV with a commented key=value grid header block."""
    buf = io.StringIO()
    for d in landscape.grid.dims:
        buf.write(
            f"# dim name={d.name} scale={d.scale} min={d.min!r} max={d.max!r} count={d.count}\n"
        )
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([d.name for d in landscape.grid.dims] + ["mean", "std"])
    pts = landscape.grid.points()
    for i in range(landscape.grid.size):
        row = [repr(float(c)) for c in pts[i]]
        row += [repr(float(landscape.mean[i])), repr(float(landscape.std[i]))]
        writer.writerow(row)
    return buf.getvalue()


def load_landscape(path: str) -> Landscape:
    with open(path) as fh:
        return loads_landscape(fh.read())


def loads_landscape(text: str) -> Landscape:
    dims = []
    lines = text.splitlines()
    body_start = 0
    for lineno, line in enumerate(lines):
        if not line.startswith("#"):
            body_start = lineno
            break
        fields = dict(kv.split("=", 1) for kv in line.lstrip("# ").split()[1:])
        try:
            dims.append(
                DimSpec(
                    name=fields["name"],
                    scale=fields["scale"],
                    min=float(fields["min"]),
                    max=float(fields["max"]),
                    count=int(fields["count"]),
                )
            )
        except (KeyError, ValueError) as exc:
            raise ValueError(f"malformed grid header at line {lineno + 1}: {exc}")
    grid = GridSpec(dims=tuple(dims))
    reader = csv.reader(io.StringIO("\n".join(lines[body_start:])))
    header = next(reader)
    expected = [d.name for d in grid.dims] + ["mean", "std"]
    if header != expected:
        raise ValueError(f"unexpected landscape columns {header}, expected {expected}")
    means, stds = [], []
    for lineno, row in enumerate(reader, start=body_start + 2):
        if not row:
            continue
        try:
            means.append(float(row[-2]))
            stds.append(float(row[-1]))
        except (IndexError, ValueError) as exc:
            raise ValueError(f"malformed landscape row at line {lineno}: {exc}")
        if stds[-1] < 0:
            raise ValueError(f"negative std at line {lineno}")
    if len(means) != grid.size:
        raise ValueError(f"row count {len(means)} does not match grid size {grid.size}")
    return Landscape(grid=grid, mean=np.array(means), std=np.array(stds))


def synth_landscape(grid: GridSpec, generator: str, seed: int, **kw) -> Landscape:
    """Deterministic synthetic landscapes.

    generator="needle": flat background with ceil(fraction * size) points
    raised to needle_value; positions drawn from the seed.
      kw: background (mean), needle_value, fraction, noise_std.
    generator="gaussian-bumps": background plus k bumps with amplitudes and
    widths drawn uniformly from the given ranges; bump centers on the grid
    in normalized per-axis coordinates.
      kw: k, amplitude_range, width_range, background, noise_std.
    """
    rng = np.random.default_rng(seed)
    pts = grid.points()
    if generator == "needle":
        background = float(kw.get("background", 0.0))
        needle_value = float(kw["needle_value"])
        fraction = float(kw["fraction"])
        noise_std = float(kw.get("noise_std", 0.0))
        n_needles = max(1, int(round(fraction * grid.size)))
        mean = np.full(grid.size, background)
        idx = rng.choice(grid.size, size=n_needles, replace=False)
        mean[idx] = needle_value
        std = np.full(grid.size, noise_std)
        return Landscape(grid=grid, mean=mean, std=std)
    if generator == "gaussian-bumps":
        k = int(kw["k"])
        amp_lo, amp_hi = kw["amplitude_range"]
        wid_lo, wid_hi = kw["width_range"]
        background = float(kw.get("background", 0.0))
        noise_std = float(kw.get("noise_std", 0.0))
        if k < 1 or amp_lo > amp_hi or wid_lo <= 0 or wid_lo > wid_hi:
            raise ValueError("invalid gaussian-bumps parameters")
        # normalized coordinates in [0, 1]^d so widths are scale-free
        lo = pts.min(axis=0)
        span = np.where(pts.max(axis=0) > lo, pts.max(axis=0) - lo, 1.0)
        unit = (pts - lo) / span
        mean = np.full(grid.size, background)
        for _ in range(k):
            center = unit[rng.integers(grid.size)]
            amp = rng.uniform(amp_lo, amp_hi)
            width = rng.uniform(wid_lo, wid_hi)
            d2 = np.sum((unit - center) ** 2, axis=1)
            mean += amp * np.exp(-0.5 * d2 / width**2)
        std = np.full(grid.size, noise_std)
        return Landscape(grid=grid, mean=mean, std=std)
    raise ValueError(f"unknown generator {generator!r}")
