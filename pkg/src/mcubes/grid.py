"""Separable importance-sampling grid.

Each axis is split into ``n_bins`` bins whose right edges are stored in
integration-space coordinates; the left edge of bin 0 is the axis lower
bound.  A point ``u`` of the unit cube is mapped bin-by-bin: the integer
part of ``u * n_bins`` picks the bin and the fractional part places the
point linearly inside it.  Narrow bins therefore receive more samples per
unit length, and the Jacobian ``prod(n_bins * width)`` undoes that density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

DEFAULT_N_BINS = 50
DEFAULT_ALPHA = 1.5


@dataclass(frozen=True, eq=False)
class Grid:
    lower: np.ndarray
    upper: np.ndarray
    right_edges: np.ndarray

    def __post_init__(self):
        lower = np.array(self.lower, dtype=np.float64).reshape(-1)
        upper = np.array(self.upper, dtype=np.float64).reshape(-1)
        edges = np.array(self.right_edges, dtype=np.float64)
        if lower.size < 1:
            raise ConfigError("grid needs at least one axis")
        if edges.ndim != 2 or edges.shape[0] != lower.size or upper.size != lower.size:
            raise ConfigError(
                f"shape mismatch: lower {lower.shape}, upper {upper.shape}, edges {edges.shape}"
            )
        if edges.shape[1] < 2:
            raise ConfigError("grid needs at least two bins per axis")
        _check_bounds(lower, upper)
        ext = np.concatenate([lower[:, None], edges], axis=1)
        if not np.all(np.diff(ext, axis=1) > 0):
            raise ConfigError("bin edges must be strictly increasing")
        if not np.array_equal(edges[:, -1], upper):
            raise ConfigError("last right edge of every axis must equal the upper bound")
        for arr in (lower, upper, edges):
            arr.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "right_edges", edges)
        widths = np.diff(ext, axis=1)
        widths.setflags(write=False)
        ext.setflags(write=False)
        # cached views used by the vectorized transform
        object.__setattr__(self, "_left_edges", ext[:, :-1])
        object.__setattr__(self, "_widths", widths)

    @property
    def dims(self) -> int:
        return self.lower.size

    @property
    def n_bins(self) -> int:
        return self.right_edges.shape[1]

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    @property
    def widths(self) -> np.ndarray:
        """Bin widths, shape ``(dims, n_bins)``."""
        return self._widths

    def unit_edges(self) -> np.ndarray:
        """Right edges rescaled to the unit interval of each axis."""
        span = (self.upper - self.lower)[:, None]
        return (self.right_edges - self.lower[:, None]) / span

    def transform(self, u):
        """Map unit-cube points to integration space.

        ``u`` may be a single point of shape ``(d,)`` or a batch ``(n, d)``.
        Returns ``(x, jacobian)`` with matching leading shape.
        """
        u = np.asarray(u, dtype=np.float64)
        single = u.ndim == 1
        x, jac, _ = self.map_points(np.atleast_2d(u))
        if single:
            return x[0], float(jac[0])
        return x, jac

    def bin_indices(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=np.float64)
        single = u.ndim == 1
        u2 = np.atleast_2d(u)
        _check_unit(u2)
        idx = _bin_of(u2 * self.n_bins, self.n_bins)
        return idx[0] if single else idx

    def map_points(self, u: np.ndarray):
        """Vectorized transform of a ``(n, d)`` batch.

        Returns ``(x, jacobian, bins)``; ``bins`` is the ``(n, d)`` array of
        bin indices used for each coordinate.  ``x`` and ``bins`` are
        column-major so per-axis columns are contiguous.
        """
        if u.ndim != 2 or u.shape[1] != self.dims:
            raise ConfigError(f"expected points of shape (n, {self.dims}), got {u.shape}")
        _check_unit(u)
        n_b = self.n_bins
        n = u.shape[0]
        xt = np.empty((self.dims, n))
        bt = np.empty((self.dims, n), dtype=np.intp)
        jac = np.ones(n)
        for j in range(self.dims):
            z = u[:, j] * n_b
            b = _bin_of(z, n_b)
            delta = z - b
            width = np.take(self._widths[j], b)
            np.multiply(delta, width, out=delta)
            np.add(np.take(self._left_edges[j], b), delta, out=xt[j])
            # left + width can round one ulp past the right edge
            np.minimum(xt[j], np.take(self.right_edges[j], b), out=xt[j])
            width *= n_b
            jac *= width
            bt[j] = b
        return xt.T, jac, bt.T

    def adjust(self, contributions, alpha: float = DEFAULT_ALPHA) -> "Grid":
        """Rebin every axis from its accumulated squared contributions."""
        c = _check_contributions(contributions, (self.dims, self.n_bins), alpha)
        ext = np.concatenate([self.lower[:, None], self.right_edges], axis=1)
        edges = np.array(self.right_edges)
        for j in range(self.dims):
            new = rebin_axis(ext[j], c[j], alpha)
            if new is not None:
                edges[j] = new
        return Grid(self.lower, self.upper, edges)

    def adjust_symmetric(self, contributions_axis0, alpha: float = DEFAULT_ALPHA) -> "Grid":
        """Rebin axis 0 and copy its unit-space boundaries to every axis."""
        c = _check_contributions(
            np.asarray(contributions_axis0, dtype=np.float64).reshape(1, -1), (1, self.n_bins), alpha
        )
        unit = np.concatenate([[0.0], self.unit_edges()[0]])
        unit[-1] = 1.0
        frac = rebin_axis(unit, c[0], alpha)
        if frac is None:
            frac = unit[1:]
        span = self.upper - self.lower
        edges = self.lower[:, None] + frac[None, :] * span[:, None]
        edges[:, -1] = self.upper
        if not np.all(np.diff(np.concatenate([self.lower[:, None], edges], axis=1), axis=1) > 0):
            return self
        return Grid(self.lower, self.upper, edges)

    def to_text(self) -> str:
        lines = [f"{self.dims} {self.n_bins}"]
        for j in range(self.dims):
            vals = [self.lower[j], self.upper[j], *self.right_edges[j]]
            lines.append(" ".join(repr(float(v)) for v in vals))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Grid":
        rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
        try:
            d, n_b = int(rows[0][0]), int(rows[0][1])
            body = np.array([[float(v) for v in r] for r in rows[1:]])
        except (IndexError, ValueError) as exc:
            raise ConfigError(f"malformed grid text: {exc}") from None
        if body.shape != (d, n_b + 2):
            raise ConfigError(f"grid text body has shape {body.shape}, expected {(d, n_b + 2)}")
        return cls(body[:, 0], body[:, 1], body[:, 2:])

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (
            np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
            and np.array_equal(self.right_edges, other.right_edges)
        )

    def __repr__(self):
        return f"Grid(dims={self.dims}, n_bins={self.n_bins})"


def init_uniform(d: int, n_b: int, lower, upper) -> Grid:
    if d < 1:
        raise ConfigError(f"invalid dimension {d}")
    if n_b < 2:
        raise ConfigError(f"invalid bin count {n_b}")
    lower = np.broadcast_to(np.asarray(lower, dtype=np.float64), (d,))
    upper = np.broadcast_to(np.asarray(upper, dtype=np.float64), (d,))
    _check_bounds(lower, upper)
    steps = np.arange(1, n_b + 1, dtype=np.float64)
    edges = lower[:, None] + steps[None, :] * ((upper - lower) / n_b)[:, None]
    edges[:, -1] = upper
    return Grid(lower, upper, edges)


def rebin_axis(edges_ext: np.ndarray, contributions: np.ndarray, alpha: float):
    """New right edges for one axis, or ``None`` to keep the axis as is.

    ``edges_ext`` holds ``n_bins + 1`` edges including the lower bound.
    Contributions are smoothed with a (1, 6, 1)/8 stencil ((7, 1)/8 at the
    ends), normalized to fractions ``c``, damped to ``((c - 1) / ln c)**alpha``
    and the axis is re-split so every new bin carries an equal share of the
    damped importance, interpolating linearly inside old bins.
    """
    d = np.asarray(contributions, dtype=np.float64)
    n = d.size
    total = d.sum()
    if not total > 0:
        return None
    sm = np.empty(n)
    sm[0] = (7.0 * d[0] + d[1]) / 8.0
    sm[-1] = (d[-2] + 7.0 * d[-1]) / 8.0
    sm[1:-1] = (d[:-2] + 6.0 * d[1:-1] + d[2:]) / 8.0
    c = sm / sm.sum()

    imp = np.zeros(n)
    mid = (c > 0) & (c < 1)
    cm = c[mid]
    imp[mid] = ((cm - 1.0) / np.log(cm)) ** alpha
    imp[c >= 1] = 1.0

    cum = np.concatenate([[0.0], np.cumsum(imp)])
    targets = cum[-1] * np.arange(1, n) / n
    # bin k satisfies cum[k] < target <= cum[k + 1], so imp[k] > 0
    k = np.searchsorted(cum, targets, side="left") - 1
    k = np.clip(k, 0, n - 1)
    frac = (targets - cum[k]) / imp[k]
    left = edges_ext[k]
    new = np.empty(n)
    new[:-1] = left + frac * (edges_ext[k + 1] - left)
    new[-1] = edges_ext[-1]
    if not (np.all(np.diff(new) > 0) and new[0] > edges_ext[0]):
        return None
    return new


def _bin_of(z: np.ndarray, n_b: int) -> np.ndarray:
    return np.minimum(z.astype(np.intp), n_b - 1)


def _check_bounds(lower, upper):
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise ConfigError("integration bounds must be finite")
    if not np.all(lower < upper):
        raise ConfigError(f"invalid bounds: need lower < upper, got {lower} / {upper}")


def _check_unit(u):
    if u.size and not (u.min() >= 0.0 and u.max() <= 1.0):
        raise ConfigError("unit-cube point out of range [0, 1]")


def _check_contributions(contributions, shape, alpha):
    c = np.asarray(contributions, dtype=np.float64)
    if c.shape != shape:
        raise ConfigError(f"contributions have shape {c.shape}, expected {shape}")
    if np.any(c < 0) or not np.all(np.isfinite(c)):
        raise ConfigError("contributions must be finite and non-negative")
    if not (alpha >= 0 and math.isfinite(alpha)):
        raise ConfigError(f"damping exponent must be >= 0, got {alpha}")
    return c
