"""Extended-real functions sampled on regular box grids and their discrete
Legendre-Fenchel conjugates.

The conjugate computed here is the conjugate of the *grid restriction* of a
function, ``g(s) = max_{x in grid} <s, x> - f(x)``.  It never exceeds the
conjugate of any extension of ``f``, so an inequality of the form
``conjugate >= something`` checked on the grid is a conservative certificate
for the continuous statement.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, GridFormatError, ProperError

__all__ = [
    "GridSpec",
    "GridFn",
    "conjugate_1d",
    "conjugate_nd",
    "brute_force_conjugate",
    "biconjugate",
    "write_gridfn",
    "read_gridfn",
    "format_float",
]

# Upper bound on the number of float64 entries materialized per block while
# maximizing along one axis (about 32 MB).
_BLOCK_ENTRIES = 1 << 22


def format_float(value: float) -> str:
    """17 significant digits: round-trips every finite double exactly."""
    if np.isposinf(value):
        return "inf"
    if np.isneginf(value):
        return "-inf"
    return format(float(value), ".17g")


@dataclass(frozen=True)
class GridSpec:
    """Regular box grid over R^d.

    Point ``k`` on axis ``i`` is ``lower[i] + k * (upper[i] - lower[i]) / (counts[i] - 1)``.
    """

    lower: tuple
    upper: tuple
    counts: tuple

    def __init__(self, lower, upper, counts):
        lower = tuple(float(a) for a in np.atleast_1d(lower))
        upper = tuple(float(b) for b in np.atleast_1d(upper))
        counts = tuple(int(n) for n in np.atleast_1d(counts))
        if not (len(lower) == len(upper) == len(counts)) or not lower:
            raise DimensionError(
                f"lower/upper/counts lengths differ or are empty: "
                f"{len(lower)}, {len(upper)}, {len(counts)}"
            )
        for i, (a, b, n) in enumerate(zip(lower, upper, counts)):
            if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
                raise ValueError(f"axis {i}: need finite lower < upper, got [{a}, {b}]")
            if n < 2:
                raise ValueError(f"axis {i}: need at least 2 points, got {n}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def uniform(cls, lower: float, upper: float, count: int, dim: int = 1) -> "GridSpec":
        return cls([lower] * dim, [upper] * dim, [count] * dim)

    @classmethod
    def product(cls, *specs: "GridSpec") -> "GridSpec":
        """Cartesian product of grids, axes concatenated in order."""
        return cls(
            sum((s.lower for s in specs), ()),
            sum((s.upper for s in specs), ()),
            sum((s.counts for s in specs), ()),
        )

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> tuple:
        return self.counts

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @property
    def spacing(self) -> np.ndarray:
        return np.array(
            [(b - a) / (n - 1) for a, b, n in zip(self.lower, self.upper, self.counts)]
        )

    def axis(self, i: int) -> np.ndarray:
        a, b, n = self.lower[i], self.upper[i], self.counts[i]
        return a + np.arange(n) * ((b - a) / (n - 1))

    def axes(self) -> list:
        return [self.axis(i) for i in range(self.dim)]

    def points(self) -> np.ndarray:
        """All grid points in row-major order, shape ``(size, dim)``."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def sub(self, start: int, stop: int) -> "GridSpec":
        """Grid made of axes ``start:stop``."""
        return GridSpec(self.lower[start:stop], self.upper[start:stop], self.counts[start:stop])

    def expanded(self, factor: float) -> "GridSpec":
        """Same spacing and center, extent scaled by about ``factor`` per axis."""
        if factor < 1:
            raise ValueError(f"expansion factor must be >= 1, got {factor}")
        lower, upper, counts = [], [], []
        for a, b, n in zip(self.lower, self.upper, self.counts):
            step = (b - a) / (n - 1)
            extra = int(round((n - 1) * (factor - 1) / 2))
            lower.append(a - extra * step)
            upper.append(b + extra * step)
            counts.append(n + 2 * extra)
        return GridSpec(lower, upper, counts)

    def contains(self, p, atol: float = 1e-12) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(
            np.all(p >= np.asarray(self.lower) - atol) and np.all(p <= np.asarray(self.upper) + atol)
        )


class GridFn:
    """Proper extended-real function sampled on a :class:`GridSpec`.

    ``values`` is stored with shape ``spec.counts`` (row-major); +inf is allowed,
    -inf and nan are rejected, and at least one value must be finite.
    """

    def __init__(self, spec: GridSpec, values):
        values = np.array(values, dtype=float)
        if values.size != spec.size:
            raise DimensionError(
                f"{values.size} values given for a grid with {spec.size} points"
            )
        values = values.reshape(spec.counts)
        if np.isnan(values).any() or np.isneginf(values).any():
            raise ProperError("grid function takes the value -inf or nan")
        if not np.isfinite(values).any():
            raise ProperError("grid function is +inf at every grid point")
        values.setflags(write=False)
        self.spec = spec
        self.values = values

    @classmethod
    def from_callable(cls, spec: GridSpec, fn) -> "GridFn":
        """Sample ``fn`` (taking an array of shape ``(N, d)``) on every grid point."""
        return cls(spec, np.asarray(fn(spec.points()), dtype=float))

    @property
    def dim(self) -> int:
        return self.spec.dim

    def __repr__(self) -> str:
        return f"GridFn(dim={self.dim}, counts={self.spec.counts})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridFn):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.values, other.values)

    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)


def _max_plus_linear(H: np.ndarray, axis: int, x: np.ndarray, s: np.ndarray) -> np.ndarray:
    """``out[..., m, ...] = max_j (s[m] * x[j] + H[..., j, ...])`` along ``axis``."""
    Hm = np.moveaxis(H, axis, -1)
    lead = Hm.shape[:-1]
    flat = Hm.reshape(-1, Hm.shape[-1])
    out = np.empty((flat.shape[0], s.size))
    step = max(1, _BLOCK_ENTRIES // max(1, flat.shape[0] * x.size))
    for start in range(0, s.size, step):
        sl = s[start:start + step]
        block = flat[:, None, :] + sl[None, :, None] * x[None, None, :]
        out[:, start:start + step] = block.max(axis=-1)
    return np.moveaxis(out.reshape(lead + (s.size,)), -1, axis)


def _lower_hull(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indices of the lower convex hull of points sorted by ``x`` (monotone chain)."""
    hull = []
    for i in range(x.size):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b if it lies on or above segment a-i
            if (y[b] - y[a]) * (x[i] - x[a]) >= (y[i] - y[a]) * (x[b] - x[a]):
                hull.pop()
            else:
                break
        hull.append(i)
    return np.array(hull, dtype=int)


def _conjugate_1d_hull(x: np.ndarray, f: np.ndarray, s: np.ndarray) -> np.ndarray:
    finite = np.isfinite(f)
    xs, fs = x[finite], f[finite]
    idx = _lower_hull(xs, fs)
    hx, hf = xs[idx], fs[idx]
    slopes = np.diff(hf) / np.diff(hx)
    # vertex j is optimal for slopes[j-1] <= s <= slopes[j]
    j = np.searchsorted(slopes, s, side="left")
    return s * hx[j] - hf[j]


def conjugate_1d(f: GridFn, dual: GridSpec | None = None, method: str = "brute") -> GridFn:
    """Discrete conjugate of a one-dimensional grid function.

    Args:
        f: proper function on a 1-D grid.
        dual: slope grid; defaults to ``f.spec``.
        method: ``"brute"`` (O(N*M) maximization) or ``"hull"`` (lower convex
            hull followed by a monotone slope search; agrees with brute force
            to rounding).

    Returns:
        ``g(s) = max_x s*x - f(x)`` over the finite grid values of ``f``.
    """
    dual = f.spec if dual is None else dual
    if f.dim != 1 or dual.dim != 1:
        raise DimensionError(f"conjugate_1d needs 1-D grids, got {f.dim} and {dual.dim}")
    x, s = f.spec.axis(0), dual.axis(0)
    if method == "brute":
        return conjugate_nd(f, dual)
    if method == "hull":
        return GridFn(dual, _conjugate_1d_hull(x, f.values, s))
    raise ValueError(f"unknown method {method!r}")


def conjugate_nd(f: GridFn, dual: GridSpec | None = None) -> GridFn:
    """Discrete conjugate ``max_x <s, x> - f(x)`` on a d-dimensional grid.

    The maximization factorizes over axes, so it is carried out as d passes of
    one-dimensional max-plus transforms applied to ``-f``.
    """
    dual = f.spec if dual is None else dual
    if dual.dim != f.dim:
        raise DimensionError(f"primal grid has dim {f.dim}, dual grid has dim {dual.dim}")
    H = -f.values
    for k in range(f.dim):
        H = _max_plus_linear(H, k, f.spec.axis(k), dual.axis(k))
    return GridFn(dual, H)


def brute_force_conjugate(f: GridFn, dual: GridSpec | None = None) -> GridFn:
    """Reference conjugate by a direct double loop over primal and dual points."""
    dual = f.spec if dual is None else dual
    if dual.dim != f.dim:
        raise DimensionError(f"primal grid has dim {f.dim}, dual grid has dim {dual.dim}")
    X = f.spec.points()
    fx = f.values.ravel()
    keep = np.isfinite(fx)
    X, fx = X[keep], fx[keep]
    out = np.empty(dual.size)
    for m, s in enumerate(dual.points()):
        out[m] = np.max(X @ s - fx)
    return GridFn(dual, out)


def biconjugate(f: GridFn) -> GridFn:
    """Closed convex hull of the grid restriction of ``f``, sampled on its own grid."""
    return conjugate_nd(conjugate_nd(f, f.spec), f.spec)


def write_gridfn(f: GridFn, path) -> None:
    """Write ``f`` in the ``gridfn v1`` text format to a path or text stream."""
    lines = ["gridfn v1", f"dim {f.dim}"]
    for i in range(f.dim):
        lines.append(
            f"axis {i} {format_float(f.spec.lower[i])} {format_float(f.spec.upper[i])} {f.spec.counts[i]}"
        )
    lines.extend(format_float(v) for v in f.values.ravel())
    text = "\n".join(lines) + "\n"
    if isinstance(path, io.TextIOBase):
        path.write(text)
    else:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text)


def _parse_value(token: str, lineno: int) -> float:
    if token == "inf":
        return np.inf
    try:
        value = float(token)
    except ValueError:
        raise GridFormatError(f"line {lineno}: not a number: {token!r}") from None
    if not np.isfinite(value):
        raise GridFormatError(f"line {lineno}: only 'inf' or finite decimals allowed, got {token!r}")
    return value


def read_gridfn(path) -> GridFn:
    """Parse a ``gridfn v1`` file (path or text stream)."""
    if isinstance(path, (str, os.PathLike)):
        with open(path, encoding="ascii") as fh:
            text = fh.read()
    else:
        text = path.read()
    lines = [ln.strip() for ln in text.splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    if not lines or lines[0] != "gridfn v1":
        raise GridFormatError("line 1: expected header 'gridfn v1'")
    if len(lines) < 2 or not lines[1].startswith("dim "):
        raise GridFormatError("line 2: expected 'dim d'")
    try:
        d = int(lines[1].split()[1])
    except (IndexError, ValueError):
        raise GridFormatError("line 2: dimension is not an integer") from None
    if d < 1:
        raise GridFormatError("line 2: dimension must be positive")
    lower, upper, counts = [], [], []
    for i in range(d):
        lineno = 3 + i
        if lineno > len(lines):
            raise GridFormatError(f"line {lineno}: missing axis line")
        parts = lines[lineno - 1].split()
        if len(parts) != 5 or parts[0] != "axis" or parts[1] != str(i):
            raise GridFormatError(f"line {lineno}: expected 'axis {i} lower upper count'")
        try:
            lower.append(float(parts[2]))
            upper.append(float(parts[3]))
            counts.append(int(parts[4]))
        except ValueError:
            raise GridFormatError(f"line {lineno}: bad axis fields") from None
    try:
        spec = GridSpec(lower, upper, counts)
    except ValueError as exc:
        raise GridFormatError(f"invalid axes: {exc}") from None
    body = lines[2 + d:]
    if len(body) != spec.size:
        raise GridFormatError(f"expected {spec.size} values, found {len(body)}")
    values = [_parse_value(tok, 3 + d + k) for k, tok in enumerate(body)]
    try:
        return GridFn(spec, values)
    except ProperError as exc:
        raise GridFormatError(str(exc)) from None
