"""The eight streamline-streamline distance functions and their registry.

Three families:

* mean-of-closest distances (mc, sc, lc): symmetrizations of the average
  closest-point distance, on native point counts;
* minimum average direct-flip (mdf-m): mean pointwise distance after
  resampling both streamlines to m points, minimized over the two
  point-order correspondences;
* kernel distances (pdm-sigma, var-sigma): norms induced by a Gaussian
  kernel on points (pdm) or on segment centers weighted by squared tangent
  alignment and segment lengths (varifolds).

All distances are symmetric, nonnegative and zero on identical inputs.
mdf and varifolds are additionally invariant to flipping either argument.
The Gaussian kernel is exp(-||x - y||^2 / sigma^2); sigma in millimeters.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .model import Streamline, resample

DEFAULT_SIGMA = 42.0
DEFAULT_MDF_POINTS = (12, 20, 32)

_TAGS = ("mc", "sc", "lc", "mdf", "pdm", "var")


@dataclass(frozen=True)
class DistanceKind:
    """A distance function selector: tag plus optional parameter.

    tag is one of 'mc', 'sc', 'lc' (no parameter), 'mdf' (point count m),
    'pdm' or 'var' (kernel bandwidth sigma in mm).
    """

    tag: str
    param: float | None = None

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ValueError(f"unknown distance tag {self.tag!r}")
        if self.tag in ("mc", "sc", "lc"):
            if self.param is not None:
                raise ValueError(f"{self.tag} takes no parameter")
        elif self.tag == "mdf":
            if self.param is None or int(self.param) != self.param or self.param < 2:
                raise ValueError("mdf requires an integer point count m >= 2")
            object.__setattr__(self, "param", int(self.param))
        else:
            if self.param is None or not self.param > 0:
                raise ValueError(f"{self.tag} requires a bandwidth sigma > 0")
            object.__setattr__(self, "param", float(self.param))

    def __str__(self) -> str:
        if self.param is None:
            return self.tag
        if self.tag == "mdf":
            return f"mdf-{self.param}"
        return f"{self.tag}-{self.param:.1f}"


MC = DistanceKind("mc")
SC = DistanceKind("sc")
LC = DistanceKind("lc")


def mdf(m: int = 20) -> DistanceKind:
    return DistanceKind("mdf", m)


def pdm(sigma: float = DEFAULT_SIGMA) -> DistanceKind:
    return DistanceKind("pdm", sigma)


def varifolds(sigma: float = DEFAULT_SIGMA) -> DistanceKind:
    return DistanceKind("var", sigma)


def parse_kind(text: str) -> DistanceKind:
    """Parse a canonical kind string: mc, sc, lc, mdf-<m>, pdm-<sigma>, var-<sigma>."""
    text = text.strip().lower()
    tag, sep, param = text.partition("-")
    try:
        if not sep:
            return DistanceKind(tag)
        if tag == "mdf":
            return DistanceKind(tag, int(param))
        return DistanceKind(tag, float(param))
    except ValueError as exc:
        raise ValueError(f"cannot parse distance kind {text!r}: {exc}") from None


def default_kinds(sigma: float = DEFAULT_SIGMA) -> list[DistanceKind]:
    """The eight kinds compared by the benchmark, in canonical order."""
    return [MC, SC, LC, *(mdf(m) for m in DEFAULT_MDF_POINTS), pdm(sigma), varifolds(sigma)]


# ---------------------------------------------------------------------------
# Mean-of-closest family
# ---------------------------------------------------------------------------

def mean_closest_asym(s_a: Streamline, s_b: Streamline) -> float:
    """Average over points of s_a of the closest-point distance to s_b.

    Not symmetric in general.
    """
    d = cdist(s_a.points, s_b.points)
    return float(d.min(axis=1).mean())


def _mean_closest_both(s_a: Streamline, s_b: Streamline) -> tuple[float, float]:
    d = cdist(s_a.points, s_b.points)
    return float(d.min(axis=1).mean()), float(d.min(axis=0).mean())


def d_mc(s_a: Streamline, s_b: Streamline) -> float:
    """Mean of the two asymmetric closest-point averages."""
    ab, ba = _mean_closest_both(s_a, s_b)
    return (ab + ba) / 2.0


def d_sc(s_a: Streamline, s_b: Streamline) -> float:
    """Shorter (min) of the two asymmetric closest-point averages."""
    ab, ba = _mean_closest_both(s_a, s_b)
    return min(ab, ba)


def d_lc(s_a: Streamline, s_b: Streamline) -> float:
    """Longer (max) of the two asymmetric closest-point averages."""
    ab, ba = _mean_closest_both(s_a, s_b)
    return max(ab, ba)


# ---------------------------------------------------------------------------
# Minimum average direct-flip
# ---------------------------------------------------------------------------

def d_mdf(s_a: Streamline, s_b: Streamline, m: int) -> float:
    """Min of mean pointwise distance under direct and reversed pairing.

    Both streamlines are resampled to m equally spaced points first, so
    the result is invariant to flipping either argument.
    """
    pa = resample(s_a, m).points
    pb = resample(s_b, m).points
    return _mdf_core(pa, pb)


def _mdf_core(pa: np.ndarray, pb: np.ndarray) -> float:
    d = pa - pb
    direct = np.sqrt((d * d).sum(axis=1)).mean()
    f = pa - pb[::-1]
    flipped = np.sqrt((f * f).sum(axis=1)).mean()
    return float(min(direct, flipped))


def resample_stack(streamlines: Sequence[Streamline], m: int) -> np.ndarray:
    """Resample each streamline to m points and stack into an (n, m, 3) array."""
    out = np.empty((len(streamlines), m, 3))
    for i, s in enumerate(streamlines):
        out[i] = resample(s, m).points
    return out


def mdf_min_direct_flipped(a: np.ndarray, b: np.ndarray, chunk: int = 8192) -> np.ndarray:
    """Batch mdf core on aligned stacks of already-resampled streamlines.

    a and b are (n, m, 3) arrays; returns the n distances
    min(direct, flipped) without any resampling.
    """
    n = len(a)
    out = np.empty(n)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        d = a[lo:hi] - b[lo:hi]
        direct = np.sqrt((d * d).sum(axis=2)).mean(axis=1)
        f = a[lo:hi] - b[lo:hi, ::-1]
        flipped = np.sqrt((f * f).sum(axis=2)).mean(axis=1)
        out[lo:hi] = np.minimum(direct, flipped)
    return out


# ---------------------------------------------------------------------------
# Point density model
# ---------------------------------------------------------------------------

def pdm_inner(s_a: Streamline, s_b: Streamline, sigma: float) -> float:
    """Mean Gaussian kernel value over all point pairs; in (0, 1]."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    sq = cdist(s_a.points, s_b.points, "sqeuclidean")
    return float(np.exp(-sq / (sigma * sigma)).mean())


def d_pdm(s_a: Streamline, s_b: Streamline, sigma: float) -> float:
    """Kernel distance induced by the point-cloud Gaussian inner product.

    The squared distance is clamped at zero before the square root;
    floating-point cancellation can push it a hair negative for
    near-identical streamlines.
    """
    aa = pdm_inner(s_a, s_a, sigma)
    bb = pdm_inner(s_b, s_b, sigma)
    ab = pdm_inner(s_a, s_b, sigma)
    return math.sqrt(max(aa + bb - 2.0 * ab, 0.0))


# ---------------------------------------------------------------------------
# Varifolds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentDescriptor:
    """Center and tangent of one polyline segment (both in mm)."""

    center: np.ndarray
    tangent: np.ndarray


def segments(s: Streamline) -> list[SegmentDescriptor]:
    """Per-segment descriptors: center (x_i + x_{i+1})/2, tangent x_{i+1} - x_i."""
    centers, tangents, _ = _segment_arrays(s)
    return [SegmentDescriptor(c, t) for c, t in zip(centers, tangents)]


def _segment_arrays(s: Streamline) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    p = s.points
    tangents = p[1:] - p[:-1]
    centers = 0.5 * (p[1:] + p[:-1])
    norms = np.sqrt((tangents * tangents).sum(axis=1))
    return centers, tangents, norms


def _var_inner_arrays(ca, ta, na, cb, tb, nb, sigma: float) -> float:
    sq = cdist(ca, cb, "sqeuclidean")
    dots = ta @ tb.T
    # K_n * |n_i| * |n_j| = (n_i . n_j)^2 / (|n_i| |n_j|)
    w = np.exp(-sq / (sigma * sigma)) * (dots * dots) / np.outer(na, nb)
    return float(w.sum())


def varifolds_inner(s_a: Streamline, s_b: Streamline, sigma: float) -> float:
    """Sum over segment pairs of Gaussian center proximity times squared
    tangent alignment times segment lengths; always >= 0 and orientation
    independent."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    ca, ta, na = _segment_arrays(s_a)
    cb, tb, nb = _segment_arrays(s_b)
    return _var_inner_arrays(ca, ta, na, cb, tb, nb, sigma)


def d_varifolds(s_a: Streamline, s_b: Streamline, sigma: float) -> float:
    """Kernel distance on segment varifolds; radicand clamped at zero."""
    aa = varifolds_inner(s_a, s_a, sigma)
    bb = varifolds_inner(s_b, s_b, sigma)
    ab = varifolds_inner(s_a, s_b, sigma)
    return math.sqrt(max(aa + bb - 2.0 * ab, 0.0))


# ---------------------------------------------------------------------------
# Dispatch and batch helpers
# ---------------------------------------------------------------------------

def distance(kind: DistanceKind, s_a: Streamline, s_b: Streamline) -> float:
    """Evaluate one streamline pair under the given kind."""
    tag = kind.tag
    if tag == "mc":
        return d_mc(s_a, s_b)
    if tag == "sc":
        return d_sc(s_a, s_b)
    if tag == "lc":
        return d_lc(s_a, s_b)
    if tag == "mdf":
        return d_mdf(s_a, s_b, kind.param)
    if tag == "pdm":
        return d_pdm(s_a, s_b, kind.param)
    return d_varifolds(s_a, s_b, kind.param)


def distance_matrix(
    kind: DistanceKind,
    rows: Sequence[Streamline],
    cols: Sequence[Streamline] | None = None,
    threads: int | None = None,
) -> np.ndarray:
    """All pairwise distances between two streamline collections.

    With cols omitted (or identical to rows) only the upper triangle is
    evaluated and mirrored; all kinds here are symmetric by construction.
    Per-streamline quantities (resampled points, kernel self-products,
    segment descriptors) are computed once and reused, which matches
    per-pair evaluation to within accumulation rounding. The optional
    thread pool splits work by row blocks; output does not depend on the
    schedule.
    """
    rows = list(rows)
    symmetric = cols is None or cols is rows
    cols_l = rows if symmetric else list(cols)
    fill = _row_filler(kind, rows, cols_l)
    out = np.empty((len(rows), len(cols_l)))

    def run(i: int) -> None:
        fill(out, i, i if symmetric else 0)

    if threads and threads > 1 and len(rows) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, range(len(rows))))
    else:
        for i in range(len(rows)):
            run(i)
    if symmetric:
        iu = np.triu_indices(len(rows), k=1)
        out[(iu[1], iu[0])] = out[iu]
    return out


def _row_filler(kind, rows, cols):
    """Build a closure filling out[i, j0:] for the given kind."""
    tag = kind.tag

    if tag in ("mc", "sc", "lc"):
        pick = {"mc": lambda ab, ba: (ab + ba) / 2.0,
                "sc": min, "lc": max}[tag]
        rpts = [s.points for s in rows]
        cpts = rpts if cols is rows else [s.points for s in cols]

        def fill(out, i, j0):
            for j in range(j0, len(cpts)):
                d = cdist(rpts[i], cpts[j])
                out[i, j] = pick(float(d.min(axis=1).mean()),
                                 float(d.min(axis=0).mean()))
        return fill

    if tag == "mdf":
        m = kind.param
        ra = resample_stack(rows, m)
        rb = ra if cols is rows else resample_stack(cols, m)

        def fill(out, i, j0):
            blk = rb[j0:]
            d = blk - ra[i]
            direct = np.sqrt((d * d).sum(axis=2)).mean(axis=1)
            f = blk[:, ::-1] - ra[i]
            flipped = np.sqrt((f * f).sum(axis=2)).mean(axis=1)
            out[i, j0:] = np.minimum(direct, flipped)
        return fill

    sigma = kind.param
    if tag == "pdm":
        apts = [s.points for s in rows]
        bpts = apts if cols is rows else [s.points for s in cols]
        aself = [pdm_inner(s, s, sigma) for s in rows]
        bself = aself if cols is rows else [pdm_inner(s, s, sigma) for s in cols]

        def fill(out, i, j0):
            for j in range(j0, len(bpts)):
                sq = cdist(apts[i], bpts[j], "sqeuclidean")
                cross = float(np.exp(-sq / (sigma * sigma)).mean())
                out[i, j] = math.sqrt(max(aself[i] + bself[j] - 2.0 * cross, 0.0))
        return fill

    # varifolds
    adesc = [_segment_arrays(s) for s in rows]
    bdesc = adesc if cols is rows else [_segment_arrays(s) for s in cols]
    aself = [_var_inner_arrays(*d, *d, sigma) for d in adesc]
    bself = aself if cols is rows else [_var_inner_arrays(*d, *d, sigma) for d in bdesc]

    def fill(out, i, j0):
        for j in range(j0, len(bdesc)):
            cross = _var_inner_arrays(*adesc[i], *bdesc[j], sigma)
            out[i, j] = math.sqrt(max(aself[i] + bself[j] - 2.0 * cross, 0.0))
    return fill
