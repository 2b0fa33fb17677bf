"""Basin / escape grids on a real 2-parameter slice z = base + x u + y v of C^k."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from nabasin.core.config import get_settings
from nabasin.core.errors import ParameterError
from nabasin.core.types import RenderSpec, to_complex
from nabasin.dynamics.classify import ESCAPING, IN_BASIN, UNDECIDED, classify_batch
from nabasin.dynamics.filtration import FiltrationSpec
from nabasin.families.sequence import AutoSequence

log = logging.getLogger("render")

# rows per work item; fixed so results never depend on the worker count
CHUNK_ROWS = 8

GRAY = {IN_BASIN: 0, UNDECIDED: 128, ESCAPING: 255}


@dataclass(frozen=True)
class RenderResult:
    classes: np.ndarray  # (rows, cols) uint8 codes
    steps: np.ndarray  # (rows, cols) entry step into the basin ball or V_R^+
    maxiter: int

    def classification_image(self) -> np.ndarray:
        img = np.full(self.classes.shape, GRAY[UNDECIDED], dtype=np.uint8)
        img[self.classes == IN_BASIN] = GRAY[IN_BASIN]
        img[self.classes == ESCAPING] = GRAY[ESCAPING]
        return img

    def escape_time_image(self) -> np.ndarray:
        """Escaping pixels from 255 (immediate) down to 1 (at maxiter); everything else 0."""
        img = np.zeros(self.classes.shape, dtype=np.uint8)
        esc = self.classes == ESCAPING
        scale = 254.0 / max(1, self.maxiter)
        img[esc] = (255 - np.rint(self.steps[esc] * scale)).astype(np.uint8)
        return img

    def counts(self) -> dict[str, int]:
        return {
            "in_basin": int(np.count_nonzero(self.classes == IN_BASIN)),
            "escaping": int(np.count_nonzero(self.classes == ESCAPING)),
            "undecided": int(np.count_nonzero(self.classes == UNDECIDED)),
        }


def slice_points(window: RenderSpec, k: int) -> np.ndarray:
    """Points (k, rows, cols); row 0 is the top edge (largest y)."""
    base, u, v = (np.array([to_complex(c) for c in vec]) for vec in (window.base, window.u, window.v))
    for name, vec in (("base", base), ("u", u), ("v", v)):
        if vec.shape != (k,):
            raise ParameterError(f"render.{name} has {vec.shape[0]} entries, expected {k}")
    cols, rows = window.resolution
    if cols < 1 or rows < 1:
        raise ParameterError(f"resolution must be positive, got {window.resolution}")
    xs = np.linspace(window.x_range[0], window.x_range[1], cols)
    ys = np.linspace(window.y_range[1], window.y_range[0], rows)
    return (
        base[:, None, None]
        + u[:, None, None] * xs[None, None, :]
        + v[:, None, None] * ys[None, :, None]
    )


def render_basin(
    seq: AutoSequence,
    window: RenderSpec,
    spec: FiltrationSpec,
    r_tilde: float,
    maxiter: int | None = None,
    threads: int | None = None,
) -> RenderResult:
    settings = get_settings()
    maxiter = settings.MAXITER if maxiter is None else maxiter
    threads = settings.THREADS if threads is None else max(1, threads)
    grid = slice_points(window, seq.k)
    k, rows, cols = grid.shape
    classes = np.empty((rows, cols), dtype=np.uint8)
    steps = np.empty((rows, cols), dtype=np.int64)

    def work(r0: int) -> None:
        r1 = min(rows, r0 + CHUNK_ROWS)
        codes, entry = classify_batch(seq, grid[:, r0:r1].reshape(k, -1), spec, r_tilde, maxiter)
        classes[r0:r1] = codes.reshape(r1 - r0, cols)
        steps[r0:r1] = entry.reshape(r1 - r0, cols)

    starts = range(0, rows, CHUNK_ROWS)
    if threads == 1:
        for r0 in starts:
            work(r0)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, starts))
    result = RenderResult(classes=classes, steps=steps, maxiter=maxiter)
    log.info("render_done rows=%d cols=%d threads=%d %s", rows, cols, threads,
             " ".join(f"{key}={val}" for key, val in result.counts().items()))
    return result
