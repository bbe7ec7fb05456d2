"""Bilinear sampling on the 1/16-pel grid with replicated borders.

One kernel serves both motion compensation and the synthetic sequence
renderer: output = round(sum of the four neighbour pixels weighted by the
16ths fractions), with the round carried out half away from zero (all
weights are non-negative, so +128 before the /256 floor is exact).
"""

from __future__ import annotations

import numpy as np

from .kinematics import MV_UNITS_PER_PEL


def sample_block(
    plane: np.ndarray, x0: int, y0: int, width: int, height: int, mv: tuple[int, int]
) -> np.ndarray:
    """Sample a width x height block at (x0, y0) displaced by ``mv`` units.

    ``plane`` is a 2-D uint8 array. Sample coordinates outside the plane
    replicate the nearest border pixel. Integer-pel displacements reduce to
    an exact pixel copy.
    """
    if plane.ndim != 2:
        raise ValueError(f"plane must be 2-D, got shape {plane.shape}")
    mvx, mvy = int(mv[0]), int(mv[1])
    ix, fx = mvx // MV_UNITS_PER_PEL, mvx % MV_UNITS_PER_PEL
    iy, fy = mvy // MV_UNITS_PER_PEL, mvy % MV_UNITS_PER_PEL

    rows = np.clip(np.arange(y0 + iy, y0 + iy + height + 1), 0, plane.shape[0] - 1)
    cols = np.clip(np.arange(x0 + ix, x0 + ix + width + 1), 0, plane.shape[1] - 1)
    window = plane[np.ix_(rows, cols)].astype(np.int32)

    p00 = window[:height, :width]
    p10 = window[:height, 1:]
    p01 = window[1:, :width]
    p11 = window[1:, 1:]
    num = (
        (16 - fx) * (16 - fy) * p00
        + fx * (16 - fy) * p10
        + (16 - fx) * fy * p01
        + fx * fy * p11
    )
    return ((num + 128) // 256).astype(np.uint8)
