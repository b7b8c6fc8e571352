"""Reference implementation of the skeleton walk / occupation kernel.

Mirrors ``_walk.pyx`` operation for operation so both produce identical bits.
State vector layout: [x, t, outside, steps].
"""
from __future__ import annotations

STATUS_RUNNING = 0
STATUS_LEVEL = 1  # zero-bin occupation passed the stop level
STATUS_TIME = 2  # reached t_end
STATUS_BUDGET = 3  # max_steps exhausted


def walk_block(incr, state, occ, dt_base, alpha, accel_window, x_lo, width,
               j0, stop_occ, t_end, max_steps):
    """Advance one path through the increments in ``incr``.

    Each step deposits its duration into the bin holding the current position
    (left-point rule), then moves by ``m·incr[k]`` where m = max(1, |x|/M) and
    the step lasts dt_base·m^alpha.  Returns (status, increments consumed).
    """
    x = state[0]
    t = state[1]
    outside = state[2]
    steps = state[3]
    nbins = len(occ)
    status = STATUS_RUNNING
    n = len(incr)
    incr = incr.tolist() if hasattr(incr, "tolist") else incr
    k = 0
    while k < n:
        if steps >= max_steps:
            status = STATUS_BUDGET
            break
        ax = x if x >= 0.0 else -x
        if ax > accel_window:
            m = ax / accel_window
            dt = dt_base * m ** alpha
        else:
            m = 1.0
            dt = dt_base
        last = False
        if t + dt >= t_end:
            dt = t_end - t
            last = True
        fj = (x - x_lo) / width
        if 0 <= fj < nbins:
            j = int(fj)
            occ[j] += dt
        else:
            j = -1
            outside += dt
        t += dt
        if last:
            t = t_end
            status = STATUS_TIME
            break
        if j == j0 and stop_occ >= 0.0 and occ[j0] > stop_occ:
            status = STATUS_LEVEL
            break
        x += m * incr[k]
        steps += 1.0
        k += 1
    state[0] = x
    state[1] = t
    state[2] = outside
    state[3] = steps
    return status, k
