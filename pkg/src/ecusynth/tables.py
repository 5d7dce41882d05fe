"""Published workload statistics of the characterized motion/drive ECU.

All constants are kept in the units of the source tables: periods in ms,
WCETs in microseconds, memory in kB, shares as fractions.
"""

import numpy as np

from .model import Asil

QM, A, B, C, D = Asil.QM, Asil.A, Asil.B, Asil.C, Asil.D
ALL_ASILS = (QM, A, B, C, D)

# Software components: ASIL share, ROM range (kB), RAM range (kB).
SWC_ASIL_SHARE = {QM: 0.41, A: 0.07, B: 0.14, C: 0.10, D: 0.28}
SWC_ROM_KB = {QM: (6.0, 255.0), A: (37.0, 140.0), B: (15.0, 228.0),
              C: (18.0, 168.0), D: (21.0, 252.0)}
SWC_RAM_KB = {QM: (0.5, 29.0), A: (1.0, 22.0), B: (0.5, 17.0),
              C: (1.0, 26.0), D: (1.0, 23.0)}

# Cyclic application runnables: period -> (WCET min, WCET max, share, ASILs).
RUNNABLE_ROWS = {
    1: (15.0, 290.0, 0.05, (QM, B, D)),
    5: (10.0, 725.0, 0.31, (QM, A, B, C, D)),
    10: (22.0, 1218.0, 0.25, (QM, B, C, D)),
    20: (56.0, 1733.0, 0.12, (QM, B, C, D)),
    50: (125.0, 1902.0, 0.08, (QM, A, B, D)),
    100: (228.0, 2447.0, 0.10, (QM, C, D)),
    200: (191.0, 3988.0, 0.02, (QM, A)),
    500: (403.0, 6176.0, 0.04, (QM, D)),
    1000: (1209.0, 9200.0, 0.03, (QM,)),
}
RUNNABLE_PERIODS = tuple(RUNNABLE_ROWS)
RUNNABLE_PERIOD_SHARE = {p: row[2] for p, row in RUNNABLE_ROWS.items()}

# Inter-runnable communication: sender period -> receiver periods.
COMMUNICATION = {
    1: (1, 5, 10),
    5: (1, 5, 10, 20, 50),
    10: (1, 5, 10, 20, 50),
    20: (5, 10, 20, 100),
    50: (10, 20, 50, 100, 500),
    100: (50, 100, 200, 500),
    200: (100, 200, 1000),
    500: (500, 1000),
    1000: (100, 500, 1000),
}

# Cause-effect chains: distinct periods per chain, runnables per period.
CHAIN_PATTERN_SHARE = {1: 0.65, 2: 0.25, 3: 0.10}
CHAIN_MEMBER_SHARE = {2: 0.40, 3: 0.25, 4: 0.20, 5: 0.10, 6: 0.05}
AGE_FACTOR_RANGE = (1.8, 4.9)
CHAIN_MIN_MEMBERS = 2
CHAIN_MAX_MEMBERS = 18

# Task-local BSW extension ratio by runnable count; key 6 stands for ">= 6".
BSW_RATIO = {1: (0.24, 0.57), 2: (0.19, 0.48), 3: (0.15, 0.39),
             4: (0.12, 0.30), 5: (0.10, 0.22), 6: (0.08, 0.14)}

# Dedicated BSW tasks: period -> (WCET min, WCET max, share, ASILs).
BSW_TASK_ROWS = {
    1: (26.0, 168.0, 0.07, (QM, D)),
    2: (18.0, 385.0, 0.06, (QM, D)),
    5: (21.0, 1014.0, 0.31, (QM, A, B, C, D)),
    10: (38.0, 1430.0, 0.34, (QM, A, B, C, D)),
    20: (37.0, 1698.0, 0.06, (QM, B, D)),
    50: (41.0, 972.0, 0.08, (QM, D)),
    100: (95.0, 588.0, 0.03, (QM,)),
    200: (14.0, 114.0, 0.05, (QM,)),
}
BSW_MAX_RUNNABLES = 200
BSW_ROM_KB = (634.0, 1258.0)


def bsw_ratio_bucket(n_runnables):
    """Row key of the BSW extension table for a task of ``n_runnables``."""
    if n_runnables < 1:
        raise ValueError("a task holds at least one runnable")
    return min(n_runnables, 6)


def communicates(writer_period, reader_period):
    return reader_period in COMMUNICATION.get(writer_period, ())


def _fit_joint(row_share, col_share, support, sweeps=5000, tol=1e-14):
    # Iterative proportional fitting onto the allowed (row, col) cells.
    joint = support * np.outer(row_share, col_share)
    for _ in range(sweeps):
        joint *= (row_share / joint.sum(axis=1))[:, None]
        joint *= (col_share / joint.sum(axis=0))[None, :]
        if np.abs(joint.sum(axis=1) - row_share).max() < tol:
            break
    return joint


def _period_given_asil():
    rows = np.array([SWC_ASIL_SHARE[a] for a in ALL_ASILS])
    cols = np.array([RUNNABLE_PERIOD_SHARE[p] for p in RUNNABLE_PERIODS])
    support = np.array([[a in RUNNABLE_ROWS[p][3] for p in RUNNABLE_PERIODS]
                        for a in ALL_ASILS], dtype=float)
    joint = _fit_joint(rows, cols, support)
    cond = joint / joint.sum(axis=1, keepdims=True)
    return {a: cond[i] for i, a in enumerate(ALL_ASILS)}


# Period distribution per ASIL: restricted to the ASIL's allowed periods and
# weighted so that the population-level period and ASIL shares both match.
PERIOD_GIVEN_ASIL = _period_given_asil()
