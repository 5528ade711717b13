"""Shared numeric constants.

EULER_GAMMA is hard-coded to 30 decimal digits (OEIS A001620) rather than
recomputed; the exponentials are derived from it once.
"""

import math

EULER_GAMMA = 0.577215664901532860606512090082

EXP_GAMMA = math.exp(EULER_GAMMA)        # e^gamma  = 1.7810724179901979...
EXP_NEG_GAMMA = math.exp(-EULER_GAMMA)   # e^-gamma = 0.5614594835668851...
