"""Reference values for the five VV order pairs.

Intersystem concurrences and CHSH ``S`` values (raw, dark-count corrected)
as reported for the experiment. Simulations use the concurrences to set the
Werner weight; the ``S`` values are for comparison only.
"""

ORDER_PAIRS = ((1, 1), (1, 5), (1, 10), (3, 5), (1, -1))

TARGET_CONCURRENCE = {
    (1, 1): 0.949,
    (1, 5): 0.906,
    (1, 10): 0.863,
    (3, 5): 0.908,
    (1, -1): 0.914,
}

REFERENCE_S = {  # (raw, corrected)
    (1, 1): (2.654, 2.727),
    (1, 5): (2.649, 2.738),
    (1, 10): (2.437, 2.591),
    (3, 5): (2.621, 2.716),
    (1, -1): (2.592, 2.664),
}

REFERENCE_FIDELITY = 0.97
