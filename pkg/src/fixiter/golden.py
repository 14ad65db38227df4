"""Published iterates for T(x) = (x + 2)^(1/3), x0 = 1.99, alpha_n = beta_n = 1/4.

Values are kept as the printed decimal strings, rows x_0 .. x_11.
"""

from .schemes import SchemeId

TABLE1_SCHEMES = (SchemeId.K, SchemeId.VATAN_TWO_STEP, SchemeId.THAKUR_NEW, SchemeId.PICARD_S)
TABLE1_X0 = 1.99
TABLE1_ALPHA = TABLE1_BETA = 0.25
TABLE1_STEPS = 11
TABLE1_TOL = 1e-12
FIXED_POINT = "1.521379706804568"

_P = FIXED_POINT
TABLE1 = {
    SchemeId.K: (
        "1.99", "1.522643193061496", "1.521383278248461", "1.521379716901169",
        "1.521379706833111", "1.521379706804648", _P, _P, _P, _P, _P, _P,
    ),
    SchemeId.VATAN_TWO_STEP: (
        "1.99", "1.527152378405542", "1.521453635507796", "1.521380654057891",
        "1.521379718941864", "1.521379706960085", "1.521379706806560",
        "1.521379706804593", _P, _P, _P, _P,
    ),
    SchemeId.THAKUR_NEW: (
        "1.99", "1.530163443560674", "1.521551978236029", "1.521383088492668",
        "1.521379773188262", "1.521379708107703", "1.521379706830149",
        "1.521379706805070", "1.521379706804577", _P, _P, _P,
    ),
    SchemeId.PICARD_S: (
        "1.99", "1.530160376515624", "1.521551916843118", "1.521383087287047",
        "1.521379773164595", "1.521379708107238", "1.521379706830139",
        "1.521379706805069", "1.521379706804577", _P, _P, _P,
    ),
}

# first row index equal to the converged value, read off the table
FIRST_CONVERGED = {
    SchemeId.K: 6,
    SchemeId.VATAN_TWO_STEP: 8,
    SchemeId.THAKUR_NEW: 9,
    SchemeId.PICARD_S: 9,
}
