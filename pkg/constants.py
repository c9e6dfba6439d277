OLS = 'OLS'
SW = 'SW'
SR = 'SR'

METHODS = [
    (OLS, OLS),
    (SW, SW),
    (SR, SR),
]

NE = 'NE'
TE = 'TE'
NEO = 'NEO'

SCENARIOS = [
    (NE, NE),
    (TE, TE),
    (NEO, NEO),
]

REGRESSION_Y = 'regression_y'
X_TRANSFORM = 'x'

TRANSFORMS = [
    (REGRESSION_Y, REGRESSION_Y),
    (X_TRANSFORM, X_TRANSFORM),
]

BERNOULLI = 'bernoulli'
FIXED = 'fixed'

CONTAMINATION_MODES = [
    (BERNOULLI, BERNOULLI),
    (FIXED, FIXED),
]

HALF_GRID = 'half'
INTEGER_GRID = 'integer'

GRIDS = [
    (HALF_GRID, HALF_GRID),
    (INTEGER_GRID, INTEGER_GRID),
]

# Observation classes reported by classify_observations
REGULAR = 'regular'
VERTICAL_OUTLIER = 'vertical_outlier'
GOOD_LEVERAGE = 'good_leverage'
BAD_LEVERAGE = 'bad_leverage'

# 1 / Phi^-1(3/4)^2, makes squared MAD and comedian entries consistent under normality
COMEDIAN_CONSTANT = 2.198

BREAKDOWN_LEVELS = [0.30, 0.40, 0.45]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
