"""Every numerical tolerance used by the library, in one place."""

# |gauge(y) - 1| allowed for a point to count as lying on the boundary.
BOUNDARY = 1e-9

# Algebraic identities (Euler identity, Legendre inverse scalar identity, ...).
IDENTITY = 1e-9

# Comparisons against iterative solvers (projection oracle, conjugacy oracle).
ORACLE = 1e-6

# Grid-search geometry (support-set diameters).
GRID = 1e-4

# Inward clamp applied to iterates before evaluating the barrier gradient.
CLAMP = 1e-12

# Relative tolerance / iteration cap of the membership-bisection gauge.
BISECTION_RTOL = 1e-12
BISECTION_MAX_ITER = 200

# Loss vectors must satisfy polar_gauge(c) <= 1 + POLAR_SLACK.
POLAR_SLACK = 1e-12
