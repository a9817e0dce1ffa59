"""Bandit mirror descent with the gauge barrier on uniformly convex bodies."""

from .adversary import LossVector, make_adversary
from .bandit import (
    BmdConfig,
    PendingRound,
    RoundRecord,
    Trajectory,
    bmd_step,
    estimate_loss,
    run_bmd,
    sample_action,
    schedule_params,
    simulate,
)
from .barrier import (
    BarrierPoint,
    DualPoint,
    barrier_grad,
    barrier_value,
    bregman_divergence,
    bregman_project_shrunken,
    conjugate_grad,
    conjugate_value,
)
from .errors import ConfigError, DomainError, PreconditionError
from .geometry import (
    ConvexBody,
    Cube,
    Ellipsoid,
    LpBall,
    gauge_eval,
    gauge_grad,
    make_body,
    normal_direction,
    polar_gauge_eval,
    polar_gauge_grad,
)

__version__ = "0.1.0"
