"""Monte Carlo verification of mean chord and mean traversed length laws for curves in bodies."""

from . import backend
from .bodies import Body, annulus, ball, box, convex_hull, from_descriptor, measures, polygon, spherical_shell
from .curves import (
    Curve,
    CurveProcess,
    StepLengthLaw,
    circle_process,
    line_process,
    make_circle_loop,
    make_line,
    make_pearson_walk,
    make_polyline,
    make_ramified_tree,
    make_segment,
    pearson_process,
    segment_process,
    tree_process,
)
from .errors import (
    CapabilityError,
    ConfigurationError,
    DegenerateEstimate,
    KinemetricaError,
    RegimeViolation,
    UsageError,
)
from .estimators import (
    EstimatorResult,
    estimate_inclusion_probability_3d,
    estimate_infinite_curve_mean_length,
    estimate_mean_traversed_length,
    estimate_ocd_mean_chord,
    estimate_small_loop_quantities,
    invariance_suite,
)
from .kinematics import IntersectionResult, RigidMotion, intersect, piece_count_as_chi, sample_hitting_motion
from .theory import TheoryValue

__version__ = "0.1.0"
