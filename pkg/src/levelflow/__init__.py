"""levelflow: a level-set mean-curvature-flow engine with arrival-time
extraction and singularity classification."""

from .arrival import (
    ArrivalTimeField,
    arrival_residual,
    compute_arrival_time,
    median_arrival_residual,
    quadratic_model,
)
from .analysis import (
    C2Verdict,
    CriticalPointReport,
    SingularSet,
    axis_fit,
    axis_uniqueness,
    c2_classify,
    classify,
    find_critical_points,
    singular_set,
)
from .evolution import (
    EvolutionParams,
    FlowRecord,
    avoidance_check,
    cfl_dt,
    curvature_speed,
    evolve,
    reinitialize,
    step,
)
from .grid import (
    Grid,
    ScalarField,
    gradient_central,
    hessian_central,
    interpolate,
    make_grid,
)
from .measures import (
    FrontMesh,
    component_count,
    enclosed_measure,
    extract_front,
    front_measure,
    isoperimetric_ratio,
)
from .shapes import (
    Cylinder,
    Dumbbell,
    Intersection,
    Polygon2D,
    Sphere,
    Torus,
    Union,
    init_field,
    spiral_polygon,
)

__version__ = "0.1.0"
