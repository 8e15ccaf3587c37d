"""Kernel density estimation for random persistence diagrams."""
from ._backend import BACKEND
from .cech import (
    Filtration,
    Simplex,
    cech_filtration,
    cloud_diagram,
    min_enclosing_ball_radius,
    persistence,
)
from .datagen import PointCloud, sample_circle, sample_two_lobed, two_lobed_radius
from .diagram import Feature, PersistenceDiagram, bottleneck, max_persistence, split
from .errors import InvalidArgument, NumericError, ParseError, PdkdeError
from .kde import (
    BandwidthSchedule,
    GeneratorSpec,
    Grid,
    KdeModel,
    convergence_sweep,
    eval_slice,
    evaluate,
    fit,
    mad_estimate,
    sample,
    sample_diagrams,
    set_integral_mc,
    silverman_sigma,
    slice_l1,
    slice_mode,
)
from .kernel import (
    Kernel,
    MultiKernel,
    SingletonSystem,
    build_kernel,
    build_multi_kernel,
    cardinality_pmf,
    combine_singletons,
    eval_kernel,
    eval_kernel_symmetric,
    eval_multi_degree,
    eval_phd,
    lower_pdf,
    nu_default,
    q_nonempty,
    sample_kernel,
    sample_multi,
    upper_pdf,
    wedge_mass,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
