"""Kernel-averaged extension of jets from compact sets.

The core operator extends a jet (a function with derivative data
sampled on a compact set) to the whole space as a normalised average of
its Taylor polynomials against a power kernel and a doubling measure.
The package also provides the doubling-measure construction, packing
based metric-dimension estimators, the classical cover-and-glue Whitney
baseline, a holomorphic variant on the unit disk, and an empirical
verification harness for the operator's quantitative bounds.
"""

from jetext.dimensions import DimensionEstimate, estimate_dimensions, packing_count
from jetext.extension import (
    ExtensionParams,
    FieldGrid,
    GridSpec,
    assemble_g,
    extend,
    extend_derivative,
    extend_series,
    kernel_mass,
    whitney_baseline,
    windowed_extension,
)
from jetext.geometry import (
    CompactSetSample,
    Metric,
    distance,
    generate_set,
    nearest_point,
)
from jetext.holo import (
    DiskJet,
    DiskKernelParams,
    disk_extend,
    disk_form,
    disk_kernel_mass,
)
from jetext.jets import (
    BesovParams,
    Jet,
    besov_norm,
    delta,
    derive,
    induce_jet,
    lip_norm,
    poly_jet,
    reexpand_check,
    taylor,
)
from jetext.measure import (
    DoublingMeasure,
    MeasureCertificate,
    ball_mass,
    build_measure,
    certify,
    pair_mass,
)
from jetext.report import VerificationReport
from jetext.verify import SuiteConfig, run_suite

__version__ = "0.1.0"
