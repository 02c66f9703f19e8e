//! Max-plus Martin boundary toolkit: Kleene closures, Martin kernels,
//! representing measures, almost-geodesics and metric horofunctions.

pub mod corpus;
pub mod geodesics;
pub mod harmonic;
pub mod io;
pub mod kernels;
pub mod measures;
pub mod metric;
pub mod semiring;
pub mod tail;

pub use corpus::{example1, example2, metric_template, CorpusError, MartinCorpus, MetricTemplate, TemplateRay};
pub use geodesics::{
    lemma_a_check, lemma_b_gap, min_parameter_at, min_parameter_kernel, min_parameter_u, rebase, witness_geodesic,
    GeodesicCertificate, GeodesicError, GeodesicKind, WitnessConfig, WitnessGeodesic,
};
pub use harmonic::{is_harmonic, is_superharmonic, represents, CheckKind, Measure, MeasureDomain, ResidualReport};
pub use kernels::{
    finite_martin_space, h_flat, martin_kernel, minimal_martin_space, Accumulation, BoundaryFamily, KernelError,
    Locator, MartinInstance, Point, PointSet,
};
pub use measures::{mu_max, mu_min, m_u, order_leq, usc_hull, KappaEvaluator, MeasureError, MinimumMeasure, OrderedPointSet};
pub use metric::{
    graph_metric, greatest_nu, horofunction_limit, inf_representation_check, is_distance_like, rieffel_check,
    DistanceLikeReport, HorofunctionWindow, MetricError, MetricInstance, NuMap, RieffelReport, WeightedGraph,
};
pub use semiring::{
    kleene_plus, kleene_star, mat_mul, mat_vec, Closure, ExtReal, Kernel, MpVector, SemiringError, StateSpace,
    DEFAULT_TOL,
};
pub use tail::{tail_limit, TailLimit};
