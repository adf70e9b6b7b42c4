//! Schedules, parameter rules, the composed radial map and its certificates.

mod certificate;
mod field;
mod params;
mod radial;
mod schedule;
mod target;

pub use certificate::{
    ln_annulus_area, ln_gap_area, ln_standard_area_factor, series_certificate, ConvergenceReport, SeriesReport,
    Verdict, Witness, RATIO_MAX,
};
pub use field::{distortion_field, DistortionField, FieldStage};
pub use params::{
    build_rotation, build_submain_1, build_submain_p, critical_rotation_alphas, growth_estimate, params_pure_rotation,
    params_submain_1, params_submain_p, BuildOptions, RotationRule,
};
pub use radial::{compose_radial, MapMeta, RadialMap, RadialProfile, Region, Theorem};
pub use schedule::{build_schedule, LambdaSeq, RadiusSchedule, SchedulePicker};
pub use target::{Gauge, Phi, TargetModulus};
