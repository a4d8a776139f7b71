//! Excitation waves on conductive networks and the Boolean gates they
//! realise.
//!
//! A conductive grid (thresholded from an image or rasterized from
//! synthetic geometry) hosts a FitzHugh–Nagumo excitable medium. Two input
//! sites are stimulated for each input pair, observers record electrode
//! potentials, network activity and excitation frequency, and the `gates`
//! module turns those recordings into two-input Boolean gates.

// `!(x <= limit)` is used on purpose so that NaN counts as out of range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod fhn;
pub mod gates;
pub mod ingest;
pub mod observe;
pub mod runner;
