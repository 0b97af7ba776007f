#![allow(dead_code)]

use etcrb_core::design::DesignProblem;
use etcrb_core::fisher::{EtResponses, FisherOperators, SensingConfig};
use etcrb_core::geometry::*;
use etcrb_core::C64;
use nalgebra::Point2;

pub const FC: f64 = 4.9e9;
pub const REFERENCE_USERS: [(f64, f64); 2] = [(15.0, -25.0), (18.0, 35.0)];

pub struct Setup {
    pub array: ArrayGeometry<f64>,
    pub eta: EtParams<f64>,
    pub resp: EtResponses<f64>,
    pub problem: DesignProblem,
}

impl Setup {
    pub fn center(&self) -> Point2<f64> {
        self.eta.center()
    }
}

pub fn db(v: f64) -> f64 {
    10f64.powf(v / 10.0)
}

/// Reference scenario: target at (0, 20) m, 30 degrees, T = 16,
/// noise -30 dBm on both links.
pub fn setup(n: usize, users: &[(f64, f64)], gamma: f64, power: f64, l: f64, b: f64) -> Setup {
    let array = ArrayGeometry::ula(n, FC).unwrap();
    let eta = EtParams::new(0.0, 20.0, 30f64.to_radians(), l, b).unwrap();
    let cloud = ellipse_cloud(&eta, &EllipseLayout::default()).unwrap();
    let resp = EtResponses::build(&cloud, &array).unwrap();
    let ops = FisherOperators::build(&resp);
    let channels = users
        .iter()
        .map(|&(r, t)| {
            let u = UserSpec { range: r, angle: t.to_radians(), gain: C64::new(1.0, 0.0), sinr_target: gamma };
            user_channel(&array, &u).unwrap()
        })
        .collect();
    let sensing = SensingConfig::new(16, 1e-6).unwrap();
    let problem = DesignProblem::new(channels, vec![gamma; users.len()], 1e-6, power, sensing, ops.q().clone()).unwrap();
    Setup { array, eta, resp, problem }
}

pub fn reference_setup(n: usize) -> Setup {
    setup(n, &REFERENCE_USERS, db(15.0), 1.0, 3.0, 0.8)
}
