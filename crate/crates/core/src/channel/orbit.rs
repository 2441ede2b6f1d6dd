//! Circular pass over a static spherical Earth.
//!
//! The ground track is the great circle through the UT-cluster centroid
//! along the configured heading, and the satellite is overhead the centroid
//! at mid-pass. The array is nadir-pointing: body `z` toward the Earth centre,
//! body `x` along the velocity, so `θ` is the off-nadir angle and `φ` the
//! azimuth measured from the along-track axis.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};

pub const EARTH_RADIUS_M: f64 = 6_371e3;
pub const EARTH_MU: f64 = 3.986_004_418e14;

pub type Vec3 = [f64; 3];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn unit_from_geodetic(lat: f64, lon: f64) -> Vec3 {
    [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
}

fn east(lon: f64) -> Vec3 {
    [-lon.sin(), lon.cos(), 0.0]
}

fn north(lat: f64, lon: f64) -> Vec3 {
    [-lat.sin() * lon.cos(), -lat.sin() * lon.sin(), lat.cos()]
}

/// Circular orbital speed `√(μ / (R_E + h))`.
pub fn orbital_speed(altitude_m: f64) -> f64 {
    (EARTH_MU / (EARTH_RADIUS_M + altitude_m)).sqrt()
}

/// Look angles of one UT in the array frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LookAngles {
    /// Off-boresight angle θ.
    pub theta: f64,
    /// Azimuth φ.
    pub phi: f64,
    pub slant_range_m: f64,
    pub elevation_rad: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitState {
    pub altitude_m: f64,
    pub pass_time_s: f64,
    pub satellite_position: Vec3,
    pub angles: Vec<LookAngles>,
}

/// Pass geometry shared by every time instant of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct PassGeometry {
    pub altitude_m: f64,
    /// Time at which the satellite is over the centroid.
    pub t_mid_s: f64,
    pub centroid: Vec3,
    /// Unit along-track direction at the centroid.
    pub track: Vec3,
    pub min_elevation_deg: f64,
}

impl PassGeometry {
    pub fn new(
        altitude_m: f64,
        pass_s: f64,
        centroid_lat: f64,
        centroid_lon: f64,
        heading: f64,
        min_elevation_deg: f64,
    ) -> Self {
        let track = add(
            scale(north(centroid_lat, centroid_lon), heading.cos()),
            scale(east(centroid_lon), heading.sin()),
        );
        Self {
            altitude_m,
            t_mid_s: pass_s / 2.0,
            centroid: unit_from_geodetic(centroid_lat, centroid_lon),
            track,
            min_elevation_deg,
        }
    }

    /// Satellite position and unit velocity direction at time `t`.
    pub fn satellite(&self, t: f64) -> (Vec3, Vec3) {
        let radius = EARTH_RADIUS_M + self.altitude_m;
        let omega = orbital_speed(self.altitude_m) / radius;
        let psi = omega * (t - self.t_mid_s);
        let pos = scale(
            add(
                scale(self.centroid, psi.cos()),
                scale(self.track, psi.sin()),
            ),
            radius,
        );
        let vel = add(
            scale(self.centroid, -psi.sin()),
            scale(self.track, psi.cos()),
        );
        (pos, vel)
    }

    /// Look angles from the satellite at time `t` to the ECEF points `uts`.
    pub fn propagate(&self, t: f64, uts: &[Vec3]) -> Result<OrbitState> {
        let (sat, vel) = self.satellite(t);
        let z_b = scale(sat, -1.0 / norm(sat));
        let x_b = vel;
        let y_b = cross(z_b, x_b);
        let mut angles = Vec::with_capacity(uts.len());
        for (n, &p) in uts.iter().enumerate() {
            let los = sub(p, sat);
            let range = norm(los);
            let dir = scale(los, 1.0 / range);
            let theta = dot(dir, z_b).clamp(-1.0, 1.0).acos();
            let phi = dot(dir, y_b).atan2(dot(dir, x_b));
            let up = scale(p, 1.0 / norm(p));
            let elevation = (-dot(dir, up)).clamp(-1.0, 1.0).asin();
            let elevation_deg = elevation.to_degrees();
            if elevation_deg < self.min_elevation_deg {
                return Err(Error::BelowMinElevation {
                    ut: n,
                    t_s: t,
                    elevation_deg,
                    mask_deg: self.min_elevation_deg,
                });
            }
            angles.push(LookAngles {
                theta,
                phi,
                slant_range_m: range,
                elevation_rad: elevation,
            });
        }
        Ok(OrbitState {
            altitude_m: self.altitude_m,
            pass_time_s: t,
            satellite_position: sat,
            angles,
        })
    }
}

/// Geodetic `(lat, lon)` of a point drawn uniformly over a disk of radius
/// `radius_m` (measured along the surface) around the centroid.
pub fn sample_in_disk<R: Rng + ?Sized>(
    centroid_lat: f64,
    centroid_lon: f64,
    radius_m: f64,
    rng: &mut R,
) -> (f64, f64) {
    let rho = radius_m * rng.random::<f64>().sqrt();
    let bearing = 2.0 * PI * rng.random::<f64>();
    let delta = rho / EARTH_RADIUS_M;
    let c = unit_from_geodetic(centroid_lat, centroid_lon);
    let dir = add(
        scale(north(centroid_lat, centroid_lon), bearing.cos()),
        scale(east(centroid_lon), bearing.sin()),
    );
    let p = add(scale(c, delta.cos()), scale(dir, delta.sin()));
    (p[2].clamp(-1.0, 1.0).asin(), p[1].atan2(p[0]))
}

/// ECEF position of a point at geodetic `(lat, lon, alt)` on the sphere.
pub fn ecef(lat: f64, lon: f64, alt_m: f64) -> Vec3 {
    scale(unit_from_geodetic(lat, lon), EARTH_RADIUS_M + alt_m)
}
