//! Numerical checks of the geometric facts the decoder relies on.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linalg::{dot3, normalize3, Vec3};

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let x = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let r2 = dot3(&x, &x);
        if r2 > 1e-6 && r2 <= 1.0 {
            return normalize3(&x).unwrap();
        }
    }
}

fn random_frame(rng: &mut ChaCha8Rng) -> [Vec3; 3] {
    let a = random_unit(rng);
    let mut b = random_unit(rng);
    let p = dot3(&a, &b);
    b = normalize3(&[b[0] - p * a[0], b[1] - p * a[1], b[2] - p * a[2]]).unwrap_or([0.0, 0.0, 1.0]);
    let c = crate::linalg::cross3(&a, &b);
    [a, b, c]
}

fn perturbed(base: &Vec3, frame: &[Vec3; 3], mag: f64, rng: &mut ChaCha8Rng) -> Vec3 {
    let r = random_unit(rng);
    let mut x = [0.0; 3];
    for i in 0..3 {
        let local = base[i] + mag * r[i];
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += local * frame[i][j];
        }
    }
    normalize3(&x).unwrap()
}

/// Largest `|⟨·,·⟩|` among the premise pairs `ab, bc, ca, db, dc`.
pub fn quadruple_premise(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    [dot3(a, b), dot3(b, c), dot3(c, a), dot3(d, b), dot3(d, c)]
        .iter()
        .fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadrupleReport {
    pub tested: usize,
    pub counterexamples: usize,
    /// Smallest `|⟨a,d⟩| - (1 - 5t²)` seen.
    pub worst_margin: f64,
}

/// Samples unit quadruples with every premise inner product at most
/// `t ≤ 1/5` and checks `|⟨a,d⟩| ≥ 1 - 5t²`.
pub fn check_quadruple_claim(samples: usize, seed: u64) -> QuadrupleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut tested = 0;
    let mut bad = 0;
    let mut worst = f64::INFINITY;
    while tested < samples {
        let t: f64 = rng.gen_range(1e-4..0.2);
        let frame = random_frame(&mut rng);
        // Perturbations near t push the premises toward their bound.
        let mag = t * rng.gen_range(0.3..1.2);
        let a = perturbed(&e[0], &frame, mag, &mut rng);
        let b = perturbed(&e[1], &frame, mag, &mut rng);
        let c = perturbed(&e[2], &frame, mag, &mut rng);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let d = perturbed(&[sign, 0.0, 0.0], &frame, mag, &mut rng);
        if quadruple_premise(&a, &b, &c, &d) > t {
            continue;
        }
        tested += 1;
        let margin = dot3(&a, &d).abs() - (1.0 - 5.0 * t * t);
        worst = worst.min(margin);
        if margin < 0.0 {
            bad += 1;
        }
    }
    QuadrupleReport {
        tested,
        counterexamples: bad,
        worst_margin: worst,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClauseGridReport {
    pub resolution_deg: f64,
    pub tolerance_rad: f64,
    pub far_cos: f64,
    pub literal_configs: usize,
    pub aux_configs: usize,
    /// Largest angle between a feasible `u` line and the Dummy axis.
    pub max_aux_angle: f64,
    /// Upper bound on `Σ ⟨v_i, D⟩²` over feasible `v` triangles.
    pub triangle_mass_bound: f64,
    /// Lower bound on the same sum for any near-orthonormal triple.
    pub frame_mass_floor: f64,
    /// True when some configuration with all literals far from True could
    /// satisfy every premise.
    pub counterexample_possible: bool,
}

/// Grid search over clause-gadget configurations with `T = e3`, `D = e2`.
///
/// Literal vectors range over a grid of resolution `resolution_deg` in
/// their free angle, tilted by `{-τ, 0, τ}` toward `D`, and are kept when
/// `|⟨ℓ, T⟩| ≤ far_cos`. For each, the `u` vectors orthogonal to `T` and
/// `ℓ` within `τ` are enumerated on a grid twenty times finer. A triangle
/// `v_a, v_b, v_c` that is orthonormal within `τ` has `Σ⟨v_i, D⟩² ≥ 1 - 2 sin τ`,
/// while `v_i ⟂ u_i` within `τ` caps each term by `sin²(θ_u + τ)`; if the
/// caps cannot reach the floor, no configuration exists.
pub fn clause_gadget_grid_search(resolution_deg: f64, tau: f64, far_cos: f64) -> ClauseGridReport {
    let t_axis = [0.0, 0.0, 1.0];
    let d_axis = [0.0, 1.0, 0.0];
    let s = tau.sin();
    let step = resolution_deg.to_radians();
    let fine = step / 20.0;
    let tilts = [-tau, 0.0, tau];
    let coarse_n = (2.0 * PI / step).round() as usize;
    let fine_n = (2.0 * PI / fine).round() as usize;

    let mut literals = Vec::new();
    for i in 0..coarse_n {
        let phi = i as f64 * step;
        for &psi in &tilts {
            let l = [psi.cos() * phi.sin(), psi.sin(), psi.cos() * phi.cos()];
            if dot3(&l, &t_axis).abs() <= far_cos {
                literals.push(l);
            }
        }
    }
    let mut aux = 0usize;
    let mut max_angle: f64 = 0.0;
    for l in &literals {
        for j in 0..fine_n {
            let gamma = j as f64 * fine;
            for &omega in &tilts {
                let u = [
                    omega.cos() * gamma.cos(),
                    omega.cos() * gamma.sin(),
                    omega.sin(),
                ];
                if dot3(&u, l).abs() > s {
                    continue;
                }
                aux += 1;
                let angle = dot3(&u, &d_axis).abs().clamp(0.0, 1.0).acos();
                max_angle = max_angle.max(angle);
            }
        }
    }
    let cap = (max_angle + tau).min(PI / 2.0).sin().powi(2);
    let triangle = 3.0 * cap;
    let floor = 1.0 - 2.0 * s;
    ClauseGridReport {
        resolution_deg,
        tolerance_rad: tau,
        far_cos,
        literal_configs: literals.len(),
        aux_configs: aux,
        max_aux_angle: max_angle,
        triangle_mass_bound: triangle,
        frame_mass_floor: floor,
        counterexample_possible: triangle >= floor,
    }
}
