//! Equations of motion `ẋ = f(x, u)` for the benchmark systems.

use super::constants::*;

/// Kinematic point. State `(x, y)`, control `(v, θ)`.
pub fn point(x: &[f64], u: &[f64], dx: &mut [f64]) {
    let _ = x;
    let (v, heading) = (u[0], u[1]);
    dx[0] = v * heading.cos();
    dx[1] = v * heading.sin();
}

/// Free-flying body. State `(x, y, z, α, β, γ)`, control is the state rate.
pub fn rigid_body(_x: &[f64], u: &[f64], dx: &mut [f64]) {
    dx[..6].copy_from_slice(&u[..6]);
}

/// Simple pendulum without damping. State `(θ, θ̇)` with θ = 0 horizontal,
/// control `(τ)`.
pub fn pendulum(x: &[f64], u: &[f64], dx: &mut [f64]) {
    use pendulum::{LENGTH, MASS};
    dx[0] = x[1];
    dx[1] = (u[0] - MASS * GRAVITY * LENGTH * x[0].cos() * 0.5) * 3.0 / (MASS * LENGTH * LENGTH);
}

/// Cart-pole. State `(x, θ, ẋ, θ̇)` with θ = 0 hanging down, control `(f)`.
pub fn cartpole(x: &[f64], u: &[f64], dx: &mut [f64]) {
    use cartpole::{CART_MASS as M, POLE_INERTIA as I, POLE_LENGTH as L, POLE_MASS as m};
    let (theta, v, w) = (x[1], x[2], x[3]);
    let (s, c) = theta.sin_cos();
    let drive = u[0] + m * L * w * w * s;
    let inv = 1.0 / ((M + m) * (I + m * L * L) - m * m * L * L * c * c);
    dx[0] = v;
    dx[1] = w;
    dx[2] = ((I + m * L * L) * drive + m * m * L * L * c * s * GRAVITY) * inv;
    dx[3] = (-m * L * c * drive - (M + m) * m * GRAVITY * L * s) * inv;
}

/// Two-link acrobot with a passive first joint. State `(θ1, θ2, θ̇1, θ̇2)`
/// with θ1 = 0 hanging down, control `(τ)` on the second joint.
pub fn acrobot(x: &[f64], u: &[f64], dx: &mut [f64]) {
    use acrobot::{
        DAMPING, INERTIA_1 as I1, INERTIA_2 as I2, LINK_COM as lc, LINK_LENGTH as l,
        LINK_MASS as m,
    };
    let theta1 = x[0] - std::f64::consts::FRAC_PI_2;
    let theta2 = x[1];
    let (w1, w2) = (x[2], x[3]);
    let (s2, c2) = theta2.sin_cos();

    let d11 = m * lc * lc + m * (l * l + lc * lc + 2.0 * l * lc * c2) + I1 + I2;
    let d22 = m * lc * lc + I2;
    let d12 = m * (lc * lc + l * lc * c2) + I2;

    let h1 = -m * l * lc * w2 * w2 * s2 - 2.0 * m * l * lc * w1 * w2 * s2;
    let h2 = m * l * lc * w1 * w1 * s2;
    let phi2 = m * lc * GRAVITY * (theta1 + theta2).cos();
    let phi1 = (m * lc + m * l) * GRAVITY * theta1.cos() + phi2;

    let tau1 = -DAMPING * w1;
    let tau2 = u[0] - DAMPING * w2;
    let det = d11 * d22 - d12 * d12;
    dx[0] = w1;
    dx[1] = w2;
    dx[2] = (d22 * (tau1 - h1 - phi1) - d12 * (tau2 - h2 - phi2)) / det;
    dx[3] = (d11 * (tau2 - h2 - phi2) - d12 * (tau1 - h1 - phi1)) / det;
}

/// Quadrotor with Euler-angle attitude. State
/// `(x, y, z, φ, θ, ψ, ẋ, ẏ, ż, φ̇, θ̇, ψ̇)`, control the four rotor thrusts.
pub fn quadrotor(x: &[f64], u: &[f64], dx: &mut [f64]) {
    use quadrotor::{ARM, IXX, IYY, IZZ, MASS, YAW_MOMENT};
    let (phi, theta, psi) = (x[3], x[4], x[5]);
    let (p, q, r) = (x[9], x[10], x[11]);
    let thrust = u[0] + u[1] + u[2] + u[3];
    let (sphi, cphi) = phi.sin_cos();
    let (sth, cth) = theta.sin_cos();
    let (spsi, cpsi) = psi.sin_cos();

    dx[..3].copy_from_slice(&x[6..9]);
    dx[3] = p;
    dx[4] = q;
    dx[5] = r;
    dx[6] = (cphi * sth * cpsi + sphi * spsi) * thrust / MASS;
    dx[7] = (cphi * sth * spsi - sphi * cpsi) * thrust / MASS;
    dx[8] = cphi * cth * thrust / MASS - GRAVITY;
    dx[9] = (ARM * (u[3] - u[1]) + (IYY - IZZ) * q * r) / IXX;
    dx[10] = (ARM * (u[2] - u[0]) + (IZZ - IXX) * p * r) / IYY;
    dx[11] = (YAW_MOMENT * (u[0] - u[1] + u[2] - u[3]) + (IXX - IYY) * p * q) / IZZ;
}

/// Fixed-wing aircraft as a point mass with lagged actuation. State
/// `(x, y, z, v, α, β, θ, ω, τ)`: speed, flight-path angle, bank angle,
/// heading, bank rate and thrust. Control `(τ_des, α_des, β_des)`.
pub fn airplane(x: &[f64], u: &[f64], dx: &mut [f64]) {
    use airplane::*;
    let (v, gamma, bank, heading, bank_rate, thrust) = (x[3], x[4], x[5], x[6], x[7], x[8]);
    let (sg, cg) = gamma.sin_cos();
    let (sh, ch) = heading.sin_cos();
    dx[0] = v * cg * ch;
    dx[1] = v * cg * sh;
    dx[2] = v * sg;
    dx[3] = thrust - DRAG * v * v - GRAVITY * sg;
    dx[4] = PITCH_GAIN * (u[1] - gamma);
    dx[5] = bank_rate;
    dx[6] = GRAVITY * bank.tan() / v.max(1e-3);
    dx[7] = BANK_STIFFNESS * (u[2] - bank) - BANK_DAMPING * bank_rate;
    dx[8] = THRUST_GAIN * (u[0] - thrust);
}
