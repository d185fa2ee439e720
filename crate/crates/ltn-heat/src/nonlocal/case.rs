use crate::geometry::{Mat2, Vec2};

pub type ScalarField = fn(Vec2, f64) -> f64;
pub type VectorField = fn(Vec2, f64) -> Vec2;
pub type TensorField = fn(Vec2, f64) -> Mat2;

/// Manufactured data for one subdomain: an analytic solution with its time
/// derivative, gradient and Hessian, plus the matching load.
///
/// For a nonlocal subdomain `u` is the local limit; Dirichlet data, initial
/// values and Robin data `∂u/∂n + βu` are all derived from it.
#[derive(Clone, Copy)]
pub struct ManufacturedCase {
    pub name: &'static str,
    pub alpha: f64,
    pub u: ScalarField,
    pub u_t: ScalarField,
    pub grad: VectorField,
    pub hess: TensorField,
    pub f: ScalarField,
}

impl std::fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedCase").field("name", &self.name).field("alpha", &self.alpha).finish()
    }
}

impl ManufacturedCase {
    pub fn dirichlet(&self, x: Vec2, t: f64) -> f64 {
        (self.u)(x, t)
    }

    pub fn initial(&self, x: Vec2) -> f64 {
        (self.u)(x, 0.0)
    }

    /// Robin data `∂u/∂n + βu` at a boundary point.
    pub fn robin(&self, x: Vec2, n: Vec2, beta: f64, t: f64) -> f64 {
        (self.grad)(x, t).dot(&n) + beta * (self.u)(x, t)
    }

    /// Tangential derivative `∂/∂p (∂u/∂n + βu)` along a straight side.
    pub fn robin_tangential(&self, x: Vec2, n: Vec2, p: Vec2, beta: f64, t: f64) -> f64 {
        p.dot(&((self.hess)(x, t) * n)) + beta * (self.grad)(x, t).dot(&p)
    }

    /// `u_t − αΔu − f`; zero when the registry entry is consistent.
    pub fn pde_residual(&self, x: Vec2, t: f64) -> f64 {
        (self.u_t)(x, t) - self.alpha * (self.hess)(x, t).trace() - (self.f)(x, t)
    }
}
