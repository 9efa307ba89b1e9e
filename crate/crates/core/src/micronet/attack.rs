use rand::Rng;
use serde::{Deserialize, Serialize};

use super::net::SubnetView;
use super::{MicronetError, Tensor};

/// Anything with a loss whose input gradient an attack can follow.
pub trait Differentiable {
    type Target: ?Sized;
    fn loss_and_input_grad(&self, x: &Tensor, y: &Self::Target) -> Result<(f64, Tensor), MicronetError>;
}

impl Differentiable for SubnetView<'_> {
    type Target = [usize];
    fn loss_and_input_grad(&self, x: &Tensor, y: &[usize]) -> Result<(f64, Tensor), MicronetError> {
        let g = self.loss_and_grad(x, y, false)?;
        Ok((g.loss, g.input))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackKind {
    Fgsm,
    Pgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub epsilon: f64,
    pub step_size: f64,
    pub steps: usize,
    pub random_start: bool,
}

impl AttackSpec {
    pub const DEFAULT_EPSILON: f64 = 8.0 / 255.0;
    pub const DEFAULT_STEP: f64 = 2.0 / 255.0;

    pub fn fgsm(epsilon: f64) -> Self {
        AttackSpec { kind: AttackKind::Fgsm, epsilon, step_size: epsilon, steps: 1, random_start: false }
    }

    pub fn pgd(epsilon: f64, step_size: f64, steps: usize) -> Self {
        AttackSpec { kind: AttackKind::Pgd, epsilon, step_size, steps, random_start: true }
    }

    pub fn default_fgsm() -> Self {
        Self::fgsm(Self::DEFAULT_EPSILON)
    }

    pub fn pgd7() -> Self {
        Self::pgd(Self::DEFAULT_EPSILON, Self::DEFAULT_STEP, 7)
    }

    pub fn pgd20() -> Self {
        Self::pgd(Self::DEFAULT_EPSILON, Self::DEFAULT_STEP, 20)
    }

    pub fn validate(&self) -> Result<(), MicronetError> {
        let ok = self.epsilon >= 0.0 && self.step_size >= 0.0 && self.steps >= 1 && self.epsilon.is_finite() && self.step_size.is_finite();
        if ok {
            Ok(())
        } else {
            Err(MicronetError::Config(format!("invalid attack {self:?}")))
        }
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Projects `v` onto `[x - eps, x + eps]` and then onto `[0, 1]`, exactly:
/// the result satisfies `|v - x| <= eps` in floating point.
pub fn project_coord(v: f64, x: f64, eps: f64) -> f64 {
    let mut v = v.clamp(x - eps, x + eps);
    while v - x > eps {
        v = v.next_down();
    }
    while x - v > eps {
        v = v.next_up();
    }
    v.clamp(0.0, 1.0)
}

fn step(x: &Tensor, current: &Tensor, grad: &Tensor, size: f64, eps: f64) -> Tensor {
    let mut out = current.clone();
    for ((o, &g), &x0) in out.data_mut().iter_mut().zip(grad.data()).zip(x.data()) {
        *o = project_coord(*o + size * sign(g), x0, eps);
    }
    out
}

/// Uniform perturbation in the eps-ball, projected onto the box.
pub fn random_start<R: Rng + ?Sized>(x: &Tensor, eps: f64, rng: &mut R) -> Tensor {
    let mut out = x.clone();
    for v in out.data_mut() {
        let u: f64 = rng.random();
        let x0 = *v;
        *v = project_coord(x0 + eps * (2.0 * u - 1.0), x0, eps);
    }
    out
}

/// One signed-gradient step of size eps from the clean input.
pub fn fgsm<M: Differentiable>(model: &M, x: &Tensor, y: &M::Target, spec: &AttackSpec) -> Result<Tensor, MicronetError> {
    let (_, grad) = model.loss_and_input_grad(x, y)?;
    Ok(step(x, x, &grad, spec.epsilon, spec.epsilon))
}

/// Projected gradient ascent with an optional uniform start.
pub fn pgd<M: Differentiable, R: Rng + ?Sized>(
    model: &M,
    x: &Tensor,
    y: &M::Target,
    spec: &AttackSpec,
    rng: &mut R,
) -> Result<Tensor, MicronetError> {
    let mut adv = if spec.random_start { random_start(x, spec.epsilon, rng) } else { x.clone() };
    for _ in 0..spec.steps {
        let (_, grad) = model.loss_and_input_grad(&adv, y)?;
        adv = step(x, &adv, &grad, spec.step_size, spec.epsilon);
    }
    Ok(adv)
}

pub fn attack<M: Differentiable, R: Rng + ?Sized>(
    model: &M,
    x: &Tensor,
    y: &M::Target,
    spec: &AttackSpec,
    rng: &mut R,
) -> Result<Tensor, MicronetError> {
    match spec.kind {
        AttackKind::Fgsm => fgsm(model, x, y, spec),
        AttackKind::Pgd => pgd(model, x, y, spec, rng),
    }
}
