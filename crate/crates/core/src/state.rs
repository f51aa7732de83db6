use crate::error::Result;
use crate::field::SpectralField;
use crate::inversion::invert_pv;
use crate::lattice::Lattice;

/// Potential vorticity of both layers at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerState {
    pub q1: SpectralField,
    pub q2: SpectralField,
    pub t: f64,
}

impl LayerState {
    pub fn new(q1: SpectralField, q2: SpectralField, t: f64) -> Result<Self> {
        q1.same_lattice(&q2)?;
        Ok(LayerState { q1, q2, t })
    }

    pub fn zeros(lattice: Lattice) -> Self {
        LayerState { q1: SpectralField::zeros(lattice), q2: SpectralField::zeros(lattice), t: 0.0 }
    }

    pub fn lattice(&self) -> &Lattice {
        self.q1.lattice()
    }

    pub fn streamfunctions(&self) -> (SpectralField, SpectralField) {
        // Both fields share one lattice by construction.
        invert_pv(&self.q1, &self.q2).expect("layer fields share a lattice")
    }

    pub fn project_odd_y(&self) -> LayerState {
        LayerState { q1: self.q1.project_odd_y(), q2: self.q2.project_odd_y(), t: self.t }
    }

    /// `||even_y(q)|| / ||q||` over both layers.
    pub fn odd_residual(&self) -> f64 {
        let total = self.q1.l2_norm_sq() + self.q2.l2_norm_sq();
        if total == 0.0 {
            return 0.0;
        }
        ((self.q1.even_y_norm_sq() + self.q2.even_y_norm_sq()) / total).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.q1.max_abs().max(self.q2.max_abs())
    }
}
