//! Mixture parameters and the reduction from physical units to the
//! dimensionless set used by both diffusion models.
//!
//! Masses are scaled by their arithmetic mean `m0` and the binary
//! diffusivities by the mean `D0` of the distinct off-diagonal entries. With
//! Maxwell-molecule cross sections the binary diffusivity and the L¹ norm of
//! the cross section are tied by
//!
//! ```text
//! D_ij · ‖b_ij‖ = (m_i + m_j) κT / (2π m_i m_j)
//! ```
//!
//! which, for `i = j`, yields the self-diffusivity `D_ii = κT / (π m_i ‖b_ii‖)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::densesolve::Matrix;
use crate::error::{Error, Result};

/// Mixture described in physical units, as measured or tabulated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalMixture {
    pub species_names: Vec<String>,
    /// Molecular masses in atomic mass units.
    pub masses_amu: Vec<f64>,
    /// Binary Maxwell-Stefan diffusivities in cm²/s; the diagonal is ignored.
    pub binary_diffusivities_cm2s: Matrix,
    /// Dimensionless ‖b_ii‖, chosen rather than measured.
    pub intra_cross_section_norms: Vec<f64>,
    /// Second-moment ratios γ_ij = B_ij / ‖b_ij‖.
    pub gamma: Matrix,
    pub kappa: f64,
    pub temperature: f64,
    pub n_ref: f64,
}

impl PhysicalMixture {
    /// H2 / N2 / CO2 as in the Duncan-Toor two-bulb experiment.
    pub fn duncan_toor() -> Self {
        let d = Matrix::from_rows(&[vec![0.0, 0.833, 0.68], vec![0.833, 0.0, 0.168], vec![0.68, 0.168, 0.0]])
            .expect("square");
        Self {
            species_names: vec!["H2".into(), "N2".into(), "CO2".into()],
            masses_amu: vec![2.0, 28.0, 44.0],
            binary_diffusivities_cm2s: d,
            intra_cross_section_norms: vec![1.0; 3],
            gamma: Matrix::from_fn(3, |_, _| 0.1),
            kappa: 5.0 / 3.0,
            temperature: 1.0,
            n_ref: 1.0,
        }
    }

    pub fn species_count(&self) -> usize {
        self.masses_amu.len()
    }

    /// Checks shapes, signs and symmetry.
    pub fn validate(&self) -> Result<()> {
        let s = self.species_count();
        if s < 2 {
            return Err(Error::invalid("masses_amu", format!("need at least 2 species, got {s}")));
        }
        if self.species_names.len() != s {
            return Err(Error::invalid("species_names", format!("expected {s} names")));
        }
        for (i, &m) in self.masses_amu.iter().enumerate() {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::invalid(format!("masses_amu[{i}]"), format!("must be positive, got {m}")));
            }
        }
        let d = &self.binary_diffusivities_cm2s;
        if d.dim() != s {
            return Err(Error::invalid("binary_diffusivities_cm2s", format!("expected {s}x{s} matrix")));
        }
        for i in 0..s {
            for j in 0..s {
                if i == j {
                    continue;
                }
                let v = d[(i, j)];
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::invalid(
                        format!("binary_diffusivities_cm2s[{i}][{j}]"),
                        format!("must be positive, got {v}"),
                    ));
                }
                if v != d[(j, i)] {
                    return Err(Error::invalid(
                        format!("binary_diffusivities_cm2s[{i}][{j}]"),
                        "matrix must be symmetric",
                    ));
                }
            }
        }
        if self.intra_cross_section_norms.len() != s {
            return Err(Error::invalid("intra_cross_section_norms", format!("expected {s} entries")));
        }
        for (i, &b) in self.intra_cross_section_norms.iter().enumerate() {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::invalid(
                    format!("intra_cross_section_norms[{i}]"),
                    format!("must be positive, got {b}"),
                ));
            }
        }
        validate_gamma(&self.gamma, s)?;
        positive("kappa", self.kappa)?;
        positive("temperature", self.temperature)?;
        positive("n_ref", self.n_ref)?;
        Ok(())
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be positive, got {v}")))
    }
}

fn validate_gamma(gamma: &Matrix, s: usize) -> Result<()> {
    if gamma.dim() != s {
        return Err(Error::invalid("gamma", format!("expected {s}x{s} matrix")));
    }
    if !gamma.is_symmetric() {
        return Err(Error::invalid("gamma", "matrix must be symmetric"));
    }
    for i in 0..s {
        for j in 0..s {
            let g = gamma[(i, j)];
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::invalid(format!("gamma[{i}][{j}]"), format!("must lie in [0, 1], got {g}")));
            }
        }
    }
    Ok(())
}

/// Dimensionless parameter closure shared by both models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub species_names: Vec<String>,
    pub masses: Vec<f64>,
    /// Binary diffusivities off the diagonal, self-diffusivities on it.
    pub diffusivities: Matrix,
    pub gamma: Matrix,
    pub kappa: f64,
    pub temperature: f64,
    pub n_ref: f64,
    /// ‖b_ij‖ in L¹, derived from the diffusivities.
    pub cross_section_norms: Matrix,
    /// Replaces every 1/D_ii by zero.
    pub neglect_self_diffusion: bool,
    /// Reference mass in amu.
    pub mass_scale: f64,
    /// Reference diffusivity in cm²/s.
    pub diffusivity_scale: f64,
}

impl MixtureSpec {
    pub fn species_count(&self) -> usize {
        self.masses.len()
    }

    pub fn kappa_t(&self) -> f64 {
        self.kappa * self.temperature
    }

    /// `1/D_ij`, with the diagonal switched off under `neglect_self_diffusion`.
    #[inline]
    pub fn inv_diffusivity(&self, i: usize, j: usize) -> f64 {
        if i == j && self.neglect_self_diffusion {
            0.0
        } else {
            1.0 / self.diffusivities[(i, j)]
        }
    }

    /// Largest entry of the diffusivity matrix, self-diffusivities included.
    pub fn max_diffusivity(&self) -> f64 {
        self.diffusivities.max_abs()
    }

    pub fn with_uniform_gamma(mut self, gamma: f64) -> Result<Self> {
        let s = self.species_count();
        let g = Matrix::from_fn(s, |_, _| gamma);
        validate_gamma(&g, s)?;
        self.gamma = g;
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: Matrix) -> Result<Self> {
        validate_gamma(&gamma, self.species_count())?;
        self.gamma = gamma;
        Ok(self)
    }

    pub fn with_neglect_self_diffusion(mut self, neglect: bool) -> Self {
        self.neglect_self_diffusion = neglect;
        self
    }

    /// Reorders species so that new species `k` is old species `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let s = self.species_count();
        assert_eq!(order.len(), s, "permutation length");
        let perm = |m: &Matrix| Matrix::from_fn(s, |i, j| m[(order[i], order[j])]);
        Self {
            species_names: order.iter().map(|&k| self.species_names[k].clone()).collect(),
            masses: order.iter().map(|&k| self.masses[k]).collect(),
            diffusivities: perm(&self.diffusivities),
            gamma: perm(&self.gamma),
            cross_section_norms: perm(&self.cross_section_norms),
            ..self.clone()
        }
    }

    /// Verifies positivity and the diffusivity/cross-section relation to
    /// relative 1e-12.
    pub fn check_consistency(&self) -> Result<()> {
        let s = self.species_count();
        let kt = self.kappa_t();
        for i in 0..s {
            positive(&format!("masses[{i}]"), self.masses[i])?;
            for j in 0..s {
                let d = self.diffusivities[(i, j)];
                let b = self.cross_section_norms[(i, j)];
                positive(&format!("diffusivities[{i}][{j}]"), d)?;
                positive(&format!("cross_section_norms[{i}][{j}]"), b)?;
                let (mi, mj) = (self.masses[i], self.masses[j]);
                let want = if i == j { kt / (PI * mi) } else { (mi + mj) * kt / (2.0 * PI * mi * mj) };
                if ((d * b - want) / want).abs() > 1e-12 {
                    return Err(Error::invalid(
                        format!("diffusivities[{i}][{j}]"),
                        "inconsistent with cross-section norm",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Cross-section norm implied by a binary diffusivity.
pub fn cross_section_norm(m_i: f64, m_j: f64, d_ij: f64, kappa: f64, temperature: f64) -> Result<f64> {
    positive("m_i", m_i)?;
    positive("m_j", m_j)?;
    positive("D_ij", d_ij)?;
    positive("kappa", kappa)?;
    positive("temperature", temperature)?;
    Ok((m_i + m_j) * kappa * temperature / (2.0 * PI * m_i * m_j * d_ij))
}

/// Self-diffusivity estimated from an assumed intra-species cross-section norm.
pub fn self_diffusivity(m_i: f64, intra_norm: f64, kappa: f64, temperature: f64) -> Result<f64> {
    positive("m_i", m_i)?;
    positive("intra_norm", intra_norm)?;
    positive("kappa", kappa)?;
    positive("temperature", temperature)?;
    Ok(kappa * temperature / (PI * m_i * intra_norm))
}

/// Reduces a physical mixture to dimensionless form.
pub fn nondimensionalize(phys: &PhysicalMixture) -> Result<MixtureSpec> {
    phys.validate()?;
    let s = phys.species_count();

    let mass_scale = phys.masses_amu.iter().sum::<f64>() / s as f64;
    let masses: Vec<f64> = phys.masses_amu.iter().map(|m| m / mass_scale).collect();

    let pairs: Vec<f64> = (0..s)
        .flat_map(|i| (i + 1..s).map(move |j| (i, j)))
        .map(|(i, j)| phys.binary_diffusivities_cm2s[(i, j)])
        .collect();
    let diffusivity_scale = pairs.iter().sum::<f64>() / pairs.len() as f64;

    let (kappa, t) = (phys.kappa, phys.temperature);
    let mut diffusivities = Matrix::zeros(s);
    let mut norms = Matrix::zeros(s);
    for i in 0..s {
        let b_ii = phys.intra_cross_section_norms[i];
        norms[(i, i)] = b_ii;
        diffusivities[(i, i)] = self_diffusivity(masses[i], b_ii, kappa, t)?;
        for j in 0..s {
            if i != j {
                let d = phys.binary_diffusivities_cm2s[(i, j)] / diffusivity_scale;
                diffusivities[(i, j)] = d;
                norms[(i, j)] = cross_section_norm(masses[i], masses[j], d, kappa, t)?;
            }
        }
    }

    let spec = MixtureSpec {
        species_names: phys.species_names.clone(),
        masses,
        diffusivities,
        gamma: phys.gamma.clone(),
        kappa,
        temperature: t,
        n_ref: phys.n_ref,
        cross_section_norms: norms,
        neglect_self_diffusion: false,
        mass_scale,
        diffusivity_scale,
    };
    spec.check_consistency()?;
    Ok(spec)
}
