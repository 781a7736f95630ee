//! Per-step audit records and their CSV layout.

use serde::{Deserialize, Serialize};

/// One row of the audit series. Every integral carries the measure `dx h³`
/// and the weight `⟨v⟩^θ` of the configured `θ_audit` unless noted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub step: usize,
    pub t: f64,
    /// `‖f‖²_{2,θ}`.
    pub e_theta: f64,
    /// `Σ_k ‖δ_{h,l_k} f‖²_{2,θ}` over stencil edges inside the box.
    pub dissipation: f64,
    pub linf: f64,
    /// `Σ f dx h³`.
    pub mass: f64,
    /// `∫ |f₊|² ⟨v⟩^θ |v3| h³` summed over both walls (outgoing traces).
    pub flux_plus: f64,
    /// Same for the incoming traces `f₋`.
    pub flux_minus: f64,
    /// Mass removed by the velocity operator (λ and source excluded); zero for
    /// the flux-free `A_h` alone.
    pub trunc_flux: f64,
    /// KFP: `ΔE + Δt(δ₁D + λE/2 + εF₊ - λ⁻¹‖𝗀‖²)`. Landau: `Δt ρ_n` of the
    /// σ-energy inequality. Nonpositive when the audit passes.
    pub energy_residual: f64,
    /// Distance outside the max-principle hull, zero when inside.
    pub maxprin_residual: f64,
    /// `ΔM - Δt(S - λM - W - T)`.
    pub mass_residual: f64,
    /// `‖f‖_∞ - (‖f₀‖_∞ + bound on the source contribution)`.
    pub linf_residual: f64,
    /// `max |f₋(v) - (1 - ε) f₊(R v)|` on both walls.
    pub bc_residual: f64,
    pub cg_iterations: usize,
}

pub const CSV_COLUMNS: [&str; 15] = [
    "step",
    "t",
    "E_theta",
    "dissipation",
    "linf",
    "mass",
    "flux_plus",
    "flux_minus",
    "trunc_flux",
    "energy_residual",
    "maxprin_residual",
    "mass_residual",
    "linf_residual",
    "bc_residual",
    "cg_iterations",
];

impl StepDiagnostics {
    pub fn numeric_columns(&self) -> [f64; 13] {
        [
            self.t,
            self.e_theta,
            self.dissipation,
            self.linf,
            self.mass,
            self.flux_plus,
            self.flux_minus,
            self.trunc_flux,
            self.energy_residual,
            self.maxprin_residual,
            self.mass_residual,
            self.linf_residual,
            self.bc_residual,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.numeric_columns().iter().all(|x| x.is_finite())
    }
}

/// Header plus one line per step; floats use the shortest round-trip form.
pub fn to_csv(rows: &[StepDiagnostics]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.step.to_string());
        for x in r.numeric_columns() {
            out.push(',');
            out.push_str(&format!("{x:e}"));
        }
        out.push(',');
        out.push_str(&r.cg_iterations.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let row = StepDiagnostics {
            step: 3,
            t: 0.25,
            mass: -1.5e-7,
            cg_iterations: 12,
            ..Default::default()
        };
        let csv = to_csv(&[row]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("step,t,E_theta,dissipation,linf,mass,flux_plus,flux_minus,trunc_flux,energy_residual,maxprin_residual"));
        let cells: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(cells.len(), CSV_COLUMNS.len());
        assert_eq!(cells[0], "3");
        assert_eq!(cells[5].parse::<f64>().unwrap(), -1.5e-7);
        assert_eq!(cells[14], "12");
    }
}
