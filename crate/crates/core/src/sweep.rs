//! Error excess under a perturbed prior.
//!
//! Starting from a pair at a prior where unassisted LOCC is optimal, the prior
//! is shifted `p ↦ p + ε` and two gaps are tracked:
//!
//! * `δP_err`: running the measurement tuned for `ε = 0` instead of the
//!   LOCC-optimal one for the shifted prior;
//! * `δP′_err`: LOCC-optimal versus unconstrained error at the shifted prior.
//!
//! With `S = |ψ⟩⟨ψ| + |φ⟩⟨φ|` and `D^ε = Δ^ε_E + Δ^ε_O` the first gap equals
//! `½(‖D^ε‖₁ − ‖Δ⁰‖₁) + gε`, so the triangle inequality gives
//! `δP_err ≤ k|ε| + gε` with `k = ½‖D^ε − Δ⁰‖₁/|ε|`; likewise
//! `δP′_err ≤ κ|ε|` with `κ = ½‖Δ^ε − D^ε‖₁/|ε|`. Both are reported per unit
//! of `|ε|` and fall back to their `ε → 0` limits at `ε = 0`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::discrim::{helstrom_error, locc_error, DeltaOperator};
use crate::error::{Error, Result};
use crate::fock::{make_state, sector_projectors, FockVector, ModePartition, SectorProjectors, Subspace};
use crate::linalg::{c64, inner, outer, trace_norm, CMatrix};
use crate::protocol::{build_optimal_locc_protocol, Decision};
use crate::DEFAULT_TOL;

/// Tolerance of the bound and sign checks on a grid.
pub const GRID_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationPoint {
    pub xi: f64,
    pub epsilon: f64,
    pub p0: f64,
    pub delta_perr: f64,
    pub delta_perr_prime: f64,
    pub k: f64,
    pub g: f64,
    pub kappa: f64,
}

impl PerturbationPoint {
    pub fn bound_slack(&self) -> f64 {
        self.k * self.epsilon.abs() + self.g * self.epsilon - self.delta_perr
    }

    pub fn prime_bound_slack(&self) -> f64 {
        self.kappa * self.epsilon.abs() - self.delta_perr_prime
    }

    pub fn satisfies_invariants(&self, tol: f64) -> bool {
        self.delta_perr >= -tol
            && self.delta_perr_prime >= -tol
            && self.bound_slack() >= -tol
            && self.prime_bound_slack() >= -tol
    }
}

/// Upper end (exclusive) of the family parameter.
pub fn xi_max() -> f64 {
    1.0 - std::f64::consts::FRAC_1_SQRT_2
}

/// `ψ = (|00⟩ + |11⟩)/√2`, `φ = (1/√2 + ξ)|00⟩ + (γ/√2)|11⟩` on one mode per
/// party, with the prior `p0(ξ)` at which the pair is LOCC-optimal.
pub fn appendix_states(xi: f64) -> Result<(FockVector, FockVector, f64)> {
    if !(0.0..xi_max()).contains(&xi) {
        return Err(Error::InvalidArgument(format!("xi = {xi} outside [0, 1 - 1/sqrt 2)")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let s2 = std::f64::consts::SQRT_2;
    let gamma = (1.0 - 2.0 * s2 * xi - 2.0 * xi * xi).sqrt();
    let p = ModePartition::new(1, 1)?;
    let psi = make_state(p, &[("00", c64(h, 0.0)), ("11", c64(h, 0.0))], false)?;
    let phi = make_state(p, &[("00", c64(h + xi, 0.0)), ("11", c64(gamma * h, 0.0))], false)?;
    let a = gamma + s2 * gamma * xi;
    Ok((psi, phi, a / (1.0 + a)))
}

/// `Δ^ε = (p0 + ε)|ψ⟩⟨ψ| − (q0 − ε)|φ⟩⟨φ|`. The shifted prior may touch 0 or 1.
pub fn perturbed_delta(psi: &FockVector, phi: &FockVector, p0: f64, epsilon: f64) -> Result<DeltaOperator> {
    let p = p0 + epsilon;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidPrior(p));
    }
    DeltaOperator::from_weights(psi, phi, p)
}

/// Two-outcome measurement `P⁰ = {Π_ψ, Π_φ}` that is LOCC-optimal at `ε = 0`.
#[derive(Debug, Clone)]
pub struct ReferencePovm {
    pub pi_psi: CMatrix,
    pub pi_phi: CMatrix,
}

impl ReferencePovm {
    pub fn at(psi: &FockVector, phi: &FockVector, p0: f64, projectors: &SectorProjectors) -> Result<Self> {
        let d0 = DeltaOperator::from_weights(psi, phi, p0)?;
        let proto = build_optimal_locc_protocol(&d0, projectors, DEFAULT_TOL)?;
        Ok(ReferencePovm { pi_psi: proto.composed(Decision::Psi), pi_phi: proto.composed(Decision::Phi) })
    }

    /// `Tr[p|ψ⟩⟨ψ|Π_φ + q|φ⟩⟨φ|Π_ψ]` for the weights carried by `d`.
    pub fn error(&self, d: &DeltaOperator) -> f64 {
        let (u, v) = (d.psi(), d.phi());
        d.prior_p() * inner(u, &(&self.pi_phi * u)).re + d.prior_q() * inner(v, &(&self.pi_psi * v)).re
    }
}

/// Everything needed to evaluate one family member along `ε`.
#[derive(Debug, Clone)]
pub struct PerturbationContext {
    pub psi: FockVector,
    pub phi: FockVector,
    pub p0: f64,
    pub projectors: SectorProjectors,
    pub povm: ReferencePovm,
    base: DeltaOperator,
    base_povm_error: f64,
    base_locc_error: f64,
}

impl PerturbationContext {
    pub fn new(psi: FockVector, phi: FockVector, p0: f64) -> Result<Self> {
        let projectors = sector_projectors(psi.partition());
        let povm = ReferencePovm::at(&psi, &phi, p0, &projectors)?;
        let base = DeltaOperator::from_weights(&psi, &phi, p0)?;
        let base_povm_error = povm.error(&base);
        let base_locc_error = locc_error(&base, &projectors)?;
        if (base_povm_error - base_locc_error).abs() > GRID_TOL {
            return Err(Error::NonConvergence(format!(
                "reference measurement misses the LOCC optimum by {:e}",
                base_povm_error - base_locc_error
            )));
        }
        Ok(PerturbationContext { psi, phi, p0, projectors, povm, base, base_povm_error, base_locc_error })
    }

    pub fn for_xi(xi: f64) -> Result<Self> {
        let (psi, phi, p0) = appendix_states(xi)?;
        Self::new(psi, phi, p0)
    }

    pub fn delta(&self, epsilon: f64) -> Result<DeltaOperator> {
        perturbed_delta(&self.psi, &self.phi, self.p0, epsilon)
    }

    /// `δP_err(ε)`. The `ε = 0` gap, checked to vanish on construction, is
    /// dropped so that both error changes are measured from the same base.
    pub fn delta_perr(&self, epsilon: f64) -> Result<f64> {
        let d = self.delta(epsilon)?;
        let povm_change = self.povm.error(&d) - self.base_povm_error;
        let locc_change = locc_error(&d, &self.projectors)? - self.base_locc_error;
        Ok(povm_change - locc_change)
    }

    /// `δP′_err(ε)`
    pub fn delta_perr_prime(&self, epsilon: f64) -> Result<f64> {
        let d = self.delta(epsilon)?;
        Ok(locc_error(&d, &self.projectors)? - helstrom_error(&d))
    }

    fn sector_part(&self, m: &CMatrix) -> CMatrix {
        self.projectors.compress(m, Subspace::E) + self.projectors.compress(m, Subspace::O)
    }

    pub fn bound_constants(&self, epsilon: f64) -> Result<BoundConstants> {
        let (u, v) = (self.psi.amplitudes(), self.phi.amplitudes());
        let s = outer(u, u) + outer(v, v);
        let g = 0.5 * (&s * (&self.povm.pi_phi - &self.povm.pi_psi)).trace().re;
        let (k, kappa) = if epsilon == 0.0 {
            let s_sec = self.sector_part(&s);
            (0.5 * trace_norm(&s_sec), 0.5 * trace_norm(&(&s - &s_sec)))
        } else {
            let d = self.delta(epsilon)?;
            let d_sec = self.sector_part(&d.matrix);
            let e = epsilon.abs();
            (0.5 * trace_norm(&(&d_sec - &self.base.matrix)) / e, 0.5 * trace_norm(&(&d.matrix - &d_sec)) / e)
        };
        Ok(BoundConstants { k, g, kappa })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConstants {
    pub k: f64,
    pub g: f64,
    pub kappa: f64,
}

pub fn delta_perr(psi: &FockVector, phi: &FockVector, p0: f64, epsilon: f64) -> Result<f64> {
    PerturbationContext::new(psi.clone(), phi.clone(), p0)?.delta_perr(epsilon)
}

pub fn delta_perr_prime(psi: &FockVector, phi: &FockVector, p0: f64, epsilon: f64) -> Result<f64> {
    PerturbationContext::new(psi.clone(), phi.clone(), p0)?.delta_perr_prime(epsilon)
}

pub fn bound_constants(psi: &FockVector, phi: &FockVector, p0: f64, epsilon: f64) -> Result<BoundConstants> {
    PerturbationContext::new(psi.clone(), phi.clone(), p0)?.bound_constants(epsilon)
}

/// `n` evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        // Endpoints are exact, and so is the midpoint of a symmetric range.
        _ => (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                a * (1.0 - t) + b * t
            })
            .collect(),
    }
}

/// Parse `a:b:n` into `linspace(a, b, n)`.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("range {text:?} is not of the form a:b:n"));
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, n] = parts.as_slice() else { return Err(bad()) };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    Ok(linspace(a, b, n))
}

/// Largest secant slope of `δP_err` on each side of `ε = 0`; values below
/// [`GRID_TOL`] count as zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeRow {
    pub xi: f64,
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridCheck {
    /// Every row has an `ε = 0` point and `δP_err` is exactly zero there.
    pub zero_line_exact: bool,
    pub min_delta_perr: f64,
    pub min_delta_perr_prime: f64,
    pub min_bound_slack: f64,
    pub min_prime_bound_slack: f64,
    /// Same bound with `k` replaced by its supremum over the ε range.
    pub min_sup_bound_slack: f64,
    pub slopes: Vec<SlopeRow>,
    pub slopes_increase: bool,
}

impl GridCheck {
    pub fn passes(&self) -> bool {
        self.zero_line_exact
            && self.min_delta_perr >= -GRID_TOL
            && self.min_delta_perr_prime >= -GRID_TOL
            && self.min_bound_slack >= -GRID_TOL
            && self.min_prime_bound_slack >= -GRID_TOL
            && self.min_sup_bound_slack >= -GRID_TOL
            && self.slopes_increase
    }
}

/// Points ordered by `(ξ index, ε index)`.
#[derive(Debug, Clone, Serialize)]
pub struct Fig1Grid {
    pub xis: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub points: Vec<PerturbationPoint>,
}

pub fn fig1_grid(xis: &[f64], epsilons: &[f64]) -> Result<Fig1Grid> {
    if xis.is_empty() || epsilons.is_empty() {
        return Err(Error::InvalidArgument("empty xi or epsilon range".into()));
    }
    let contexts: Vec<PerturbationContext> =
        xis.par_iter().map(|&xi| PerturbationContext::for_xi(xi)).collect::<Result<_>>()?;
    let m = epsilons.len();
    let points = (0..xis.len() * m)
        .into_par_iter()
        .map(|n| {
            let (ctx, xi, eps) = (&contexts[n / m], xis[n / m], epsilons[n % m]);
            let c = ctx.bound_constants(eps)?;
            Ok(PerturbationPoint {
                xi,
                epsilon: eps,
                p0: ctx.p0,
                delta_perr: ctx.delta_perr(eps)?,
                delta_perr_prime: ctx.delta_perr_prime(eps)?,
                k: c.k,
                g: c.g,
                kappa: c.kappa,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Fig1Grid { xis: xis.to_vec(), epsilons: epsilons.to_vec(), points })
}

/// Slopes ordered by decreasing `ξ` never drop, and the smallest `ξ` ends
/// strictly above the largest on both sides.
pub fn slopes_increase(by_decreasing_xi: &[SlopeRow]) -> bool {
    let steady = by_decreasing_xi
        .windows(2)
        .all(|w| w[1].left >= w[0].left - GRID_TOL && w[1].right >= w[0].right - GRID_TOL);
    match (by_decreasing_xi.first(), by_decreasing_xi.last()) {
        (Some(a), Some(b)) if by_decreasing_xi.len() > 1 => steady && b.left > a.left && b.right > a.right,
        _ => steady,
    }
}

/// Twelve significant digits.
fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

impl Fig1Grid {
    pub fn row(&self, xi_index: usize) -> &[PerturbationPoint] {
        let m = self.epsilons.len();
        &self.points[xi_index * m..(xi_index + 1) * m]
    }

    pub fn slopes(&self) -> Vec<SlopeRow> {
        (0..self.xis.len())
            .map(|i| {
                let side = |sign: f64| {
                    self.row(i)
                        .iter()
                        .filter(|pt| pt.epsilon * sign > 0.0 && pt.delta_perr > GRID_TOL)
                        .map(|pt| pt.delta_perr / pt.epsilon.abs())
                        .fold(0.0, f64::max)
                };
                SlopeRow { xi: self.xis[i], left: side(-1.0), right: side(1.0) }
            })
            .collect()
    }

    pub fn check(&self) -> GridCheck {
        let fold_min = |f: &dyn Fn(&PerturbationPoint) -> f64| self.points.iter().map(f).fold(f64::INFINITY, f64::min);
        let zero_line_exact = (0..self.xis.len()).all(|i| {
            let row = self.row(i);
            row.iter().any(|pt| pt.epsilon == 0.0) && row.iter().filter(|pt| pt.epsilon == 0.0).all(|pt| pt.delta_perr == 0.0)
        });
        let m = self.epsilons.len();
        let min_sup_bound_slack = (0..self.xis.len())
            .flat_map(|i| {
                let row = &self.points[i * m..(i + 1) * m];
                let k_sup = row.iter().map(|pt| pt.k).fold(0.0, f64::max);
                row.iter().map(move |pt| k_sup * pt.epsilon.abs() + pt.g * pt.epsilon - pt.delta_perr)
            })
            .fold(f64::INFINITY, f64::min);

        let mut slopes = self.slopes();
        slopes.sort_by(|a, b| b.xi.total_cmp(&a.xi));
        let slopes_increase = slopes_increase(&slopes);
        GridCheck {
            zero_line_exact,
            min_delta_perr: fold_min(&|pt| pt.delta_perr),
            min_delta_perr_prime: fold_min(&|pt| pt.delta_perr_prime),
            min_bound_slack: fold_min(&|pt| pt.bound_slack()),
            min_prime_bound_slack: fold_min(&|pt| pt.prime_bound_slack()),
            min_sup_bound_slack,
            slopes,
            slopes_increase,
        }
    }

    pub const CSV_HEADER: &'static str = "xi,epsilon,p0,delta_perr,delta_perr_prime,k,g,kappa";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for pt in &self.points {
            let fields = [pt.xi, pt.epsilon, pt.p0, pt.delta_perr, pt.delta_perr_prime, pt.k, pt.g, pt.kappa];
            let line: Vec<String> = fields.iter().map(|&x| sig12(x)).collect();
            writeln!(out, "{}", line.join(",")).expect("write to String");
        }
        out
    }

    /// Gnuplot script drawing one `δP_err(ε)` curve per `ξ` from the CSV.
    pub fn gnuplot_script(&self, csv_path: &str) -> String {
        let m = self.epsilons.len();
        let mut s = String::new();
        writeln!(s, "# Error excess of the ε = 0 measurement, one curve per xi").unwrap();
        writeln!(s, "# usage: gnuplot -p this_script").unwrap();
        writeln!(s, "set datafile separator ','").unwrap();
        writeln!(s, "set key autotitle columnhead").unwrap();
        writeln!(s, "set xlabel 'epsilon'").unwrap();
        writeln!(s, "set ylabel 'xi'").unwrap();
        writeln!(s, "set zlabel 'delta_perr' rotate parallel").unwrap();
        writeln!(s, "set ticslevel 0").unwrap();
        writeln!(s, "set grid").unwrap();
        writeln!(s, "csv = '{}'", csv_path.replace('\'', "''")).unwrap();
        writeln!(s, "n_eps = {m}").unwrap();
        writeln!(s, "n_xi = {}", self.xis.len()).unwrap();
        writeln!(
            s,
            "splot for [i=0:n_xi-1] csv every ::(i*n_eps)::((i+1)*n_eps-1) using 2:1:4 with lines lw 2 notitle"
        )
        .unwrap();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrim::is_locc_optimal;
    use crate::linalg::max_abs;

    #[test]
    fn family_at_zero_is_the_same_state() {
        let (psi, phi, p0) = appendix_states(0.0).unwrap();
        assert!((psi.amplitudes() - phi.amplitudes()).norm() < 1e-15);
        assert!((p0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn family_is_normalized_and_optimal() {
        let (psi, phi, p0) = appendix_states(0.1).unwrap();
        assert!((phi.norm() - 1.0).abs() < 1e-12);
        let d = DeltaOperator::from_weights(&psi, &phi, p0).unwrap();
        assert!(is_locc_optimal(&d, &sector_projectors(psi.partition()), 1e-10));
        assert!(appendix_states(0.3).is_err());
        assert!(appendix_states(-0.01).is_err());
    }

    #[test]
    fn perturbed_delta_identity() {
        let (psi, phi, p0) = appendix_states(0.07).unwrap();
        let d0 = perturbed_delta(&psi, &phi, p0, 0.0).unwrap();
        assert_eq!(d0.matrix, DeltaOperator::from_weights(&psi, &phi, p0).unwrap().matrix);
        let eps = 0.0321;
        let d = perturbed_delta(&psi, &phi, p0, eps).unwrap();
        let (u, v) = (psi.amplitudes(), phi.amplitudes());
        let s = outer(u, u) + outer(v, v);
        assert!(max_abs(&(&d.matrix - &d0.matrix - s.scale(eps))) < 1e-12);

        let edge = perturbed_delta(&psi, &phi, p0, 1.0 - p0).unwrap();
        assert!(max_abs(&(&edge.matrix - outer(u, u))) < 1e-12);
        assert!(matches!(perturbed_delta(&psi, &phi, p0, 1.0), Err(Error::InvalidPrior(_))));
    }

    #[test]
    fn point_bounds_at_xi_one_tenth() {
        let ctx = PerturbationContext::for_xi(0.1).unwrap();
        assert_eq!(ctx.delta_perr(0.0).unwrap(), 0.0);
        let c0 = ctx.bound_constants(0.0).unwrap();
        assert!(c0.k.is_finite() && c0.kappa.is_finite());
        for eps in [0.05, -0.05, 0.09, -0.09] {
            let dp = ctx.delta_perr(eps).unwrap();
            let c = ctx.bound_constants(eps).unwrap();
            assert!(dp >= -1e-10);
            assert!(dp <= c.k * eps.abs() + c.g * eps + 1e-10);
            let dpp = ctx.delta_perr_prime(eps).unwrap();
            assert!(dpp >= -1e-10 && dpp <= c.kappa * eps.abs() + 1e-10);
        }
        // Beyond the corner the two sides differ.
        assert!((ctx.delta_perr(0.09).unwrap() - ctx.delta_perr(-0.09).unwrap()).abs() > 1e-6);
    }

    #[test]
    fn k_at_zero_reduces_to_sector_defect() {
        // With [Δ⁰, P_E] = 0 the sector-diagonal part of Δ⁰ is Δ⁰ itself.
        let ctx = PerturbationContext::for_xi(0.1).unwrap();
        let d0 = ctx.delta(0.0).unwrap();
        let defect = 0.5 * trace_norm(&(ctx.sector_part(&d0.matrix) - &d0.matrix));
        assert!(defect < 1e-10);
    }

    #[test]
    fn small_grid_passes() {
        let grid = fig1_grid(&[0.2, 0.1, 0.05, 0.02], &linspace(-0.1, 0.1, 21)).unwrap();
        let check = grid.check();
        assert!(check.passes(), "{check:?}");
        let csv = grid.to_csv();
        assert!(csv.starts_with(Fig1Grid::CSV_HEADER));
        assert_eq!(csv.lines().count(), 1 + 4 * 21);
        assert!(grid.gnuplot_script("grid.csv").contains("splot"));
    }

    #[test]
    fn ranges() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        let eps = linspace(-0.1, 0.1, 41);
        assert_eq!((eps[0], eps[20], eps[40]), (-0.1, 0.0, 0.1));
        assert_eq!(parse_range("-0.1:0.1:5").unwrap().len(), 5);
        assert!(parse_range("1:2").is_err());
        assert!(parse_range("1:2:0").is_err());
        assert!(fig1_grid(&[], &[0.0]).is_err());
    }
}
