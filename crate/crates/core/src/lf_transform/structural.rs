use serde::Serialize;

use super::LFExpansion;

/// Largest admissible odd-power mass of `r^{−k} f_{k,l}(r)`, relative to `‖f‖`.
pub const LEAKAGE_TOL: f64 = 1e-8;
/// Allowed shortfall of the near-zero log-log slope below `k`.
pub const SLOPE_SLACK: f64 = 0.1;
const MAX_LISTED: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `r^{−k} f_{k,l}(r)` is not even in `r`, or `f_{k,l}` has terms below `r^k`.
    OddLeakage,
    /// `f_{k,l}(r)` vanishes slower than `r^k` at the origin.
    Slope,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub k: usize,
    /// One-based.
    pub l: usize,
    pub kind: ViolationKind,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructuralReport {
    pub profiles_checked: usize,
    /// Profiles with no coefficient above the floor; the slope test does not apply.
    pub zero_profiles: usize,
    pub max_odd_leakage: f64,
    /// Minimum over profiles of `slope − k`.
    pub min_slope_excess: f64,
    pub violation_count: usize,
    /// First violations, in `(k, l)` order.
    pub violations: Vec<Violation>,
}

impl StructuralReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

/// Least-squares slope of `ys` against `xs`.
pub(crate) fn ls_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Evenness of `r^{−k} f_{k,l}(r)` and the order of vanishing of `f_{k,l}` at `0`.
///
/// Sampled expansions are judged on their full Taylor data: every coefficient of
/// `f_{k,l}(ζ)` of index `i < k` or `i − k` odd counts as leakage. Exact profiles
/// are even by construction and only get the slope test.
pub fn structural_check(exp: &LFExpansion) -> StructuralReport {
    let mut report = StructuralReport {
        profiles_checked: 0,
        zero_profiles: 0,
        max_odd_leakage: 0.0,
        min_slope_excess: f64::INFINITY,
        violation_count: 0,
        violations: Vec::new(),
    };
    let series = exp.series();
    let radii: Vec<f64> = match series {
        Some(s) => s.radial_nodes.iter().take(3).copied().collect(),
        None => {
            let r = exp.radius();
            vec![0.02 * r, 0.03 * r, 0.04 * r]
        }
    };
    let logr: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let push = |report: &mut StructuralReport, v: Violation| {
        report.violation_count += 1;
        if report.violations.len() < MAX_LISTED {
            report.violations.push(v);
        }
    };
    for row in exp.profiles() {
        for p in row {
            report.profiles_checked += 1;
            let (k, l) = (p.k, p.l);
            if let Some(s) = series {
                let coeffs = &s.scaled[k][l];
                let leak: f64 = coeffs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i < k || (i - k) % 2 == 1)
                    .map(|(_, c)| c.norm_sqr())
                    .sum::<f64>()
                    .sqrt()
                    / s.f_norm.max(f64::MIN_POSITIVE);
                report.max_odd_leakage = report.max_odd_leakage.max(leak);
                if leak >= LEAKAGE_TOL {
                    push(
                        &mut report,
                        Violation {
                            k,
                            l: l + 1,
                            kind: ViolationKind::OddLeakage,
                            value: leak,
                            threshold: LEAKAGE_TOL,
                        },
                    );
                }
            }
            let values: Vec<f64> = radii
                .iter()
                .map(|&r| match series {
                    Some(s) => s.radial_value(k, l, r).norm(),
                    None => p.radial_value(r).norm(),
                })
                .collect();
            let all_zero = match series {
                Some(s) => s.scaled[k][l].iter().all(|c| c.norm() == 0.0),
                None => p.is_zero(),
            };
            if all_zero {
                report.zero_profiles += 1;
                continue;
            }
            let logs: Vec<f64> = values.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
            let (slope, _) = ls_slope(&logr, &logs);
            report.min_slope_excess = report.min_slope_excess.min(slope - k as f64);
            if slope < k as f64 - SLOPE_SLACK {
                push(
                    &mut report,
                    Violation {
                        k,
                        l: l + 1,
                        kind: ViolationKind::Slope,
                        value: slope,
                        threshold: k as f64 - SLOPE_SLACK,
                    },
                );
            }
        }
    }
    report
}
