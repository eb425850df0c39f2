//! Downlink receivers: matched filter (SUD), pilot-resolved ICA, and their
//! per-symbol soft-confidence combination (SUD-ICA).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::codes::GoldCodeSet;
use crate::ica::{separate, IcaConfig, IcaResult};
use crate::math;
use crate::numkit::{dot, principal_basis, Matrix};
use crate::{Error, Result};

/// Pilot correlation below which a user is left unresolved.
pub const MIN_MATCH_SCORE: f64 = 0.5;
pub const MIN_PILOTS: usize = 20;
/// Training symbols per user at the start of each frame.
pub const DEFAULT_PILOTS: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorOutput {
    /// ±1 decisions, users × symbols; `sign(soft_values)` with `sign(0) = +1`.
    pub hard_symbols: Matrix,
    pub soft_values: Matrix,
    pub ica_converged: Option<bool>,
    /// Mean iterations (or sweeps) per separated component.
    pub ica_iterations: Option<f64>,
    /// The ICA stage did not deliver a converged, pilot-matched component
    /// for every user.
    pub failed: bool,
    /// Users whose decisions come from the matched filter.
    pub sud_fallback: Vec<bool>,
}

impl DetectorOutput {
    fn from_soft(soft_values: Matrix) -> Self {
        let users = soft_values.rows();
        Self {
            hard_symbols: hard_decisions(&soft_values),
            soft_values,
            ica_converged: None,
            ica_iterations: None,
            failed: false,
            sud_fallback: vec![false; users],
        }
    }

    pub fn users(&self) -> usize {
        self.hard_symbols.rows()
    }
}

fn hard_decisions(soft: &Matrix) -> Matrix {
    let data = soft
        .as_slice()
        .iter()
        .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
        .collect();
    Matrix::from_raw(soft.rows(), soft.cols(), data)
}

/// Matched filter for one user: `gᵀ r_t` per symbol with `g = code/‖code‖`,
/// the user's unit-norm column, so a lone user's soft value is its symbol.
pub fn sud_detect(received: &Matrix, code: &[i8]) -> Result<DetectorOutput> {
    if code.len() != received.rows() {
        return Err(Error::Dimension(format!(
            "code length {} does not match {} chips",
            code.len(),
            received.rows()
        )));
    }
    let norm = math::sqrt(code.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>());
    let mut soft = vec![0.0; received.cols()];
    for (chip, &c) in code.iter().enumerate() {
        let w = c as f64 / norm;
        for (s, &r) in soft.iter_mut().zip(received.row(chip)) {
            *s += w * r;
        }
    }
    Ok(DetectorOutput::from_soft(Matrix::from_raw(
        1,
        received.cols(),
        soft,
    )))
}

/// Matched filters for users `0..users`, stacked.
pub fn sud_detect_users(
    received: &Matrix,
    codes: &GoldCodeSet,
    users: usize,
) -> Result<DetectorOutput> {
    let mut data = Vec::with_capacity(users * received.cols());
    for k in 0..users {
        let one = sud_detect(received, codes.code(k)?)?;
        data.extend_from_slice(one.soft_values.as_slice());
    }
    Ok(DetectorOutput::from_soft(Matrix::from_raw(
        users,
        received.cols(),
        data,
    )))
}

/// Which independent component carries which user's symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbiguityMap {
    /// Component index per user; `None` when unresolved.
    pub assignment: Vec<Option<usize>>,
    /// Sign that aligns the component with the user's symbols.
    pub signs: Vec<f64>,
    /// `|correlation|` of the assigned component over the pilot window, or
    /// the best remaining score for an unresolved user.
    pub match_scores: Vec<f64>,
}

impl AmbiguityMap {
    pub fn is_resolved(&self, user: usize) -> bool {
        self.assignment[user].is_some()
    }

    pub fn all_resolved(&self) -> bool {
        self.assignment.iter().all(Option::is_some)
    }
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / math::sqrt(saa * sbb)
}

/// Match components to users by their correlation with the known pilot
/// symbols (the first `P` columns).
///
/// Pairs are taken greedily in descending `|correlation|` without reusing a
/// component or a user. A user whose best available score is below
/// [`MIN_MATCH_SCORE`] stays unresolved.
pub fn resolve_ambiguity(ica: &IcaResult, pilots: &Matrix) -> Result<AmbiguityMap> {
    let (users, window) = pilots.shape();
    if window < MIN_PILOTS {
        return Err(Error::Dimension(format!(
            "need at least {MIN_PILOTS} pilot symbols, got {window}"
        )));
    }
    if window > ica.sources.cols() {
        return Err(Error::Dimension(format!(
            "{window} pilots but only {} recovered samples",
            ica.sources.cols()
        )));
    }
    let components = ica.sources.rows();
    let mut scored = Vec::with_capacity(components * users);
    let mut corr = Matrix::zeros(components, users);
    for c in 0..components {
        let ic = &ica.sources.row(c)[..window];
        for u in 0..users {
            let r = correlation(ic, pilots.row(u));
            corr[(c, u)] = r;
            scored.push((math::abs(r), u, c));
        }
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut assignment = vec![None; users];
    let mut signs = vec![1.0; users];
    let mut match_scores = vec![0.0; users];
    let mut taken = vec![false; components];
    for &(score, u, c) in &scored {
        if assignment[u].is_some() || taken[c] {
            continue;
        }
        if score < MIN_MATCH_SCORE {
            // Best remaining score for this user, kept for diagnostics.
            if match_scores[u] == 0.0 {
                match_scores[u] = score;
            }
            continue;
        }
        assignment[u] = Some(c);
        taken[c] = true;
        signs[u] = if corr[(c, u)] < 0.0 { -1.0 } else { 1.0 };
        match_scores[u] = score;
    }
    Ok(AmbiguityMap {
        assignment,
        signs,
        match_scores,
    })
}

/// Separate the received chips, match components to users through the
/// pilots and decide every symbol.
///
/// The mixtures are first restricted to their numerically nonzero principal
/// subspace, so a noise-free frame with fewer users than chips separates
/// `rank` components instead of failing to whiten. Users left unresolved
/// fall back to the matched filter and mark the run as failed, as does any
/// user whose component did not converge.
pub fn ica_detect(
    received: &Matrix,
    codes: &GoldCodeSet,
    cfg: &IcaConfig,
    pilots: &Matrix,
) -> Result<DetectorOutput> {
    let users = pilots.rows();
    if pilots.cols() >= received.cols() {
        return Err(Error::Dimension(format!(
            "{} pilots leave no payload in {} symbols",
            pilots.cols(),
            received.cols()
        )));
    }
    let sud = sud_detect_users(received, codes, users)?;

    let basis = principal_basis(received)?;
    let projected;
    let mixtures = if basis.rows() == received.rows() {
        received
    } else {
        projected = &basis * received;
        &projected
    };

    let result = match separate(mixtures, cfg) {
        Ok(r) => r,
        Err(Error::SeparationFailed { partial }) => {
            let mut out = sud;
            out.failed = true;
            out.sud_fallback = vec![true; users];
            out.ica_converged = Some(false);
            out.ica_iterations = Some(partial.mean_iterations());
            return Ok(out);
        }
        Err(e) => return Err(e),
    };
    let map = resolve_ambiguity(&result, pilots)?;

    let cols = received.cols();
    let mut soft = Vec::with_capacity(users * cols);
    let mut fallback = vec![false; users];
    let mut failed = false;
    for u in 0..users {
        match map.assignment[u] {
            Some(c) => {
                let sign = map.signs[u];
                soft.extend(result.sources.row(c).iter().map(|v| sign * v));
                failed |= !result.converged[c];
            }
            None => {
                soft.extend_from_slice(sud.soft_values.row(u));
                fallback[u] = true;
                failed = true;
            }
        }
    }
    let mut out = DetectorOutput::from_soft(Matrix::from_raw(users, cols, soft));
    out.ica_converged = Some(result.all_converged());
    out.ica_iterations = Some(result.mean_iterations());
    out.failed = failed;
    out.sud_fallback = fallback;
    Ok(out)
}

/// SUD and ICA in parallel, merged by [`combine`].
pub fn sudica_detect(
    received: &Matrix,
    codes: &GoldCodeSet,
    cfg: &IcaConfig,
    pilots: &Matrix,
) -> Result<DetectorOutput> {
    let sud = sud_detect_users(received, codes, pilots.rows())?;
    let ica = ica_detect(received, codes, cfg, pilots)?;
    combine(&sud, &ica)
}

/// Merge matched-filter and ICA decisions symbol by symbol.
///
/// Agreeing decisions stand. On disagreement the decision with the larger
/// normalized confidence `|soft| / mean_t |soft|` (per user, over the frame)
/// wins, ties going to the matched filter. A failed ICA run, or a user the
/// ICA stage left to the matched filter, yields the matched-filter output
/// unchanged.
pub fn combine(sud: &DetectorOutput, ica: &DetectorOutput) -> Result<DetectorOutput> {
    if sud.soft_values.shape() != ica.soft_values.shape() {
        return Err(Error::Dimension(
            "SUD and ICA outputs differ in shape".into(),
        ));
    }
    let mut out = sud.clone();
    out.ica_converged = ica.ica_converged;
    out.ica_iterations = ica.ica_iterations;
    out.failed = ica.failed;
    if ica.failed {
        out.sud_fallback = vec![true; sud.users()];
        return Ok(out);
    }
    out.sud_fallback = ica.sud_fallback.clone();
    for u in 0..sud.users() {
        if ica.sud_fallback[u] {
            continue;
        }
        let s_row = sud.soft_values.row(u);
        let i_row = ica.soft_values.row(u);
        let s_scale = mean_abs(s_row);
        let i_scale = mean_abs(i_row);
        let merged = out.soft_values.row_mut(u);
        for ((m, &s), &i) in merged.iter_mut().zip(s_row).zip(i_row) {
            if (s < 0.0) == (i < 0.0) {
                continue;
            }
            let s_conf = if s_scale > 0.0 {
                math::abs(s) / s_scale
            } else {
                0.0
            };
            let i_conf = if i_scale > 0.0 {
                math::abs(i) / i_scale
            } else {
                0.0
            };
            if i_conf > s_conf {
                *m = i;
            }
        }
    }
    out.hard_symbols = hard_decisions(&out.soft_values);
    Ok(out)
}

fn mean_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| math::abs(*x)).sum::<f64>() / v.len() as f64
}

/// Errors between decisions and transmitted symbols over columns
/// `skip..`, all users.
pub fn symbol_errors(hard: &Matrix, truth: &Matrix, skip: usize) -> Result<usize> {
    if hard.shape() != truth.shape() {
        return Err(Error::Dimension(format!(
            "decisions are {}x{} but symbols are {}x{}",
            hard.rows(),
            hard.cols(),
            truth.rows(),
            truth.cols()
        )));
    }
    Ok((0..hard.rows())
        .map(|u| {
            hard.row(u)[skip..]
                .iter()
                .zip(&truth.row(u)[skip..])
                .filter(|(a, b)| a != b)
                .count()
        })
        .sum())
}

/// Symbol error rate over columns `skip..`.
pub fn symbol_error_rate(hard: &Matrix, truth: &Matrix, skip: usize) -> Result<f64> {
    if skip >= hard.cols() {
        return Err(Error::Dimension(format!(
            "skipping {skip} of {} symbols leaves nothing to score",
            hard.cols()
        )));
    }
    let scored = hard.rows() * (hard.cols() - skip);
    Ok(symbol_errors(hard, truth, skip)? as f64 / scored as f64)
}

/// Correlator output for one user as `b_k + Σ_{j≠k} ρ_kj b_j` with
/// `ρ = GᵀG`, used to check the matched filter algebraically.
pub fn mai_expansion(mixing: &Matrix, symbols: &Matrix, user: usize) -> Vec<f64> {
    let gk = mixing.column(user);
    let rho: Vec<f64> = (0..mixing.cols())
        .map(|j| dot(&gk, &mixing.column(j)))
        .collect();
    (0..symbols.cols())
        .map(|t| (0..symbols.rows()).map(|j| rho[j] * symbols[(j, t)]).sum())
        .collect()
}
