//! Quadratic-form formulation of the sum-rate maximization problem.
//!
//! With `g = vec(G)`, relay transmit power, received signal powers and
//! effective noise powers are all quadratic forms in `g`. Absorbing the
//! terminal noise constants into the forms via the (always active) relay
//! power constraint makes the objective the scale-invariant product of
//! two Rayleigh quotients
//!
//! ```text
//!   (gᴴ·A₁·g / gᴴ·B₁·g) · (gᴴ·A₂·g / gᴴ·B₂·g)
//! ```
//!
//! whose logarithm is exactly twice the sum-rate in bits once `g` is
//! rescaled onto the power constraint surface.

use num_complex::Complex64;

use crate::channel::{relay_noise_covariance, relay_rx_covariance_with, ChannelSet, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::{
    gen_eig_extremes, kron, unvectorize, vectorize, ComplexVector, HermitianMatrix,
};

/// The nine Hermitian matrices of the homogenized problem plus the
/// powers they were built with.
///
/// `n` is `m_r²` for the full problem and `m_r` after
/// [`restrict_diagonal`].
#[derive(Debug, Clone)]
pub struct ProblemMatrices {
    pub n: usize,
    pub q: HermitianMatrix,
    pub k21: HermitianMatrix,
    pub k12: HermitianMatrix,
    pub j1: HermitianMatrix,
    pub j2: HermitianMatrix,
    pub b1: HermitianMatrix,
    pub b2: HermitianMatrix,
    pub a1: HermitianMatrix,
    pub a2: HermitianMatrix,
    pub p_tr: f64,
    pub p_n1: f64,
    pub p_n2: f64,
    pub p_t1: f64,
    pub p_t2: f64,
}

/// Builds the problem matrices for white relay noise.
pub fn build_problem(config: &SystemConfig, ch: &ChannelSet) -> ProblemMatrices {
    build_problem_with(config, ch, &relay_noise_covariance(config))
}

/// Builds the problem matrices with an explicit relay noise covariance.
pub fn build_problem_with(
    config: &SystemConfig,
    ch: &ChannelSet,
    r_nr: &HermitianMatrix,
) -> ProblemMatrices {
    let m_r = config.m_r;
    assert_eq!(ch.h1f.len(), m_r, "channel/config antenna count mismatch");
    assert_eq!(r_nr.dim(), m_r, "noise covariance dimension mismatch");

    let r_r = relay_rx_covariance_with(config, ch, r_nr);
    let eye = HermitianMatrix::identity(m_r);
    let q = HermitianMatrix::symmetrized(kron(&r_r.as_matrix().transpose(), eye.as_matrix()));

    let outer = |v: &ComplexVector| HermitianMatrix::outer(v);
    let k21 = HermitianMatrix::symmetrized(
        kron(outer(&ch.h2f).as_matrix(), outer(&ch.h1b).as_matrix()).transpose(),
    );
    let k12 = HermitianMatrix::symmetrized(
        kron(outer(&ch.h1f).as_matrix(), outer(&ch.h2b).as_matrix()).transpose(),
    );
    let j1 = HermitianMatrix::symmetrized(
        kron(r_nr.as_matrix(), outer(&ch.h1b).as_matrix()).transpose(),
    );
    let j2 = HermitianMatrix::symmetrized(
        kron(r_nr.as_matrix(), outer(&ch.h2b).as_matrix()).transpose(),
    );

    let b1 = j1.add_scaled(&q, config.p_n1 / config.p_tr);
    let b2 = j2.add_scaled(&q, config.p_n2 / config.p_tr);
    let a1 = b1.add_scaled(&k21, config.p_t2);
    let a2 = b2.add_scaled(&k12, config.p_t1);

    ProblemMatrices {
        n: m_r * m_r,
        q,
        k21,
        k12,
        j1,
        j2,
        b1,
        b2,
        a1,
        a2,
        p_tr: config.p_tr,
        p_n1: config.p_n1,
        p_n2: config.p_n2,
        p_t1: config.p_t1,
        p_t2: config.p_t2,
    }
}

/// Product-of-Rayleigh-quotients objective; invariant under rescaling
/// of `g` and at least 1 on realizable problems.
pub fn objective(g: &ComplexVector, pm: &ProblemMatrices) -> Result<f64> {
    if g.norm() == 0.0 {
        return Err(Error::InvalidInput("objective of the zero vector".into()));
    }
    let r1 = pm.a1.quadratic_form(g) / pm.b1.quadratic_form(g);
    let r2 = pm.a2.quadratic_form(g) / pm.b2.quadratic_form(g);
    Ok(r1 * r2)
}

/// Physical sum-rate `r₁ + r₂` in bits per channel use, computed from
/// the raw (non-homogenized) noise powers. Assumes white relay noise.
pub fn sum_rate(g: &ComplexVector, config: &SystemConfig, ch: &ChannelSet) -> f64 {
    sum_rate_with(g, config, ch, &relay_noise_covariance(config))
}

pub fn sum_rate_with(
    g: &ComplexVector,
    config: &SystemConfig,
    ch: &ChannelSet,
    r_nr: &HermitianMatrix,
) -> f64 {
    let pm = build_problem_with(config, ch, r_nr);
    let p_r1 = pm.k21.quadratic_form(g) * config.p_t2;
    let p_r2 = pm.k12.quadratic_form(g) * config.p_t1;
    let pn1 = pm.j1.quadratic_form(g) + config.p_n1;
    let pn2 = pm.j2.quadratic_form(g) + config.p_n2;
    0.5 * ((1.0 + p_r1 / pn1).log2() + (1.0 + p_r2 / pn2).log2())
}

/// Rescales `g` onto the relay power constraint surface
/// `gᴴ·Q·g = P_{T,R}`.
pub fn scale_to_power(g: &ComplexVector, pm: &ProblemMatrices) -> Result<ComplexVector> {
    if g.norm() == 0.0 {
        return Err(Error::InvalidInput("cannot power-scale the zero vector".into()));
    }
    let c = (pm.p_tr / pm.q.quadratic_form(g)).sqrt();
    Ok(g * Complex64::new(c, 0.0))
}

/// Feasible ranges of the auxiliary variables: `τ` over the pencil
/// `(A₂, B₁)` and `β` over `(B₂, B₁)`.
#[derive(Debug, Clone, Copy)]
pub struct TauBetaIntervals {
    pub tau_min: f64,
    pub tau_max: f64,
    pub beta_min: f64,
    pub beta_max_feas: f64,
}

pub fn tau_beta_intervals(pm: &ProblemMatrices) -> Result<TauBetaIntervals> {
    let tau = gen_eig_extremes(&pm.a2, &pm.b1)?;
    let beta = gen_eig_extremes(&pm.b2, &pm.b1)?;
    Ok(TauBetaIntervals {
        tau_min: tau.lambda_min,
        tau_max: tau.lambda_max,
        beta_min: beta.lambda_min,
        beta_max_feas: beta.lambda_max,
    })
}

/// Restriction to diagonal relay matrices `G = diag(g)`: keeps the rows
/// and columns of the full `m_r²`-dimensional matrices indexed by the
/// diagonal positions of `vec(G)`, yielding `m_r`-dimensional matrices.
pub fn restrict_diagonal(pm_full: &ProblemMatrices) -> ProblemMatrices {
    let m_r = (pm_full.n as f64).sqrt().round() as usize;
    assert_eq!(m_r * m_r, pm_full.n, "restrict_diagonal requires n = m_r²");
    let idx: Vec<usize> = (0..m_r).map(|r| r * (m_r + 1)).collect();
    let pick = |h: &HermitianMatrix| {
        let m = nalgebra::DMatrix::from_fn(m_r, m_r, |r, c| h.entry(idx[r], idx[c]));
        HermitianMatrix::symmetrized(m)
    };
    ProblemMatrices {
        n: m_r,
        q: pick(&pm_full.q),
        k21: pick(&pm_full.k21),
        k12: pick(&pm_full.k12),
        j1: pick(&pm_full.j1),
        j2: pick(&pm_full.j2),
        b1: pick(&pm_full.b1),
        b2: pick(&pm_full.b2),
        a1: pick(&pm_full.a1),
        a2: pick(&pm_full.a2),
        p_tr: pm_full.p_tr,
        p_n1: pm_full.p_n1,
        p_n2: pm_full.p_n2,
        p_t1: pm_full.p_t1,
        p_t2: pm_full.p_t2,
    }
}

/// Embeds a diagonal-problem vector back into the full `m_r²` space as
/// `vec(diag(g))`.
pub fn embed_diagonal(g: &ComplexVector) -> ComplexVector {
    let m_r = g.len();
    let mut full = ComplexVector::zeros(m_r * m_r);
    for r in 0..m_r {
        full[r * (m_r + 1)] = g[r];
    }
    full
}

/// Reshapes a full-problem vector into the relay amplification matrix.
pub fn relay_matrix(g: &ComplexVector) -> nalgebra::DMatrix<Complex64> {
    let n = g.len();
    let m_r = (n as f64).sqrt().round() as usize;
    assert_eq!(m_r * m_r, n, "relay vector length must be a square");
    unvectorize(g, m_r, m_r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::draw_channels;
    use crate::linalg::hermitian_eig;
    use crate::linalg::test_util::{rand_cvector, rng};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn seeded_instance(m_r: usize, seed: u64) -> (SystemConfig, ChannelSet, ProblemMatrices) {
        let config = SystemConfig {
            m_r,
            ..SystemConfig::default()
        };
        let ch = draw_channels(&config, seed);
        let pm = build_problem(&config, &ch);
        (config, ch, pm)
    }

    #[test]
    fn scalar_case_matches_arithmetic() {
        let config = SystemConfig {
            m_r: 1,
            p_nr: 0.1,
            ..SystemConfig::default()
        };
        let ch = draw_channels(&config, 3);
        let pm = build_problem(&config, &ch);
        let r_r = config.p_t1 * ch.h1f[0].norm_sqr()
            + config.p_t2 * ch.h2f[0].norm_sqr()
            + config.p_nr;
        assert_relative_eq!(pm.q.entry(0, 0).re, r_r, max_relative = 1e-14);
        assert_relative_eq!(
            pm.j1.entry(0, 0).re,
            config.p_nr * ch.h1b[0].norm_sqr(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            pm.j2.entry(0, 0).re,
            config.p_nr * ch.h2b[0].norm_sqr(),
            max_relative = 1e-14
        );
    }

    // gᴴ·Q·g must equal the transmit power tr(G·R_R·Gᴴ) it encodes.
    #[test]
    fn q_matches_direct_trace() {
        let (config, ch, pm) = seeded_instance(3, 11);
        let r_r = crate::channel::relay_rx_covariance(&config, &ch);
        let mut rng = rng(12);
        for _ in 0..10 {
            let g_mat = crate::linalg::test_util::rand_cmatrix(3, 3, &mut rng);
            let g = vectorize(&g_mat);
            let direct = (&g_mat * r_r.as_matrix() * g_mat.adjoint()).trace().re;
            let quad = pm.q.quadratic_form(&g);
            assert_relative_eq!(quad, direct, max_relative = 1e-10);
        }
    }

    // gᴴ·K₂₁·g·P_{T,2} must equal the received signal power
    // P_{T,2}·|h1bᵀ·G·h2f|².
    #[test]
    fn k21_matches_effective_channel_power() {
        let (config, ch, pm) = seeded_instance(3, 13);
        let mut rng = rng(14);
        for _ in 0..10 {
            let g_mat = crate::linalg::test_util::rand_cmatrix(3, 3, &mut rng);
            let g = vectorize(&g_mat);
            let e21 = (ch.h1b.transpose() * &g_mat * &ch.h2f)[(0, 0)];
            let direct = config.p_t2 * e21.norm_sqr();
            let quad = pm.k21.quadratic_form(&g) * config.p_t2;
            assert_relative_eq!(quad, direct, max_relative = 1e-10);
        }
    }

    #[test]
    fn k_matrices_are_rank_one_psd() {
        let (_, _, pm) = seeded_instance(3, 15);
        for k in [&pm.k21, &pm.k12] {
            let eig = hermitian_eig(k);
            let n = k.dim();
            let top = eig.eigenvalues[n - 1];
            assert!(top > 0.0);
            assert!(eig.eigenvalues[n - 2].abs() < 1e-10 * top);
            assert!(eig.eigenvalues[0] > -1e-10 * top);
        }
    }

    #[test]
    fn a_minus_b_is_scaled_k() {
        let (_, _, pm) = seeded_instance(2, 16);
        let d1 = pm.a1.add_scaled(&pm.b1, -1.0);
        let d2 = pm.a2.add_scaled(&pm.b2, -1.0);
        let k1 = pm.k21.scale(pm.p_t2);
        let k2 = pm.k12.scale(pm.p_t1);
        assert!((d1.as_matrix() - k1.as_matrix()).norm() < 1e-12 * k1.frobenius_norm().max(1.0));
        assert!((d2.as_matrix() - k2.as_matrix()).norm() < 1e-12 * k2.frobenius_norm().max(1.0));
    }

    #[test]
    fn objective_is_one_without_forward_channels() {
        let config = SystemConfig {
            m_r: 2,
            ..SystemConfig::default()
        };
        let drawn = draw_channels(&config, 21);
        let ch = ChannelSet {
            h1f: ComplexVector::zeros(2),
            h2f: ComplexVector::zeros(2),
            h1b: drawn.h1b,
            h2b: drawn.h2b,
        };
        let pm = build_problem(&config, &ch);
        let mut rng = rng(22);
        for _ in 0..5 {
            let g = rand_cvector(4, &mut rng);
            assert_relative_eq!(objective(&g, &pm).unwrap(), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn objective_rejects_zero_vector() {
        let (_, _, pm) = seeded_instance(2, 23);
        assert!(objective(&ComplexVector::zeros(4), &pm).is_err());
    }

    #[test]
    fn objective_scalar_case_is_constant() {
        let (_, _, pm) = seeded_instance(1, 24);
        let expected = pm.a1.entry(0, 0).re * pm.a2.entry(0, 0).re
            / (pm.b1.entry(0, 0).re * pm.b2.entry(0, 0).re);
        let mut rng = rng(25);
        for _ in 0..5 {
            let g = rand_cvector(1, &mut rng);
            assert_relative_eq!(objective(&g, &pm).unwrap(), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn objective_at_least_one_and_forms_positive() {
        for seed in 30..40 {
            let (_, _, pm) = seeded_instance(3, seed);
            let mut rng = rng(seed ^ 0xabcd);
            for _ in 0..20 {
                let g = rand_cvector(9, &mut rng);
                for h in [&pm.a1, &pm.a2, &pm.b1, &pm.b2] {
                    assert!(h.quadratic_form(&g) > 0.0);
                }
                assert!(objective(&g, &pm).unwrap() >= 1.0 - 1e-12);
            }
        }
    }

    #[test]
    fn scale_to_power_hits_constraint_surface() {
        let (_, _, pm) = seeded_instance(3, 41);
        let mut rng = rng(42);
        for _ in 0..10 {
            let g = rand_cvector(9, &mut rng);
            let scaled = scale_to_power(&g, &pm).unwrap();
            let resid = (pm.q.quadratic_form(&scaled) - pm.p_tr).abs() / pm.p_tr;
            assert!(resid < 1e-10);
            // objective untouched by the rescaling
            assert_relative_eq!(
                objective(&g, &pm).unwrap(),
                objective(&scaled, &pm).unwrap(),
                max_relative = 1e-12
            );
            // scaling twice is the identity
            let again = scale_to_power(&scaled, &pm).unwrap();
            assert!((again - &scaled).norm() < 1e-10 * scaled.norm());
        }
        assert!(scale_to_power(&ComplexVector::zeros(9), &pm).is_err());
    }

    // ½·log₂ of the homogenized objective equals the physical sum-rate on
    // the power constraint surface.
    #[test]
    fn homogenization_equivalence() {
        let (config, ch, pm) = seeded_instance(3, 43);
        let mut rng = rng(44);
        for _ in 0..50 {
            let g = rand_cvector(9, &mut rng);
            let scaled = scale_to_power(&g, &pm).unwrap();
            let lhs = 0.5 * objective(&g, &pm).unwrap().log2();
            let rhs = sum_rate(&scaled, &config, &ch);
            assert!((lhs - rhs).abs() < 1e-10, "lhs {lhs} rhs {rhs}");
        }
    }

    #[test]
    fn sum_rate_zero_vector_is_zero() {
        let (config, ch, _) = seeded_instance(2, 45);
        assert_eq!(sum_rate(&ComplexVector::zeros(4), &config, &ch), 0.0);
    }

    // Independent recomputation from the effective scalar channels.
    #[test]
    fn sum_rate_matches_effective_channel_oracle() {
        let (config, ch, pm) = seeded_instance(3, 46);
        let mut rng = rng(47);
        for _ in 0..10 {
            let g = scale_to_power(&rand_cvector(9, &mut rng), &pm).unwrap();
            let g_mat = relay_matrix(&g);
            let e12 = (ch.h1b.transpose() * &g_mat * &ch.h2f)[(0, 0)];
            let e21 = (ch.h2b.transpose() * &g_mat * &ch.h1f)[(0, 0)];
            let u1 = (ch.h1b.transpose() * &g_mat).transpose().map(|z| z.conj());
            let u2 = (ch.h2b.transpose() * &g_mat).transpose().map(|z| z.conj());
            let r_nr = crate::channel::relay_noise_covariance(&config);
            let pn1 = r_nr.quadratic_form(&u1) + config.p_n1;
            let pn2 = r_nr.quadratic_form(&u2) + config.p_n2;
            let oracle = 0.5
                * ((1.0 + config.p_t2 * e12.norm_sqr() / pn1).log2()
                    + (1.0 + config.p_t1 * e21.norm_sqr() / pn2).log2());
            assert_relative_eq!(sum_rate(&g, &config, &ch), oracle, max_relative = 1e-10);
        }
    }

    #[test]
    fn intervals_for_proportional_pencils() {
        let (_, _, pm) = seeded_instance(2, 48);
        let synthetic = ProblemMatrices {
            a2: pm.b1.scale(2.0),
            b2: pm.b1.clone(),
            ..pm
        };
        let t = tau_beta_intervals(&synthetic).unwrap();
        assert_relative_eq!(t.tau_min, 2.0, max_relative = 1e-10);
        assert_relative_eq!(t.tau_max, 2.0, max_relative = 1e-10);
        assert_relative_eq!(t.beta_min, 1.0, max_relative = 1e-10);
        assert_relative_eq!(t.beta_max_feas, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn intervals_scalar_case_collapse() {
        let (_, _, pm) = seeded_instance(1, 49);
        let t = tau_beta_intervals(&pm).unwrap();
        let expected = pm.a2.entry(0, 0).re / pm.b1.entry(0, 0).re;
        assert_relative_eq!(t.tau_min, expected, max_relative = 1e-12);
        assert_relative_eq!(t.tau_max, expected, max_relative = 1e-12);
        assert!(t.tau_min > 0.0 && t.beta_min > 0.0);
    }

    #[test]
    fn intervals_contain_sampled_ratios() {
        let (_, _, pm) = seeded_instance(3, 50);
        let t = tau_beta_intervals(&pm).unwrap();
        let mut rng = rng(51);
        for _ in 0..1000 {
            let g = rand_cvector(9, &mut rng);
            let tau = pm.a2.quadratic_form(&g) / pm.b1.quadratic_form(&g);
            let beta = pm.b2.quadratic_form(&g) / pm.b1.quadratic_form(&g);
            assert!(tau >= t.tau_min - 1e-9 && tau <= t.tau_max + 1e-9);
            assert!(beta >= t.beta_min - 1e-9 && beta <= t.beta_max_feas + 1e-9);
        }
    }

    #[test]
    fn diagonal_restriction_is_identity_for_single_antenna() {
        let (_, _, pm) = seeded_instance(1, 52);
        let restricted = restrict_diagonal(&pm);
        assert_eq!(restricted.n, 1);
        assert_eq!(restricted.a1.entry(0, 0), pm.a1.entry(0, 0));
        assert_eq!(restricted.q.entry(0, 0), pm.q.entry(0, 0));
    }

    // Quadratic forms of diag(g) under the full matrices equal those of g
    // under the restricted ones.
    #[test]
    fn diagonal_restriction_embedding_oracle() {
        let (_, _, pm) = seeded_instance(3, 53);
        let restricted = restrict_diagonal(&pm);
        let mut rng = rng(54);
        for _ in 0..10 {
            let gd = rand_cvector(3, &mut rng);
            let full = embed_diagonal(&gd);
            assert_relative_eq!(
                objective(&gd, &restricted).unwrap(),
                objective(&full, &pm).unwrap(),
                max_relative = 1e-12
            );
            assert_relative_eq!(
                restricted.q.quadratic_form(&gd),
                pm.q.quadratic_form(&full),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn diagonal_restriction_keeps_b_positive_definite() {
        for seed in 60..65 {
            let (_, _, pm) = seeded_instance(3, seed);
            let restricted = restrict_diagonal(&pm);
            for b in [&restricted.b1, &restricted.b2] {
                assert!(b.is_positive_definite());
            }
        }
    }

    #[test]
    fn relay_matrix_reshapes_column_major() {
        let g = ComplexVector::from_fn(4, |i, _| Complex64::new(i as f64, 0.0));
        let m = relay_matrix(&g);
        let expected =
            DMatrix::from_column_slice(2, 2, &[0.0, 1.0, 2.0, 3.0].map(|x| Complex64::new(x, 0.0)));
        assert_eq!(m, expected);
    }
}

#[cfg(test)]
mod homogeneity_props {
    use super::*;
    use crate::channel::draw_channels;
    use crate::linalg::test_util::{rand_cvector, rng};
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        // objective(c·g) = objective(g) for any nonzero complex c
        #[test]
        fn objective_is_scale_invariant(re in -5.0f64..5.0, im in -5.0f64..5.0, seed in 0u64..32) {
            prop_assume!(re.abs() + im.abs() > 1e-3);
            let config = SystemConfig { m_r: 2, ..SystemConfig::default() };
            let ch = draw_channels(&config, seed);
            let pm = build_problem(&config, &ch);
            let g = rand_cvector(4, &mut rng(seed ^ 0x9e37));
            let scaled = &g * Complex64::new(re, im);
            let v1 = objective(&g, &pm).unwrap();
            let v2 = objective(&scaled, &pm).unwrap();
            prop_assert!((v1 - v2).abs() <= 1e-12 * v1.abs());
        }
    }
}
