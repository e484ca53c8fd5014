//! Binary focal loss.

use crate::error::{Error, Result};

/// Probabilities are clamped to `[EPS, 1 - EPS]` before the logarithm.
pub const EPS: f64 = 1e-7;

#[inline]
fn p_t(p: f64, y: u8) -> f64 {
    let p = p.clamp(EPS, 1.0 - EPS);
    if y == 1 {
        p
    } else {
        1.0 - p
    }
}

/// Per-sample loss `-(1 - p_t)^gamma ln p_t`.
#[inline]
pub fn focal_term(p: f64, y: u8, gamma: f64) -> f64 {
    let pt = p_t(p, y);
    -(1.0 - pt).powf(gamma) * pt.ln()
}

/// Derivative of [`focal_term`] with respect to `p`.
pub fn focal_term_grad(p: f64, y: u8, gamma: f64) -> f64 {
    let pt = p_t(p, y);
    let q = 1.0 - pt;
    let dpt = gamma * q.powf(gamma - 1.0) * pt.ln() - q.powf(gamma) / pt;
    if y == 1 {
        dpt
    } else {
        -dpt
    }
}

/// Derivative of [`focal_term`] with respect to the logit `z` of
/// `p = sigmoid(z)`. Written without the `1/p_t` factor so it stays finite
/// for any `gamma >= 0`.
pub fn focal_term_grad_logit(p: f64, y: u8, gamma: f64) -> f64 {
    let pt = p_t(p, y);
    let q = 1.0 - pt;
    let g = gamma * q.powf(gamma) * pt * pt.ln() - q.powf(gamma + 1.0);
    if y == 1 {
        g
    } else {
        -g
    }
}

/// Mean focal loss over all samples.
pub fn focal_loss(p: &[f64], y: &[u8], gamma: f64) -> Result<f64> {
    if p.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "{} probabilities but {} targets",
            p.len(),
            y.len()
        )));
    }
    if !(gamma >= 0.0) {
        return Err(Error::InvalidInput(format!("gamma must be >= 0, got {gamma}")));
    }
    if p.is_empty() {
        return Ok(0.0);
    }
    Ok(p.iter().zip(y).map(|(&p, &y)| focal_term(p, y, gamma)).sum::<f64>() / p.len() as f64)
}

/// Mean focal loss over the samples where `mask` is set, and the gradient
/// of that mean with respect to each logit (zero where masked out).
pub fn masked_focal_loss_logits(p: &[f32], y: &[u8], mask: &[bool], gamma: f64) -> (f64, Vec<f32>) {
    let count = mask.iter().filter(|&&m| m).count();
    let mut grad = vec![0.0f32; p.len()];
    if count == 0 {
        return (0.0, grad);
    }
    let scale = 1.0 / count as f64;
    let mut total = 0.0;
    for i in 0..p.len() {
        if mask[i] {
            let pi = p[i] as f64;
            total += focal_term(pi, y[i], gamma);
            grad[i] = (focal_term_grad_logit(pi, y[i], gamma) * scale) as f32;
        }
    }
    (total * scale, grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!((focal_loss(&[0.5], &[1], 0.0).unwrap() - 0.693147).abs() < 1e-6);
        assert!((focal_loss(&[0.9], &[1], 2.0).unwrap() - 0.00105361).abs() < 1e-8);
        assert!((focal_loss(&[0.1], &[0], 2.0).unwrap() - 0.00105361).abs() < 1e-8);
        assert!(focal_loss(&[1.0], &[1], 2.5).unwrap() <= 1e-6);
        assert!(focal_loss(&[0.5, 0.5], &[1], 2.0).is_err());
    }

    #[test]
    fn logit_gradient_matches_chain_rule() {
        for gamma in [0.0, 0.5, 2.5] {
            for p in [0.02, 0.4, 0.93] {
                for y in [0, 1] {
                    let chain = focal_term_grad(p, y, gamma) * p * (1.0 - p);
                    let direct = focal_term_grad_logit(p, y, gamma);
                    assert!((chain - direct).abs() < 1e-12, "{gamma} {p} {y}");
                }
            }
        }
    }

    #[test]
    fn masked_mean_ignores_padding() {
        let (l1, g1) = masked_focal_loss_logits(&[0.3, 0.8], &[1, 0], &[true, true], 2.0);
        let (l2, g2) = masked_focal_loss_logits(&[0.3, 0.8, 0.5], &[1, 0, 1], &[true, true, false], 2.0);
        assert_eq!(l1, l2);
        assert_eq!(&g2[..2], &g1[..]);
        assert_eq!(g2[2], 0.0);
    }
}
