use super::network::softmax;
use crate::error::{Error, Result};

fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|&z| (z - m).exp()).sum::<f64>().ln();
    logits.iter().map(|&z| z - lse).collect()
}

fn check_label(logits: &[f64], label: usize) -> Result<()> {
    if label >= logits.len() {
        return Err(Error::invalid(format!(
            "label {label} outside 0..{}",
            logits.len()
        )));
    }
    Ok(())
}

/// `-log softmax(logits)[label]`.
pub fn cross_entropy(logits: &[f64], label: usize) -> Result<f64> {
    check_label(logits, label)?;
    Ok(-log_softmax(logits)[label])
}

/// Cross-entropy and its gradient with respect to the logits.
pub fn cross_entropy_grad(logits: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
    check_label(logits, label)?;
    let loss = -log_softmax(logits)[label];
    let mut g = softmax(logits);
    g[label] -= 1.0;
    Ok((loss, g))
}

/// `(1 - weight) * CE(student, label) + weight * T^2 * KL(softmax(teacher/T) || softmax(student/T))`.
pub fn distill_loss(
    student: &[f64],
    teacher: &[f64],
    label: usize,
    temperature: f64,
    weight: f64,
) -> Result<f64> {
    distill_loss_grad(student, teacher, label, temperature, weight).map(|(l, _)| l)
}

pub fn distill_loss_grad(
    student: &[f64],
    teacher: &[f64],
    label: usize,
    temperature: f64,
    weight: f64,
) -> Result<(f64, Vec<f64>)> {
    if student.len() != teacher.len() {
        return Err(Error::Shape(format!(
            "student has {} logits, teacher {}",
            student.len(),
            teacher.len()
        )));
    }
    if !(temperature > 0.0) || !(0.0..=1.0).contains(&weight) {
        return Err(Error::invalid(format!(
            "temperature {temperature} / weight {weight} out of range"
        )));
    }
    let (ce, ce_grad) = cross_entropy_grad(student, label)?;
    let t = temperature;
    let s_t: Vec<f64> = student.iter().map(|z| z / t).collect();
    let q_t: Vec<f64> = teacher.iter().map(|z| z / t).collect();
    let log_ps = log_softmax(&s_t);
    let log_pt = log_softmax(&q_t);
    let kl: f64 = log_pt
        .iter()
        .zip(&log_ps)
        .map(|(&lt, &ls)| {
            if lt == f64::NEG_INFINITY {
                0.0
            } else {
                lt.exp() * (lt - ls)
            }
        })
        .sum();
    let loss = (1.0 - weight) * ce + weight * t * t * kl;
    let grad = ce_grad
        .iter()
        .zip(log_ps.iter().zip(&log_pt))
        .map(|(&g, (&ls, &lt))| (1.0 - weight) * g + weight * t * (ls.exp() - lt.exp()))
        .collect();
    Ok((loss, grad))
}
