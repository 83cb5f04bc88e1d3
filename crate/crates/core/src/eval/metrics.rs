use super::EvalError;
use crate::recovery::ExecutedStream;
use crate::scalar::Scalar;
use crate::trace::Trace;

/// The executed joint vector in force at every reference slot. A slot
/// without an executed command keeps the previous one; before the first
/// executed command the robot holds the reference's initial pose.
pub fn aligned_rows<'a, T: Scalar>(executed: &'a ExecutedStream<T>, reference: &'a Trace<T>) -> Result<Vec<&'a [T]>, EvalError> {
    let h = reference.len();
    let seq0 = reference.first_seq();
    if executed.commands.len() > h {
        return Err(EvalError::Config(format!("{} executed commands for {h} slots", executed.commands.len())));
    }
    let mut out = Vec::with_capacity(h);
    let mut current = reference.joints(0);
    let mut cmds = executed.commands.iter().peekable();
    for slot in 0..h {
        if let Some(c) = cmds.next_if(|c| c.seq() == seq0 + slot) {
            if c.dim() != reference.dim() {
                return Err(EvalError::Config(format!(
                    "executed command {} has {} joints, reference has {}",
                    c.seq(),
                    c.dim(),
                    reference.dim()
                )));
            }
            current = c.joints();
        }
        out.push(current);
    }
    if let Some(c) = cmds.next() {
        return Err(EvalError::Config(format!("executed command {} does not match a reference slot", c.seq())));
    }
    Ok(out)
}

/// Squared joint-space distance per slot.
pub fn slot_sq_errors<T: Scalar>(executed: &ExecutedStream<T>, reference: &Trace<T>) -> Result<Vec<T>, EvalError> {
    let rows = aligned_rows(executed, reference)?;
    Ok(rows.iter().zip(reference.rows()).map(|(a, b)| sq_dist(a, b)).collect())
}

/// Root mean over slots of the squared joint-space distance, in the
/// trace's native unit.
pub fn rmse<T: Scalar>(executed: &ExecutedStream<T>, reference: &Trace<T>) -> Result<T, EvalError> {
    let rows = aligned_rows(executed, reference)?;
    let refs: Vec<&[T]> = reference.rows().collect();
    rmse_rows(&rows, &refs)
}

pub fn rmse_rows<T: Scalar>(a: &[&[T]], b: &[&[T]]) -> Result<T, EvalError> {
    if a.len() != b.len() || a.is_empty() {
        return Err(EvalError::Config(format!("cannot compare {} rows with {}", a.len(), b.len())));
    }
    if a.iter().zip(b).any(|(x, y)| x.len() != y.len()) {
        return Err(EvalError::Config("row dimensions differ".into()));
    }
    let total = a.iter().zip(b).map(|(x, y)| sq_dist(x, y)).sum::<T>();
    Ok((total / T::lit(a.len() as f64)).sqrt())
}

fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recovery::RecoveryStats;
    use crate::trace::{Command, JointUnit, Provenance};
    use crate::time::Micros;
    use proptest::prelude::*;

    fn stream(rows: &[Vec<f64>], seqs: &[usize]) -> ExecutedStream<f64> {
        let commands = rows
            .iter()
            .zip(seqs)
            .map(|(r, s)| Command::new(*s, r.clone(), Micros(20_000 * *s as i64)).with_provenance(Provenance::Forecast))
            .collect();
        ExecutedStream { commands, stats: RecoveryStats::default(), received: vec![] }
    }

    #[test]
    fn identical_streams_have_zero_error() {
        let rows: Vec<Vec<f64>> = (0..25).map(|i| vec![i as f64; 6]).collect();
        let t = Trace::from_rows(20.0, rows.clone(), JointUnit::Radians).unwrap();
        let ex = stream(&rows, &(0..25).collect::<Vec<_>>());
        assert_eq!(rmse(&ex, &t).unwrap(), 0.0);
    }

    #[test]
    fn one_slot_off_by_a_3_4_5_triangle() {
        let rows: Vec<Vec<f64>> = vec![vec![0.0; 6]; 25];
        let t = Trace::from_rows(20.0, rows.clone(), JointUnit::Radians).unwrap();
        let mut exec_rows = rows;
        exec_rows[7] = vec![3.0, 4.0, 0.0, 0.0, 0.0, 0.0];
        let ex = stream(&exec_rows, &(0..25).collect::<Vec<_>>());
        assert_eq!(rmse(&ex, &t).unwrap(), 1.0);
    }

    #[test]
    fn gaps_hold_the_last_executed_command() {
        let t = Trace::from_rows(20.0, vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]], JointUnit::Meters).unwrap();
        let ex = stream(&[vec![1.0], vec![3.0]], &[1, 3]);
        // slot 0 holds the initial pose 0, slot 2 holds 1
        assert_eq!(slot_sq_errors(&ex, &t).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn mismatches_are_config_errors() {
        let t = Trace::from_rows(20.0, vec![vec![0.0]; 3], JointUnit::Meters).unwrap();
        assert!(rmse(&stream(&vec![vec![0.0]; 4], &[0, 1, 2, 3]), &t).is_err());
        assert!(rmse(&stream(&[vec![0.0]], &[7]), &t).is_err());
        assert!(rmse(&stream(&[vec![0.0, 1.0]], &[0]), &t).is_err());
    }

    proptest! {
        #[test]
        fn rmse_is_symmetric_and_zero_on_self(
            a in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 1..40),
            shift in -1.0f64..1.0,
        ) {
            let b: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| v * 0.5 + shift).collect()).collect();
            let ar: Vec<&[f64]> = a.iter().map(|r| r.as_slice()).collect();
            let br: Vec<&[f64]> = b.iter().map(|r| r.as_slice()).collect();
            prop_assert_eq!(rmse_rows(&ar, &ar).unwrap(), 0.0);
            prop_assert_eq!(rmse_rows(&ar, &br).unwrap(), rmse_rows(&br, &ar).unwrap());
        }
    }
}
