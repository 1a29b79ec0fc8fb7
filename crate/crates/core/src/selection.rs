//! Rate selection from predicted FEPs and throughput accounting.

use crate::error::{Error, Result};

/// Picks the 1-based configuration maximizing `T_k (1 - p_k)`.
/// Ties go to the smaller k.
pub fn select_rate(fep: &[f64], payloads: &[usize]) -> Result<usize> {
    if fep.len() != payloads.len() {
        return Err(Error::Dimension {
            expected: payloads.len(),
            got: fep.len(),
        });
    }
    if fep.is_empty() {
        return Err(Error::InvalidArgument(
            "no configurations to select from".into(),
        ));
    }
    if payloads.contains(&0) {
        return Err(Error::InvalidArgument(
            "payload sizes must be positive".into(),
        ));
    }
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, (&p, &t)) in fep.iter().zip(payloads).enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("FEP {p} outside [0, 1]")));
        }
        let v = t as f64 * (1.0 - p);
        if v > best_value {
            best_value = v;
            best = i;
        }
    }
    Ok(best + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDecision {
    pub frame: usize,
    pub chosen: usize,
    pub predicted: Vec<f64>,
    /// Realized error event for the chosen configuration.
    pub error: bool,
    /// Events for every configuration, when available.
    pub all_events: Option<Vec<bool>>,
}

impl PolicyDecision {
    pub fn new(
        frame: usize,
        predicted: Vec<f64>,
        payloads: &[usize],
        events: &[bool],
    ) -> Result<Self> {
        if events.len() != payloads.len() {
            return Err(Error::Dimension {
                expected: payloads.len(),
                got: events.len(),
            });
        }
        let chosen = select_rate(&predicted, payloads)?;
        Ok(Self {
            frame,
            chosen,
            predicted,
            error: events[chosen - 1],
            all_events: Some(events.to_vec()),
        })
    }

    pub fn throughput(&self, payloads: &[usize]) -> f64 {
        if self.error {
            0.0
        } else {
            payloads[self.chosen - 1] as f64
        }
    }
}

pub fn realized_throughput(decisions: &[PolicyDecision], payloads: &[usize]) -> Result<f64> {
    if decisions.is_empty() {
        return Err(Error::InvalidArgument("no decisions".into()));
    }
    if let Some(d) = decisions
        .iter()
        .find(|d| d.chosen == 0 || d.chosen > payloads.len())
    {
        return Err(Error::InvalidArgument(format!(
            "frame {}: configuration {} out of range",
            d.frame, d.chosen
        )));
    }
    Ok(decisions
        .iter()
        .map(|d| d.throughput(payloads))
        .sum::<f64>()
        / decisions.len() as f64)
}

/// Best achievable payload for one frame, with the 1-based k attaining it
/// (0 when every configuration failed).
pub fn genie_frame(events: &[bool], payloads: &[usize]) -> (usize, f64) {
    let mut best = (0, 0.0);
    for (i, (&e, &t)) in events.iter().zip(payloads).enumerate() {
        if !e && t as f64 > best.1 {
            best = (i + 1, t as f64);
        }
    }
    best
}

pub fn genie_throughput(events: &[Vec<Option<bool>>], payloads: &[usize]) -> Result<f64> {
    if events.is_empty() {
        return Err(Error::InvalidArgument("no frames".into()));
    }
    let mut total = 0.0;
    for (n, row) in events.iter().enumerate() {
        if row.len() != payloads.len() {
            return Err(Error::Dimension {
                expected: payloads.len(),
                got: row.len(),
            });
        }
        let full: Option<Vec<bool>> = row.iter().copied().collect();
        let full = full.ok_or_else(|| {
            Error::Data(format!(
                "frame {n}: genie needs events for every configuration"
            ))
        })?;
        total += genie_frame(&full, payloads).1;
    }
    Ok(total / events.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn selection_examples() {
        assert_eq!(select_rate(&[0.0, 0.9], &[100, 200]).unwrap(), 1);
        assert_eq!(select_rate(&[0.0; 4], &[10, 20, 30, 40]).unwrap(), 4);
        assert_eq!(select_rate(&[0.0, 0.5], &[100, 200]).unwrap(), 1);
        assert!(select_rate(&[0.1], &[1, 2]).is_err());
        assert!(select_rate(&[0.1, 0.2], &[0, 2]).is_err());
    }

    #[test]
    fn throughput_examples() {
        let t = [100, 200];
        let d = |n, k: usize, e: bool| PolicyDecision {
            frame: n,
            chosen: k,
            predicted: vec![0.0, 0.0],
            error: e,
            all_events: None,
        };
        assert_eq!(
            realized_throughput(&[d(0, 1, false), d(1, 2, true)], &t).unwrap(),
            50.0
        );
        assert_eq!(
            realized_throughput(&[d(0, 2, false), d(1, 2, false)], &t).unwrap(),
            200.0
        );
        assert_eq!(
            realized_throughput(&[d(0, 2, true), d(1, 1, true)], &t).unwrap(),
            0.0
        );
        assert!(realized_throughput(&[], &t).is_err());
    }

    #[test]
    fn genie_examples() {
        let t = [100, 200, 300];
        let ev = vec![
            vec![Some(true); 3],
            vec![Some(false); 3],
            vec![Some(false), Some(false), Some(true)],
        ];
        assert_eq!(
            genie_throughput(&ev, &t).unwrap(),
            (0.0 + 300.0 + 200.0) / 3.0
        );
        assert!(genie_throughput(&[vec![Some(false), None, Some(true)]], &t).is_err());
    }

    proptest! {
        #[test]
        fn scaling_payloads_keeps_choice(
            fep in proptest::collection::vec(0.0f64..=1.0, 1..8),
            scale in 1usize..50,
            seed in 1usize..1000,
        ) {
            let t: Vec<usize> = (0..fep.len()).map(|i| 1 + (seed * (i + 7)) % 97).collect();
            let scaled: Vec<usize> = t.iter().map(|x| x * scale).collect();
            prop_assert_eq!(select_rate(&fep, &t).unwrap(), select_rate(&fep, &scaled).unwrap());
        }

        #[test]
        fn genie_dominates_any_policy(
            rows in proptest::collection::vec(
                (proptest::collection::vec(any::<bool>(), 4), proptest::collection::vec(0.0f64..=1.0, 4)),
                1..40,
            ),
        ) {
            let t = [10, 20, 30, 40];
            let decisions: Vec<PolicyDecision> = rows
                .iter()
                .enumerate()
                .map(|(n, (e, p))| PolicyDecision::new(n, p.clone(), &t, e).unwrap())
                .collect();
            let table: Vec<Vec<Option<bool>>> = rows.iter().map(|(e, _)| e.iter().map(|&x| Some(x)).collect()).collect();
            let genie = genie_throughput(&table, &t).unwrap();
            prop_assert!(genie >= realized_throughput(&decisions, &t).unwrap());
            for d in &decisions {
                let e = d.all_events.as_ref().unwrap();
                prop_assert!(genie_frame(e, &t).1 >= d.throughput(&t));
            }
        }
    }
}
