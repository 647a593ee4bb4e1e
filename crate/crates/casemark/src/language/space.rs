//! Meaning-space construction, ambiguity classification, and dataset splits.

use super::{Ambiguity, Condition, Inventory, Meaning, SL_RESAMPLE_FRACTION, TEST_FRACTION_DENOM};
use crate::rng::SimRng;
use crate::{Error, Result};

/// Enumerates every legal meaning under the condition's role constraints.
///
/// Object-marking: agents come only from the ambiguous entities, patients
/// from any other entity. Subject-marking mirrors this with the patient
/// fixed to the ambiguous set. The result is canonically ordered by
/// (action, agent, patient).
pub fn build_meaning_space(inv: &Inventory, cond: Condition) -> Vec<Meaning> {
    let mut out = Vec::new();
    for action in inv.actions() {
        match cond {
            Condition::ObjectMarking => {
                for agent in inv.amb_entities() {
                    for patient in inv.entities() {
                        if patient != agent {
                            out.push(Meaning {
                                action,
                                agent,
                                patient,
                            });
                        }
                    }
                }
            }
            Condition::SubjectMarking => {
                for patient in inv.amb_entities() {
                    for agent in inv.entities() {
                        if agent != patient {
                            out.push(Meaning {
                                action,
                                agent,
                                patient,
                            });
                        }
                    }
                }
            }
        }
    }
    out.sort_unstable_by_key(|m| (m.action, m.agent, m.patient));
    out
}

/// A meaning is ambiguous iff its free-role entity (the patient under
/// object marking, the agent under subject marking) is itself
/// role-ambiguous.
pub fn classify_ambiguity(inv: &Inventory, m: &Meaning, cond: Condition) -> Ambiguity {
    if inv.is_amb(cond.free_role_entity(m)) {
        Ambiguity::Amb
    } else {
        Ambiguity::NotAmb
    }
}

/// Uniform 80/20 train/test split, seed-deterministic. Both halves are
/// returned in canonical order.
pub fn split_dataset(meanings: &[Meaning], rng: &mut SimRng) -> (Vec<Meaning>, Vec<Meaning>) {
    let n_test = meanings.len() / TEST_FRACTION_DENOM;
    let mut shuffled: Vec<Meaning> = meanings.to_vec();
    shuffled.sort_unstable();
    rng.shuffle(&mut shuffled);
    let mut test: Vec<Meaning> = shuffled[..n_test].to_vec();
    let mut train: Vec<Meaning> = shuffled[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    (train, test)
}

/// Resamples 66.7% of the train split for one agent's SL corpus, subject to
/// the all-seen rule: every action and every (entity, role) combination
/// present in the train set must occur at least once in the subset.
pub fn resample_sl_subset(train: &[Meaning], rng: &mut SimRng) -> Result<Vec<Meaning>> {
    let target = (SL_RESAMPLE_FRACTION * train.len() as f64).floor() as usize;

    let mut required_agents: Vec<usize> = train.iter().map(|m| m.agent).collect();
    required_agents.sort_unstable();
    required_agents.dedup();
    let mut required_patients: Vec<usize> = train.iter().map(|m| m.patient).collect();
    required_patients.sort_unstable();
    required_patients.dedup();
    let mut required_actions: Vec<usize> = train.iter().map(|m| m.action).collect();
    required_actions.sort_unstable();
    required_actions.dedup();

    let covers = |subset: &[Meaning]| {
        let has = |req: &[usize], pick: fn(&Meaning) -> usize| {
            req.iter().all(|&r| subset.iter().any(|m| pick(m) == r))
        };
        has(&required_agents, |m| m.agent)
            && has(&required_patients, |m| m.patient)
            && has(&required_actions, |m| m.action)
    };

    let mut pool: Vec<Meaning> = train.to_vec();
    for attempt in 0..1000 {
        rng.shuffle(&mut pool);
        let mut subset: Vec<Meaning> = pool[..target].to_vec();
        if covers(&subset) {
            if attempt > 0 {
                log::debug!("sl resample satisfied coverage after {} retries", attempt);
            }
            subset.sort_unstable();
            return Ok(subset);
        }
    }
    Err(Error::DegenerateInventory(format!(
        "no {}-meaning subset of {} train meanings covers all entities and actions \
         after 1000 attempts",
        target,
        train.len()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_object_space_has_1520_meanings() {
        let inv = Inventory::default();
        let space = build_meaning_space(&inv, Condition::ObjectMarking);
        assert_eq!(space.len(), 1520);
    }

    #[test]
    fn default_subject_space_has_1520_meanings() {
        let inv = Inventory::default();
        let space = build_meaning_space(&inv, Condition::SubjectMarking);
        assert_eq!(space.len(), 1520);
    }

    #[test]
    fn object_space_role_constraints_hold() {
        let inv = Inventory::default();
        let space = build_meaning_space(&inv, Condition::ObjectMarking);
        assert!(space.iter().all(|m| inv.is_amb(m.agent)));
        assert!(space.iter().all(|m| m.agent != m.patient));
        for e in inv.amb_entities() {
            assert!(space.iter().any(|m| m.agent == e));
            assert!(space.iter().any(|m| m.patient == e));
        }
    }

    #[test]
    fn ambiguity_classification_follows_free_role() {
        let inv = Inventory::default();
        let amb_patient = Meaning {
            action: 20,
            agent: 0,
            patient: 1,
        };
        let unamb_patient = Meaning {
            action: 20,
            agent: 0,
            patient: 10,
        };
        assert_eq!(
            classify_ambiguity(&inv, &amb_patient, Condition::ObjectMarking),
            Ambiguity::Amb
        );
        assert_eq!(
            classify_ambiguity(&inv, &unamb_patient, Condition::ObjectMarking),
            Ambiguity::NotAmb
        );
        // subject-marking mirrors: the agent is the free role
        let unamb_agent = Meaning {
            action: 20,
            agent: 10,
            patient: 0,
        };
        assert_eq!(
            classify_ambiguity(&inv, &unamb_agent, Condition::SubjectMarking),
            Ambiguity::NotAmb
        );
    }

    #[test]
    fn ambiguity_classes_partition_the_space() {
        let inv = Inventory::default();
        for cond in [Condition::ObjectMarking, Condition::SubjectMarking] {
            let space = build_meaning_space(&inv, cond);
            let amb = space
                .iter()
                .filter(|m| classify_ambiguity(&inv, m, cond) == Ambiguity::Amb)
                .count();
            let namb = space.len() - amb;
            assert_eq!(amb, 10 * 9 * 8);
            assert_eq!(namb, 10 * 10 * 8);
        }
    }

    #[test]
    fn split_sizes_and_partition() {
        let inv = Inventory::default();
        let space = build_meaning_space(&inv, Condition::ObjectMarking);
        let mut rng = SimRng::new(7);
        let (train, test) = split_dataset(&space, &mut rng);
        assert_eq!(train.len(), 1216);
        assert_eq!(test.len(), 304);
        let mut union: Vec<Meaning> = train.iter().chain(test.iter()).copied().collect();
        union.sort_unstable();
        assert_eq!(union, space);
        assert!(test.iter().all(|m| !train.contains(m)));
    }

    #[test]
    fn split_is_seed_deterministic() {
        let inv = Inventory::default();
        let space = build_meaning_space(&inv, Condition::ObjectMarking);
        let (a_train, a_test) = split_dataset(&space, &mut SimRng::new(11));
        let (b_train, b_test) = split_dataset(&space, &mut SimRng::new(11));
        assert_eq!(a_train, b_train);
        assert_eq!(a_test, b_test);
        let (c_train, _) = split_dataset(&space, &mut SimRng::new(12));
        assert_ne!(a_train, c_train);
    }

    #[test]
    fn resample_size_and_coverage() {
        let inv = Inventory::default();
        let space = build_meaning_space(&inv, Condition::ObjectMarking);
        let mut rng = SimRng::new(3);
        let (train, _) = split_dataset(&space, &mut rng);
        let subset = resample_sl_subset(&train, &mut rng).unwrap();
        assert_eq!(subset.len(), 811);
        assert!(subset.iter().all(|m| train.contains(m)));
        for e in inv.entities() {
            assert!(
                subset.iter().any(|m| m.agent == e || m.patient == e),
                "entity {} missing",
                e
            );
        }
        for a in inv.actions() {
            assert!(subset.iter().any(|m| m.action == a));
        }
        // role coverage: every ambiguous entity in both roles
        for e in inv.amb_entities() {
            assert!(subset.iter().any(|m| m.agent == e));
            assert!(subset.iter().any(|m| m.patient == e));
        }
    }

    #[test]
    fn resample_is_seed_deterministic() {
        let inv = Inventory::default();
        let space = build_meaning_space(&inv, Condition::ObjectMarking);
        let (train, _) = split_dataset(&space, &mut SimRng::new(5));
        let a = resample_sl_subset(&train, &mut SimRng::new(6)).unwrap();
        let b = resample_sl_subset(&train, &mut SimRng::new(6)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unsatisfiable_coverage_reports_degenerate_inventory() {
        // 1 amb x 1 unamb x 8 actions => 8 meanings; a 7-meaning train set
        // cannot cover 8 actions with floor(0.667 * 7) = 4 picks.
        let inv = Inventory::new(1, 1, 8);
        let space = build_meaning_space(&inv, Condition::ObjectMarking);
        assert_eq!(space.len(), 8);
        let mut rng = SimRng::new(1);
        let (train, _) = split_dataset(&space, &mut rng);
        assert_eq!(train.len(), 7);
        let err = resample_sl_subset(&train, &mut rng).unwrap_err();
        assert!(matches!(err, Error::DegenerateInventory(_)));
    }

    proptest! {
        #[test]
        fn space_size_formula_holds(n_amb in 1usize..5, n_unamb in 1usize..5, n_act in 1usize..4) {
            let inv = Inventory::new(n_amb, n_unamb, n_act);
            let space = build_meaning_space(&inv, Condition::ObjectMarking);
            prop_assert_eq!(space.len(), n_amb * (n_unamb + n_amb - 1) * n_act);
            let mirror = build_meaning_space(&inv, Condition::SubjectMarking);
            prop_assert_eq!(mirror.len(), space.len());
        }
    }
}
