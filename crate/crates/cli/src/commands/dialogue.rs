use std::path::Path;

use alignmarket::dialogue::{
    agreement_round, info_substitutes_check, load_prior, prior_fixture, rounds_for_agreement,
    run_straightforward_conversation, theorem_bounds, Corollary, DiscreteJointPrior, SubsetMode, PRIOR_NAMES,
};
use anyhow::Result;

use super::{usage, Ctx};
use crate::args::{BoundsCmd, ConversationCmd};
use crate::output::{Cell, Table};

fn joint(name: &str) -> Result<DiscreteJointPrior> {
    if PRIOR_NAMES.contains(&name) {
        Ok(prior_fixture(name)?)
    } else if Path::new(name).exists() {
        Ok(load_prior(name)?)
    } else {
        Err(usage(
            "joint",
            format!("{name:?} is neither a fixture ({}) nor a file", PRIOR_NAMES.join(", ")),
        ))
    }
}

/// A feature value given by label or index.
fn feature(labels: &[String], flag: &'static str, key: &str) -> Result<usize> {
    labels
        .iter()
        .position(|l| l == key)
        .or_else(|| key.parse::<usize>().ok().filter(|&i| i < labels.len()))
        .ok_or_else(|| usage(flag, format!("no feature value {key:?}")))
}

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn conversation(cmd: ConversationCmd, mut ctx: Ctx) -> Result<(&'static str, Ctx)> {
    match cmd {
        ConversationCmd::Run {
            joint: j,
            xa,
            xb,
            rounds,
        } => {
            let prior = joint(&j.joint)?;
            let xa = feature(prior.x_a(), "xa", &xa)?;
            let xb = feature(prior.x_b(), "xb", &xb)?;
            let c = run_straightforward_conversation(&prior, xa, xb, rounds)?;
            let truth = prior.full_information_belief(xa, xb).expect("features have mass");
            let actions = prior.num_actions();
            let mut header = vec!["round".to_string()];
            header.extend((0..actions).map(|a| format!("alice_a{a}")));
            header.extend((0..actions).map(|a| format!("bob_a{a}")));
            header.extend(["gap".to_string(), "alice_error".to_string()]);
            let mut t = Table::new(header);
            for (r, gap) in c.gaps().into_iter().enumerate() {
                let mut row: Vec<Cell> = vec![r.into()];
                row.extend(c.alice_beliefs[r].iter().map(|&v| v.into()));
                row.extend(c.bob_beliefs[r].iter().map(|&v| v.into()));
                row.extend([gap.into(), sup_gap(&c.alice_beliefs[r], &truth).into()]);
                t.push(row);
            }
            ctx.out.table("beliefs", &t)?;
            ctx.out.json("transcript", &c.transcript)?;
            let gaps = c.gaps();
            println!("rounds={rounds} final_gap={}", gaps.last().expect("round 0 exists"));
            Ok(("conversation run", ctx))
        }
        ConversationCmd::Agreement { joint: j, rounds, zeta } => {
            if !(zeta.is_finite() && zeta >= 0.0) {
                return Err(usage("zeta", format!("must be a nonnegative number, got {zeta}")));
            }
            let prior = joint(&j.joint)?;
            let mut t = Table::new([
                "x_a",
                "x_b",
                "probability",
                "agreement_round",
                "final_gap",
                "alice_error",
            ]);
            let mut reached = 0;
            let mut pairs = 0;
            for i in 0..prior.x_a().len() {
                for k in 0..prior.x_b().len() {
                    let p = prior.p(i, k);
                    if p <= 0.0 {
                        continue;
                    }
                    pairs += 1;
                    let c = run_straightforward_conversation(&prior, i, k, rounds)?;
                    let round = agreement_round(&c.alice_beliefs, &c.bob_beliefs, zeta)?;
                    reached += usize::from(round.is_some());
                    let truth = prior.full_information_belief(i, k).expect("positive mass");
                    t.push(vec![
                        prior.x_a()[i].as_str().into(),
                        prior.x_b()[k].as_str().into(),
                        p.into(),
                        round.map_or(String::new(), |r| r.to_string()).into(),
                        (*c.gaps().last().expect("round 0 exists")).into(),
                        sup_gap(c.alice_beliefs.last().expect("round 0 exists"), &truth).into(),
                    ]);
                }
            }
            ctx.out.table("agreement", &t)?;
            println!("pairs={pairs} agreed={reached} zeta={zeta}");
            Ok(("conversation agreement", ctx))
        }
        ConversationCmd::Substitutes { joint: j, samples } => {
            let prior = joint(&j.joint)?;
            let mode = match samples {
                Some(0) => return Err(usage("samples", "must be at least 1")),
                Some(count) => SubsetMode::Sampled { count, seed: ctx.seed },
                None => SubsetMode::auto(&prior, ctx.seed),
            };
            let r = info_substitutes_check(&prior, mode)?;
            let names = |labels: &[String], set: &[usize]| {
                set.iter().map(|&i| labels[i].as_str()).collect::<Vec<_>>().join(";")
            };
            let mut t = Table::new(["holds", "worst_violation", "pairs_checked", "action", "set_a", "set_b"]);
            let (action, sa, sb) = match &r.witness {
                Some(w) => (
                    w.action.to_string(),
                    names(prior.x_a(), &w.set_a),
                    names(prior.x_b(), &w.set_b),
                ),
                None => Default::default(),
            };
            t.push(vec![
                r.holds.into(),
                r.worst_violation.into(),
                r.pairs_checked.into(),
                action.into(),
                sa.into(),
                sb.into(),
            ]);
            ctx.out.table("substitutes", &t)?;
            println!("holds={} worst_violation={}", r.holds, r.worst_violation);
            Ok(("conversation substitutes", ctx))
        }
    }
}

pub fn bounds(cmd: BoundsCmd, mut ctx: Ctx) -> Result<(&'static str, Ctx)> {
    match cmd {
        BoundsCmd::Thm49 {
            actions,
            rounds,
            zeta,
            delta,
            lambda,
            eps,
        } => {
            let rounds = match (rounds, zeta) {
                (Some(k), _) => k,
                (None, Some(z)) => rounds_for_agreement(actions, z, delta)?,
                (None, None) => return Err(usage("rounds", "either --rounds or --zeta is required")),
            };
            let r = theorem_bounds(actions, rounds, delta, lambda, eps)?;
            let (applicable, corollary) = match r.corollary {
                Corollary::Applicable { deficit } => (true, deficit),
                Corollary::NotApplicable => (false, f64::NAN),
            };
            let mut header = vec![
                "actions",
                "rounds",
                "delta_conv",
                "lambda",
                "epsilon",
                "zeta",
                "agreement_error",
                "estimation_error",
                "quantal_gap",
                "deficit",
                "guard",
                "corollary_applicable",
            ];
            let mut row: Vec<Cell> = vec![
                actions.into(),
                r.rounds.into(),
                r.delta_conv.into(),
                r.lambda.into(),
                r.epsilon.into(),
                r.zeta.into(),
                r.agreement_error.into(),
                r.estimation_error.into(),
                r.quantal_gap.into(),
                r.deficit.into(),
                r.guard.into(),
                applicable.into(),
            ];
            if applicable {
                header.push("corollary_deficit");
                row.push(corollary.into());
            }
            let mut t = Table::new(header);
            t.push(row);
            ctx.out.table("thm49", &t)?;
            println!(
                "zeta={} deficit={} corollary={}",
                r.zeta,
                r.deficit,
                if applicable {
                    corollary.to_string()
                } else {
                    "not_applicable".into()
                }
            );
            Ok(("bounds thm49", ctx))
        }
    }
}
