use alignmarket::persuasion::{
    monopoly_deterministic_scheme, oblivious_joint_evaluation, oblivious_optimal_schemes, optimal_persuasion_lp,
};
use alignmarket::{PersuasionInstance, SignalingScheme};
use anyhow::{Context, Result};

use super::{bob, instance, Ctx};
use crate::args::PersuadeCmd;
use crate::output::Table;

/// `state, m0, m1, …` with message columns named after actions when the
/// message space is the action set.
fn scheme_table(inst: &PersuasionInstance, scheme: &SignalingScheme) -> Table {
    let mut header = vec!["state".to_string()];
    if scheme.message_count() == inst.num_actions() {
        header.extend(inst.actions().iter().cloned());
    } else {
        header.extend((0..scheme.message_count()).map(|m| format!("m{m}")));
    }
    let mut t = Table::new(header);
    for (state, row) in inst.states().iter().zip(scheme.rows()) {
        let mut cells = vec![state.as_str().into()];
        cells.extend(row.iter().map(|&p| p.into()));
        t.push(cells);
    }
    t
}

pub fn run(cmd: PersuadeCmd, mut ctx: Ctx) -> Result<(&'static str, Ctx)> {
    match cmd {
        PersuadeCmd::Optimal { instance: i, bob: key } => {
            let inst = instance(&i.instance, ctx.prior.as_deref())?;
            let j = bob(&inst, "bob", &key)?;
            let (scheme, value) = optimal_persuasion_lp(&inst, inst.bob(j))?;
            ctx.out.table("scheme", &scheme_table(&inst, &scheme))?;
            println!("sender={} value={value}", inst.bobs()[j].name);
            Ok(("persuade optimal", ctx))
        }
        PersuadeCmd::Monopoly { instance: i, bob: key } => {
            let inst = instance(&i.instance, ctx.prior.as_deref())?;
            let j = bob(&inst, "bob", &key)?;
            let (scheme, value) = monopoly_deterministic_scheme(&inst, j, ctx.receiver)?;
            ctx.out.table("scheme", &scheme_table(&inst, &scheme))?;
            println!("sender={} value={value}", inst.bobs()[j].name);
            Ok(("persuade monopoly", ctx))
        }
        PersuadeCmd::Oblivious { instance: i, schemes } => {
            let inst = instance(&i.instance, ctx.prior.as_deref())?;
            let schemes = match schemes {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    let rows: Vec<Vec<Vec<f64>>> = serde_json::from_str(&text)
                        .with_context(|| format!("{} is not a list of scheme matrices", path.display()))?;
                    rows.into_iter()
                        .map(SignalingScheme::new)
                        .collect::<Result<Vec<_>, _>>()?
                }
                None => oblivious_optimal_schemes(&inst)?,
            };
            let outcome = oblivious_joint_evaluation(&inst, &schemes)?;
            let mut t = Table::new(["party", "utility"]);
            t.push(vec!["alice".into(), outcome.alice_utility.into()]);
            for (b, &u) in inst.bobs().iter().zip(&outcome.bob_utilities) {
                t.push(vec![b.name.as_str().into(), u.into()]);
            }
            ctx.out.table("oblivious", &t)?;
            let matrices: Vec<_> = schemes.iter().map(SignalingScheme::rows).collect();
            ctx.out.json("oblivious_schemes", &matrices)?;
            println!(
                "alice_utility={} first_best={}",
                outcome.alice_utility,
                alignmarket::first_best(&inst)
            );
            Ok(("persuade oblivious", ctx))
        }
    }
}
