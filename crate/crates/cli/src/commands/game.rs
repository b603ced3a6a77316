use alignmarket::market::{
    brd_on, committee_paths, committee_record, committee_sweep, default_max_rounds, equilibria_on, misalignment_on,
    CommitteeRecord,
};
use alignmarket::schemes::SchemeTable;
use alignmarket::PersuasionInstance;
use anyhow::Result;

use super::{committee, instance, member_names, scheme_label, usage, Ctx};
use crate::args::GameCmd;
use crate::output::Table;

pub fn run(cmd: GameCmd, mut ctx: Ctx) -> Result<(&'static str, Ctx)> {
    match cmd {
        GameCmd::Brd {
            committee: c,
            max_rounds,
        } => {
            let inst = instance(&c.instance.instance, ctx.prior.as_deref())?;
            let members = committee(&inst, &c.committee)?;
            let table = SchemeTable::build(&inst, ctx.receiver)?;
            let cap = max_rounds.unwrap_or_else(|| default_max_rounds(&table, members.len()));
            if cap == 0 {
                return Err(usage("max-rounds", "must be at least 1"));
            }
            let t = brd_on(&table, &members, cap)?;
            let mut out = Table::new(["round", "deviator", "selected", "alice_utility", "scheme"]);
            for s in &t.steps {
                out.push(vec![
                    s.round.into(),
                    s.deviator.map_or(String::new(), |j| inst.bobs()[j].name.clone()).into(),
                    inst.bobs()[s.selected].name.as_str().into(),
                    s.alice_utility.into(),
                    scheme_label(&inst, &s.scheme).into(),
                ]);
            }
            ctx.out.table("brd", &out)?;
            println!(
                "converged={} rounds={} alice_utility={} scheme={}",
                t.converged,
                t.rounds,
                t.alice_utility(),
                scheme_label(&inst, &table.map(t.final_index))
            );
            t.into_result()?;
            Ok(("game brd", ctx))
        }
        GameCmd::Enumerate { committee: c } => {
            let inst = instance(&c.instance.instance, ctx.prior.as_deref())?;
            let members = committee(&inst, &c.committee)?;
            let table = SchemeTable::build(&inst, ctx.receiver)?;
            let report = equilibria_on(&table, &members);
            let mut header = vec!["scheme_index".to_string(), "scheme".into(), "alice_utility".into()];
            header.extend(members.iter().map(|&j| format!("u_{}", inst.bobs()[j].name)));
            let mut out = Table::new(header);
            for s in &report.stable {
                let mut row = vec![s.index.into(), scheme_label(&inst, &s.map).into(), s.alice.into()];
                row.extend(s.members.iter().map(|&v| v.into()));
                out.push(row);
            }
            ctx.out.table("equilibria", &out)?;
            println!(
                "stable={} of {} min_alice_utility={} argmin={}",
                report.stable.len(),
                report.scheme_count,
                report.min_alice_utility,
                scheme_label(&inst, &report.argmin_scheme)
            );
            Ok(("game enumerate", ctx))
        }
        GameCmd::Misalign { committee: c } => {
            let inst = instance(&c.instance.instance, ctx.prior.as_deref())?;
            let members = committee(&inst, &c.committee)?;
            let table = SchemeTable::build(&inst, ctx.receiver)?;
            let report = equilibria_on(&table, &members);
            let score = misalignment_on(&inst, &members, &report)?;
            let mut out = Table::new(["sender", "weight"]);
            for (&j, &w) in members.iter().zip(&score.weights) {
                out.push(vec![inst.bobs()[j].name.as_str().into(), w.into()]);
            }
            ctx.out.table("misalign", &out)?;
            let mut outcomes = Table::new(["kind", "state", "action"]);
            for (kind, set) in [
                ("equilibrium", &score.equilibrium_outcomes),
                ("optimal", &score.optimal_outcomes),
            ] {
                for (a, y) in set.iter() {
                    outcomes.push(vec![
                        kind.into(),
                        inst.states()[y].as_str().into(),
                        inst.actions()[a].as_str().into(),
                    ]);
                }
            }
            ctx.out.table("misalign_outcomes", &outcomes)?;
            println!("epsilon={} offset={}", score.epsilon, score.offset);
            Ok(("game misalign", ctx))
        }
        GameCmd::Paths { instance: i, paths } => {
            if paths == 0 {
                return Err(usage("paths", "must be at least 1"));
            }
            let inst = instance(&i.instance, ctx.prior.as_deref())?;
            let recs = committee_paths(&inst, paths, ctx.seed, ctx.receiver)?;
            let mut out = Table::new([
                "path_id",
                "k",
                "added",
                "committee_id",
                "min_ne_utility",
                "epsilon",
                "bound",
                "first_best",
            ]);
            for r in &recs {
                out.push(vec![
                    r.path_id.into(),
                    r.k.into(),
                    inst.bobs()[r.added].name.as_str().into(),
                    r.committee_id.into(),
                    r.min_ne_utility.into(),
                    r.epsilon.into(),
                    r.bound.into(),
                    r.first_best.into(),
                ]);
            }
            ctx.out.table("fig5", &out)?;
            println!("paths={paths} records={}", recs.len());
            Ok(("game paths", ctx))
        }
        GameCmd::Bound { committee: c, sweep } => {
            let inst = instance(&c.instance.instance, ctx.prior.as_deref())?;
            let records = if sweep {
                committee_sweep(&inst, ctx.receiver)?
            } else {
                let members = committee(&inst, &c.committee)?;
                let table = SchemeTable::build(&inst, ctx.receiver)?;
                vec![committee_record(&inst, &table, &members)?]
            };
            ctx.out.table("bound", &bound_table(&inst, &records))?;
            if sweep {
                let mut fig3 = Table::new(["committee_id", "k", "epsilon", "min_ne_utility", "bound"]);
                let mut fig4 = Table::new(["committee_id", "k", "epsilon", "brd_utility", "min_ne_utility"]);
                for r in &records {
                    fig3.push(vec![
                        r.committee_id.into(),
                        r.k.into(),
                        r.epsilon.into(),
                        r.min_ne_utility.into(),
                        r.bound.into(),
                    ]);
                    fig4.push(vec![
                        r.committee_id.into(),
                        r.k.into(),
                        r.epsilon.into(),
                        r.brd_utility.into(),
                        r.min_ne_utility.into(),
                    ]);
                }
                ctx.out.table("fig3", &fig3)?;
                ctx.out.table("fig4", &fig4)?;
                let violated = records.iter().filter(|r| !r.satisfied).count();
                println!("committees={} violated={violated}", records.len());
            } else {
                let r = &records[0];
                println!(
                    "first_best={} epsilon={} bound={} min_ne_utility={} satisfied={}",
                    r.first_best, r.epsilon, r.bound, r.min_ne_utility, r.satisfied
                );
            }
            Ok(("game bound", ctx))
        }
    }
}

fn bound_table(inst: &PersuasionInstance, records: &[CommitteeRecord]) -> Table {
    let mut t = Table::new([
        "committee_id",
        "members",
        "k",
        "epsilon",
        "min_ne_utility",
        "brd_utility",
        "brd_converged",
        "bound",
        "first_best",
        "satisfied",
        "slack",
        "tight",
        "stable_count",
    ]);
    for r in records {
        t.push(vec![
            r.committee_id.into(),
            member_names(inst, &r.members).into(),
            r.k.into(),
            r.epsilon.into(),
            r.min_ne_utility.into(),
            r.brd_utility.into(),
            r.brd_converged.into(),
            r.bound.into(),
            r.first_best.into(),
            r.satisfied.into(),
            r.slack.into(),
            r.tight.into(),
            r.stable_count.into(),
        ]);
    }
    t
}
