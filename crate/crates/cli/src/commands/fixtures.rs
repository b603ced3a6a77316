use alignmarket::dialogue::{prior_fixture, PRIOR_NAMES};
use alignmarket::fixtures::{by_name, NAMES};
use anyhow::Result;

use super::{usage, Ctx};
use crate::args::FixturesCmd;
use crate::output::Table;

pub fn run(cmd: FixturesCmd, mut ctx: Ctx) -> Result<(&'static str, Ctx)> {
    match cmd {
        FixturesCmd::List => {
            let mut t = Table::new(["name", "kind", "shape"]);
            for name in NAMES {
                let inst = by_name(name)?;
                let shape = format!("{}x{}x{}", inst.num_states(), inst.num_actions(), inst.num_bobs());
                println!("{name}\tinstance\tstates x actions x senders = {shape}");
                t.push(vec![name.into(), "instance".into(), shape.into()]);
            }
            for name in PRIOR_NAMES {
                let p = prior_fixture(name)?;
                let shape = format!("{}x{}x{}", p.x_a().len(), p.x_b().len(), p.y().len());
                println!("{name}\tjoint_prior\tx_a x x_b x y = {shape}");
                t.push(vec![name.into(), "joint_prior".into(), shape.into()]);
            }
            ctx.out.table("fixtures", &t)?;
            Ok(("fixtures list", ctx))
        }
        FixturesCmd::Dump { name } => {
            let text = if NAMES.contains(&name.as_str()) {
                by_name(&name)?.to_json_string()
            } else if PRIOR_NAMES.contains(&name.as_str()) {
                prior_fixture(&name)?.to_json_string()
            } else {
                return Err(usage(
                    "name",
                    format!(
                        "unknown fixture {name:?}; known: {}, {}",
                        NAMES.join(", "),
                        PRIOR_NAMES.join(", ")
                    ),
                ));
            };
            ctx.out.raw(&format!("{name}.json"), (text + "\n").as_bytes())?;
            println!("{name}.json");
            Ok(("fixtures dump", ctx))
        }
    }
}
