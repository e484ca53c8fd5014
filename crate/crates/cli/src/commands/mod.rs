//! One module per subcommand. Each command reads its inputs through the
//! [`RunContext`], writes every output through it, and returns a summary.

mod evaluate;
mod label;
mod synth;
mod train;
mod transform;

use anyhow::Result;
use serde::{Deserialize, Serialize};

use crate::context::RunContext;
use crate::manifest::{CommandSpec, RunManifest};

pub use evaluate::{evaluate, predict, EvaluationSummary, ThresholdSummary};
pub use label::{label, velocity_histogram, LabelSummary, VELOCITY_BIN};
pub use synth::{synth, SynthSummary};
pub use train::{sweep_gamma, train, TrainSummary, CHECKPOINT_FILE};
pub use transform::transform;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandOutput {
    Synth(SynthSummary),
    Label(LabelSummary),
    Transform { signals: usize },
    Train(TrainSummary),
    SweepGamma(Vec<TrainSummary>),
    Predict { signals: usize },
    Evaluate(EvaluationSummary),
}

/// Run `spec` inside `ctx` and write the run manifest.
pub fn execute(mut ctx: RunContext, spec: &CommandSpec) -> Result<(CommandOutput, RunManifest)> {
    let output = match spec {
        CommandSpec::Synth => CommandOutput::Synth(synth(&mut ctx)?),
        CommandSpec::Label => CommandOutput::Label(label(&mut ctx)?),
        CommandSpec::Transform { fig4_passage } => CommandOutput::Transform {
            signals: transform(&mut ctx, fig4_passage.as_deref())?,
        },
        CommandSpec::Train => CommandOutput::Train(train(&mut ctx)?),
        CommandSpec::SweepGamma => CommandOutput::SweepGamma(sweep_gamma(&mut ctx)?),
        CommandSpec::Predict { split } => CommandOutput::Predict {
            signals: predict(&mut ctx, *split)?,
        },
        CommandSpec::Evaluate { split } => CommandOutput::Evaluate(evaluate(&mut ctx, *split)?),
    };
    let manifest = ctx.finish(spec.clone())?;
    Ok((output, manifest))
}
