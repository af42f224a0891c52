//! Reinforcement learning over the slicing environment: state encoding,
//! masked factorized policy, GAE, clipped-surrogate updates, training and
//! evaluation loops, and policy checkpoints.

pub mod actor;
pub mod checkpoint;
pub mod features;
pub mod gae;
pub mod ppo;
pub mod train;

pub use actor::{ActionMask, ActionSample, PolicyNet};
pub use train::{
    evaluate, run_eval_episodes, train, ClassDefaultPrefs, CurvePoint, EvalReport, FixedPrefs,
    PreferenceProvider, TrainOutput, UniformPrefs, Variant,
};
