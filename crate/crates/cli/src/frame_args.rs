use std::path::PathBuf;

use clap::Args;
use ost_core::frames::{read_frame, read_seed, Frame, GaborForm, DENSE_GABOR_MAX_N};

use crate::Failure;

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false, id = "frame_source")]
pub struct FrameSource {
    /// Gabor frame from the Alltop seed (prime N >= 5, p = N^2).
    #[arg(long, value_name = "N")]
    pub alltop: Option<usize>,
    /// N x P Gaussian design with N(0, 1/N) entries.
    #[arg(long, num_args = 2, value_names = ["N", "P"])]
    pub gaussian: Option<Vec<usize>>,
    /// Frame in the text format written by `ost frame`.
    #[arg(long, value_name = "PATH")]
    pub frame_file: Option<PathBuf>,
    /// Gabor frame from a seed file (one `re im` pair per line).
    #[arg(long, value_name = "PATH")]
    pub gabor_seed: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct FrameArgs {
    #[command(flatten)]
    pub source: FrameSource,
    /// Seed for --gaussian.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rescale Gaussian columns to unit norm.
    #[arg(long)]
    pub normalize: bool,
}

impl FrameArgs {
    /// Builds the frame; `force_normalize` overrides --normalize for
    /// commands that require unit-norm columns.
    pub fn build(&self, force_normalize: bool) -> Result<Frame, Failure> {
        let s = &self.source;
        if let Some(n) = s.alltop {
            return Ok(Frame::alltop(n)?);
        }
        if let Some(dims) = &s.gaussian {
            return Ok(Frame::gaussian(dims[0], dims[1], self.seed, self.normalize || force_normalize)?);
        }
        if let Some(path) = &s.frame_file {
            return Ok(read_frame(path)?);
        }
        if let Some(path) = &s.gabor_seed {
            let g = read_seed(path)?;
            let form = if g.len() > DENSE_GABOR_MAX_N {
                GaborForm::Operator
            } else {
                GaborForm::Explicit
            };
            return Ok(Frame::gabor(&g, form)?);
        }
        Err(Failure::Usage("no frame source given".into()))
    }

    pub fn alltop_n(&self) -> Option<usize> {
        self.source.alltop
    }
}
