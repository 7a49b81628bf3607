//! Corpus data model, selection, restriction, file formats and the synthetic
//! generator.

mod io;
mod restrict;
mod spline;
pub mod synth;
mod types;

pub use io::{
    csv_header, load_corpus, load_corpus_collecting, read_manifest, read_pitch_csv, write_corpus, write_manifest,
    write_pitch_csv, LoadOptions, LoadReport, Manifest, PitchEntry, PitchKind, PitcherEntry, PrepLogEntry,
    MANIFEST_FORMAT, MANIFEST_VERSION,
};
pub use restrict::{restrict, Region, RestrictedSample, WindowSpec};
pub use synth::{synthesize_corpus, SynthConfig, SyntheticCorpus};
pub use types::{select_top5, Corpus, MotionSample, PitcherRecord, PITCHES_PER_PITCHER, SPEED_BAND_MPH};
