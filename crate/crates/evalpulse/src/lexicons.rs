use std::fs;
use std::path::{Path, PathBuf};

use evalpulse_core::sentiment::{PnLexicon, VadLexicon};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconPaths {
    pub vad: PathBuf,
    pub pn: PathBuf,
    pub negators: Option<PathBuf>,
    pub boosters: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct Lexicons {
    pub vad: VadLexicon,
    pub pn: PnLexicon,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })
}

fn lexicon_err(path: &Path) -> impl Fn(evalpulse_core::Error) -> CliError + '_ {
    move |source| CliError::Lexicon { path: path.into(), source }
}

impl Lexicons {
    pub fn load(paths: &LexiconPaths) -> Result<Self, CliError> {
        let vad = VadLexicon::parse_tsv(&read(&paths.vad)?).map_err(lexicon_err(&paths.vad))?;
        let entries = PnLexicon::parse_entries(&read(&paths.pn)?).map_err(lexicon_err(&paths.pn))?;
        let negators = match &paths.negators {
            Some(p) => PnLexicon::parse_negators(&read(p)?),
            None => Vec::new(),
        };
        let boosters = match &paths.boosters {
            Some(p) => PnLexicon::parse_boosters(&read(p)?).map_err(lexicon_err(p))?,
            None => Vec::new(),
        };
        let pn = PnLexicon::new(entries, negators, boosters).map_err(lexicon_err(&paths.pn))?;
        Ok(Self { vad, pn })
    }
}
