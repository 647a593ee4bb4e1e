//! Corpus and lexicon file formats.
//!
//! Corpus files are UTF-8 text, one pair per line, tab-separated:
//!
//! ```text
//! action_id<TAB>agent_id<TAB>patient_id<TAB>tok tok tok
//! ```
//!
//! where the last field is the utterance's token ids joined by single
//! spaces. Lexicon files map ids to display strings, one `id<TAB>string`
//! per line. Both formats are stable.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Inventory, Meaning, Utterance};
use crate::{Error, Result};

pub fn write_corpus(path: &Path, corpus: &[(Meaning, Utterance)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (m, u) in corpus {
        let toks: Vec<String> = u.tokens().iter().map(|t| t.to_string()).collect();
        writeln!(w, "{}\t{}\t{}\t{}", m.action, m.agent, m.patient, toks.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_corpus(path: &Path) -> Result<Vec<(Meaning, Utterance)>> {
    let r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::Schema(format!(
                "{}:{}: expected 4 tab-separated fields, got {}",
                path.display(),
                lineno + 1,
                fields.len()
            )));
        }
        let parse_id = |s: &str| {
            s.parse::<usize>().map_err(|_| {
                Error::Schema(format!(
                    "{}:{}: bad id {:?}",
                    path.display(),
                    lineno + 1,
                    s
                ))
            })
        };
        let meaning = Meaning {
            action: parse_id(fields[0])?,
            agent: parse_id(fields[1])?,
            patient: parse_id(fields[2])?,
        };
        let tokens = if fields[3].is_empty() {
            Vec::new()
        } else {
            fields[3]
                .split(' ')
                .map(parse_id)
                .collect::<Result<Vec<usize>>>()?
        };
        out.push((meaning, Utterance::new(tokens)));
    }
    Ok(out)
}

pub fn write_lexicon(path: &Path, inv: &Inventory) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for id in 0..=inv.eos_id() {
        writeln!(w, "{}\t{}", id, inv.display(id))?;
    }
    w.flush()?;
    Ok(())
}
