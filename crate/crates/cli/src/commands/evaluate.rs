use std::io::BufRead;

use anyhow::Result;
use gec_core::corpus::Sentence;
use gec_core::eval::{extract_edits, parse_gold, score, Scores};
use gec_core::pipeline::{read_edits, Edit};

use crate::io::open;
use crate::{input_error, EvaluateArgs};

fn read_sentences(path: &std::path::Path) -> Result<Vec<Sentence>> {
    let mut out = Vec::new();
    for line in open(path)?.lines() {
        let line = line.map_err(|e| input_error!("{}: {e}", path.display()))?;
        if !line.trim().is_empty() {
            out.push(Sentence::from_pretokenized(&line));
        }
    }
    Ok(out)
}

pub fn format_scores(label: &str, s: &Scores) -> String {
    format!(
        "{label:<15} P {:.4} R {:.4} F0.5 {:.4}  (tp {}, fp {}, fn {})",
        s.precision, s.recall, s.f_half, s.tp, s.fp, s.fn_
    )
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let gold =
        parse_gold(open(&args.gold)?).map_err(|e| input_error!("{}: {e}", args.gold.display()))?;
    let originals = match &args.original {
        Some(p) => {
            let o = read_sentences(p)?;
            if o.len() != gold.len() {
                return Err(input_error!(
                    "{} original sentences but {} gold sentences",
                    o.len(),
                    gold.len()
                ));
            }
            o
        }
        None => gold.iter().map(|g| g.sentence.clone()).collect(),
    };

    let system: Vec<Vec<Edit>> = if let Some(path) = &args.corrected {
        let corrected = read_sentences(path)?;
        if corrected.len() != originals.len() {
            return Err(input_error!(
                "{} corrected sentences but {} gold sentences",
                corrected.len(),
                originals.len()
            ));
        }
        originals
            .iter()
            .zip(&corrected)
            .map(|(o, c)| extract_edits(o, c))
            .collect()
    } else {
        let path = args
            .edits
            .as_ref()
            .expect("clap requires --corrected or --edits");
        let mut grouped = vec![Vec::new(); originals.len()];
        for (index, edit) in
            read_edits(open(path)?).map_err(|e| input_error!("{}: {e}", path.display()))?
        {
            let slot = grouped.get_mut(index).ok_or_else(|| {
                input_error!(
                    "edit for sentence {index}, but there are only {} gold sentences",
                    originals.len()
                )
            })?;
            slot.push(edit);
        }
        grouped
    };

    let gold_edits: Vec<Vec<Edit>> = gold.into_iter().map(|g| g.edits).collect();
    let report = score(&system, &gold_edits).map_err(|e| input_error!("{e}"))?;
    println!("{}", format_scores("overall", &report.overall));
    for (t, s) in &report.per_type {
        println!("{}", format_scores(t.name(), s));
    }
    Ok(())
}
