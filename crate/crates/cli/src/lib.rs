//! Job parsing, pipeline driving, and report rendering for the `mtorus`
//! binary.
//!
//! Input format (line oriented, `#` starts a comment):
//!
//! ```text
//! rank = 2
//! map a -> aa
//! map b -> a
//! ```
//!
//! Generators are `a..z` up to the declared rank (1..=26); `1` or an empty
//! word denotes the identity image. Every generator needs exactly one map
//! line.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use mtorus::endo::Endomorphism;
use mtorus::folding::ExpressionResult;
use mtorus::hnn::{present_mapping_torus, verify_isomorphism, GeneratorNaming, VerifyOptions};
use mtorus::torus::injectivize;
use mtorus::words::{Rank, Word};

/// Parse failure, pointing at the offending input line.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct SpecError {
    pub line: usize,
    pub message: String,
}

/// A parsed job: the ambient rank and one image per generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobSpec {
    pub rank: usize,
    pub images: Vec<Word>,
}

impl JobSpec {
    pub fn endomorphism(&self) -> Endomorphism {
        Endomorphism::new(Rank(self.rank), self.images.clone()).expect("validated at parse time")
    }
}

fn generator_letter(index: usize) -> char {
    (b'a' + (index - 1) as u8) as char
}

/// Parse the line-oriented job format. The `rank` line must come first;
/// every generator up to the rank needs exactly one `map` line.
pub fn parse_spec(text: &str) -> Result<JobSpec, SpecError> {
    let mut rank: Option<usize> = None;
    let mut images: Vec<Option<Word>> = Vec::new();

    for (number, raw) in text.lines().enumerate() {
        let line = number + 1;
        let err = |message: String| SpecError { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }

        if let Some(rest) = content.strip_prefix("rank") {
            let rest = rest.trim();
            let value = rest
                .strip_prefix('=')
                .ok_or_else(|| err("expected `rank = N`".into()))?
                .trim();
            let r: usize = value
                .parse()
                .map_err(|_| err(format!("invalid rank {value:?}")))?;
            if !(1..=26).contains(&r) {
                return Err(err(format!("rank {r} outside 1..=26")));
            }
            if rank.replace(r).is_some() {
                return Err(err("duplicate rank line".into()));
            }
            images = vec![None; r];
            continue;
        }

        if let Some(rest) = content.strip_prefix("map") {
            let r = rank.ok_or_else(|| err("map line before rank line".into()))?;
            let rest = rest.trim();
            let (gen_part, word_part) = rest
                .split_once("->")
                .ok_or_else(|| err("expected `map <letter> -> <word>`".into()))?;
            let gen_part = gen_part.trim();
            let mut chars = gen_part.chars();
            let (Some(letter), None) = (chars.next(), chars.next()) else {
                return Err(err(format!("expected a single generator letter, got {gen_part:?}")));
            };
            if !letter.is_ascii_lowercase() {
                return Err(err(format!("unknown generator {letter:?}")));
            }
            let index = letter as usize - 'a' as usize + 1;
            if index > r {
                return Err(err(format!("generator {letter:?} outside rank {r}")));
            }
            let word = Word::parse(Rank(r), word_part.trim())
                .map_err(|e| err(format!("bad image for {letter:?}: {e}")))?;
            if images[index - 1].replace(word).is_some() {
                return Err(err(format!("duplicate map line for {letter:?}")));
            }
            continue;
        }

        return Err(err(format!("unrecognized line {content:?}")));
    }

    let rank = rank.ok_or(SpecError { line: 1, message: "missing rank line".into() })?;
    let mut resolved = Vec::with_capacity(rank);
    for (i, slot) in images.into_iter().enumerate() {
        match slot {
            Some(w) => resolved.push(w),
            None => {
                return Err(SpecError {
                    line: 1,
                    message: format!("missing map line for {:?}", generator_letter(i + 1)),
                })
            }
        }
    }
    Ok(JobSpec { rank, images: resolved })
}

/// Flags controlling one run.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub verify: bool,
    pub surjectivity: bool,
    pub max_wit_len: usize,
    pub budget: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            verify: true,
            surjectivity: true,
            max_wit_len: 6,
            budget: mtorus::torus::DEFAULT_LETTER_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionsEcho {
    pub verify: bool,
    pub surjectivity: bool,
    pub max_wit_len: usize,
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecEcho {
    pub rank: usize,
    pub images: BTreeMap<String, String>,
    /// Reserved for a future fuzz harness; always null today.
    pub seed: Option<u64>,
    pub options: OptionsEcho,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checks {
    pub injectivity_certificate: bool,
    pub relators_trivial: Option<bool>,
    pub kernel_witnesses_checked: Option<usize>,
    pub kernel_witnesses_passed: Option<usize>,
    /// One entry per basis word: an expression over symbols `y1..yr`
    /// standing for the `phi^k` images, or `"UNKNOWN"`.
    pub surjectivity_witnesses: Option<Vec<String>>,
}

/// The full machine-readable result. Field order is the JSON key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub spec: SpecEcho,
    pub rank_sequence: Vec<usize>,
    pub k: usize,
    pub f1_rank: usize,
    pub f1_basis: Vec<String>,
    pub psi: Vec<String>,
    pub m_phi: String,
    pub m_psi: String,
    pub checks: Checks,
}

/// Optional debug dumps, printed to stderr by the binary.
#[derive(Debug, Clone, Default)]
pub struct GraphDumps {
    pub f1_graph: String,
    pub psi_image_graph: String,
}

fn symbol_text(w: &Word, lower: char, upper: char) -> String {
    if w.is_identity() {
        return String::new();
    }
    w.letters()
        .iter()
        .map(|l| format!("{}{}", if l.is_inverse() { upper } else { lower }, l.index()))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Run the pipeline and assemble the report. Budget overruns surface as
/// [`mtorus::Error::BudgetExceeded`].
pub fn run(job: &JobSpec, options: &RunOptions) -> mtorus::Result<(Report, GraphDumps)> {
    let phi = job.endomorphism();
    let result = injectivize(&phi, options.budget)?;

    let m_phi = present_mapping_torus(&phi)?;
    let m_psi = present_mapping_torus(&result.psi)?;

    let checks = if options.verify {
        let verify_options = VerifyOptions {
            max_witness_len: options.max_wit_len,
            surjectivity: options.surjectivity,
            letter_budget: options.budget,
            ..VerifyOptions::default()
        };
        let report = verify_isomorphism(&phi, &result, &verify_options)?;
        let witnesses = report.surjectivity.map(|outcomes| {
            outcomes
                .iter()
                .map(|o| match o {
                    ExpressionResult::Expressed(sym) => symbol_text(sym, 'y', 'Y'),
                    ExpressionResult::Unknown => "UNKNOWN".to_string(),
                })
                .collect()
        });
        Checks {
            injectivity_certificate: report.injectivity_certificate,
            relators_trivial: Some(report.relators_trivial.iter().all(|&b| b)),
            kernel_witnesses_checked: Some(report.kernel_witnesses.len()),
            kernel_witnesses_passed: Some(
                report.kernel_collapsed.iter().filter(|&&b| b).count(),
            ),
            surjectivity_witnesses: witnesses,
        }
    } else {
        Checks {
            injectivity_certificate: result.psi_image_graph.rank() == result.f1_rank(),
            relators_trivial: None,
            kernel_witnesses_checked: None,
            kernel_witnesses_passed: None,
            surjectivity_witnesses: None,
        }
    };

    let images = (1..=job.rank)
        .map(|i| (generator_letter(i).to_string(), phi.image(i).to_text()))
        .collect();
    let report = Report {
        spec: SpecEcho {
            rank: job.rank,
            images,
            seed: None,
            options: OptionsEcho {
                verify: options.verify,
                surjectivity: options.surjectivity,
                max_wit_len: options.max_wit_len,
                budget: options.budget,
            },
        },
        rank_sequence: result.trace.ranks.clone(),
        k: result.k,
        f1_rank: result.f1_rank(),
        f1_basis: result.f1_basis.words().iter().map(Word::to_text).collect(),
        psi: result.psi.images().iter().map(Word::to_indexed_text).collect(),
        m_phi: m_phi.display_with(GeneratorNaming::Letters),
        m_psi: m_psi.display_with(GeneratorNaming::Indexed),
        checks,
    };
    let dumps = GraphDumps {
        f1_graph: result.f1_basis.graph().dump(),
        psi_image_graph: result.psi_image_graph.dump(),
    };
    Ok((report, dumps))
}

/// True when every present check passed; UNKNOWN witnesses do not fail.
pub fn all_checks_pass(report: &Report) -> bool {
    let c = &report.checks;
    c.injectivity_certificate
        && c.relators_trivial != Some(false)
        && c.kernel_witnesses_checked == c.kernel_witnesses_passed
}

/// Process exit code: 0 pass, 2 verification failure. (1 is input error,
/// 3 budget exhaustion; both are decided by the caller.)
pub fn exit_code(report: &Report) -> i32 {
    if all_checks_pass(report) { 0 } else { 2 }
}

fn display_or_one(text: &str) -> &str {
    if text.is_empty() { "1" } else { text }
}

/// Human-readable rendering; identities print as `1`.
pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };

    line(format!("rank            {}", report.spec.rank));
    for (letter, image) in &report.spec.images {
        line(format!("map             {letter} -> {}", display_or_one(image)));
    }
    line(format!(
        "rank sequence   [{}]",
        report.rank_sequence.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")
    ));
    line(format!("k               {}", report.k));
    line(format!("F1 rank         {}", report.f1_rank));
    for (j, b) in report.f1_basis.iter().enumerate() {
        line(format!("F1 basis        x{} = {}", j + 1, display_or_one(b)));
    }
    for (j, image) in report.psi.iter().enumerate() {
        line(format!("psi             x{} -> {}", j + 1, display_or_one(image)));
    }
    line(format!("M(phi)          {}", report.m_phi));
    line(format!("M(psi)          {}", report.m_psi));

    line("checks".to_string());
    let c = &report.checks;
    line(format!(
        "  injectivity certificate   {}",
        if c.injectivity_certificate { "pass" } else { "FAIL" }
    ));
    match c.relators_trivial {
        Some(ok) => line(format!("  relators trivial          {}", if ok { "pass" } else { "FAIL" })),
        None => line("  relators trivial          skipped".to_string()),
    }
    match (c.kernel_witnesses_checked, c.kernel_witnesses_passed) {
        (Some(checked), Some(passed)) => line(format!(
            "  kernel witnesses          {} ({passed}/{checked} collapse)",
            if passed == checked { "pass" } else { "FAIL" }
        )),
        _ => line("  kernel witnesses          skipped".to_string()),
    }
    match &c.surjectivity_witnesses {
        Some(entries) => {
            if entries.is_empty() {
                line("  surjectivity witnesses    none needed (F1 is trivial)".to_string());
            }
            for (j, e) in entries.iter().enumerate() {
                line(format!("  surjectivity witnesses    x{} = {}", j + 1, display_or_one(e)));
            }
        }
        None => line("  surjectivity witnesses    skipped".to_string()),
    }

    let mut verdict = String::new();
    write!(verdict, "verdict: {}", if all_checks_pass(report) { "PASS" } else { "FAIL" }).unwrap();
    line(verdict);
    out
}

pub fn render_json(report: &Report) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_accepts_the_documented_format() {
        let job = parse_spec("rank = 2\nmap a -> aa\nmap b -> a\n").unwrap();
        assert_eq!(job.rank, 2);
        assert_eq!(job.images[0], Word::parse(Rank(2), "aa").unwrap());
        assert_eq!(job.images[1], Word::parse(Rank(2), "a").unwrap());

        let job = parse_spec("# trivial image\nrank = 1\nmap a -> 1\n").unwrap();
        assert!(job.images[0].is_identity());
    }

    #[test]
    fn parse_rejects_bad_input() {
        let missing = parse_spec("rank = 2\nmap a -> aa\n").unwrap_err();
        assert!(missing.message.contains("missing map line for 'b'"));

        let dup = parse_spec("rank = 1\nmap a -> a\nmap a -> aa\n").unwrap_err();
        assert_eq!(dup.line, 3);

        let bad_rank = parse_spec("rank = 27\n").unwrap_err();
        assert_eq!(bad_rank.line, 1);

        let out_of_rank = parse_spec("rank = 1\nmap b -> a\n").unwrap_err();
        assert_eq!(out_of_rank.line, 2);

        let bad_word = parse_spec("rank = 1\nmap a -> ab\n").unwrap_err();
        assert_eq!(bad_word.line, 2);

        let no_rank = parse_spec("map a -> a\n").unwrap_err();
        assert!(no_rank.message.contains("before rank"));
    }

    #[test]
    fn reports_round_trip_through_json() {
        let job = parse_spec("rank = 2\nmap a -> aa\nmap b -> a\n").unwrap();
        let (report, _) = run(&job, &RunOptions::default()).unwrap();
        let json = render_json(&report);
        let back: Report = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn doubling_report_contents() {
        let job = parse_spec("rank = 2\nmap a -> aa\nmap b -> a\n").unwrap();
        let (report, dumps) = run(&job, &RunOptions::default()).unwrap();
        assert_eq!(report.rank_sequence, vec![2, 1, 1]);
        assert_eq!(report.k, 1);
        assert_eq!(report.f1_rank, 1);
        assert_eq!(report.f1_basis, vec!["a"]);
        assert_eq!(report.psi, vec!["x1 x1"]);
        assert_eq!(report.m_phi, "< a, b, t | T a t = a a, T b t = a >");
        assert_eq!(report.m_psi, "< x1, t | T x1 t = x1 x1 >");
        assert!(report.checks.injectivity_certificate);
        assert_eq!(report.checks.relators_trivial, Some(true));
        assert_eq!(exit_code(&report), 0);
        assert!(dumps.f1_graph.starts_with("base v0\n"));
    }

    #[test]
    fn exit_codes_reflect_failures() {
        let job = parse_spec("rank = 1\nmap a -> aa\n").unwrap();
        let (mut report, _) = run(&job, &RunOptions::default()).unwrap();
        assert_eq!(exit_code(&report), 0);
        report.checks.relators_trivial = Some(false);
        assert_eq!(exit_code(&report), 2);
        report.checks.relators_trivial = Some(true);
        report.checks.kernel_witnesses_passed = Some(0);
        report.checks.kernel_witnesses_checked = Some(3);
        assert_eq!(exit_code(&report), 2);
    }

    #[test]
    fn budget_overrun_is_reported() {
        let job = parse_spec("rank = 2\nmap a -> ab\nmap b -> ab\n").unwrap();
        let err = run(&job, &RunOptions { budget: 6, ..RunOptions::default() }).unwrap_err();
        assert!(matches!(err, mtorus::Error::BudgetExceeded { .. }));
    }
}
