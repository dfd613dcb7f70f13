//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pagehash_core::assess::{MSG_CLEAN, MSG_NO_HASHES};
use pagehash_core::canonical::{canonical_serialize, ExclusionSet};
use pagehash_core::hashing::{chunk_content, merkle_build, sha256_hex, sha3_256_hex, CHUNK_SIZE};
use pagehash_core::pdf::{graph_equivalent, write_incremental, Dictionary, PdfObject, Stream};
use pagehash_core::tamperlab::{
    apply_tamper_bytes, corpus, make_baseline, make_baseline_with, replace_page_content,
    BaselineOptions, TamperKind, TamperSpec,
};
use pagehash_core::{assess, parse, protect, write, AssessmentReport, Error, PdfDocument, Verdict};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn variants() -> Vec<BaselineOptions> {
    let mut out = Vec::new();
    for pages in 0..=10 {
        for compressed in [false, true] {
            for with_info in [true, false] {
                out.push(BaselineOptions {
                    pages,
                    paragraphs_per_page: 1 + pages % 5,
                    compressed,
                    with_info,
                    reversed_keys: pages % 2 == 1,
                });
            }
        }
    }
    out
}

/// Protected three-page baselines, plain and compressed, as file bytes.
fn protected_three_page() -> Vec<(&'static str, Vec<u8>)> {
    [("plain", false), ("compressed", true)]
        .into_iter()
        .map(|(label, compressed)| {
            let doc = make_baseline_with(&BaselineOptions {
                compressed,
                ..BaselineOptions::new(3, 4)
            });
            (label, write(&protect(&doc).unwrap().0).unwrap())
        })
        .collect()
}

fn same_graph(a: &PdfDocument, b: &PdfDocument) -> bool {
    let root = |d: &PdfDocument| PdfObject::Reference(d.root_ref);
    let info = match (a.info_ref, b.info_ref) {
        (Some(x), Some(y)) => graph_equivalent(a, &x.into(), b, &y.into()),
        (x, y) => x.is_none() && y.is_none(),
    };
    info && graph_equivalent(a, &root(a), b, &root(b))
}

/// Applies `spec`, checks that the final object graph really changed, and
/// assesses the result.
fn tamper_and_assess(bytes: &[u8], spec: &TamperSpec) -> Result<AssessmentReport, String> {
    let tampered = apply_tamper_bytes(bytes, spec).map_err(|e| format!("{spec:?}: {e}"))?;
    let before = parse(bytes).unwrap();
    let after = parse(&tampered).map_err(|e| format!("{spec:?}: reparse failed: {e}"))?;
    ensure!(
        !same_graph(&before, &after),
        "{:?} did not change the document",
        spec.kind
    );
    assess(&after).map_err(|e| e.to_string())
}

fn finding_pages(report: &AssessmentReport) -> BTreeSet<usize> {
    report.page_findings.iter().map(|f| f.page_number).collect()
}

fn c1_unprotected() -> Outcome {
    let mut files: Vec<(String, Vec<u8>)> = variants()
        .iter()
        .map(|o| (format!("{o:?}"), write(&make_baseline_with(o)).unwrap()))
        .collect();
    for entry in corpus().unwrap() {
        if matches!(entry.file_name.as_str(), "NoHash.pdf" | "Stripped_hash.pdf") {
            files.push((entry.file_name, entry.bytes));
        }
    }
    for (label, bytes) in &files {
        let report = assess(&parse(bytes).unwrap()).unwrap();
        ensure!(
            report.verdict == Verdict::Unprotected,
            "{label}: verdict {:?}",
            report.verdict
        );
        ensure!(
            report.messages == [MSG_NO_HASHES],
            "{label}: messages {:?}",
            report.messages
        );
    }
    ensure!(
        Error::HashesNotFound.to_string() == MSG_NO_HASHES,
        "error text differs"
    );
    Ok(format!("{} unprotected files", files.len()))
}

fn c2_text_page_two() -> Outcome {
    let mut cases = 0;
    for (label, bytes) in protected_three_page() {
        for kind in [
            TamperKind::TextAdd,
            TamperKind::TextUpdate,
            TamperKind::TextDelete,
        ] {
            let report = tamper_and_assess(&bytes, &TamperSpec::new(kind, [2]))?;
            ensure!(
                report.verdict == Verdict::Tampered,
                "{label} {kind:?}: {:?}",
                report.verdict
            );
            ensure!(
                finding_pages(&report) == BTreeSet::from([2]),
                "{label} {kind:?}: pages {:?}",
                finding_pages(&report)
            );
            let f = report.finding(2).unwrap();
            ensure!(
                !f.altered_chunks.is_empty(),
                "{label} {kind:?}: no altered chunk"
            );
            cases += 1;
        }
    }
    Ok(format!("{cases}/{cases} text tampers localized to page 2"))
}

fn c3_images_pages_two_three() -> Outcome {
    let mut cases = 0;
    for (label, bytes) in protected_three_page() {
        for kind in [
            TamperKind::ImageAdd,
            TamperKind::ImageReplace,
            TamperKind::ImageDelete,
        ] {
            let report = tamper_and_assess(&bytes, &TamperSpec::new(kind, [2, 3]))?;
            ensure!(
                report.verdict == Verdict::Tampered,
                "{label} {kind:?}: {:?}",
                report.verdict
            );
            ensure!(
                finding_pages(&report) == BTreeSet::from([2, 3]),
                "{label} {kind:?}: pages {:?}",
                finding_pages(&report)
            );
            cases += 1;
        }
    }
    Ok(format!(
        "{cases}/{cases} image tampers found on exactly pages 2 and 3"
    ))
}

fn c4_metadata() -> Outcome {
    let mut cases = 0;
    for compressed in [false, true] {
        for with_info in [true, false] {
            let doc = make_baseline_with(&BaselineOptions {
                compressed,
                with_info,
                ..BaselineOptions::new(3, 2)
            });
            let bytes = write(&protect(&doc).unwrap().0).unwrap();
            for kind in [TamperKind::MetaAdd, TamperKind::MetaUpdate] {
                let report = tamper_and_assess(&bytes, &TamperSpec::new(kind, []))?;
                let tag = format!("{kind:?} compressed={compressed} info={with_info}");
                ensure!(
                    report.verdict == Verdict::Tampered,
                    "{tag}: {:?}",
                    report.verdict
                );
                ensure!(report.info_mismatch, "{tag}: info_mismatch not set");
                ensure!(
                    report.page_findings.is_empty(),
                    "{tag}: page findings {:?}",
                    report.page_findings
                );
                cases += 1;
            }
        }
    }
    Ok(format!(
        "{cases}/{cases} metadata edits flagged with no page findings"
    ))
}

fn c5_soundness() -> Outcome {
    let all = variants();
    for o in &all {
        let (protected, _) = protect(&make_baseline_with(o)).unwrap();
        let report = assess(&parse(&write(&protected).unwrap()).unwrap()).unwrap();
        ensure!(
            report.verdict == Verdict::Clean,
            "{o:?}: {:?}",
            report.messages
        );
        ensure!(
            report.messages == [MSG_CLEAN],
            "{o:?}: {:?}",
            report.messages
        );
    }
    Ok(format!(
        "{} baseline variants clean, 0 false positives",
        all.len()
    ))
}

fn c6_merkle_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..1000 {
        let n = rng.random_range(1..=33);
        let chunks: Vec<Vec<u8>> = (0..n)
            .map(|_| {
                let len = rng.random_range(0..=300);
                (0..len).map(|_| rng.random()).collect()
            })
            .collect();
        let root = merkle_build(&chunks).unwrap().root;
        let oracle = common::merkle_oracle(&chunks);
        ensure!(
            root.as_str() == oracle,
            "trial {trial}: {} != {oracle}",
            root
        );
    }
    Ok("1000/1000 roots equal the recursive oracle".into())
}

fn c7_localization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..200 {
        let opts = BaselineOptions {
            compressed: rng.random(),
            ..BaselineOptions::new(rng.random_range(1..=4), rng.random_range(1..=8))
        };
        let (mut doc, _) = protect(&make_baseline_with(&opts)).unwrap();
        let index = rng.random_range(0..doc.page_count());
        let mut content = doc.page_view(index).unwrap().content;
        let chunk_count = chunk_content(&content).len();
        let k = rng.random_range(0..chunk_count);
        let end = content.len().min((k + 1) * CHUNK_SIZE);
        let start = rng.random_range(k * CHUNK_SIZE..end);
        let len = rng.random_range(1..=(end - start).min(16));
        for b in &mut content[start..start + len] {
            *b ^= rng.random_range(1..=255u8);
        }
        replace_page_content(&mut doc, index, content).unwrap();
        let report = assess(&parse(&write(&doc).unwrap()).unwrap()).unwrap();
        ensure!(
            report.page_findings.len() == 1,
            "trial {trial}: findings {:?}",
            report.page_findings
        );
        let f = &report.page_findings[0];
        ensure!(
            f.page_number == index + 1 && f.altered_chunks == [k] && !f.leaf_count_changed,
            "trial {trial}: expected page {} chunk {k}, got {f:?}",
            index + 1
        );
    }
    Ok("200/200 rewrites reported exactly the mutated chunk".into())
}

fn c8_hash_vectors() -> Outcome {
    let vectors = [
        (
            "sha256",
            "",
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855",
        ),
        (
            "sha256",
            "abc",
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad",
        ),
        (
            "sha3-256",
            "",
            "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a",
        ),
        (
            "sha3-256",
            "abc",
            "3a985da74fe225b2045c172d6bd390bd855f086e3e9d525b46bfe24511431532",
        ),
    ];
    for (alg, input, expected) in vectors {
        let got = match alg {
            "sha256" => sha256_hex(input.as_bytes()),
            _ => sha3_256_hex(input.as_bytes()),
        };
        ensure!(got.as_str() == expected, "{alg}({input:?}) = {got}");
    }
    Ok("4/4 vectors".into())
}

const DICT_KEYS: &[&str] = &[
    "Type",
    "Subtype",
    "Resources",
    "MediaBox",
    "Rotate",
    "Font",
    "Name",
    "Length",
    "K",
    "Q",
    "W",
    "Parent",
    "Contents",
    "Annots",
    "hashobject",
    "Group",
];

fn random_value(rng: &mut ChaCha8Rng, depth: u32) -> PdfObject {
    let top = if depth >= 3 { 6 } else { 8 };
    match rng.random_range(0..top) {
        0 => PdfObject::Null,
        1 => PdfObject::Boolean(rng.random()),
        2 => PdfObject::Integer(rng.random_range(-100_000..100_000)),
        3 => PdfObject::Real(f64::from(rng.random_range(-100_000..100_000i32)) / 64.0),
        4 => PdfObject::String((0..rng.random_range(0..10)).map(|_| rng.random()).collect()),
        5 => PdfObject::name(&format!("N{}", rng.random_range(0..1000))),
        6 => PdfObject::Array(
            (0..rng.random_range(0..4))
                .map(|_| random_value(rng, depth + 1))
                .collect(),
        ),
        _ => PdfObject::Dictionary(random_dict(rng, depth + 1)),
    }
}

fn random_dict(rng: &mut ChaCha8Rng, depth: u32) -> Dictionary {
    let n = rng.random_range(0..6);
    (0..n)
        .map(|_| (*DICT_KEYS.choose(rng).unwrap(), random_value(rng, depth)))
        .collect()
}

/// Same content, every dictionary rebuilt in a random insertion order.
fn shuffled(obj: &PdfObject, rng: &mut ChaCha8Rng) -> PdfObject {
    match obj {
        PdfObject::Dictionary(d) => PdfObject::Dictionary(shuffled_dict(d, rng)),
        PdfObject::Array(a) => PdfObject::Array(a.iter().map(|v| shuffled(v, rng)).collect()),
        other => other.clone(),
    }
}

fn shuffled_dict(d: &Dictionary, rng: &mut ChaCha8Rng) -> Dictionary {
    let mut entries: Vec<_> = d
        .iter()
        .map(|(k, v)| (k.clone(), shuffled(v, rng)))
        .collect();
    entries.shuffle(rng);
    entries.into_iter().collect()
}

/// A change that can never leave the value equal to what it was.
fn mutate(obj: &mut PdfObject, rng: &mut ChaCha8Rng) {
    match obj {
        PdfObject::Null => *obj = PdfObject::Integer(0),
        PdfObject::Boolean(b) => *b = !*b,
        PdfObject::Integer(i) => *i += 1,
        PdfObject::Real(r) => *r += 1.0,
        PdfObject::String(s) => s.push(b'x'),
        PdfObject::Name(n) => n.0.push(b'x'),
        PdfObject::Array(a) if !a.is_empty() && rng.random() => {
            let i = rng.random_range(0..a.len());
            mutate(&mut a[i], rng);
        }
        PdfObject::Array(a) => a.push(PdfObject::Null),
        PdfObject::Dictionary(d) if !d.is_empty() && rng.random() => {
            let i = rng.random_range(0..d.len());
            let (_, v) = d.iter_mut().nth(i).unwrap();
            mutate(v, rng);
        }
        PdfObject::Dictionary(d) => {
            let key = (0..)
                .map(|n| format!("Added{n}"))
                .find(|k| !d.contains_key(k))
                .unwrap();
            d.set(key.as_str(), PdfObject::Null);
        }
        PdfObject::Stream(_) | PdfObject::Reference(_) => unreachable!("not generated"),
    }
}

fn c9_canonical_determinism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ctx = make_baseline(0, 0);
    let exclude = ExclusionSet::page();
    let canon = |d: &Dictionary| {
        canonical_serialize(&ctx, &PdfObject::Dictionary(d.clone()), &exclude).unwrap()
    };
    let mut edits = 0;
    for trial in 0..500 {
        let dict = random_dict(&mut rng, 0);
        let reference = canon(&dict);
        for _ in 0..3 {
            let order = shuffled_dict(&dict, &mut rng);
            ensure!(
                canon(&order) == reference,
                "trial {trial}: key order changed the bytes"
            );
        }
        let included: Vec<_> = dict
            .iter()
            .map(|(k, _)| k.clone())
            .filter(|k| !exclude.contains(k.as_bytes()))
            .collect();
        let mut edited = dict.clone();
        match included.choose(&mut rng) {
            Some(key) => match rng.random_range(0..3) {
                0 => {
                    edited.remove(key.as_bytes());
                }
                _ => mutate(edited.get_mut(key.as_bytes()).unwrap(), &mut rng),
            },
            None => edited.set("Type", PdfObject::Null),
        }
        ensure!(
            canon(&edited) != reference,
            "trial {trial}: included-key edit left bytes unchanged"
        );
        edits += 1;
    }
    Ok(format!(
        "500 dictionaries x 3 orders identical, {edits}/500 edits detected"
    ))
}

fn c10_incremental() -> Outcome {
    let mut cases = 0;
    for (label, bytes) in protected_three_page() {
        for page in 1..=3 {
            let spec = TamperSpec::new(TamperKind::IncrementalContentSwap, [page]);
            let out = apply_tamper_bytes(&bytes, &spec).map_err(|e| e.to_string())?;
            ensure!(
                out.starts_with(&bytes),
                "{label}: original bytes not kept as prefix"
            );
            let report = tamper_and_assess(&bytes, &spec)?;
            ensure!(
                report.verdict == Verdict::Tampered,
                "{label} page {page}: {:?}",
                report.verdict
            );
            ensure!(
                finding_pages(&report) == BTreeSet::from([page]),
                "{label} page {page}: {:?}",
                finding_pages(&report)
            );
            cases += 1;
        }

        // Same attack shape, but the update points /Contents at a new object.
        let doc = parse(&bytes).unwrap();
        let page_id = doc.page_refs[1];
        let new_id = doc.next_object_id();
        let mut page = doc.page_dict(1).unwrap().clone();
        page.set("Contents", PdfObject::Reference(new_id));
        let body = b"BT /F1 11 Tf 72 720 Td (Replacement page body) Tj ET\n".to_vec();
        let updates = BTreeMap::from([
            (page_id, PdfObject::Dictionary(page)),
            (
                new_id,
                PdfObject::Stream(Stream::new(Dictionary::new(), body)),
            ),
        ]);
        let out = write_incremental(&bytes, &doc, &updates).map_err(|e| e.to_string())?;
        ensure!(
            out.starts_with(&bytes),
            "{label}: redirect update rewrote the prefix"
        );
        let report = assess(&parse(&out).unwrap()).unwrap();
        ensure!(
            report.verdict == Verdict::Tampered && finding_pages(&report) == BTreeSet::from([2]),
            "{label} redirect: {:?}",
            report.messages
        );
        cases += 1;
    }
    Ok(format!(
        "{cases}/{cases} incremental updates detected on the redefined page"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("unprotected input reports missing hashes", c1_unprotected),
        ("text tampering on page 2 of 3", c2_text_page_two),
        (
            "image tampering on pages 2 and 3",
            c3_images_pages_two_three,
        ),
        ("metadata-only edits", c4_metadata),
        ("protect then assess is clean", c5_soundness),
        ("merkle root matches brute-force oracle", c6_merkle_oracle),
        ("single-chunk rewrite localization", c7_localization),
        ("SHA-256 and SHA3-256 test vectors", c8_hash_vectors),
        (
            "canonical serialization determinism",
            c9_canonical_determinism,
        ),
        ("incremental-save content swap", c10_incremental),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.into_iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let ms = started.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2}: {title} ({detail}; {ms} ms)", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {title} ({reason}; {ms} ms)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
