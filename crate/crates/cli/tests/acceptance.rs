//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report prints in order. Exits
//! non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use compseq_cli::ingest::{read_ctw1500, read_jsonl_str, to_jsonl_string, AnnotationRecord, Instance};
use compseq_core::eval::{evaluate, EvalConfig, GroundTruthInstance, ScoredInstance};
use compseq_core::frames::{frames_to_sequences, from_frames, to_frames, FrameDecodeConfig};
use compseq_core::geometry::{assemble, decompose, resample_side};
use compseq_core::gradcheck::gradient_check;
use compseq_core::matching::{hungarian, match_sequences, CostMatrix, MatchParams};
use compseq_core::piou::{piou_exact, piou_mc, PIoUConfig};
use compseq_core::study::{interp_compare, length_sweep, ribbons, Reference};
use compseq_core::synth::{derive_seed, gen_ribbon, gen_scene, perturb, PerturbParams, RibbonParams};
use compseq_core::{ComponentQuad, ComponentSequence, Point2, Polygon, TextContour};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RUNTIME_LIMIT: Duration = Duration::from_secs(60);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("interpolation comparison", c1_interpolation),
        ("Monte-Carlo PIoU accuracy", c2_piou_accuracy),
        ("Hungarian optimality", c3_hungarian),
        ("gradient correctness", c4_gradients),
        ("frame-grid round trip", c5_frames),
        ("decompose/assemble fidelity", c6_decompose),
        ("evaluation harness sanity", c7_eval),
        ("sequence-length ablation shape", c8_length),
        ("format round trip", c9_formats),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| verdict(false, format!("panicked: {}", panic_message(&e))));
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{status}] {name}: {} ({:.1}s)", i + 1, v.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn panic_message(e: &Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
}

fn c1_interpolation() -> Verdict {
    let start = Instant::now();
    let rs = ribbons(7, 200, &RibbonParams::high_curvature()).unwrap();
    let c = interp_compare(&rs, 6).unwrap();
    let elapsed = start.elapsed();
    verdict(
        c.bspline_mean > c.bezier_mean && c.bspline_mean >= 0.98 && elapsed < RUNTIME_LIMIT,
        format!(
            "B-spline mean {:.4} vs Bezier mean {:.4} over {} ribbons, need B-spline > Bezier and >= 0.98 in < 60 s",
            c.bspline_mean, c.bezier_mean, c.count
        ),
    )
}

/// A ribbon and a shifted, rescaled copy, so overlaps span the full range.
fn piou_pair(i: u64) -> (ComponentSequence, ComponentSequence) {
    let params = if i % 2 == 0 { RibbonParams::moderate() } else { RibbonParams::high_curvature() };
    let a = gen_ribbon(derive_seed(2024, i), &params).unwrap();
    let bb = a.contour.to_polygon().bbox();
    let mut r = rng(derive_seed(4048, i));
    let shift = Point2::new(r.gen_range(-0.3..0.3) * bb.width(), r.gen_range(-1.5..1.5) * bb.height().min(40.0));
    let scale = r.gen_range(0.85..1.15);
    let c = (bb.min + bb.max) / 2.0;
    let b = a.contour.map_points(|p| c + (p - c) * scale + shift).unwrap();
    (decompose(&a.contour, 6).unwrap(), decompose(&b, 6).unwrap())
}

fn c2_piou_accuracy() -> Verdict {
    let start = Instant::now();
    let cfg = PIoUConfig::default();
    let mut errors = Vec::with_capacity(500);
    let mut identity_ok = true;
    for i in 0..500 {
        let (a, b) = piou_pair(i);
        let mc = piou_mc(&a, &b, &cfg).unwrap().value;
        let exact = piou_exact(&assemble(&a), &assemble(&b));
        errors.push((mc - exact).abs());
        identity_ok &= piou_mc(&a, &a, &cfg).unwrap().value == 1.0;
    }
    let elapsed = start.elapsed();
    errors.sort_by(f64::total_cmp);
    let p95 = errors[(0.95 * errors.len() as f64).ceil() as usize - 1];
    verdict(
        p95 <= 0.02 && identity_ok && elapsed < RUNTIME_LIMIT,
        format!(
            "p95 |mc - exact| = {p95:.4} (max {:.4}) over 500 pairs, need <= 0.02; identity pairs all 1.0: {identity_ok}",
            errors[errors.len() - 1]
        ),
    )
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn sorted_sum(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

fn c3_hungarian() -> Verdict {
    let perms = permutations(7);
    let mut r = rng(3);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let rows: Vec<Vec<f64>> = (0..7).map(|_| (0..7).map(|_| r.gen_range(0.0..100.0)).collect()).collect();
        let best = perms
            .iter()
            .map(|p| sorted_sum(p.iter().enumerate().map(|(i, &j)| rows[i][j]).collect()))
            .fold(f64::INFINITY, f64::min);
        mismatches += usize::from(hungarian(&CostMatrix::from_rows(&rows).unwrap()).total_cost != best);
    }

    let params = MatchParams::default();
    let mut shuffle_mismatches = 0;
    for s in 0..100u64 {
        let mut r = rng(derive_seed(77, s));
        let g = r.gen_range(1..=8);
        let scene = gen_scene(s, g + 3, (1200.0, 900.0), &RibbonParams::moderate()).unwrap();
        let gts: Vec<ComponentSequence> = scene[..g].iter().map(|x| decompose(&x.contour, 6).unwrap()).collect();
        let mut preds: Vec<ComponentSequence> = scene
            .iter()
            .enumerate()
            .map(|(k, x)| {
                let pp = PerturbParams { noise_px: r.gen_range(0.0..4.0), ..PerturbParams::default() };
                perturb(&x.contour, &pp, derive_seed(s, k as u64)).unwrap()
            })
            .collect();
        let base = match_sequences(&preds, &gts, &params).unwrap().total_cost;
        for _ in 0..5 {
            preds.shuffle(&mut r);
            shuffle_mismatches += usize::from(match_sequences(&preds, &gts, &params).unwrap().total_cost != base);
        }
    }
    verdict(
        mismatches == 0 && shuffle_mismatches == 0,
        format!(
            "{mismatches}/1000 7x7 matrices differ from brute force; {shuffle_mismatches}/500 shuffled scenes change total cost"
        ),
    )
}

fn c4_gradients() -> Verdict {
    let r = gradient_check(4, 1000, 1e-6).unwrap();
    verdict(
        r.passes(1e-5, 1e-8),
        format!(
            "max rel error psc {:.2e}, focal {:.2e}, l1 {:.2e} (need <= 1e-5); stationarity |grad| {:.2e} (need <= 1e-8)",
            r.psc_max_rel_error, r.focal_max_rel_error, r.l1_max_rel_error, r.stationarity_max_grad
        ),
    )
}

fn random_sequences(r: &mut ChaCha8Rng, n: usize, t: usize) -> Vec<ComponentSequence> {
    let pt = |r: &mut ChaCha8Rng| Point2::new(r.gen_range(-500.0..1500.0), r.gen_range(-500.0..1500.0));
    (0..n)
        .map(|_| {
            let quads = (0..t).map(|_| ComponentQuad::new([pt(r), pt(r), pt(r), pt(r)])).collect();
            let scores = (0..t).map(|_| r.gen_range(0.0..=1.0)).collect();
            ComponentSequence::prediction(quads, scores).unwrap()
        })
        .collect()
}

fn c5_frames() -> Verdict {
    let mut r = rng(5);
    let decode = FrameDecodeConfig { score_threshold: 0.0, ..FrameDecodeConfig::default() };
    let mut bad = 0;
    for _ in 0..1000 {
        let n = r.gen_range(1..=100);
        let seqs = random_sequences(&mut r, n, 6);
        let grid = to_frames(&seqs).unwrap();
        let decoded = from_frames(&grid, &decode).unwrap();
        let ok = frames_to_sequences(&grid) == seqs
            && decoded.len() == n
            && decoded.iter().zip(&seqs).all(|(d, s)| d.polygon == assemble(s));
        bad += usize::from(!ok);
    }
    verdict(bad == 0, format!("{bad}/1000 scenes (n <= 100, t = 6) fail to round-trip exactly"))
}

fn c6_decompose() -> Verdict {
    let rs = ribbons(6, 200, &RibbonParams::moderate()).unwrap();
    let mut vertex_mismatch = 0;
    let mut sum = 0.0;
    for rb in &rs {
        let c = &rb.contour;
        let outline = assemble(&decompose(c, 6).unwrap());
        let mut want = resample_side(c.side_a(), 7).unwrap();
        want.extend(resample_side(c.side_b(), 7).unwrap().into_iter().rev());
        vertex_mismatch += usize::from(outline.vertices() != want.as_slice());
        sum += piou_exact(&outline, &c.to_polygon());
    }
    let mean = sum / rs.len() as f64;

    let top: Vec<Point2> = (0..7).map(|i| Point2::new(20.0 * i as f64, 0.0)).collect();
    let bottom: Vec<Point2> = (0..7).map(|i| Point2::new(20.0 * i as f64, 24.0)).collect();
    let rect = TextContour::new(top, bottom).unwrap();
    let rect_iou = piou_exact(&assemble(&decompose(&rect, 6).unwrap()), &rect.to_polygon());
    verdict(
        vertex_mismatch == 0 && mean >= 0.98 && rect_iou >= 0.999,
        format!(
            "{vertex_mismatch}/200 vertex mismatches; mean reconstruction IoU {mean:.4} (need >= 0.98); rectangle {rect_iou:.6}"
        ),
    )
}

fn rect(x: f64, y: f64, w: f64, h: f64) -> Polygon {
    Polygon::new(vec![Point2::new(x, y), Point2::new(x + w, y), Point2::new(x + w, y + h), Point2::new(x, y + h)])
        .unwrap()
}

fn c7_eval() -> Verdict {
    let cfg = EvalConfig::default();
    let scene = gen_scene(7, 6, (1000.0, 800.0), &RibbonParams::moderate()).unwrap();
    let gts: Vec<GroundTruthInstance> =
        scene.iter().map(|r| GroundTruthInstance { polygon: r.contour.to_polygon(), ignore: false }).collect();
    let same: Vec<ScoredInstance> =
        scene.iter().map(|r| ScoredInstance { polygon: r.contour.to_polygon(), score: 0.9 }).collect();
    let perfect = evaluate(&[same], std::slice::from_ref(&gts), &cfg).unwrap();
    let far: Vec<ScoredInstance> = scene
        .iter()
        .map(|r| ScoredInstance { polygon: r.contour.to_polygon().map_points(|p| p + Point2::new(5000.0, 0.0)).unwrap(), score: 0.9 })
        .collect();
    let disjoint = evaluate(&[far], &[gts], &cfg).unwrap();

    let g2 = vec![
        GroundTruthInstance { polygon: rect(0.0, 0.0, 100.0, 20.0), ignore: false },
        GroundTruthInstance { polygon: rect(0.0, 50.0, 100.0, 20.0), ignore: false },
    ];
    let p2 = vec![
        ScoredInstance { polygon: rect(0.0, 0.0, 100.0, 20.0), score: 0.9 },
        ScoredInstance { polygon: rect(300.0, 300.0, 40.0, 10.0), score: 0.8 },
    ];
    let half = evaluate(&[p2], &[g2], &cfg).unwrap();
    let prf = |r: &compseq_core::eval::EvalReport| (r.precision, r.recall, r.f_measure);
    verdict(
        prf(&perfect) == (1.0, 1.0, 1.0) && prf(&disjoint) == (0.0, 0.0, 0.0) && prf(&half) == (0.5, 0.5, 0.5),
        format!(
            "identical {:?}, disjoint {:?}, one-of-two {:?} at IoU@0.5",
            prf(&perfect),
            prf(&disjoint),
            prf(&half)
        ),
    )
}

fn c8_length() -> Verdict {
    let rs = ribbons(7, 200, &RibbonParams::high_curvature()).unwrap();
    let sweep = length_sweep(&rs, &[4, 6, 8], Reference::TrueOutline).unwrap();
    let monotone = sweep.windows(2).all(|w| w[1].1 >= w[0].1);
    let shown: Vec<String> = sweep.iter().map(|(t, m)| format!("t={t}: {m:.4}")).collect();
    verdict(monotone, format!("mean reconstruction IoU vs true outline {} (need non-decreasing)", shown.join(", ")))
}

fn random_record(r: &mut ChaCha8Rng) -> AnnotationRecord {
    let coord = |r: &mut ChaCha8Rng| match r.gen_range(0..4) {
        0 => r.gen_range(-1e4..1e4),
        1 => f64::from_bits(r.gen::<u64>() & !(0x7ff << 52) | (r.gen_range(900u64..1100) << 52)),
        2 => (r.gen_range(-2000i32..2000)) as f64,
        _ => r.gen_range(-1.0..1.0) * 1e-9,
    };
    let pt = |r: &mut ChaCha8Rng| Point2::new(coord(r), coord(r));
    let instances = (0..r.gen_range(0..6))
        .map(|_| {
            let poly = (0..r.gen_range(3..20)).map(|_| pt(r)).collect();
            let components = r
                .gen_bool(0.5)
                .then(|| (0..r.gen_range(1..9)).map(|_| ComponentQuad::new([pt(r), pt(r), pt(r), pt(r)])).collect());
            Instance {
                polygon: Polygon::new(poly).unwrap(),
                score: r.gen_bool(0.5).then(|| r.gen_range(0.0..=1.0)),
                ignore: r.gen_bool(0.2),
                components,
            }
        })
        .collect();
    let image: String = (0..r.gen_range(0..16)).map(|_| char::from_u32(r.gen_range(32..0x3000)).unwrap_or('?')).collect();
    AnnotationRecord { image, instances }
}

const CTW_28: &str = "0,0,10,0,20,0,30,0,40,0,50,0,60,0,60,10,50,10,40,10,30,10,20,10,10,10,0,10";

/// Lines that are guaranteed to be invalid, built by breaking valid ones.
fn malformed_ctw_line(r: &mut ChaCha8Rng) -> String {
    let base = if r.gen_bool(0.5) { CTW_28.to_string() } else { format!("5,5,70,20,{CTW_28}") };
    let mut fields: Vec<String> = base.split(',').map(str::to_string).collect();
    let junk = ["", "abc", "1..2", "--3", "0x10", "NaN", "inf", "-inf", "1e999", "1,2", "٣", "+-1", "1e", "."];
    match r.gen_range(0..6) {
        0 => {
            let k = r.gen_range(0..fields.len());
            fields.remove(k);
        }
        1 => {
            let k = r.gen_range(0..=fields.len());
            fields.insert(k, r.gen_range(0..100).to_string());
        }
        2 => {
            let k = r.gen_range(0..fields.len());
            let j = junk[r.gen_range(0..junk.len())];
            // "1,2" adds a field, which also breaks the count.
            fields[k] = j.to_string();
        }
        3 => {
            let keep = r.gen_range(1..28);
            fields.truncate(keep.min(fields.len() - 1).min(27));
        }
        4 => {
            // Box with max < min.
            return format!("70,20,5,5,{CTW_28}");
        }
        _ => {
            let len = r.gen_range(1..80);
            return (0..len).map(|_| char::from_u32(r.gen_range(0x21..0x250)).unwrap_or('x')).filter(|c| *c != '#').collect::<String>()
                + "z";
        }
    }
    fields.join(",")
}

fn c9_formats() -> Verdict {
    let mut r = rng(9);
    let mut jsonl_bad = 0;
    for _ in 0..1000 {
        let rec = random_record(&mut r);
        let text = to_jsonl_string(std::slice::from_ref(&rec));
        let ok = match read_jsonl_str(&text) {
            Ok(back) => back.len() == 1 && back[0] == rec && to_jsonl_string(&back) == text,
            Err(_) => false,
        };
        jsonl_bad += usize::from(!ok);
    }

    let p28 = read_ctw1500("a", CTW_28).unwrap();
    let p32 = read_ctw1500("a", &format!("100,50,160,60,{CTW_28}")).unwrap();
    let variants_ok = p28.instances[0].polygon.len() == 14
        && p32.instances[0].polygon.vertices()[0] == Point2::new(100.0, 50.0)
        && p32.instances[0].polygon.vertices()[7] == Point2::new(160.0, 60.0);

    let (mut panics, mut accepted, mut unlocated) = (0, 0, 0);
    for _ in 0..10_000 {
        let line = malformed_ctw_line(&mut r);
        match catch_unwind(|| read_ctw1500("fuzz", &line)) {
            Err(_) => panics += 1,
            Ok(Ok(_)) => accepted += 1,
            Ok(Err(e)) => unlocated += usize::from(e.line() != Some(1)),
        }
    }
    verdict(
        jsonl_bad == 0 && variants_ok && panics == 0 && accepted == 0 && unlocated == 0,
        format!(
            "{jsonl_bad}/1000 JSONL records fail write/read identity; 28/32-field variants parsed: {variants_ok}; \
             fuzz: {panics} panics, {accepted} accepted, {unlocated} errors without a line number out of 10000"
        ),
    )
}
