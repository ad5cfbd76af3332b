//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use figscan_core::augment::{apply_pipeline, AnnotatedPage, AugmentationConfig, Transform};
use figscan_core::dataset::{emit_via, k_fold, parse_via, split_half, AnnotationMap};
use figscan_core::evaluator::{
    f1_score, fold_statistics, hungarian_assign, match_page, CostMatrix, Scores,
};
use figscan_core::geometry::iou;
use figscan_core::induce::{diff_pages, induce_rendered, InduceConfig, RenderedDocument};
use figscan_core::raster::{Channels, PageImage, RandomSeed};
use figscan_core::{BoxF64, MatchConfigF64, PredictionF64};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

// (label, precision, recall, tabulated f1)
const F1_ROWS: [(&str, f64, f64, f64); 14] = [
    ("DeepFigures on ScanBank", 0.450, 0.468, 0.459),
    ("DeepFigures testing split", 0.439, 0.445, 0.442),
    ("YOLOv5 mean", 0.842, 0.881, 0.860),
    ("YOLOv5 K=0", 0.749, 0.869, 0.804),
    ("YOLOv5 K=1", 0.870, 0.821, 0.845),
    ("YOLOv5 K=2", 0.75, 0.691, 0.720),
    ("YOLOv5 K=3", 0.928, 0.972, 0.949),
    ("YOLOv5 K=4", 0.886, 0.937, 0.911),
    ("YOLOv5 K=5", 0.887, 0.935, 0.910),
    ("YOLOv5 K=6", 0.804, 0.889, 0.844),
    ("YOLOv5 K=7", 0.859, 0.932, 0.894),
    ("Newspaper Navigator", 0.328, 0.311, 0.320),
    ("Azure Custom Vision", 0.468, 0.564, 0.511),
    ("Google AutoML", 0.908, 0.878, 0.893),
];

fn f1_arithmetic() -> Verdict {
    let mut misses = Vec::new();
    for (label, p, r, want) in F1_ROWS {
        let got = f1_score(p, r);
        let dev = got - want;
        let ok = dev.abs() <= 0.0005;
        println!(
            "      {} {label:<26} P={p:.3} R={r:.3} F1={got:.5} table={want:.3} dev={dev:+.5}",
            if ok { "ok  " } else { "MISS" }
        );
        if !ok {
            misses.push(label);
        }
    }
    Verdict::new(
        misses.is_empty(),
        format!(
            "{}/{} rows within 0.0005; misses: {misses:?}",
            F1_ROWS.len() - misses.len(),
            F1_ROWS.len()
        ),
    )
}

fn fold_stats() -> Verdict {
    let folds: Vec<Scores<f64>> = F1_ROWS[3..11]
        .iter()
        .map(|&(_, precision, recall, f1)| Scores {
            precision,
            recall,
            f1,
        })
        .collect();
    let st = fold_statistics(&folds).unwrap();
    let means = [
        (st.precision.mean, 0.842),
        (st.recall.mean, 0.881),
        (st.f1.mean, 0.860),
    ];
    let stds = [
        (st.precision.std, 0.066),
        (st.recall.std, 0.090),
        (st.f1.std, 0.073),
    ];
    let pass = means.iter().all(|(g, w)| (g - w).abs() <= 0.001)
        && stds.iter().all(|(g, w)| (g - w).abs() <= 0.005);
    Verdict::new(
        pass,
        format!(
            "means {:.4}/{:.4}/{:.4}, sample std {:.4}/{:.4}/{:.4}",
            means[0].0, means[1].0, means[2].0, stds[0].0, stds[1].0, stds[2].0
        ),
    )
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for at in 0..=p.len() {
            let mut q = p.clone();
            q.insert(at, n - 1);
            out.push(q);
        }
    }
    out
}

/// Minimum over every injective map from the smaller side into the larger.
fn brute_force_min(cost: &[Vec<f64>]) -> f64 {
    let (r, c) = (cost.len(), cost[0].len());
    let at = |i: usize, j: usize| if r <= c { cost[i][j] } else { cost[j][i] };
    let (small, large) = (r.min(c), r.max(c));
    permutations(large)
        .iter()
        .map(|p| (0..small).map(|i| at(i, p[i])).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn hungarian_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bad = 0;
    let trials = 600;
    for _ in 0..trials {
        let (r, c) = (rng.random_range(1..=6), rng.random_range(1..=6));
        // eighths keep every partial sum exact
        let rows: Vec<Vec<f64>> = (0..r)
            .map(|_| {
                (0..c)
                    .map(|_| rng.random_range(0..200) as f64 / 8.0)
                    .collect()
            })
            .collect();
        let m = CostMatrix::from_rows(rows.clone()).unwrap();
        let pairs = hungarian_assign(&m).unwrap();
        let rows_used: BTreeSet<_> = pairs.iter().map(|p| p.0).collect();
        let cols_used: BTreeSet<_> = pairs.iter().map(|p| p.1).collect();
        let valid = pairs.len() == r.min(c)
            && rows_used.len() == pairs.len()
            && cols_used.len() == pairs.len();
        if !valid || m.total(&pairs) != brute_force_min(&rows) {
            bad += 1;
        }
    }
    Verdict::new(
        bad == 0,
        format!("{trials} matrices up to 6x6, {bad} mismatches"),
    )
}

fn cell_count_iou(a: [i64; 4], b: [i64; 4]) -> f64 {
    let inside = |r: [i64; 4], x: i64, y: i64| x >= r[0] && x < r[2] && y >= r[1] && y < r[3];
    let (mut inter, mut union) = (0u32, 0u32);
    for y in 0..100 {
        for x in 0..100 {
            let (ia, ib) = (inside(a, x, y), inside(b, x, y));
            inter += (ia && ib) as u32;
            union += (ia || ib) as u32;
        }
    }
    inter as f64 / union as f64
}

fn iou_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut rand_box = || {
        let (x1, y1) = (rng.random_range(0..99), rng.random_range(0..99));
        [
            x1,
            y1,
            rng.random_range(x1 + 1..=100),
            rng.random_range(y1 + 1..=100),
        ]
    };
    let mut worst = 0.0f64;
    let trials = 1500;
    for _ in 0..trials {
        let (a, b) = (rand_box(), rand_box());
        let to_box =
            |r: [i64; 4]| BoxF64::new(r[0] as f64, r[1] as f64, r[2] as f64, r[3] as f64).unwrap();
        worst = worst.max((iou(&to_box(a), &to_box(b)) - cell_count_iou(a, b)).abs());
    }
    Verdict::new(
        worst <= 1e-12,
        format!("{trials} pairs, max |diff| {worst:.2e}"),
    )
}

fn matching_protocol() -> Verdict {
    let cfg = MatchConfigF64::default();
    let g = BoxF64::new(0., 0., 10., 10.).unwrap();
    let counts =
        |e: &figscan_core::PageEvalF64| (e.true_positives, e.false_positives, e.false_negatives);
    let examples = [
        counts(&match_page("a", &[g], &[PredictionF64::new(g, 0.9)], &cfg)) == (1, 0, 0),
        counts(&match_page("b", &[g], &[PredictionF64::new(g, 0.4)], &cfg)) == (0, 0, 1),
        counts(&match_page(
            "c",
            &[g],
            &[PredictionF64::new(
                BoxF64::new(5., 5., 15., 15.).unwrap(),
                0.9,
            )],
            &cfg,
        )) == (0, 1, 1),
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rand_box = |rng: &mut ChaCha8Rng| {
        let (x, y) = (rng.random_range(0.0..200.0), rng.random_range(0.0..200.0));
        BoxF64::new(
            x,
            y,
            x + rng.random_range(5.0..60.0),
            y + rng.random_range(5.0..60.0),
        )
        .unwrap()
    };
    let mut variant = 0;
    for page in 0..200 {
        let gt: Vec<BoxF64> = (0..rng.random_range(0..=10))
            .map(|_| rand_box(&mut rng))
            .collect();
        let mut preds = Vec::new();
        for b in &gt {
            if rng.random_bool(0.7) {
                let dx = rng.random_range(-3.0..3.0);
                let moved = BoxF64::new(b.x1() + dx, b.y1(), b.x2() + dx, b.y2()).unwrap();
                preds.push(PredictionF64::new(moved, rng.random_range(0.0..1.0)));
            }
        }
        for _ in 0..rng.random_range(0..4) {
            preds.push(PredictionF64::new(
                rand_box(&mut rng),
                rng.random_range(0.0..1.0),
            ));
        }
        // duplicates force ties
        if let Some(&p) = preds.first() {
            preds.push(p);
        }
        let base = counts(&match_page("p", &gt, &preds, &cfg));
        for _ in 0..5 {
            let (mut g2, mut p2) = (gt.clone(), preds.clone());
            g2.shuffle(&mut rng);
            p2.shuffle(&mut rng);
            if counts(&match_page("p", &g2, &p2, &cfg)) != base {
                variant += 1;
                println!("      page {page}: counts change under permutation");
                break;
            }
        }
    }
    Verdict::new(
        examples.iter().all(|&x| x) && variant == 0,
        format!("examples {examples:?}, 200 random pages x 5 shuffles, {variant} order-dependent"),
    )
}

fn dark_envelope(img: &PageImage) -> Option<BoxF64> {
    let (mut x1, mut y1, mut x2, mut y2) = (u32::MAX, u32::MAX, 0, 0);
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.intensity(x, y) < 128.0 {
                x1 = x1.min(x);
                y1 = y1.min(y);
                x2 = x2.max(x + 1);
                y2 = y2.max(y + 1);
            }
        }
    }
    (x2 > 0).then(|| BoxF64::new(x1 as f64, y1 as f64, x2 as f64, y2 as f64).unwrap())
}

fn augmentation_geometry() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 1.0f64;
    let mut fails = 0;
    for t in [Transform::AffineRotation, Transform::Perspective] {
        for i in 0..100 {
            let (w, h) = (rng.random_range(200..320u32), rng.random_range(240..360u32));
            let x1 = rng.random_range(20..w / 2);
            let y1 = rng.random_range(20..h / 2);
            let x2 = rng.random_range(x1 + 30..w - 20);
            let y2 = rng.random_range(y1 + 30..h - 20);
            let mut image = PageImage::filled(w, h, Channels::Gray, 255).unwrap();
            image.fill_rect(x1, y1, x2, y2, 0);
            let page = AnnotatedPage {
                page_id: format!("synthetic_{i}"),
                image,
                boxes: vec![BoxF64::new(x1 as f64, y1 as f64, x2 as f64, y2 as f64).unwrap()],
            };
            let cfg = AugmentationConfig {
                seed: RandomSeed(1000 + i),
                ..AugmentationConfig::only(&[t])
            };
            let out = apply_pipeline(&page, &cfg).unwrap();
            let score = match (out.page.boxes.first(), dark_envelope(&out.page.image)) {
                (Some(b), Some(env)) => iou(b, &env),
                _ => 0.0,
            };
            worst = worst.min(score);
            fails += (score < 0.95) as usize;
        }
    }
    Verdict::new(
        fails == 0,
        format!("200 pages (rotation, perspective), min IOU {worst:.4}, {fails} below 0.95"),
    )
}

fn augment_determinism() -> Verdict {
    let t = tempfile::tempdir().unwrap();
    let input = t.path().join("in");
    std::fs::create_dir(&input).unwrap();
    let mut ann = AnnotationMap::new();
    for i in 0..4u32 {
        let mut img = PageImage::filled(180, 240, Channels::Gray, 255).unwrap();
        img.fill_rect(20 + 5 * i, 40, 150, 120 + 10 * i, 0);
        let name = format!("scan_{i}.png");
        img.save_png(input.join(&name)).unwrap();
        ann.insert(
            name,
            vec![BoxF64::new((20 + 5 * i) as f64, 40., 150., (120 + 10 * i) as f64).unwrap()],
        );
    }
    std::fs::write(input.join("annotations.json"), emit_via(&ann)).unwrap();
    let run = |out: &Path| {
        Command::new(env!("CARGO_BIN_EXE_figscan"))
            .args([
                "augment",
                input.to_str().unwrap(),
                "--seed",
                "2023",
                "-o",
                out.to_str().unwrap(),
            ])
            .output()
            .unwrap()
            .status
            .success()
    };
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    if !(run(&a) && run(&b)) {
        return Verdict::new(false, "augment exited with an error");
    }
    let same_json = std::fs::read(a.join("annotations.json")).unwrap()
        == std::fs::read(b.join("annotations.json")).unwrap();
    let same_pixels = ann.keys().all(|name| {
        PageImage::load_png(a.join(name)).unwrap() == PageImage::load_png(b.join(name)).unwrap()
    });
    Verdict::new(
        same_json && same_pixels,
        format!("two runs, seed 2023: annotations identical {same_json}, pixels identical {same_pixels}"),
    )
}

fn induction_round_trip() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cfg = InduceConfig::default();
    let stroke = cfg.effective_stroke_px();
    let (mut bad_pages, mut nonempty_self_diff, mut labels) = (0, 0, 0);
    let pairs = 60;
    for _ in 0..pairs {
        let (w, h) = (rng.random_range(300..600u32), rng.random_range(300..700u32));
        let mut plain = PageImage::filled(w, h, Channels::Gray, 255).unwrap();
        for _ in 0..rng.random_range(0..15) {
            let (x, y) = (rng.random_range(0..w - 40), rng.random_range(0..h - 8));
            plain.fill_rect(
                x,
                y,
                x + rng.random_range(5..40),
                y + 6,
                rng.random_range(0..80),
            );
        }
        let mut marked = plain.clone();
        let mut want = Vec::new();
        let mut y = 10;
        while want.len() < 3 {
            let fh = rng.random_range(30..120u32);
            if y + fh + 2 * stroke + 10 > h {
                break;
            }
            let x1 = rng.random_range(2 * stroke..w / 3);
            let x2 = rng.random_range(x1 + 30..w - 2 * stroke);
            marked.stroke_rect(x1 - stroke, y, x2 + stroke, y + fh + 2 * stroke, stroke, 0);
            want.push(
                BoxF64::new(
                    x1 as f64,
                    (y + stroke) as f64,
                    x2 as f64,
                    (y + stroke + fh) as f64,
                )
                .unwrap(),
            );
            y += fh + 2 * stroke + rng.random_range(10..60);
        }
        labels += want.len();
        let doc = induce_rendered(
            RenderedDocument::new("s", 100, vec![plain.clone()]).unwrap(),
            &RenderedDocument::new("s", 100, vec![marked]).unwrap(),
            &cfg,
        )
        .unwrap();
        let got = &doc.pages[0].labels;
        let within = got.len() == want.len()
            && got.iter().zip(&want).all(|(g, w)| {
                [
                    g.x1() - w.x1(),
                    g.y1() - w.y1(),
                    g.x2() - w.x2(),
                    g.y2() - w.y2(),
                ]
                .iter()
                .all(|d| d.abs() <= 1.0)
            });
        bad_pages += !within as usize;
        nonempty_self_diff += !diff_pages(&plain, &plain, cfg.diff_threshold, cfg.min_region_px)
            .unwrap()
            .is_empty() as usize;
    }
    Verdict::new(
        bad_pages == 0 && nonempty_self_diff == 0,
        format!("{pairs} pairs, {labels} figures, {bad_pages} pages off by > 1 px, {nonempty_self_diff} non-empty self-diffs"),
    )
}

fn split_properties() -> Verdict {
    let mut problems = Vec::new();
    for n in 2..=64usize {
        let pages: Vec<String> = (0..n).map(|i| format!("doc_{i}")).collect();
        let all: BTreeSet<&String> = pages.iter().collect();
        let half = split_half(&pages, RandomSeed(n as u64)).unwrap();
        let cover: BTreeSet<&String> = half.validation.iter().chain(&half.test).collect();
        if cover != all
            || half.validation.len() + half.test.len() != n
            || half.validation.len().abs_diff(half.test.len()) > 1
            || split_half(&pages, RandomSeed(n as u64)).unwrap() != half
        {
            problems.push(format!("half n={n}"));
        }
        for k in 2..=8usize.min(n) {
            let folds = k_fold(&pages, k, RandomSeed(7)).unwrap();
            let held: Vec<&String> = folds.iter().flat_map(|f| &f.held_out).collect();
            let held_set: BTreeSet<&String> = held.iter().copied().collect();
            let sizes: Vec<usize> = folds.iter().map(|f| f.held_out.len()).collect();
            let train_ok = folds.iter().all(|f| {
                let t: BTreeSet<&String> = f.train.iter().chain(&f.held_out).collect();
                t == all && f.train.len() + f.held_out.len() == n
            });
            if folds.len() != k
                || held.len() != n
                || held_set != all
                || sizes.iter().max().unwrap() - sizes.iter().min().unwrap() > 1
                || !train_ok
                || k_fold(&pages, k, RandomSeed(7)).unwrap() != folds
            {
                problems.push(format!("kfold n={n} k={k}"));
            }
        }
    }
    let scanbank: Vec<String> = (0..10182).map(|i| format!("etd_{i}")).collect();
    let half = split_half(&scanbank, RandomSeed(2023)).unwrap();
    let sizes = (half.validation.len(), half.test.len());
    Verdict::new(
        problems.is_empty() && sizes == (5091, 5091),
        format!(
            "n 2..=64, k 2..=8: {} violations {problems:?}; 10182 pages -> {}/{}",
            problems.len(),
            sizes.0,
            sizes.1
        ),
    )
}

fn via_round_trip() -> Verdict {
    let text = std::fs::read_to_string(fixtures().join("via_three_pages.json")).unwrap();
    let map = parse_via(&text).unwrap();
    let again = parse_via(&emit_via(&map)).unwrap();
    let fractional = map.values().flatten().any(|b| {
        [b.x1(), b.y1(), b.x2(), b.y2()]
            .iter()
            .any(|v| v.fract() != 0.0)
    });
    let mut extra = 0;
    for name in [
        "induce/one_figure/expected.json",
        "induce/two_pages/expected.json",
    ] {
        let m = parse_via(&std::fs::read_to_string(fixtures().join(name)).unwrap()).unwrap();
        extra += (parse_via(&emit_via(&m)).unwrap() != m) as usize;
    }
    Verdict::new(
        again == map && fractional && extra == 0,
        format!(
            "{} pages, {} boxes, fractional coordinates {fractional}, identity {}",
            map.len(),
            map.values().map(Vec::len).sum::<usize>(),
            again == map && extra == 0
        ),
    )
}

type Criterion = (&'static str, Option<Duration>, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "F1 arithmetic reproduction",
            Some(Duration::from_secs(1)),
            f1_arithmetic,
        ),
        (
            "fold statistics reproduction",
            Some(Duration::from_secs(1)),
            fold_stats,
        ),
        (
            "Hungarian vs brute-force permutations",
            Some(Duration::from_secs(10)),
            hungarian_oracle,
        ),
        (
            "IOU vs unit-cell counting",
            Some(Duration::from_secs(5)),
            iou_oracle,
        ),
        (
            "matching protocol and order invariance",
            Some(Duration::from_secs(5)),
            matching_protocol,
        ),
        (
            "augmentation box geometry",
            Some(Duration::from_secs(60)),
            augmentation_geometry,
        ),
        ("augment determinism", None, augment_determinism),
        (
            "induction round trip",
            Some(Duration::from_secs(30)),
            induction_round_trip,
        ),
        (
            "split and fold partitions",
            Some(Duration::from_secs(5)),
            split_properties,
        ),
        (
            "VIA round trip",
            Some(Duration::from_secs(1)),
            via_round_trip,
        ),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = check();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed < l);
        let pass = verdict.pass && in_time;
        failed += !pass as usize;
        let budget = limit.map_or(String::new(), |l| format!(" (limit {:.0?})", l));
        println!(
            "{} {:>2}. {name}: {} [{:.2?}{budget}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            verdict.detail,
            elapsed
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
