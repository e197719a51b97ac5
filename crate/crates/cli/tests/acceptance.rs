//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use platetrace_cli::RunReport;
use platetrace_core::extraction::{enhance_edges, extract_plate, ExtractionParams, ExtractedPlate};
use platetrace_core::imaging::{box_filter, connected_components, difference};
use platetrace_core::ocr::{recognize_plate, TemplateSet};
use platetrace_core::segmentation::{segment_traced, SegmentationParams};
use platetrace_core::synth::{corpus, random_plate_text, render_plate, render_scene, CorpusRanges, SceneSpec};
use platetrace_core::{BBox, BinaryImage, Exact, GrayImage, GrayImageExact, Scalar};
use platetrace_testkit::service::{self, sample_time, ist, random_op, same_state, static_geo, step, Op, ReferenceModel, SAMPLE_TRACES, SAMPLE_WATCHES};
use platetrace_tracker::{AlertKey, ManualClock, MemoryNotifier, NewWatch, TraceRecord, Tracker, TrackerConfig, WatchEntry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn kernel_oracles() -> Outcome {
    let start = Instant::now();
    let reports = platetrace_testkit::kernel_suite(150, 2024);
    let elapsed = start.elapsed();
    for r in &reports {
        if let Some(f) = &r.failure {
            return Err(format!("{}: {f}", r.kernel));
        }
    }
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    let names: Vec<_> = reports.iter().map(|r| r.kernel).collect();
    Ok(format!("{} kernels x 150 cases in {:.1}s ({})", reports.len(), elapsed.as_secs_f64(), names.join(", ")))
}

fn additive_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let p = ExtractionParams::default();
    let offsets = [0.05, 0.1, 0.2];
    for n in 0..50 {
        let (w, h) = (rng.gen_range(1..=32), rng.gen_range(1..=32));
        let img: GrayImageExact = GrayImage::from_fn(w, h, |_, _| Exact::new(rng.gen_range(0..=80), 100)).unwrap();
        let base = enhance_edges(&img, &p).map_err(|e| e.to_string())?;
        let base_diff = difference(&img, &box_filter(&img, 20).unwrap()).unwrap();
        for c in offsets {
            let shifted = img.offset(Exact::lit(c));
            ensure(enhance_edges(&shifted, &p).unwrap() == base, || format!("image {n}: edges moved under +{c}"))?;
            ensure(difference(&shifted, &box_filter(&shifted, 20).unwrap()).unwrap() == base_diff, || format!("image {n}: residue moved under +{c}"))?;
        }
    }
    Ok("50 exact images x 3 offsets, edge maps bit-identical".into())
}

fn whole_plate(text: &str, h: usize) -> ExtractedPlate {
    let gray = render_plate(text, h, 0.85, 0.0).unwrap();
    let (w, hh) = gray.dims();
    ExtractedPlate {
        bbox: BBox::from_xywh(0, 0, w, hh),
        mask: BinaryImage::from_fn(w, hh, |_, _| true).unwrap(),
        gray,
    }
}

fn no_deformity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let p = SegmentationParams::default();
    let mut glyphs = 0;
    for _ in 0..50 {
        let text = random_plate_text(&mut rng);
        let h = rng.gen_range(30..=90);
        let seg = segment_traced(&whole_plate(&text, h), &p).map_err(|e| format!("{text}: {e}"))?;
        for g in &seg.glyphs {
            ensure(g.bitmap == seg.cleaned.crop(g.bbox).unwrap(), || format!("{text}: glyph {} altered", g.order_index))?;
        }
        let (_, regions) = connected_components(&seg.cleaned);
        ensure(regions.iter().all(|r| (1000..=8000).contains(&r.area)), || format!("{text}: area bound violated"))?;
        glyphs += seg.glyphs.len();
    }
    Ok(format!("50 plates, {glyphs} glyphs equal to their source crops"))
}

fn plate_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_plate"))
}

fn synthetic_corpus(dir: &Path) -> Outcome {
    let ranges = CorpusRanges::default();
    for s in corpus(95, 1, &ranges) {
        let frac = s.plate_height as f64 / s.height as f64;
        ensure((0.08 - 1e-9..=0.25 + 1e-9).contains(&frac), || format!("plate fraction {frac}"))?;
        ensure(s.illumination.abs() <= 0.3 && s.salt_pepper <= 0.01, || format!("noise out of range: {s:?}"))?;
    }
    let start = Instant::now();
    let out = dir.join("corpus");
    let g = plate_bin().args(["gen-corpus", "--count", "95", "--seed", "1", "--out"]).arg(&out).output().map_err(|e| e.to_string())?;
    ensure(g.status.success(), || String::from_utf8_lossy(&g.stderr).into_owned())?;
    let report = dir.join("report.json");
    let r = plate_bin().arg("corpus").arg(out.join("manifest.csv")).arg("--report").arg(&report).output().map_err(|e| e.to_string())?;
    ensure(r.status.success(), || String::from_utf8_lossy(&r.stderr).into_owned())?;
    let elapsed = start.elapsed();
    let rep: RunReport = serde_json::from_str(&std::fs::read_to_string(&report).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let t = &rep.totals;
    let summary = format!("extraction {}, segmentation {}, recognition {}, {:.1}s", t.extraction, t.segmentation, t.recognition, elapsed.as_secs_f64());
    ensure(t.images == 95, || format!("{} images", t.images))?;
    ensure(t.extraction.successes >= 90 && t.segmentation.successes >= 90 && t.recognition.successes >= 88, || summary.clone())?;
    ensure(elapsed < Duration::from_secs(300), || summary.clone())?;
    Ok(summary)
}

fn round_trip() -> Outcome {
    let frame = render_scene(&SceneSpec::centered(640, 480, "TN23AL0322", 60)).map_err(|e| e.to_string())?;
    let plate = extract_plate(&frame.gray, &ExtractionParams::default()).map_err(|e| e.to_string())?;
    let seg = segment_traced(&plate, &SegmentationParams::default()).map_err(|e| e.to_string())?;
    let rec = recognize_plate(&seg.glyphs, &TemplateSet::builtin()).map_err(|e| e.to_string())?;
    ensure(rec.text == "TN23AL0322", || format!("read {:?}", rec.text))?;
    let margin = rec.matches.iter().map(|m| m.runner_up_margin).fold(f64::INFINITY, f64::min);
    ensure(margin > 0.0, || format!("tied match, margin {margin}"))?;
    Ok(format!("read TN23AL0322, smallest margin {margin:.3}"))
}

fn new_watch(v: &str, e: &str, m: &str, d: &str) -> NewWatch {
    NewWatch {
        vehicle: v.into(),
        email: e.into(),
        mobile: m.into(),
        details: d.into(),
    }
}

fn service_oracle() -> Outcome {
    // Fixture first.
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let clock = Arc::new(ManualClock::new(sample_time("22:00:00")));
    let notifier = Arc::new(MemoryNotifier::default());
    let mut cfg = TrackerConfig::new(dir.path());
    cfg.timezone = ist();
    let t = Tracker::open(cfg, Arc::new(static_geo()), notifier.clone(), clock.clone()).map_err(|e| e.to_string())?;
    for (v, e, m, d) in SAMPLE_WATCHES {
        t.register_watch(new_watch(v, e, m, d)).map_err(|e| e.to_string())?;
    }
    for (number, hms) in SAMPLE_TRACES {
        clock.set(sample_time(hms));
        t.ingest_trace(number, "cam-vellore").map_err(|e| e.to_string())?;
    }
    let hit = t.search("TN23CB0624").map_err(|e| e.to_string())?;
    ensure(hit.len() == 1 && hit[0].location.to_string() == "12.9333 79.1333 Vellore TN IN" && hit[0].time_display() == "2017-05-28 22:20:05", || format!("{hit:?}"))?;
    let sent = notifier.sent();
    ensure(sent.len() == 1 && sent[0].vehicle == "TN23CB0624" && sent[0].mobile == "9994370499", || format!("alerts {sent:?}"))?;

    // Then randomized equivalence.
    let mut ops = 0;
    for seed in 0..2u64 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let clock = Arc::new(ManualClock::new(Utc.with_ymd_and_hms(2017, 5, 28, 16, 0, 0).unwrap()));
        let mut cfg = TrackerConfig::new(dir.path());
        cfg.timezone = ist();
        cfg.snapshot_every = 97;
        let t = Tracker::open(cfg, Arc::new(static_geo()), Arc::new(MemoryNotifier::default()), clock.clone()).map_err(|e| e.to_string())?;
        let mut model = ReferenceModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        for i in 0..1000 {
            step(&t, &clock, &mut model, &random_op(&mut rng)).map_err(|e| format!("seed {seed} op {i}: {e}"))?;
        }
        same_state(&t, &model)?;
        ops += 1000;
    }
    Ok(format!("sample fixture: 1 alert; {ops} random ops agree with the model"))
}

fn ingestion_delivery() -> Outcome {
    let mut lines = Vec::new();
    for seed in [1u64, 2, 3] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let s = platetrace_testkit::delivery::flaky_delivery(dir.path(), seed, 200, 0.3)?;
        lines.push(format!("seed {seed}: {} written, {} delivered, {} duplicates", s.written, s.delivered, s.duplicates));
    }
    Ok(lines.join("; "))
}

struct Server {
    child: Child,
    base: String,
}

fn start_server(data: &Path, geo: &Path) -> Result<Server, String> {
    let mut child = plate_bin()
        .args(["serve", "--bind", "127.0.0.1:0", "--tz", "+05:30", "--snapshot-every", "64", "--data"])
        .arg(data)
        .arg("--geo")
        .arg(geo)
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).map_err(|e| e.to_string())?;
    let addr = line.trim().strip_prefix("listening on ").ok_or_else(|| format!("unexpected banner {line:?}"))?;
    Ok(Server {
        base: format!("http://{addr}"),
        child,
    })
}

#[derive(serde::Deserialize)]
struct ErrorBody {
    field: Option<String>,
}

fn field_of(resp: reqwest::blocking::Response) -> Result<String, String> {
    let status = resp.status();
    if status != reqwest::StatusCode::BAD_REQUEST {
        return Err(format!("status {status}"));
    }
    resp.json::<ErrorBody>().map_err(|e| e.to_string())?.field.ok_or_else(|| "no field".into())
}

/// Watches without their creation time, which only the server's clock knows.
fn watch_keys(w: &[WatchEntry]) -> Vec<(u64, String, String, String, String)> {
    let mut k: Vec<_> = w.iter().map(|w| (w.id, w.vehicle.clone(), w.email.clone(), w.mobile.clone(), w.details.clone())).collect();
    k.sort();
    k
}

fn durability(dir: &Path) -> Outcome {
    let data = dir.join("data");
    let geo = dir.join("geo.json");
    let g = static_geo();
    let cams: BTreeMap<_, _> = g.cameras.iter().map(|(k, v)| (k.clone(), serde_json::json!({"latitude": v.latitude, "longitude": v.longitude, "label": v.label}))).collect();
    std::fs::write(&geo, serde_json::json!({ "cameras": cams }).to_string()).map_err(|e| e.to_string())?;

    let http = reqwest::blocking::Client::new();
    let mut server = start_server(&data, &geo)?;
    let mut model = ReferenceModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut acked = 0;
    while acked < 500 {
        match random_op(&mut rng) {
            Op::Ingest { number, camera } => {
                let resp = http.post(format!("{}/traces", server.base)).json(&serde_json::json!({"number": number, "camera_id": camera})).send().map_err(|e| e.to_string())?;
                if resp.status().is_success() {
                    let got: TraceRecord = resp.json().map_err(|e| e.to_string())?;
                    let want = model.ingest(&number, &camera, service::location_for(&camera), got.time).map_err(|f| format!("model rejected {f}"))?;
                    ensure(want == got, || format!("ingest {number:?}: model {want:?}, server {got:?}"))?;
                } else {
                    let f = field_of(resp)?;
                    let want = model.ingest(&number, &camera, service::location_for(&camera), Utc::now().with_timezone(&ist()));
                    ensure(want == Err(f.as_str()), || format!("ingest {number:?}: model {want:?}, server rejected {f}"))?;
                }
            }
            Op::Register(w) => {
                let resp = http.post(format!("{}/watches", server.base)).json(&w).send().map_err(|e| e.to_string())?;
                let want = model.register(&w, Utc::now().with_timezone(&ist()));
                if resp.status().is_success() {
                    let id = resp.json::<serde_json::Value>().map_err(|e| e.to_string())?["id"].as_u64();
                    ensure(matches!(&want, Ok(e) if Some(e.id) == id), || format!("register: model {want:?}, server id {id:?}"))?;
                } else {
                    let f = field_of(resp)?;
                    ensure(want == Err(f.as_str()), || format!("register: model {want:?}, server rejected {f}"))?;
                }
            }
            Op::Search(q) => {
                let resp = http.get(format!("{}/traces", server.base)).query(&[("number", &q)]).send().map_err(|e| e.to_string())?;
                if resp.status().is_success() {
                    let got: Vec<TraceRecord> = resp.json().map_err(|e| e.to_string())?;
                    ensure(model.search(&q).as_ref() == Ok(&got), || format!("search {q:?} differs"))?;
                } else {
                    let f = field_of(resp)?;
                    ensure(model.search(&q) == Err(f.as_str()), || format!("search {q:?} rejected {f}"))?;
                }
            }
            Op::ListWatches | Op::Tick(_) => continue,
        }
        acked += 1;
    }

    let watches_before: Vec<WatchEntry> = http.get(format!("{}/watches", server.base)).send().and_then(|r| r.json()).map_err(|e| e.to_string())?;
    let outbox = data.join("outbox.jsonl");
    let outbox_before = std::fs::read_to_string(&outbox).unwrap_or_default();
    server.child.kill().map_err(|e| e.to_string())?;
    server.child.wait().map_err(|e| e.to_string())?;

    let mut server = start_server(&data, &geo)?;
    let check = (|| -> Result<(), String> {
        let watches: Vec<WatchEntry> = http.get(format!("{}/watches", server.base)).send().and_then(|r| r.json()).map_err(|e| e.to_string())?;
        ensure(watches == watches_before, || "watch list changed across restart".into())?;
        ensure(watch_keys(&watches) == watch_keys(&model.watches), || "watches differ from the model".into())?;
        let mut plates: Vec<&str> = model.traces.iter().map(|t| t.number.as_str()).collect();
        plates.sort();
        plates.dedup();
        let mut seen = 0;
        for p in plates {
            let got: Vec<TraceRecord> = http.get(format!("{}/traces", server.base)).query(&[("number", p)]).send().and_then(|r| r.json()).map_err(|e| e.to_string())?;
            ensure(Ok(&got) == model.search(p).as_ref(), || format!("traces for {p} differ after restart"))?;
            seen += got.len();
        }
        ensure(seen == model.traces.len(), || format!("{seen} traces after restart, model has {}", model.traces.len()))?;
        // Every committed alert was dispatched once and none are re-sent on recovery.
        let outbox_after = std::fs::read_to_string(&outbox).unwrap_or_default();
        ensure(outbox_after == outbox_before, || "alerts re-sent after restart".into())?;
        let mut sent: Vec<(String, String)> = outbox_after
            .lines()
            .map(|l| serde_json::from_str::<serde_json::Value>(l).map(|v| (v["vehicle"].as_str().unwrap_or("").to_string(), v["mobile"].as_str().unwrap_or("").to_string())))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        sent.sort();
        let mut want: Vec<(String, String)> = model
            .alerts
            .iter()
            .map(|AlertKey { watch_id, .. }| {
                let w = &model.watches[*watch_id as usize - 1];
                (w.vehicle.clone(), w.mobile.clone())
            })
            .collect();
        want.sort();
        ensure(sent == want, || format!("{} alerts dispatched, model expects {}", sent.len(), want.len()))
    })();
    let _ = server.child.kill();
    let _ = server.child.wait();
    check?;
    Ok(format!("{acked} acked requests, {} traces, {} watches, {} alerts survive kill -9", model.traces.len(), model.watches.len(), model.alerts.len()))
}

fn main() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("kernels match brute-force oracles", Box::new(kernel_oracles)),
        ("edge map invariant to additive illumination", Box::new(additive_invariance)),
        ("segmentation does not deform characters", Box::new(no_deformity)),
        ("synthetic corpus stage rates", Box::new(|| synthetic_corpus(tmp.path()))),
        ("TN23AL0322 round trip", Box::new(round_trip)),
        ("trace service matches reference model", Box::new(service_oracle)),
        ("uploader delivers every line over a flaky endpoint", Box::new(ingestion_delivery)),
        ("trace service state survives a crash", Box::new(|| durability(tmp.path()))),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

