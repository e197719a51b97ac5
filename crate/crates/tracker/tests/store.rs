use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::Arc;

use chrono::{Duration, TimeZone, Utc};
use platetrace_testkit::service::{sample_time, ist, random_op, same_state, static_geo, step, vellore, ReferenceModel, SAMPLE_TRACES, SAMPLE_WATCHES};
use platetrace_tracker::journal::{self, Entry, Event};
use platetrace_tracker::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Harness {
    dir: tempfile::TempDir,
    clock: Arc<ManualClock>,
    notifier: Arc<MemoryNotifier>,
}

impl Harness {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
            clock: Arc::new(ManualClock::new(Utc.with_ymd_and_hms(2017, 5, 28, 16, 0, 0).unwrap())),
            notifier: Arc::new(MemoryNotifier::default()),
        }
    }

    fn open(&self, snapshot_every: u64) -> Tracker {
        let mut cfg = TrackerConfig::new(self.dir.path());
        cfg.timezone = ist();
        cfg.snapshot_every = snapshot_every;
        Tracker::open(cfg, Arc::new(static_geo()), self.notifier.clone(), self.clock.clone()).unwrap()
    }
}

fn watch(vehicle: &str, email: &str, mobile: &str, details: &str) -> NewWatch {
    NewWatch {
        vehicle: vehicle.into(),
        email: email.into(),
        mobile: mobile.into(),
        details: details.into(),
    }
}

fn seed_sample(h: &Harness, t: &Tracker) {
    for (v, e, m, d) in SAMPLE_WATCHES {
        t.register_watch(watch(v, e, m, d)).unwrap();
    }
    for (number, hms) in SAMPLE_TRACES {
        h.clock.set(sample_time(hms));
        t.ingest_trace(number, "cam-vellore").unwrap();
    }
}

#[test]
fn sample_fixture() {
    let h = Harness::new();
    let t = h.open(1000);
    seed_sample(&h, &t);

    let hits = t.search("TN23CB0624").unwrap();
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].location.to_string(), "12.9333 79.1333 Vellore TN IN");
    assert_eq!(hits[0].time_display(), "2017-05-28 22:20:05");
    assert_eq!(hits[0].time.offset(), &ist());

    let ap = t.search("ap03 ae 3361").unwrap();
    assert_eq!(ap.iter().map(|r| r.time_display()).collect::<Vec<_>>(), ["2017-05-28 22:39:35", "2017-05-28 22:29:54"]);
    assert!(t.search("ZZ99ZZ9999").unwrap().is_empty());

    let sent = h.notifier.sent();
    assert_eq!(sent.len(), 1);
    assert_eq!(sent[0].vehicle, "TN23CB0624");
    assert_eq!(sent[0].to, "pradeepreddy0003@gmail.com");
    assert_eq!(sent[0].mobile, "9994370499");
    assert_eq!(sent[0].location, "12.9333 79.1333 Vellore TN IN");
    assert_eq!(sent[0].time, "2017-05-28 22:20:05");
    assert_eq!(sent[0].subject, "Vehicle Traced !");
    assert_eq!(t.alerts(), [AlertKey { watch_id: 2, trace_id: 1 }]);

    // Searching never re-fires.
    t.search("TN23CB0624").unwrap();
    assert_eq!(h.notifier.sent().len(), 1);

    let watches = t.list_watches();
    assert_eq!(watches.len(), 2);
    assert_eq!(watches[1].details, "I lost my vehicle in vellore.");
}

#[test]
fn two_watchers_two_alerts_and_validation() {
    let h = Harness::new();
    let t = h.open(1000);
    t.register_watch(watch("KA05MN4412", "a@x.org", "1", "")).unwrap();
    t.register_watch(watch("ka 05 mn 4412", "b@x.org", "2", "")).unwrap();
    let done = t.ingest_trace("KA05MN4412", "cam-katpadi").unwrap();
    assert_eq!(done.alerts.len(), 2);
    assert_eq!(h.notifier.sent().iter().map(|a| a.to.as_str()).collect::<Vec<_>>(), ["a@x.org", "b@x.org"]);
    assert!(t.ingest_trace("KA01ZZ0001", "cam-katpadi").unwrap().alerts.is_empty());

    let e = t.register_watch(watch("KA05MN4412", "no-at-sign", "1", "")).unwrap_err();
    assert!(matches!(e, TrackerError::Validation { field: "email", .. }));
    assert!(matches!(t.ingest_trace("KA-05", "c"), Err(TrackerError::Validation { field: "number", .. })));
    assert!(matches!(t.search("??"), Err(TrackerError::Validation { field: "number", .. })));
    // Rejected operations leave nothing behind.
    assert_eq!(t.seq(), 4);
}

#[test]
fn timestamps_never_go_backwards_per_camera() {
    let h = Harness::new();
    let t = h.open(1000);
    let a = t.ingest_trace("TN01AA0001", "cam-vellore").unwrap().trace.time;
    h.clock.advance(Duration::seconds(-30));
    let b = t.ingest_trace("TN01AA0002", "cam-vellore").unwrap().trace.time;
    let other = t.ingest_trace("TN01AA0003", "cam-katpadi").unwrap().trace.time;
    assert_eq!(a, b);
    assert!(other < a);
}

#[test]
fn thousand_random_operations_match_reference_model() {
    for seed in 0..4 {
        let h = Harness::new();
        let t = h.open(97);
        let mut model = ReferenceModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..1000 {
            let op = random_op(&mut rng);
            if let Err(e) = step(&t, &h.clock, &mut model, &op) {
                panic!("seed {seed} op {i}: {e}");
            }
        }
        same_state(&t, &model).unwrap();
        // Every alert reached the notifier exactly once.
        let mut sent: Vec<_> = h.notifier.sent().iter().map(|a| AlertKey { watch_id: a.watch_id, trace_id: a.trace_id }).collect();
        sent.sort();
        assert_eq!(sent, model.sorted_alerts());
    }
}

#[test]
fn reopening_replays_snapshot_and_journal() {
    let h = Harness::new();
    let mut model = ReferenceModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for round in 0..5 {
        let t = h.open(37);
        same_state(&t, &model).unwrap_or_else(|e| panic!("after reopen {round}: {e}"));
        for _ in 0..150 {
            step(&t, &h.clock, &mut model, &random_op(&mut rng)).unwrap();
        }
    }
    let t = h.open(0);
    t.snapshot().unwrap();
    drop(t);
    same_state(&h.open(0), &model).unwrap();
}

#[test]
fn torn_tail_is_dropped_but_mid_file_damage_is_reported() {
    let h = Harness::new();
    {
        let t = h.open(0);
        seed_sample(&h, &t);
    }
    let path = h.dir.path().join(journal::JOURNAL_FILE);
    let good = std::fs::read(&path).unwrap();

    // A crash mid-append leaves half a record.
    let extra = journal::encode(&Entry {
        seq: 8,
        event: Event::Watch {
            watch: WatchEntry {
                id: 3,
                vehicle: "X1".into(),
                email: "a@b".into(),
                mobile: "1".into(),
                details: String::new(),
                created_at: Utc::now().with_timezone(&ist()),
            },
        },
    });
    let mut torn = good.clone();
    torn.extend_from_slice(&extra[..extra.len() / 2]);
    std::fs::write(&path, &torn).unwrap();
    let t = h.open(0);
    assert_eq!(t.seq(), 7);
    assert_eq!(t.list_watches().len(), 2);
    drop(t);
    assert_eq!(std::fs::read(&path).unwrap(), good);

    let mut damaged = good.clone();
    damaged[12] ^= 0xff;
    std::fs::write(&path, &damaged).unwrap();
    let mut cfg = TrackerConfig::new(h.dir.path());
    cfg.timezone = ist();
    let err = Tracker::open(cfg, Arc::new(static_geo()), h.notifier.clone(), h.clock.clone()).err().unwrap();
    assert!(matches!(err, TrackerError::Corrupt { .. }), "{err}");
}

#[test]
fn outbox_collects_alert_lines() {
    let dir = tempfile::tempdir().unwrap();
    let outbox = dir.path().join("outbox.jsonl");
    let clock = Arc::new(ManualClock::new(sample_time("22:20:05")));
    let mut cfg = TrackerConfig::new(dir.path().join("data"));
    cfg.timezone = ist();
    let t = Tracker::open(cfg, Arc::new(StaticGeo::uniform(vellore())), Arc::new(OutboxNotifier::new(&outbox)), clock).unwrap();
    t.register_watch(watch("TN23CB0624", "x@y.z", "9", "lost")).unwrap();
    t.ingest_trace("TN23CB0624", "any").unwrap();
    t.ingest_trace("TN23CB0624", "any").unwrap();
    let alerts = OutboxNotifier::read_all(&outbox).unwrap();
    assert_eq!(alerts.len(), 2);
    assert_eq!(alerts[0].time, "2017-05-28 22:20:05");
    assert!(alerts[1].body.contains("lost"));
}

#[test]
fn smtp_adapter_speaks_the_protocol() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = std::thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut w = stream.try_clone().unwrap();
        let mut r = BufReader::new(stream);
        let mut transcript = Vec::new();
        let mut line = String::new();
        w.write_all(b"220 fake ready\r\n").unwrap();
        let mut in_data = false;
        loop {
            line.clear();
            if r.read_line(&mut line).unwrap() == 0 {
                break;
            }
            transcript.push(line.trim_end().to_string());
            if in_data {
                if line == ".\r\n" {
                    in_data = false;
                    w.write_all(b"250 queued\r\n").unwrap();
                }
                continue;
            }
            let reply: &[u8] = match &line[..4] {
                "HELO" => b"250-fake\r\n250 hello\r\n",
                "DATA" => {
                    in_data = true;
                    b"354 go\r\n"
                }
                "QUIT" => {
                    w.write_all(b"221 bye\r\n").unwrap();
                    break;
                }
                _ => b"250 ok\r\n",
            };
            w.write_all(reply).unwrap();
        }
        transcript
    });

    let n = SmtpNotifier::new(addr.to_string(), "tracker@example.com");
    let watch = WatchEntry {
        id: 1,
        vehicle: "TN23CB0624".into(),
        email: "owner@example.com".into(),
        mobile: "1".into(),
        details: ".starts with a dot".into(),
        created_at: Utc::now().with_timezone(&ist()),
    };
    let trace = TraceRecord {
        id: 4,
        number: "TN23CB0624".into(),
        location: vellore(),
        time: sample_time("22:20:05").with_timezone(&ist()),
        camera_id: "cam".into(),
    };
    n.send_alert(&watch, &trace).unwrap();
    let transcript = server.join().unwrap();
    assert!(transcript.contains(&"MAIL FROM:<tracker@example.com>".to_string()));
    assert!(transcript.contains(&"RCPT TO:<owner@example.com>".to_string()));
    assert!(transcript.contains(&"Subject: Vehicle Traced !".to_string()));
    assert!(transcript.contains(&"Your note: .starts with a dot".to_string()));
    assert!(transcript.iter().any(|l| l.contains("12.9333 79.1333 Vellore TN IN") && l.contains("2017-05-28 22:20:05")));

    // Nobody listening.
    let closed = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap();
    assert!(SmtpNotifier::new(closed.to_string(), "a@b").send_alert(&watch, &trace).is_err());
}

#[test]
fn http_geo_parses_and_caches() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = std::thread::spawn(move || {
        let (mut s, _) = listener.accept().unwrap();
        let mut req = String::new();
        BufReader::new(s.try_clone().unwrap()).read_line(&mut req).unwrap();
        let body = r#"{"ip":"10.0.0.7","latitude":12.9333,"longitude":79.1333,"city":"Vellore","region_code":"TN","country_code":"IN"}"#;
        write!(s, "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}", body.len()).unwrap();
        req
    });
    let geo = HttpGeo::new(format!("http://{addr}/json"), [("cam-1".to_string(), "10.0.0.7".to_string())].into()).unwrap();
    let loc = geo.locate("cam-1").unwrap();
    assert_eq!(loc.to_string(), "12.9333 79.1333 Vellore TN IN");
    assert!(server.join().unwrap().starts_with("GET /json/10.0.0.7 "));
    // Served from cache; the fake server is gone.
    assert_eq!(geo.locate("cam-1").unwrap(), loc);
}
