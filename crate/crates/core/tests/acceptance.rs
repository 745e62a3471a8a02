//! Acceptance suite. Every criterion prints one `[PASS]` or `[FAIL]` line
//! and then asserts. Run with `--nocapture` to see the lines.

mod common;

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::{reference_encode, RefScheme};
use ezw::bench::{run_scheme, SchemeRun, SchemeSpec};
use ezw::bitstream::{EzwBitstream, HEADER_LEN};
use ezw::codec::{decode, encode, Decoder, EncoderConfig, Scheme};
use ezw::imageio::{read_pgm, write_pgm, GrayImage};
use ezw::metrics::psnr;
use ezw::wavelet::{forward_dwt_2d, inverse_dwt_2d, inverse_dwt_2d_real, BankId, CoeffPyramid, Geometry, CENTER};
use ezw::zerotree::{classify, descendant_max_abs, scan_order, Symbol};
use ezw::Error;
use rand::Rng;

const PASSES: usize = 10;
const LEVELS: usize = 5;

fn report(n: u32, ok: bool, summary: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {n}: {summary}");
    assert!(ok, "criterion {n} failed: {summary}");
}

fn cfg(scheme: Scheme, drp: usize, passes: usize, levels: usize, bank: BankId) -> EncoderConfig {
    EncoderConfig::new(scheme, drp, passes, levels, bank).unwrap()
}

struct CameraBench {
    runs: Vec<SchemeRun>,
    elapsed: Duration,
}

impl CameraBench {
    fn get(&self, spec: SchemeSpec) -> &SchemeRun {
        self.runs.iter().find(|r| r.spec == spec).unwrap()
    }
}

/// A, B, C3, C4, C5 on the 512x512 camera image, 10 passes, Haar, 5 levels.
fn camera_bench() -> &'static CameraBench {
    static BENCH: OnceLock<CameraBench> = OnceLock::new();
    BENCH.get_or_init(|| {
        let image = common::camera();
        assert_eq!((image.width(), image.height()), (512, 512));
        let started = Instant::now();
        let runs = SchemeSpec::default_set()
            .into_iter()
            .map(|spec| run_scheme(&image, spec, PASSES, LEVELS, BankId::Haar).unwrap())
            .collect();
        CameraBench {
            runs,
            elapsed: started.elapsed(),
        }
    })
}

#[test]
fn criterion_01_dwt_round_trip() {
    let mut rng = common::rng(101);
    let started = Instant::now();
    let mut worst = 0.0f64;
    let mut exact = true;
    let cases = 120;
    for i in 0..cases {
        let levels = rng.gen_range(1..=3);
        let step = 1usize << levels;
        let w = step * rng.gen_range(8 / step.min(8)..=64 / step);
        let h = step * rng.gen_range(8 / step.min(8)..=64 / step);
        let (w, h) = (w.clamp(8, 64), h.clamp(8, 64));
        let bank = if i % 2 == 0 { BankId::Haar } else { BankId::Daub4 }.bank();
        let img = common::noise_image(&mut rng, w, h);
        let p = forward_dwt_2d(&img, levels, &bank).unwrap();
        let real = inverse_dwt_2d_real(&p, &bank);
        for (r, &s) in real.iter().zip(img.samples()) {
            worst = worst.max((r + CENTER - s as f64).abs());
        }
        exact &= inverse_dwt_2d(&p, &bank).unwrap() == img;
    }
    let elapsed = started.elapsed();
    report(
        1,
        exact && worst < 1e-6 && elapsed < Duration::from_secs(10),
        &format!(
            "DWT round trip on {cases} images: exact={exact}, max pre-rounding error {worst:.3e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    );
}

fn brute_descendant_max(p: &CoeffPyramid, row: usize, col: usize) -> f64 {
    common::oracle_children(p.width(), p.height(), p.levels(), row, col)
        .into_iter()
        .map(|(r, c)| p.get(r, c).abs().max(brute_descendant_max(p, r, c)))
        .fold(0.0, f64::max)
}

#[test]
fn criterion_02_zerotree_oracle() {
    let mut rng = common::rng(102);
    let started = Instant::now();
    let mut mismatches = 0usize;
    let mut checks = 0usize;
    for _ in 0..50 {
        let levels = rng.gen_range(1..=4);
        let g = Geometry::new(16, 16, levels).unwrap();
        let plane: Vec<f64> = (0..256)
            .map(|_| {
                let m = 2f64.powf(rng.gen_range(-2.0..7.0));
                if rng.gen_bool(0.5) {
                    m
                } else {
                    -m
                }
            })
            .collect();
        let p = CoeffPyramid::new(g, plane).unwrap();
        let coords = scan_order(&g);
        for c in &coords {
            let brute = brute_descendant_max(&p, c.row, c.col);
            checks += 1;
            if descendant_max_abs(c, &p).unwrap() != brute {
                mismatches += 1;
            }
        }
        let mut t = 2f64.powi(p.max_abs().log2().floor() as i32);
        while t >= 1.0 {
            for c in &coords {
                let v = p.get(c.row, c.col);
                let expected = if v.abs() >= t {
                    if v > 0.0 {
                        Symbol::Pos
                    } else {
                        Symbol::Neg
                    }
                } else if brute_descendant_max(&p, c.row, c.col) >= t {
                    Symbol::Iz
                } else {
                    Symbol::Ztr
                };
                checks += 1;
                if classify(c, t, &p).unwrap() != expected {
                    mismatches += 1;
                }
            }
            t /= 2.0;
        }
    }
    let elapsed = started.elapsed();
    report(
        2,
        mismatches == 0 && elapsed < Duration::from_secs(5),
        &format!(
            "zerotree oracle on 50 pyramids: {checks} checks, {mismatches} mismatches, {:.2}s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_03_scheme_b_first_pass_golden() {
    let (p, golden) = common::shapiro_fixture();
    let (stream, _) = ezw::codec::encode_pyramid(p.clone(), &cfg(Scheme::B, 0, 1, 3, BankId::Haar)).unwrap();
    let got = &stream.passes[0].symbols;
    let oracle = &reference_encode(&p, RefScheme::B, 1)[0].symbols;
    let ok = got == &golden && oracle == &golden;
    let text: Vec<String> = got.iter().map(Symbol::to_string).collect();
    report(3, ok, &format!("8x8 golden first pass ({} symbols): {}", got.len(), text.join(" ")));
}

#[test]
fn criterion_04_scheme_equivalences() {
    let mut rng = common::rng(104);
    let mut b_equal = 0;
    let mut a_equal = 0;
    let images = 10;
    for _ in 0..images {
        let img = if rng.gen_bool(0.5) {
            common::textured_image(&mut rng, 32, 32)
        } else {
            common::noise_image(&mut rng, 32, 32)
        };
        let run = |s, d| encode(&img, &cfg(s, d, PASSES, 3, BankId::Haar)).unwrap().0;
        let (b, c_last) = (run(Scheme::B, 0), run(Scheme::C, PASSES));
        // the header names the scheme, so compare everything after it
        if b.to_bytes()[HEADER_LEN..] == c_last.to_bytes()[HEADER_LEN..] {
            b_equal += 1;
        }
        let (a, c_first) = (run(Scheme::A, 0), run(Scheme::C, 1));
        if a.passes.len() == c_first.passes.len() && a.passes[1..] == c_first.passes[1..] {
            a_equal += 1;
        }
    }
    report(
        4,
        b_equal == images && a_equal == images,
        &format!("C(drp=N) == B on {b_equal}/{images}, C(drp=1) == A from pass 2 on {a_equal}/{images}"),
    );
}

#[test]
fn criterion_05_visit_ordering() {
    let bench = camera_bench();
    let a = bench.get(SchemeSpec::a());
    let b = bench.get(SchemeSpec::b());
    let c: Vec<&SchemeRun> = [3, 4, 5].iter().map(|&d| bench.get(SchemeSpec::c(d))).collect();
    let at = |r: &SchemeRun, k| r.stats.cumulative_visits(k);
    let mut ok = c.iter().all(|c| at(a, PASSES) < at(c, PASSES) && at(c, PASSES) < at(b, PASSES));
    ok &= c.windows(2).all(|w| at(w[0], PASSES) <= at(w[1], PASSES));
    for k in 1..=PASSES {
        ok &= c.iter().all(|c| at(a, k) <= at(c, k) && at(c, k) <= at(b, k));
    }
    ok &= bench.elapsed < Duration::from_secs(60);
    report(
        5,
        ok,
        &format!(
            "visits at pass 10: A {} < C3 {} <= C4 {} <= C5 {} < B {} (5 runs in {:.1}s)",
            at(a, PASSES),
            at(c[0], PASSES),
            at(c[1], PASSES),
            at(c[2], PASSES),
            at(b, PASSES),
            bench.elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_06_psnr_proximity() {
    let bench = camera_bench();
    let a = bench.get(SchemeSpec::a());
    let b = bench.get(SchemeSpec::b());
    let k = 7;
    let gaps: Vec<(usize, f64)> = [4, 5]
        .iter()
        .map(|&d| (d, b.psnr[k - 1] - bench.get(SchemeSpec::c(d)).psnr[k - 1]))
        .collect();
    let close = gaps.iter().all(|&(_, g)| g <= 1.5);
    let mut ordered = true;
    for d in [3, 4, 5] {
        let c = bench.get(SchemeSpec::c(d));
        for i in 0..PASSES {
            ordered &= a.psnr[i] <= c.psnr[i] + 0.01 && c.psnr[i] + 0.01 <= b.psnr[i] + 0.02;
        }
    }
    let gap_text: Vec<String> = gaps.iter().map(|(d, g)| format!("C{d} {g:.2} dB")).collect();
    report(
        6,
        close && ordered,
        &format!(
            "pass-7 gap B-C (limit 1.5 dB): {}; ordering A <= C <= B at every pass: {ordered}",
            gap_text.join(", ")
        ),
    );
}

#[test]
fn criterion_07_stream_size_ordering() {
    let bench = camera_bench();
    let b = bench.get(SchemeSpec::b());
    let bytes = |r: &SchemeRun, k: usize| r.stats.passes[k - 1].cumulative_stream_bytes;
    let mut ok = true;
    let mut detail = Vec::new();
    for d in [3, 4, 5] {
        let c = bench.get(SchemeSpec::c(d));
        for k in d..=PASSES {
            ok &= bytes(c, k) <= bytes(b, k);
        }
        detail.push(format!("C{d} {}", bytes(c, PASSES)));
    }
    report(
        7,
        ok,
        &format!("bytes at pass 10: {} <= B {}", detail.join(", "), bytes(b, PASSES)),
    );
}

/// Decoded PSNR and coefficient-domain squared error after every pass.
fn refinement_curve(img: &GrayImage, c: EncoderConfig) -> (Vec<f64>, Vec<f64>) {
    let p = forward_dwt_2d(img, c.levels, &c.bank.bank()).unwrap();
    let (stream, _) = encode(img, &c).unwrap();
    let mut dec = Decoder::new(stream.header).unwrap();
    let mut db = Vec::new();
    let mut err = vec![p.energy()];
    for record in &stream.passes {
        dec.apply(record).unwrap();
        db.push(psnr(img, &dec.image().unwrap()).unwrap());
        let e: f64 = dec
            .state()
            .reconstruction_map()
            .iter()
            .zip(p.plane())
            .map(|(r, v)| (r - v).powi(2))
            .sum();
        err.push(e);
    }
    (db, err)
}

/// Largest pass-to-pass PSNR drop in a curve.
fn worst_drop(db: &[f64]) -> f64 {
    db.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
}

#[test]
fn criterion_08_monotone_refinement() {
    let mut curves = 0;
    let mut psnr_drops = 0;
    let mut error_rises = 0;
    let mut worst = 0.0f64;
    for run in &camera_bench().runs {
        worst = worst.max(worst_drop(&run.psnr));
        psnr_drops += usize::from(worst_drop(&run.psnr) > 0.01);
        curves += 1;
    }
    let mut rng = common::rng(108);
    let mut images = vec![common::camera()];
    for i in 0..6 {
        let size = [32, 64, 128][i % 3];
        images.push(if i % 2 == 0 {
            common::textured_image(&mut rng, size, size)
        } else {
            common::noise_image(&mut rng, size, size)
        });
    }
    for img in &images {
        let levels = LEVELS.min(img.width().trailing_zeros() as usize);
        for bank in [BankId::Haar, BankId::Daub4] {
            let mut configs = vec![cfg(Scheme::A, 0, PASSES, levels, bank), cfg(Scheme::B, 0, PASSES, levels, bank)];
            configs.extend((1..=PASSES).step_by(2).map(|d| cfg(Scheme::C, d, PASSES, levels, bank)));
            for c in configs {
                let (db, err) = refinement_curve(img, c);
                worst = worst.max(worst_drop(&db));
                psnr_drops += usize::from(worst_drop(&db) > 0.01);
                error_rises += usize::from(!err.windows(2).all(|w| w[1] <= w[0]));
                curves += 1;
            }
        }
    }
    report(
        8,
        psnr_drops == 0 && error_rises == 0,
        &format!(
            "{curves} curves over {} images: {psnr_drops} with a PSNR drop > 0.01 dB (worst {worst:.4} dB), \
             {error_rises} with rising coefficient error",
            images.len()
        ),
    );
}

#[test]
fn criterion_09_embedded_prefix() {
    let mut rng = common::rng(109);
    let images = [common::camera(), common::textured_image(&mut rng, 128, 128)];
    let mut checked = 0;
    let mut ok = true;
    for img in &images {
        for (scheme, drp) in [(Scheme::A, 0), (Scheme::B, 0), (Scheme::C, 4)] {
            let (stream, _) = encode(img, &cfg(scheme, drp, PASSES, LEVELS, BankId::Haar)).unwrap();
            let bytes = stream.to_bytes();
            for k in 1..=stream.passes.len() {
                let cut = &bytes[..stream.byte_len_through(k)];
                let short = decode(cut, None).unwrap();
                let full = decode(&bytes, Some(k)).unwrap();
                ok &= short.passes_decoded == k && short.truncated == (k < stream.passes.len());
                ok &= write_pgm(&short.image) == write_pgm(&full.image);
                checked += 1;
            }
        }
    }
    report(
        9,
        ok && checked == 60,
        &format!("{checked} truncated-at-boundary decodes byte-identical to max_passes decodes"),
    );
}

fn patched(base: &[u8], at: usize, bytes: &[u8]) -> Vec<u8> {
    let mut out = base.to_vec();
    out[at..at + bytes.len()].copy_from_slice(bytes);
    out
}

#[test]
fn criterion_10_format_round_trips() {
    let mut rng = common::rng(110);
    let mut pgm_ok = true;
    for _ in 0..50 {
        let (w, h) = (rng.gen_range(1..40), rng.gen_range(1..40));
        let img = common::noise_image(&mut rng, w, h);
        let bytes = write_pgm(&img);
        pgm_ok &= read_pgm(&bytes).unwrap() == img && write_pgm(&read_pgm(&bytes).unwrap()) == bytes;
    }
    let cam = common::camera();
    pgm_ok &= write_pgm(&cam).len() == 262_159 && read_pgm(&write_pgm(&cam)).unwrap() == cam;

    let img = common::textured_image(&mut rng, 64, 64);
    let base = encode(&img, &cfg(Scheme::C, 3, 8, 4, BankId::Haar)).unwrap().0.to_bytes();
    let fixtures: Vec<Vec<u8>> = vec![
        base[..0].to_vec(),
        base[..HEADER_LEN - 1].to_vec(),
        patched(&base, 0, b"EZW2"),
        patched(&base, 0, b"\0\0\0\0"),
        patched(&base, 4, &0u32.to_le_bytes()),
        patched(&base, 4, &70_000u32.to_le_bytes()),
        patched(&base, 4, &65u32.to_le_bytes()),
        patched(&base, 8, &0u32.to_le_bytes()),
        patched(&base, 8, &u32::MAX.to_le_bytes()),
        patched(&base, 12, &[0]),
        patched(&base, 12, &[7]),
        patched(&base, 12, &[200]),
        patched(&base, 13, &[9]),
        patched(&base, 14, &[3]),
        patched(&base, 14, &[1]),
        patched(&base, 15, &[0]),
        patched(&base, 16, &i16::MAX.to_le_bytes()),
        patched(&base, 16, &i16::MIN.to_le_bytes()),
        patched(&base, 18, &[0]),
        patched(&base, 18, &[250]),
        [base.as_slice(), b"x"].concat(),
    ];
    let mut rejected = 0;
    for bytes in &fixtures {
        let outcome = std::panic::catch_unwind(|| EzwBitstream::parse(bytes).and_then(|_| decode(bytes, None)));
        if matches!(outcome, Ok(Err(Error::Format { .. }))) {
            rejected += 1;
        }
    }
    report(
        10,
        pgm_ok && rejected == fixtures.len() && fixtures.len() >= 20,
        &format!(
            "PGM read/write identity: {pgm_ok}; {rejected}/{} corrupted EZW1 fixtures rejected with format errors",
            fixtures.len()
        ),
    );
}
