//! End-to-end pipeline tests: analytic waveform identities for the
//! presets, agreement between the engine's structured execution and the
//! fully materialized operator-matrix composition, frame overlap-add
//! behavior, and the circular-period/channel-count divisibility semantics.

use mcmod_core::config::{ExtensionSpec, ModulatorConfig, StageSpec, StreamCombiner};
use mcmod_core::engine::{stage_filter, EngineError, Modulator, StageSignal};
use mcmod_core::frame::DataFrame;
use mcmod_core::mat::{Mat, Mat01};
use mcmod_core::operators::{
    build_circulant_filter, build_commutator, build_cyclic_extension, build_decimator,
    build_modulation_matrix, build_phase_vector, build_upsampler, build_window,
    build_zero_stuffer,
};
use mcmod_core::presets::{default_prototype, preset_fbmc_oqam_sized, preset_ofdm, preset_scfdma};
use mcmod_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAU: f64 = core::f64::consts::TAU;

fn random_symbols(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

// --- analytic preset checks ---------------------------------------------

#[test]
fn test_ofdm_impulse_on_carrier_zero_is_all_ones() {
    let preset = preset_ofdm();
    let modulator = preset.modulator();
    let frame = DataFrame::impulse(1, 1, 128, (0, 0, 0));
    let out = modulator.modulate_frame(&frame).unwrap();
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].len(), 160);
    for (t, &s) in out[0].iter().enumerate() {
        assert!((s - Complex64::ONE).norm() < 1e-12, "sample {t} was {s}");
    }
}

#[test]
fn test_ofdm_matches_textbook_idft_with_prefix() {
    let preset = preset_ofdm();
    let modulator = preset.modulator();
    let symbols = random_symbols(128, 11);
    let wave = modulator.modulate_symbols(&symbols).unwrap();
    assert_eq!(wave.frame_count, 1);
    assert_eq!(wave.len(), 160);

    // Unnormalized inverse DFT, then a copy of the last quarter in front.
    let core: Vec<Complex64> = (0..128)
        .map(|k| {
            (0..128)
                .map(|m| symbols[m] * Complex64::cis(TAU * ((k * m) % 128) as f64 / 128.0))
                .sum()
        })
        .collect();
    let mut expect = core[96..].to_vec();
    expect.extend_from_slice(&core);
    assert!(max_diff(&wave.outputs[0], &expect) < 1e-10);
}

#[test]
fn test_scfdma_constant_input_yields_single_tone() {
    let preset = preset_scfdma();
    let modulator = preset.modulator();
    let symbols = vec![Complex64::ONE; 32];
    let wave = modulator.modulate_symbols(&symbols).unwrap();
    assert_eq!(wave.len(), 160);
    // The conjugated 32-channel stage collapses a constant block to an
    // impulse, which lands on subcarrier 96 alone: a pure tone with a
    // cyclic prefix, constant envelope 32.
    for t in 0..128 {
        let expect = Complex64::new(32.0, 0.0) * Complex64::cis(TAU * ((96 * t) % 128) as f64 / 128.0);
        assert!(
            (wave.outputs[0][32 + t] - expect).norm() < 1e-9,
            "sample {t} off: {} vs {expect}",
            wave.outputs[0][32 + t]
        );
    }
    for t in 0..32 {
        let d = (wave.outputs[0][t] - wave.outputs[0][t + 128]).norm();
        assert!(d < 1e-12, "prefix mismatch at {t}");
    }
}

fn ofdm_without_prefix() -> ModulatorConfig {
    let mut cfg = preset_ofdm().config;
    cfg.tier2 = ExtensionSpec::NONE;
    cfg.window = vec![Complex64::ONE; 128];
    cfg.stage2.n_c = 128;
    cfg
}

#[test]
fn test_ofdm_core_preserves_scaled_energy() {
    let modulator = Modulator::new(ofdm_without_prefix()).unwrap();
    let symbols = random_symbols(128, 23);
    let wave = modulator.modulate_symbols(&symbols).unwrap();
    let e_in: f64 = symbols.iter().map(|s| s.norm_sqr()).sum();
    let e_out: f64 = wave.outputs[0].iter().map(|s| s.norm_sqr()).sum();
    // An unnormalized 128-point inverse DFT scales energy by 128.
    assert!((e_out / e_in - 128.0).abs() < 1e-9);
}

#[test]
fn test_ofdm_composite_columns_are_orthogonal() {
    let modulator = Modulator::new(ofdm_without_prefix()).unwrap();
    let g = modulator.composite_matrix();
    assert_eq!((g.rows(), g.cols()), (128, 128));
    let gram = g.conj().transpose().mul(&g);
    let mut worst = 0.0f64;
    for i in 0..128 {
        for j in 0..128 {
            let expect = if i == j { 128.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - Complex64::new(expect, 0.0)).norm());
        }
    }
    assert!(worst < 1e-9, "worst Gram deviation {worst}");
}

// --- engine vs dense operator composition --------------------------------

fn dense_stage(x: &Mat, spec: &StageSpec, stream: usize) -> Mat {
    let n_s = x.rows();
    let u = build_upsampler(spec.l, spec.o[stream], n_s).unwrap().to_dense();
    let z = build_zero_stuffer(spec.n_c, spec.l * n_s).unwrap().to_dense();
    let f = build_modulation_matrix(spec.n_c, spec.m, spec.b_conj)
        .unwrap()
        .to_dense();
    let h = build_circulant_filter(&spec.h, spec.n_c).unwrap().to_dense();
    let stuffed = z.mul(&u.mul(x));
    let mut y = f.hadamard(&h.mul(&f.conj().hadamard(&stuffed)));
    build_phase_vector(spec.m, spec.h.len(), spec.b_cas).scale_cols(&mut y);
    build_decimator(spec.q, spec.a[stream], spec.n_c)
        .unwrap()
        .to_dense()
        .mul(&y)
}

fn dense_frame(cfg: &ModulatorConfig, frame: &DataFrame) -> Vec<Vec<Complex64>> {
    let mut per_stream = Vec::new();
    for (p, x) in frame.streams.iter().enumerate() {
        let c1 = build_cyclic_extension(
            cfg.tier1.n_zp,
            cfg.tier1.n_cp,
            x.rows(),
            cfg.tier1.n_cs,
            cfg.tier1.n_zs,
        )
        .unwrap()
        .to_dense();
        let e1 = build_commutator(&cfg.e, cfg.stage1.m).unwrap().to_dense();
        let x1 = c1.mul(x).mul(&e1);
        let y1 = dense_stage(&x1, &cfg.stage1, p);
        let c2 = build_cyclic_extension(
            cfg.tier2.n_zp,
            cfg.tier2.n_cp,
            y1.rows(),
            cfg.tier2.n_cs,
            cfg.tier2.n_zs,
        )
        .unwrap()
        .to_dense();
        let mut y2 = c2.mul(&y1);
        if !cfg.window.is_empty() {
            y2 = build_window(&cfg.window, y2.rows())
                .unwrap()
                .to_dense()
                .mul(&y2);
        }
        let routed = y2.mul(&cfg.e2.to_mat());
        let staged = if cfg.b_tran {
            routed.transpose().mul(&cfg.e3.as_ref().unwrap().to_mat())
        } else {
            routed
        };
        let y3 = dense_stage(&staged, &cfg.stage2, p);
        let c3 = build_cyclic_extension(
            cfg.tier3.n_zp,
            cfg.tier3.n_cp,
            y3.rows(),
            cfg.tier3.n_cs,
            cfg.tier3.n_zs,
        )
        .unwrap()
        .to_dense();
        per_stream.push(c3.mul(&y3).sum_cols());
    }
    match &cfg.e4 {
        StreamCombiner::Identity => per_stream,
        StreamCombiner::SumStreams => {
            let mut sum = vec![Complex64::ZERO; per_stream[0].len()];
            for s in &per_stream {
                for (d, v) in sum.iter_mut().zip(s) {
                    *d += v;
                }
            }
            vec![sum]
        }
        StreamCombiner::Explicit(_) => unimplemented!("not exercised here"),
    }
}

fn random_mat(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
    Mat::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    })
}

#[test]
fn test_engine_matches_dense_composition_two_streams() {
    // Every block active at once: zero padding, cyclic copies, permuted
    // commutator, fractional-rate first stage with per-stream offsets,
    // conjugation, causal phase, padded window, non-square multiplexer,
    // upsampling second stage, cyclic suffix, stream summation.
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let h1: Vec<Complex64> = (0..4)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let g2 = vec![
        Complex64::new(1.0, 0.5),
        Complex64::new(0.3, -0.2),
    ];
    let window: Vec<Complex64> = (0..7)
        .map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.05 * i as f64))
        .collect();
    let cfg = ModulatorConfig {
        n: 3,
        m_prime: 2,
        p: 2,
        e: vec![2, 0],
        tier1: ExtensionSpec {
            n_zp: 1,
            n_cp: 1,
            n_cs: 0,
            n_zs: 1,
        },
        stage1: StageSpec {
            m: 3,
            l: 2,
            q: 2,
            h: h1,
            n_c: 12,
            o: vec![0, 1],
            a: vec![1, 0],
            b_conj: true,
            b_cas: true,
        },
        tier2: ExtensionSpec {
            n_zp: 0,
            n_cp: 2,
            n_cs: 0,
            n_zs: 1,
        },
        window,
        e2: Mat01::from_flat(3, 2, &[1, 0, 1, 1, 0, 1]).unwrap(),
        e3: None,
        b_tran: false,
        stage2: StageSpec {
            m: 2,
            l: 3,
            q: 1,
            h: g2,
            n_c: 28,
            o: vec![1, 2],
            a: vec![0, 0],
            b_conj: false,
            b_cas: true,
        },
        tier3: ExtensionSpec {
            n_zp: 0,
            n_cp: 0,
            n_cs: 2,
            n_zs: 0,
        },
        k: 1,
        e4: StreamCombiner::SumStreams,
    };
    let modulator = Modulator::new(cfg.clone()).unwrap();
    let frame = DataFrame {
        index: 0,
        streams: vec![random_mat(3, 2, &mut rng), random_mat(3, 2, &mut rng)],
    };
    let fast = modulator.modulate_frame(&frame).unwrap();
    let dense = dense_frame(&cfg, &frame);
    assert_eq!(fast.len(), dense.len());
    for (a, b) in fast.iter().zip(&dense) {
        assert!(max_diff(a, b) < 1e-10);
    }
}

#[test]
fn test_engine_matches_dense_composition_transpose_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let cfg = ModulatorConfig {
        n: 2,
        m_prime: 2,
        p: 1,
        e: vec![0, 1],
        tier1: ExtensionSpec::NONE,
        stage1: StageSpec {
            m: 2,
            l: 2,
            q: 1,
            h: vec![Complex64::new(0.9, 0.1), Complex64::new(-0.2, 0.4)],
            n_c: 4,
            o: vec![0],
            a: vec![0],
            b_conj: true,
            b_cas: false,
        },
        tier2: ExtensionSpec {
            n_zp: 0,
            n_cp: 1,
            n_cs: 0,
            n_zs: 0,
        },
        window: (0..5)
            .map(|i| Complex64::new(0.5 + 0.25 * i as f64, -0.1 * i as f64))
            .collect(),
        e2: Mat01::from_flat(2, 2, &[1, 1, 0, 1]).unwrap(),
        e3: Some(Mat01::from_flat(5, 3, &[1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 0, 1, 0, 1, 0]).unwrap()),
        b_tran: true,
        stage2: StageSpec {
            m: 3,
            l: 2,
            q: 1,
            h: vec![Complex64::new(1.0, 0.5), Complex64::new(0.3, 0.0)],
            n_c: 6,
            o: vec![0],
            a: vec![0],
            b_conj: false,
            b_cas: true,
        },
        tier3: ExtensionSpec {
            n_zp: 1,
            n_cp: 0,
            n_cs: 0,
            n_zs: 0,
        },
        k: 1,
        e4: StreamCombiner::Identity,
    };
    let modulator = Modulator::new(cfg.clone()).unwrap();
    let frame = DataFrame {
        index: 0,
        streams: vec![random_mat(2, 2, &mut rng)],
    };
    let fast = modulator.modulate_frame(&frame).unwrap();
    let dense = dense_frame(&cfg, &frame);
    for (a, b) in fast.iter().zip(&dense) {
        assert!(max_diff(a, b) < 1e-12);
    }
}

// --- framing, strides, overlap-add ---------------------------------------

#[test]
fn test_modulate_symbols_pads_final_frame() {
    let modulator = preset_ofdm().modulator();
    let wave = modulator.modulate_symbols(&random_symbols(130, 5)).unwrap();
    assert_eq!(wave.frame_count, 2);
    assert_eq!(wave.len(), 160 + 160);
    assert_eq!(wave.stride, Some(160));
}

#[test]
fn test_overlapping_frames_add_shifted_responses() {
    let preset = preset_fbmc_oqam_sized(8, 16, &default_prototype(8));
    let modulator = preset.modulator();
    let dims = *modulator.dims();
    assert!(dims.frame_len > dims.stride.unwrap(), "frames must overlap");

    let symbols = random_symbols(2 * 16 * 8, 77);
    let frames = preset.frames(&symbols);
    assert_eq!(frames.len(), 2);
    let both = modulator.modulate(&frames).unwrap();
    let first = modulator.modulate(&frames[..1]).unwrap();
    let second = modulator.modulate(&frames[1..]).unwrap();

    let stride = dims.stride.unwrap();
    let mut expect = vec![Complex64::ZERO; stride + dims.frame_len];
    for (t, &s) in first.outputs[0].iter().enumerate() {
        expect[t] += s;
    }
    for (t, &s) in second.outputs[0].iter().enumerate() {
        expect[stride + t] += s;
    }
    assert_eq!(both.len(), expect.len());
    assert!(max_diff(&both.outputs[0], &expect) < 1e-15);
}

#[test]
fn test_zero_suffix_leaves_silent_guard_between_frames() {
    // A zero suffix in tier 1 reserves upsampled time that the short
    // filter never reaches, so consecutive frames sit apart with genuine
    // zeros in between.
    let cfg = ModulatorConfig {
        n: 1,
        m_prime: 1,
        p: 1,
        e: vec![0],
        tier1: ExtensionSpec {
            n_zp: 0,
            n_cp: 0,
            n_cs: 0,
            n_zs: 1,
        },
        stage1: StageSpec {
            m: 1,
            l: 2,
            q: 1,
            h: vec![Complex64::ONE, Complex64::ONE],
            n_c: 4,
            o: vec![0],
            a: vec![0],
            b_conj: false,
            b_cas: false,
        },
        tier2: ExtensionSpec::NONE,
        window: Vec::new(),
        e2: Mat01::ones_column(1),
        e3: None,
        b_tran: false,
        stage2: StageSpec {
            m: 1,
            l: 1,
            q: 1,
            h: vec![Complex64::ONE],
            n_c: 4,
            o: vec![0],
            a: vec![0],
            b_conj: false,
            b_cas: false,
        },
        tier3: ExtensionSpec::NONE,
        k: 1,
        e4: StreamCombiner::Identity,
    };
    let modulator = Modulator::new(cfg).unwrap();
    assert_eq!(modulator.dims().stride, Some(4));
    let frames = vec![
        DataFrame {
            index: 0,
            streams: vec![Mat::from_fn(1, 1, |_, _| Complex64::ONE)],
        },
        DataFrame {
            index: 1,
            streams: vec![Mat::from_fn(1, 1, |_, _| Complex64::new(0.0, 2.0))],
        },
    ];
    let wave = modulator.modulate(&frames).unwrap();
    let j2 = Complex64::new(0.0, 2.0);
    let expect = [
        Complex64::ONE,
        Complex64::ONE,
        Complex64::ZERO,
        Complex64::ZERO,
        j2,
        j2,
        Complex64::ZERO,
        Complex64::ZERO,
    ];
    assert_eq!(wave.outputs[0].len(), 8);
    assert!(max_diff(&wave.outputs[0], &expect) < 1e-15);
}

#[test]
fn test_fractional_stride_rejects_multiframe_input() {
    let cfg = ModulatorConfig {
        n: 3,
        m_prime: 1,
        p: 1,
        e: vec![0],
        tier1: ExtensionSpec::NONE,
        stage1: StageSpec {
            m: 1,
            l: 1,
            q: 2,
            h: vec![Complex64::ONE],
            n_c: 4,
            o: vec![0],
            a: vec![0],
            b_conj: false,
            b_cas: false,
        },
        tier2: ExtensionSpec::NONE,
        window: Vec::new(),
        e2: Mat01::ones_column(1),
        e3: None,
        b_tran: false,
        stage2: StageSpec {
            m: 1,
            l: 1,
            q: 1,
            h: vec![Complex64::ONE],
            n_c: 2,
            o: vec![0],
            a: vec![0],
            b_conj: false,
            b_cas: false,
        },
        tier3: ExtensionSpec::NONE,
        k: 1,
        e4: StreamCombiner::Identity,
    };
    let modulator = Modulator::new(cfg).unwrap();
    assert_eq!(modulator.dims().stride, None);
    let frame = |i| DataFrame {
        index: i,
        streams: vec![Mat::from_fn(3, 1, |r, _| Complex64::new(r as f64, 0.0))],
    };
    assert!(modulator.modulate(&[frame(0)]).is_ok());
    let err = modulator.modulate(&[frame(0), frame(1)]).unwrap_err();
    assert_eq!(err, EngineError::StrideUnavailable);
}

#[test]
fn test_empty_window_equals_all_ones_window() {
    let with_ones = preset_ofdm().config;
    let mut without = with_ones.clone();
    without.window = Vec::new();
    let symbols = random_symbols(128, 99);
    let a = Modulator::new(with_ones)
        .unwrap()
        .modulate_symbols(&symbols)
        .unwrap();
    let b = Modulator::new(without)
        .unwrap()
        .modulate_symbols(&symbols)
        .unwrap();
    assert!(max_diff(&a.outputs[0], &b.outputs[0]) < 1e-15);
}

// --- circular-period divisibility semantics -------------------------------

/// The per-subchannel "modulated filter" convention: filter time indices
/// are wrapped into the circular period BEFORE the subchannel phase is
/// applied. This coincides with the operator-matrix form exactly when the
/// period is a multiple of the channel count.
fn modulated_filter_form(x: &Mat, spec: &StageSpec, stream: usize) -> Mat {
    let n_out = spec.n_c / spec.q;
    let sign = if spec.b_conj { -1.0 } else { 1.0 };
    Mat::from_fn(n_out, spec.m, |r, m| {
        let k = spec.q * r + spec.a[stream];
        let mut acc = Complex64::ZERO;
        for u in 0..x.rows() {
            let base = spec.l * u + spec.o[stream];
            let tau = (k + spec.n_c - base % spec.n_c) % spec.n_c;
            if tau < spec.h.len() {
                let ph = Complex64::cis(sign * TAU * (tau * m) as f64 / spec.m as f64);
                acc += x[(u, m)] * spec.h[tau] * ph;
            }
        }
        acc
    })
}

#[test]
fn test_wrapped_taps_follow_matrix_phase_not_modulated_filter() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_mat(4, 3, &mut rng);
    let spec = |n_c: usize| StageSpec {
        m: 3,
        l: 2,
        q: 1,
        h: vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.6, 0.2),
            Complex64::new(-0.3, 0.1),
            Complex64::new(0.1, -0.4),
        ],
        n_c,
        o: vec![1],
        a: vec![0],
        b_conj: false,
        b_cas: false,
    };
    let run = |n_c: usize| {
        stage_filter(
            &StageSignal {
                values: x.clone(),
                rate: mcmod_core::config::Rate::unit(),
                stream: 0,
            },
            &spec(n_c),
        )
        .unwrap()
        .values
    };

    // Period 8 is not a multiple of 3 channels and the last occupied
    // position (2*3+1 = 7) pushes taps past the wrap point: the two
    // conventions genuinely disagree.
    let engine8 = run(8);
    let folded8 = modulated_filter_form(&x, &spec(8), 0);
    assert!(
        engine8.max_abs_diff(&folded8) > 1e-3,
        "conventions should differ when the period is not a channel multiple"
    );

    // Period 9 wraps too (index 7 + 3 taps reaches 10), but 3 divides 9,
    // so the wrapped phase equals the true phase difference.
    let engine9 = run(9);
    let folded9 = modulated_filter_form(&x, &spec(9), 0);
    assert!(engine9.max_abs_diff(&folded9) < 1e-12);
}
